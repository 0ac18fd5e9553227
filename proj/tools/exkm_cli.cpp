// exkm: run or benchmark the exact k-means family over a dataset.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "exkm/exkm.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitAlgorithm = 2;
constexpr int kExitMismatch = 3;

struct Source {
  std::string data;
  std::string format = "csv";
  std::string gen;

  exkm::DataMatrix load() const {
    if (!gen.empty()) {
      if (!data.empty()) throw exkm::Error("give either --data or --gen, not both");
      return exkm::generate_gauss(exkm::parse_gauss_spec(gen));
    }
    if (data.empty()) throw exkm::Error("--data or --gen is required");
    return exkm::load_dataset(data, exkm::parse_format(format));
  }
};

void add_source(CLI::App* cmd, Source& src) {
  cmd->add_option("--data", src.data, "dataset path");
  cmd->add_option("--format", src.format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));
  cmd->add_option("--gen", src.gen, "generate instead of loading: gauss:N:d:modes:seed");
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

json round_json(const exkm::RoundStats& r) {
  return {{"round", r.round},
          {"dist_calcs_assign", r.dist_calcs_assign},
          {"dist_calcs_centroid", r.dist_calcs_centroid},
          {"dist_calcs_init", r.dist_calcs_init},
          {"changes", r.changes}};
}

json stats_json(const exkm::RunConfig& cfg, const exkm::RunResult& r) {
  json per_round = json::array();
  for (const auto& s : r.per_round_stats) per_round.push_back(round_json(s));
  const exkm::RoundStats t = r.totals();
  return {{"algorithm", cfg.algorithm},
          {"k", cfg.k},
          {"seed", cfg.seed},
          {"rounds", r.rounds_executed},
          {"converged", r.converged},
          {"per_round", per_round},
          {"totals",
           {{"dist_calcs_assign", t.dist_calcs_assign},
            {"dist_calcs_centroid", t.dist_calcs_centroid},
            {"dist_calcs_init", t.dist_calcs_init},
            {"changes", t.changes}}},
          {"wall_ms", r.wall_ms}};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw exkm::Error("cannot write '" + path + "'");
  return out;
}

int cmd_run(const Source& src, exkm::RunConfig cfg, const std::string& out_c, const std::string& out_a,
            const std::string& out_s) {
  cfg.validate();
  const exkm::DataMatrix data = src.load();
  const exkm::RunResult r = exkm::run(cfg, data);

  if (!out_c.empty()) {
    auto os = open_out(out_c);
    exkm::write_csv_rows(os, r.final_centroids.centroids, r.final_centroids.dim);
  }
  if (!out_a.empty()) {
    auto os = open_out(out_a);
    for (auto a : r.final_assignments) os << a << '\n';
  }
  const json stats = stats_json(cfg, r);
  if (!out_s.empty()) {
    auto os = open_out(out_s);
    os << stats.dump(2) << '\n';
  }
  std::cerr << cfg.algorithm << ": " << r.rounds_executed << " rounds, "
            << (r.converged ? "converged" : "not converged") << ", " << r.totals().dist_calcs_assign
            << " assignment distances, " << std::fixed << std::setprecision(1) << r.wall_ms << " ms\n";
  return kExitOk;
}

struct Tally {
  double wall = 0, assign = 0, total = 0, rounds = 0;
  std::size_t n = 0;
};

int cmd_bench(const Source& src, exkm::RunConfig base, const std::string& algos, const std::string& seeds,
              const std::string& json_out) {
  const auto names = split(algos);
  const auto seed_list = split(seeds);
  if (names.empty()) throw exkm::Error("--algorithms is empty");
  if (seed_list.empty()) throw exkm::Error("--seeds is empty");
  for (const auto& a : names) exkm::make_strategy(a);
  base.validate();
  const exkm::DataMatrix data = src.load();

  std::map<std::string, Tally> tally;
  json runs = json::array();
  for (const auto& s : seed_list) {
    exkm::RunConfig cfg = base;
    cfg.seed = std::stoull(s);
    std::optional<exkm::RunResult> first;
    for (const auto& a : names) {
      cfg.algorithm = a;
      exkm::RunResult r = exkm::run(cfg, data);
      auto& t = tally[a];
      t.wall += r.wall_ms;
      t.assign += static_cast<double>(r.totals().dist_calcs_assign);
      t.total += static_cast<double>(r.totals().total_dist_calcs());
      t.rounds += static_cast<double>(r.rounds_executed);
      ++t.n;
      runs.push_back(stats_json(cfg, r));
      if (!first) {
        first = std::move(r);
        continue;
      }
      if (r.rounds_executed != first->rounds_executed || r.final_assignments != first->final_assignments) {
        std::cerr << "trajectory mismatch for seed " << s << ": " << names.front() << " took "
                  << first->rounds_executed << " rounds, " << a << " took " << r.rounds_executed << "\n";
        return kExitMismatch;
      }
    }
  }

  const Tally& ref = tally[names.front()];
  auto ratio = [](double x, double y) { return y > 0 ? x / y : 0.0; };
  std::cout << std::left << std::setw(9) << "algo" << std::right << std::setw(8) << "rounds" << std::setw(12)
            << "wall_ms" << std::setw(16) << "assign" << std::setw(16) << "total" << std::setw(8) << "q_t"
            << std::setw(8) << "q_a" << std::setw(8) << "q_au" << "\n";
  json table = json::array();
  for (const auto& a : names) {
    const Tally& t = tally[a];
    const double n = static_cast<double>(t.n);
    const double qt = ratio(t.wall, ref.wall), qa = ratio(t.assign, ref.assign), qau = ratio(t.total, ref.total);
    std::cout << std::left << std::setw(9) << a << std::right << std::fixed << std::setprecision(1) << std::setw(8)
              << t.rounds / n << std::setw(12) << t.wall / n << std::setprecision(0) << std::setw(16)
              << t.assign / n << std::setw(16) << t.total / n << std::setprecision(3) << std::setw(8) << qt
              << std::setw(8) << qa << std::setw(8) << qau << "\n";
    table.push_back({{"algorithm", a},
                     {"mean_rounds", t.rounds / n},
                     {"mean_wall_ms", t.wall / n},
                     {"mean_dist_calcs_assign", t.assign / n},
                     {"mean_dist_calcs_total", t.total / n},
                     {"q_t", qt},
                     {"q_a", qa},
                     {"q_au", qau}});
  }
  if (!json_out.empty()) {
    auto os = open_out(json_out);
    os << json{{"reference", names.front()}, {"summary", table}, {"runs", runs}}.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_gen(const std::string& spec, const std::string& out, const std::string& format) {
  const exkm::DataMatrix data = exkm::generate_gauss(exkm::parse_gauss_spec(spec));
  exkm::save_dataset(out, data, exkm::parse_format(format));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact k-means with bound-based acceleration"};
  app.require_subcommand(1);

  Source src;
  exkm::RunConfig cfg;
  std::string out_c, out_a, out_s;
  auto* run = app.add_subcommand("run", "cluster a dataset with one algorithm");
  add_source(run, src);
  run->add_option("--k", cfg.k, "number of clusters")->required();
  run->add_option("--seed", cfg.seed, "initialisation seed");
  run->add_option("--algorithm", cfg.algorithm, exkm::algorithm_list());
  run->add_option("--max-rounds", cfg.max_rounds, "round limit (default 1000)");
  run->add_option("--threads", cfg.n_workers, "worker threads (default 1)");
  run->add_option("--groups", cfg.group_count_override, "Yinyang group count (default k/10)");
  run->add_option("--out-centroids", out_c, "centroid CSV (k rows)");
  run->add_option("--out-assignments", out_a, "one cluster index per line");
  run->add_option("--stats", out_s, "per-round statistics JSON");

  std::string algos = "sta,exp", seeds = "0", bench_json;
  auto* bench = app.add_subcommand("bench", "compare algorithms over several seeds");
  add_source(bench, src);
  bench->add_option("--k", cfg.k, "number of clusters")->required();
  bench->add_option("--algorithms", algos, "comma-separated; ratios are against the first");
  bench->add_option("--seeds", seeds, "comma-separated seeds");
  bench->add_option("--max-rounds", cfg.max_rounds, "round limit (default 1000)");
  bench->add_option("--threads", cfg.n_workers, "worker threads (default 1)");
  bench->add_option("--json", bench_json, "write the summary and every run as JSON");

  std::string spec, gen_out, gen_format = "binary";
  auto* gen = app.add_subcommand("gen", "write a Gaussian-mixture dataset");
  gen->add_option("spec", spec, "gauss:N:d:modes:seed")->required();
  gen->add_option("--out", gen_out, "output path")->required();
  gen->add_option("--format", gen_format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*run) return cmd_run(src, cfg, out_c, out_a, out_s);
    if (*bench) return cmd_bench(src, cfg, algos, seeds, bench_json);
    return cmd_gen(spec, gen_out, gen_format);
  } catch (const exkm::UnknownAlgorithm& e) {
    std::cerr << "error: " << e.what() << "; valid: " << exkm::algorithm_list() << "\n";
    return kExitAlgorithm;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
