#pragma once

// Dataset ingestion (CSV, KMB1 binary), writers, and the synthetic generator.

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "exkm/core.hpp"

namespace exkm {

enum class DataFormat { csv, binary };

inline DataFormat parse_format(std::string_view s) {
  if (s == "csv") return DataFormat::csv;
  if (s == "binary" || s == "bin") return DataFormat::binary;
  throw Error("unknown data format '" + std::string(s) + "' (expected csv or binary)");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::uint64_t read_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

inline void write_u64_le(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> buf{};
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xff);
  os.write(buf.data(), 8);
}

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

inline double double_from_le(const unsigned char* p) {
  std::uint64_t bits = read_u64_le(p);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace detail

/// Parses comma-separated rows; blank lines are ignored.
inline DataMatrix parse_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    line = detail::trim(line);
    if (line.empty()) continue;

    std::size_t width = 0;
    while (true) {
      const auto comma = line.find(',');
      std::string_view field = detail::trim(line.substr(0, comma));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
        throw Error("parse error at line " + std::to_string(line_no) + ": bad number '" +
                    std::string(field) + "'");
      if (!std::isfinite(v))
        throw Error("parse error at line " + std::to_string(line_no) + ": non-finite value");
      values.push_back(v);
      ++width;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      dim = width;
    } else if (width != dim) {
      throw Error("parse error at line " + std::to_string(line_no) + ": expected " +
                  std::to_string(dim) + " fields, found " + std::to_string(width));
    }
    ++rows;
  }
  if (rows == 0) throw Error("empty dataset");
  return DataMatrix(rows, dim, std::move(values));
}

/// Parses the KMB1 format: magic, N (u64 LE), d (u64 LE), N*d f64 LE row-major.
inline DataMatrix parse_binary(std::span<const unsigned char> bytes) {
  if (bytes.empty()) throw Error("empty dataset");
  if (bytes.size() < 20 || std::memcmp(bytes.data(), "KMB1", 4) != 0)
    throw Error("binary dataset: missing KMB1 header");
  const std::uint64_t n = detail::read_u64_le(bytes.data() + 4);
  const std::uint64_t d = detail::read_u64_le(bytes.data() + 12);
  if (n == 0 || d == 0) throw Error("empty dataset");
  if (d > (bytes.size() - 20) / 8 / n || bytes.size() - 20 != n * d * 8)
    throw Error("binary dataset: payload size does not match header (N=" + std::to_string(n) +
                ", d=" + std::to_string(d) + ")");
  std::vector<double> values(n * d);
  const unsigned char* p = bytes.data() + 20;
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = detail::double_from_le(p + 8 * i);
  return DataMatrix(n, d, std::move(values));
}

inline DataMatrix load_dataset(const std::string& path, DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (format == DataFormat::csv) return parse_csv(buf);
  return parse_binary({reinterpret_cast<const unsigned char*>(buf.data()), buf.size()});
}

inline void write_binary(std::ostream& os, const DataMatrix& data) {
  os.write("KMB1", 4);
  detail::write_u64_le(os, data.n_samples());
  detail::write_u64_le(os, data.dim());
  for (double v : data.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof v);
    detail::write_u64_le(os, bits);
  }
}

/// Writes rows with round-trip precision.
inline void write_csv_rows(std::ostream& os, std::span<const double> values, std::size_t dim) {
  std::array<char, 32> buf{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), values[i]);
    os.write(buf.data(), ptr - buf.data());
    os.put((i + 1) % dim == 0 ? '\n' : ',');
  }
}

inline void save_dataset(const std::string& path, const DataMatrix& data, DataFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  if (format == DataFormat::binary)
    write_binary(out, data);
  else
    write_csv_rows(out, data.values(), data.dim());
}

/// Gaussian mixture: `modes` centres drawn uniformly in [-10, 10]^d, samples
/// are a uniformly chosen centre plus unit-variance isotropic noise.
struct GaussSpec {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t modes = 1;
  std::uint64_t seed = 0;
};

inline GaussSpec parse_gauss_spec(std::string_view s) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto c = s.find(':');
    parts.push_back(s.substr(0, c));
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  if (parts.size() != 5 || parts[0] != "gauss")
    throw Error("generator spec must be gauss:N:d:modes:seed");
  auto num = [](std::string_view f) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size())
      throw Error("generator spec: bad integer '" + std::string(f) + "'");
    return v;
  };
  GaussSpec g{num(parts[1]), num(parts[2]), num(parts[3]), num(parts[4])};
  if (g.n == 0 || g.dim == 0 || g.modes == 0) throw Error("generator spec: N, d and modes must be positive");
  return g;
}

inline DataMatrix generate_gauss(const GaussSpec& g) {
  std::mt19937_64 rng(g.seed);
  std::uniform_real_distribution<double> centre(-10.0, 10.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> centres(g.modes * g.dim);
  for (auto& c : centres) c = centre(rng);
  std::uniform_int_distribution<std::size_t> pick(0, g.modes - 1);
  std::vector<double> values(g.n * g.dim);
  for (std::size_t i = 0; i < g.n; ++i) {
    const std::size_t m = pick(rng);
    for (std::size_t t = 0; t < g.dim; ++t) values[i * g.dim + t] = centres[m * g.dim + t] + noise(rng);
  }
  return DataMatrix(g.n, g.dim, std::move(values));
}

inline DataMatrix generate_gauss(std::size_t n, std::size_t dim, std::size_t modes, std::uint64_t seed) {
  return generate_gauss(GaussSpec{n, dim, modes, seed});
}

}  // namespace exkm
