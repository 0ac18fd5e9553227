#pragma once

#include "exkm/core.hpp"
#include "exkm/engine.hpp"
#include "exkm/init.hpp"
#include "exkm/io.hpp"
#include "exkm/verify.hpp"
