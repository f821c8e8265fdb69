#pragma once

// Counter-style seeding: every (seed, stream, index) triple owns an
// independent engine, so results do not depend on how work is split.

#include <cstdint>
#include <random>

namespace twinfock {

enum class Stream : std::uint64_t {
  Jz = 1,
  Jperp = 2,
  CssJz = 3,
  CssJperp = 4,
  Bootstrap = 5,
  SectorDraw = 6,
  FitJitter = 7,
};

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t index);

// Standard normal via the engine; kept here so every module draws the same way.
double standard_normal(std::mt19937_64& eng);
double uniform01(std::mt19937_64& eng);

}  // namespace twinfock
