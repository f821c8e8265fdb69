#include "twinfock/rng.hpp"

#include <array>

namespace twinfock {

std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t index) {
  const auto s = static_cast<std::uint64_t>(stream);
  const std::array<std::uint32_t, 6> words{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(s),    static_cast<std::uint32_t>(s >> 32),
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

double standard_normal(std::mt19937_64& eng) {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(eng);
}

double uniform01(std::mt19937_64& eng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  return d(eng);
}

}  // namespace twinfock
