#pragma once

#include "pcrlb/linalg.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <cstdint>
#include <random>

namespace pcrlb {

using Engine = std::mt19937_64;

// Named substream families. Every random draw in the library comes from an
// engine keyed by (master seed, family, index, sub-index), so results do not
// depend on how work is split across threads.
enum class Stream : std::uint64_t {
  prior = 1,
  simulation = 2,
  identify = 3,
  reference = 4,
  test = 99,
};

Engine substream(std::uint64_t master_seed, Stream family, std::uint64_t index = 0,
                 std::uint64_t sub_index = 0);

inline double standard_normal(Engine& engine) {
  boost::random::normal_distribution<double> dist;
  return dist(engine);
}

inline double uniform01(Engine& engine) {
  boost::random::uniform_01<double> dist;
  return dist(engine);
}

void fill_standard_normal(Engine& engine, Eigen::Ref<Matrix> out);

}  // namespace pcrlb
