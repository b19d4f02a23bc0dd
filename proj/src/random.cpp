#include "pcrlb/random.hpp"

#include <array>

namespace pcrlb {

Engine substream(std::uint64_t master_seed, Stream family, std::uint64_t index, std::uint64_t sub_index) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  const auto tag = static_cast<std::uint64_t>(family);
  std::seed_seq seq{lo(master_seed), hi(master_seed), lo(tag),       hi(tag),
                    lo(index),       hi(index),       lo(sub_index), hi(sub_index)};
  return Engine(seq);
}

void fill_standard_normal(Engine& engine, Eigen::Ref<Matrix> out) {
  boost::random::normal_distribution<double> dist;
  for (Index j = 0; j < out.cols(); ++j)
    for (Index i = 0; i < out.rows(); ++i) out(i, j) = dist(engine);
}

}  // namespace pcrlb
