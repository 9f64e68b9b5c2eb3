#include "bnmiss/lattice.hpp"

#include <stdexcept>
#include <string>

#include "bnmiss/errors.hpp"

namespace bnmiss {

FactorizationLattice::FactorizationLattice(std::vector<int> ground) : ground_(std::move(ground)) {
  if (ground_.size() > static_cast<std::size_t>(kMaxLatticeGround))
    throw GroundSetTooLarge("lattice ground set has " + std::to_string(ground_.size()) + " variables, limit is " +
                            std::to_string(kMaxLatticeGround));
  const std::uint32_t count = 1u << ground_.size();
  nodes_.resize(count);
  offsets_.assign(count + 1, 0);
  for (std::uint32_t node = 0; node < count; ++node) {
    nodes_[node] = node;
    offsets_[node] = edges_.size();
    for (int j = 0; j < k(); ++j) {
      const std::uint32_t bit = 1u << j;
      if (node & bit) edges_.push_back({node ^ bit, node, j});
    }
  }
  offsets_[count] = edges_.size();
}

FactorizationLattice build_lattice(std::vector<int> ground) {
  if (ground.empty()) throw std::invalid_argument("lattice ground set must not be empty");
  return FactorizationLattice(std::move(ground));
}

}  // namespace bnmiss
