#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "bnmiss/network.hpp"

namespace bnmiss {

inline constexpr int kMissingCell = -1;

/// Rows of partial instantiations over the variables of a network. Column j
/// holds variable j; kMissingCell marks a missing value.
class IncompleteDataset {
 public:
  using Cells = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  IncompleteDataset() = default;
  IncompleteDataset(std::shared_ptr<const BayesianNetwork> network, Cells cells);

  const BayesianNetwork& network() const { return *network_; }
  const std::shared_ptr<const BayesianNetwork>& network_ptr() const { return network_; }

  std::int64_t rows() const { return cells_.rows(); }
  int columns() const { return static_cast<int>(cells_.cols()); }
  int operator()(std::int64_t row, int v) const { return cells_(row, v); }
  bool missing(std::int64_t row, int v) const { return cells_(row, v) == kMissingCell; }
  const Cells& cells() const { return cells_; }
  std::int64_t missing_count() const;

  /// Variables with at least one missing cell, plus declared ones, ascending.
  std::vector<int> partially_observed() const;
  std::vector<int> fully_observed() const;

  /// Marks variables as partially observed even when no cell is missing.
  void declare_partially_observed(std::vector<int> variables);
  const std::vector<int>& declared_partially_observed() const { return declared_; }

  bool operator==(const IncompleteDataset& other) const;

 private:
  std::shared_ptr<const BayesianNetwork> network_;
  Cells cells_;
  std::vector<int> declared_;
};

/// Fully observed dataset from a list of complete instantiations.
IncompleteDataset complete_dataset(std::shared_ptr<const BayesianNetwork> network,
                                   const std::vector<Instantiation>& rows);

}  // namespace bnmiss
