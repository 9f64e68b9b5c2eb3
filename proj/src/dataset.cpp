#include "bnmiss/dataset.hpp"

#include <algorithm>

namespace bnmiss {

IncompleteDataset::IncompleteDataset(std::shared_ptr<const BayesianNetwork> network, Cells cells)
    : network_(std::move(network)), cells_(std::move(cells)) {
  if (!network_) throw std::invalid_argument("dataset needs a network");
  if (cells_.cols() != network_->size()) {
    if (cells_.rows() == 0) {
      cells_.resize(0, network_->size());
    } else {
      throw DimensionMismatch("dataset has " + std::to_string(cells_.cols()) + " columns, network has " +
                              std::to_string(network_->size()) + " variables");
    }
  }
  for (Eigen::Index r = 0; r < cells_.rows(); ++r)
    for (Eigen::Index v = 0; v < cells_.cols(); ++v) {
      const int s = cells_(r, v);
      if (s != kMissingCell && (s < 0 || s >= network_->cardinality(static_cast<int>(v))))
        throw DimensionMismatch("cell (" + std::to_string(r) + ", " + std::to_string(v) + ") out of range");
    }
}

std::int64_t IncompleteDataset::missing_count() const { return (cells_.array() == kMissingCell).count(); }

std::vector<int> IncompleteDataset::partially_observed() const {
  std::vector<int> out;
  for (int v = 0; v < columns(); ++v) {
    const bool any_missing = (cells_.col(v).array() == kMissingCell).any();
    if (any_missing || std::find(declared_.begin(), declared_.end(), v) != declared_.end()) out.push_back(v);
  }
  return out;
}

std::vector<int> IncompleteDataset::fully_observed() const {
  const auto xm = partially_observed();
  std::vector<int> out;
  for (int v = 0; v < columns(); ++v)
    if (!std::binary_search(xm.begin(), xm.end(), v)) out.push_back(v);
  return out;
}

void IncompleteDataset::declare_partially_observed(std::vector<int> variables) {
  for (int v : variables)
    if (v < 0 || v >= columns()) throw std::invalid_argument("declared variable out of range");
  std::sort(variables.begin(), variables.end());
  variables.erase(std::unique(variables.begin(), variables.end()), variables.end());
  declared_ = std::move(variables);
}

bool IncompleteDataset::operator==(const IncompleteDataset& other) const {
  if (!network_ || !other.network_) return network_ == other.network_;
  return network_->variables() == other.network_->variables() && cells_.rows() == other.cells_.rows() &&
         cells_.cols() == other.cells_.cols() && cells_ == other.cells_;
}

IncompleteDataset complete_dataset(std::shared_ptr<const BayesianNetwork> network,
                                   const std::vector<Instantiation>& rows) {
  IncompleteDataset::Cells cells(static_cast<Eigen::Index>(rows.size()), network->size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int v = 0; v < network->size(); ++v) cells(static_cast<Eigen::Index>(r), v) = rows[r][v];
  return IncompleteDataset(std::move(network), std::move(cells));
}

}  // namespace bnmiss
