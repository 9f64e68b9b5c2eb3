#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bnmiss/dataset.hpp"
#include "bnmiss/network.hpp"

namespace bnmiss {

/// Mechanism R_X of one partially observed variable. Row u of `table` holds
/// (Pr(ob | u), Pr(unob | u)) for the parent instantiation u in mixed-radix order.
struct MechanismSpec {
  int variable = 0;
  std::vector<int> parents;
  Cpt table;

  bool operator==(const MechanismSpec& other) const {
    return variable == other.variable && parents == other.parents && table.rows() == other.table.rows() &&
           table.cols() == other.table.cols() && table == other.table;
  }
};

/// Base network plus one mechanism per partially observed variable and an
/// optional informed set W_o.
class MissingnessGraph {
 public:
  MissingnessGraph() = default;
  MissingnessGraph(std::shared_ptr<const BayesianNetwork> network, std::vector<MechanismSpec> mechanisms,
                   std::optional<std::vector<int>> informed = std::nullopt);

  const BayesianNetwork& network() const { return *network_; }
  const std::shared_ptr<const BayesianNetwork>& network_ptr() const { return network_; }
  /// Sorted by variable id.
  const std::vector<MechanismSpec>& mechanisms() const { return mechanisms_; }
  const MechanismSpec* mechanism(int variable) const;
  const std::optional<std::vector<int>>& informed() const { return informed_; }

  std::vector<int> partially_observed() const;
  std::vector<int> observed() const;

  bool operator==(const MissingnessGraph& other) const;

 private:
  std::shared_ptr<const BayesianNetwork> network_;
  std::vector<MechanismSpec> mechanisms_;
  std::optional<std::vector<int>> informed_;
};

/// Throws DimensionMismatch or std::invalid_argument on malformed graphs.
void validate(const MissingnessGraph& graph);

enum class MechanismClass { kMcar, kMar, kMnar };

const char* to_string(MechanismClass c);
MechanismClass classify(const MissingnessGraph& graph);

struct BetaShape {
  double alpha = 1.0;
  double beta = 1.0;
};

struct Simulation {
  IncompleteDataset dataset;
  MissingnessGraph graph;
};

/// ceil(m * n), guarded against rounding of products such as 0.3 * 10.
int partially_observed_count(double m, int n);

Simulation simulate_mcar(std::shared_ptr<const BayesianNetwork> network, double m, double q, std::uint64_t seed,
                         std::int64_t rows);
Simulation simulate_mar(std::shared_ptr<const BayesianNetwork> network, double m, int p, BetaShape beta,
                        std::uint64_t seed, std::int64_t rows);
Simulation simulate_informed_mar(std::shared_ptr<const BayesianNetwork> network, double m, int p, BetaShape beta,
                                 int s, std::uint64_t seed, std::int64_t rows);
Simulation simulate_mnar_cross(std::shared_ptr<const BayesianNetwork> network, int x, int y, BetaShape beta,
                               std::uint64_t seed, std::int64_t rows);

/// Samples complete rows from the base network and hides cells according to
/// the mechanisms. Rows come from one stream, so a shorter run is a prefix.
IncompleteDataset sample_incomplete(const MissingnessGraph& graph, std::uint64_t seed, std::int64_t rows);

}  // namespace bnmiss
