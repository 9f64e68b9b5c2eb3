#include "bnmiss/errors.hpp"

#include <sstream>

namespace bnmiss {

namespace {

std::string join_ids(const std::vector<int>& ids) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out << ' ';
    out << ids[i];
  }
  return out.str();
}

}  // namespace

CycleDetected::CycleDetected(std::vector<int> cycle)
    : Error("cycle detected through variables [" + join_ids(cycle) + "]"), cycle_(std::move(cycle)) {}

CptRowNotNormalized::CptRowNotNormalized(int variable, std::size_t row, double sum)
    : Error("CPT of variable " + std::to_string(variable) + " row " + std::to_string(row) +
            " sums to " + std::to_string(sum)),
      variable_(variable),
      row_(row),
      sum_(sum) {}

IncompleteInstantiation::IncompleteInstantiation(std::vector<int> missing)
    : Error("instantiation leaves variables [" + join_ids(missing) + "] unassigned"),
      missing_(std::move(missing)) {}

UnknownVariable::UnknownVariable(std::string name)
    : Error("unknown variable '" + name + "'"), name_(std::move(name)) {}

ParseError::ParseError(int line, int column, std::string message)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(std::move(message)) {}

UnknownStateLabel::UnknownStateLabel(std::int64_t row, std::string variable, std::string label)
    : Error("row " + std::to_string(row) + ": variable '" + variable + "' has no state '" + label + "'"),
      row_(row),
      variable_(std::move(variable)),
      label_(std::move(label)) {}

RaggedRow::RaggedRow(std::int64_t row)
    : Error("row " + std::to_string(row) + " has the wrong number of cells"), row_(row) {}

ZeroProbabilityInstance::ZeroProbabilityInstance(std::int64_t row)
    : Error("test row " + std::to_string(row) + " has probability zero"), row_(row) {}

}  // namespace bnmiss
