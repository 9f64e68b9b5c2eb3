#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bnmiss {

/// Base class of every domain error raised by the library. Usage errors on
/// function arguments are reported with std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CycleDetected : public Error {
 public:
  explicit CycleDetected(std::vector<int> cycle);
  const std::vector<int>& cycle() const { return cycle_; }

 private:
  std::vector<int> cycle_;
};

class CptRowNotNormalized : public Error {
 public:
  CptRowNotNormalized(int variable, std::size_t row, double sum);
  int variable() const { return variable_; }
  std::size_t row() const { return row_; }
  double sum() const { return sum_; }

 private:
  int variable_;
  std::size_t row_;
  double sum_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IncompleteInstantiation : public Error {
 public:
  explicit IncompleteInstantiation(std::vector<int> missing);
  const std::vector<int>& missing() const { return missing_; }

 private:
  std::vector<int> missing_;
};

class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(std::string name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Syntax or resolution error in a text document. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(int line, int column, std::string message);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

class UnknownStateLabel : public Error {
 public:
  UnknownStateLabel(std::int64_t row, std::string variable, std::string label);
  std::int64_t row() const { return row_; }
  const std::string& variable() const { return variable_; }
  const std::string& label() const { return label_; }

 private:
  std::int64_t row_;
  std::string variable_;
  std::string label_;
};

class RaggedRow : public Error {
 public:
  explicit RaggedRow(std::int64_t row);
  std::int64_t row() const { return row_; }

 private:
  std::int64_t row_;
};

/// A conditional query whose conditioning event never occurs in the data.
class ZeroSupport : public Error {
 public:
  using Error::Error;
};

class NotEnoughObservedVariables : public Error {
 public:
  using Error::Error;
};

class GroundSetTooLarge : public Error {
 public:
  using Error::Error;
};

class EmptyCandidates : public Error {
 public:
  using Error::Error;
};

class ScopeMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateMechanism : public Error {
 public:
  using Error::Error;
};

class UnsupportedFamily : public Error {
 public:
  using Error::Error;
};

class ZeroProbabilityEvidence : public Error {
 public:
  using Error::Error;
};

class StateSpaceTooLarge : public Error {
 public:
  using Error::Error;
};

class ZeroProbabilityInstance : public Error {
 public:
  explicit ZeroProbabilityInstance(std::int64_t row);
  std::int64_t row() const { return row_; }

 private:
  std::int64_t row_;
};

class StructureMismatch : public Error {
 public:
  using Error::Error;
};

/// EM ran out of time before completing a single iteration.
class DeadlineBeforeFirstIteration : public Error {
 public:
  using Error::Error;
};

}  // namespace bnmiss
