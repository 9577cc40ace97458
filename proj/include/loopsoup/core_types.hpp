#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace loopsoup {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Site path as a list of state-space indices.
using Path = std::vector<int>;

enum class ErrorKind {
  InvalidMatrix,
  NotAcceptable,
  NumericallySingular,
  UnknownSite,
  DivisionByZero,
  InvalidPath,
  LoopBudgetExceeded,
  Disconnected,
  NumericalFailure,
  TooLarge,
  NotPositive,
  InvalidShape,
  BranchAmbiguity,
  OutOfDomain,
  NotPositiveDefinite,
  InvalidInput,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Ordered, labeled finite state space.
class StateSpace {
 public:
  StateSpace() = default;
  explicit StateSpace(std::vector<std::string> labels);

  /// Labels "0", "1", ..., "n-1".
  static StateSpace indexed(std::size_t n);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(int index) const { return labels_.at(static_cast<std::size_t>(index)); }

  /// Throws UnknownSite.
  int index(const std::string& label) const;
  bool contains(const std::string& label) const { return lookup_.count(label) != 0; }

  bool operator==(const StateSpace& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> lookup_;
};

}  // namespace loopsoup
