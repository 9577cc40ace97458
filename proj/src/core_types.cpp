#include "loopsoup/core_types.hpp"

#include <set>

namespace loopsoup {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::NotAcceptable: return "NotAcceptable";
    case ErrorKind::NumericallySingular: return "NumericallySingular";
    case ErrorKind::UnknownSite: return "UnknownSite";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::InvalidPath: return "InvalidPath";
    case ErrorKind::LoopBudgetExceeded: return "LoopBudgetExceeded";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::InvalidShape: return "InvalidShape";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) {
    throw Error(ErrorKind::InvalidInput, "state space must have at least one site");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!lookup_.emplace(labels_[i], static_cast<int>(i)).second) {
      throw Error(ErrorKind::InvalidInput, "duplicate site label '" + labels_[i] + "'");
    }
  }
}

StateSpace StateSpace::indexed(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return StateSpace(std::move(labels));
}

int StateSpace::index(const std::string& label) const {
  auto it = lookup_.find(label);
  if (it == lookup_.end()) throw Error(ErrorKind::UnknownSite, "no site labeled '" + label + "'");
  return it->second;
}

}  // namespace loopsoup
