// artiscene - articulated 3D scene graphs from point trajectories
//
// Error types shared by all modules. Every failure carries an ErrorKind so
// callers (the CLI in particular) can map it onto an exit code without
// string matching.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace artiscene {

enum class ErrorKind {
  kInvalidArgument,
  kShape,
  kBranchAmbiguity,
  kDegenerateTwist,
  kInsufficientMotion,
  kInsufficientPairs,
  kDegenerateMotion,
  kConvergence,
  kEmptyCluster,
  kUnmatchedCost,
  kInfeasible,
  kVersion,
  kValidation,
  kIo,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kBranchAmbiguity: return "branch-ambiguity";
    case ErrorKind::kDegenerateTwist: return "degenerate-twist";
    case ErrorKind::kInsufficientMotion: return "insufficient-motion";
    case ErrorKind::kInsufficientPairs: return "insufficient-pairs";
    case ErrorKind::kDegenerateMotion: return "degenerate-motion";
    case ErrorKind::kConvergence: return "convergence";
    case ErrorKind::kEmptyCluster: return "empty-cluster";
    case ErrorKind::kUnmatchedCost: return "unmatched-cost";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kVersion: return "version";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  /// True for failures of the estimation stage itself (as opposed to bad
  /// input files or arguments).
  [[nodiscard]] bool is_estimation_failure() const noexcept {
    switch (kind_) {
      case ErrorKind::kInsufficientMotion:
      case ErrorKind::kInsufficientPairs:
      case ErrorKind::kDegenerateMotion:
      case ErrorKind::kDegenerateTwist:
      case ErrorKind::kConvergence:
      case ErrorKind::kEmptyCluster:
      case ErrorKind::kUnmatchedCost:
      case ErrorKind::kInfeasible:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace artiscene
