// artiscene - articulated 3D scene graphs from point trajectories
//
// Articulation-to-object assignment: every articulation takes exactly one
// object, every object at most one articulation, and chosen objects pay a
// pairwise overlap penalty. Solved exactly by depth-first branch and bound.

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "artiscene/errors.hpp"

namespace artiscene {

struct MatchProblem {
  Eigen::MatrixXd p;  // articulations x objects, >= 0, +inf = not a candidate
  Eigen::MatrixXd q;  // objects x objects overlap in [0, 1], symmetric
  double lambda = 1.0;
};

struct BipSolution {
  std::vector<int> object_of;  // per articulation
  double objective = 0.0;
  long nodes = 0;
};

inline void validate(const MatchProblem& mp) {
  const auto a = mp.p.rows();
  const auto o = mp.p.cols();
  if (mp.q.rows() != o || mp.q.cols() != o) {
    fail(ErrorKind::kShape, "match problem: q must be " + std::to_string(o) + "x" +
                                std::to_string(o));
  }
  if (!(mp.lambda >= 0.0) || !std::isfinite(mp.lambda)) {
    fail(ErrorKind::kInvalidArgument, "match problem: lambda must be finite and >= 0");
  }
  for (Eigen::Index i = 0; i < a; ++i) {
    for (Eigen::Index j = 0; j < o; ++j) {
      const double v = mp.p(i, j);
      if (std::isnan(v) || v < 0.0) fail(ErrorKind::kInvalidArgument, "match problem: p must be >= 0");
    }
  }
  for (Eigen::Index j = 0; j < o; ++j) {
    for (Eigen::Index k = 0; k < o; ++k) {
      const double v = mp.q(j, k);
      if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::kInvalidArgument, "match problem: q outside [0,1]");
      if (std::abs(v - mp.q(k, j)) > 1e-12) fail(ErrorKind::kInvalidArgument, "match problem: q not symmetric");
    }
  }
}

/// Objective of an assignment; overlap counts each unordered pair of chosen
/// objects once.
inline double bip_objective(const MatchProblem& mp, const std::vector<int>& object_of) {
  double total = 0.0;
  for (std::size_t i = 0; i < object_of.size(); ++i) {
    total += mp.p(static_cast<Eigen::Index>(i), object_of[i]);
  }
  for (std::size_t a = 0; a < object_of.size(); ++a) {
    for (std::size_t b = a + 1; b < object_of.size(); ++b) {
      total += mp.lambda * mp.q(object_of[a], object_of[b]);
    }
  }
  return total;
}

/// Assignment constraints: one finite-cost object per articulation, no
/// object used twice.
inline bool satisfies_constraints(const MatchProblem& mp, const std::vector<int>& object_of) {
  if (static_cast<Eigen::Index>(object_of.size()) != mp.p.rows()) return false;
  std::vector<char> used(static_cast<std::size_t>(mp.p.cols()), 0);
  for (std::size_t i = 0; i < object_of.size(); ++i) {
    const int j = object_of[i];
    if (j < 0 || j >= mp.p.cols()) return false;
    if (used[j]) return false;
    used[j] = 1;
    if (!std::isfinite(mp.p(static_cast<Eigen::Index>(i), j))) return false;
  }
  return true;
}

inline BipSolution solve_bip(const MatchProblem& mp) {
  validate(mp);
  const int na = static_cast<int>(mp.p.rows());
  const int no = static_cast<int>(mp.p.cols());
  if (no < na) {
    fail(ErrorKind::kInfeasible, "solve_bip: " + std::to_string(na) + " articulations but only " +
                                     std::to_string(no) + " objects");
  }
  BipSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<int> cur(static_cast<std::size_t>(na), -1);
  std::vector<char> used(static_cast<std::size_t>(no), 0);
  long nodes = 0;

  auto bound_rest = [&](int from) {
    double lb = 0.0;
    for (int i = from; i < na; ++i) {
      double m = std::numeric_limits<double>::infinity();
      for (int j = 0; j < no; ++j) {
        if (!used[j]) m = std::min(m, mp.p(i, j));
      }
      lb += m;
    }
    return lb;
  };

  auto dfs = [&](auto&& self, int i, double partial) -> void {
    ++nodes;
    if (i == na) {
      if (partial < best.objective) {
        best.objective = partial;
        best.object_of = cur;
      }
      return;
    }
    for (int j = 0; j < no; ++j) {
      if (used[j] || !std::isfinite(mp.p(i, j))) continue;
      double add = mp.p(i, j);
      for (int a = 0; a < i; ++a) add += mp.lambda * mp.q(cur[a], j);
      const double next = partial + add;
      used[j] = 1;
      cur[i] = j;
      if (next + bound_rest(i + 1) < best.objective) self(self, i + 1, next);
      used[j] = 0;
      cur[i] = -1;
    }
  };
  dfs(dfs, 0, 0.0);
  best.nodes = nodes;
  if (!std::isfinite(best.objective)) {
    fail(ErrorKind::kInfeasible, "solve_bip: no assignment with finite cost");
  }
  if (!satisfies_constraints(mp, best.object_of)) {
    fail(ErrorKind::kInfeasible, "solve_bip: internal error, solution violates constraints");
  }
  return best;
}

/// Greedy baseline: each articulation in turn takes its cheapest unused
/// object, ignoring overlap.
inline BipSolution solve_greedy(const MatchProblem& mp) {
  validate(mp);
  const int na = static_cast<int>(mp.p.rows());
  const int no = static_cast<int>(mp.p.cols());
  BipSolution out;
  out.object_of.assign(static_cast<std::size_t>(na), -1);
  std::vector<char> used(static_cast<std::size_t>(no), 0);
  for (int i = 0; i < na; ++i) {
    int arg = -1;
    for (int j = 0; j < no; ++j) {
      if (used[j] || !std::isfinite(mp.p(i, j))) continue;
      if (arg < 0 || mp.p(i, j) < mp.p(i, arg)) arg = j;
    }
    if (arg < 0) fail(ErrorKind::kInfeasible, "solve_greedy: articulation without a free object");
    used[arg] = 1;
    out.object_of[i] = arg;
  }
  out.objective = bip_objective(mp, out.object_of);
  return out;
}

}  // namespace artiscene
