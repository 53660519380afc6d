// artiscene - articulated 3D scene graphs from point trajectories
//
// Articulation estimation from a filtered 3D track cluster: secant sampling,
// the cosine-median prior, the regularized twist fit over the twist and the
// per-frame configurations, type assignment and motion-mode inference.
//
// Parameter vector layout used by the fit: x = [u (6), theta_1 .. theta_n]
// where the twist is xi = u / |u| and theta of the anchor frame is fixed to
// zero. The fit runs in coordinates centered on the cluster centroid.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "artiscene/errors.hpp"
#include "artiscene/se3.hpp"
#include "artiscene/tracks.hpp"

namespace artiscene {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

struct SecantSet {
  std::vector<Vec3> vectors;
  std::vector<int> end_times;
  std::vector<int> source_track;

  [[nodiscard]] std::size_t size() const { return vectors.size(); }
};

struct PriorWeights {
  double eta = 1.0;
  double lambda_pris = 0.5;
  double lambda_rev = 0.5;
};

enum class ModeValue { kOpening, kClosing, kOpeningClosing, kClosingOpening, kUnknown };

inline std::string to_string(ModeValue m) {
  switch (m) {
    case ModeValue::kOpening: return "OPENING";
    case ModeValue::kClosing: return "CLOSING";
    case ModeValue::kOpeningClosing: return "OPENING-CLOSING";
    case ModeValue::kClosingOpening: return "CLOSING-OPENING";
    case ModeValue::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

inline ModeValue mode_from_string(const std::string& s) {
  if (s == "OPENING") return ModeValue::kOpening;
  if (s == "CLOSING") return ModeValue::kClosing;
  if (s == "OPENING-CLOSING") return ModeValue::kOpeningClosing;
  if (s == "CLOSING-OPENING") return ModeValue::kClosingOpening;
  if (s == "UNKNOWN") return ModeValue::kUnknown;
  fail(ErrorKind::kValidation, "unknown mode '" + s + "'");
}

struct ModeToken {
  ModeValue value = ModeValue::kUnknown;
  bool consistent = true;
  /// Set when no hint was given and the direction follows from the sign
  /// convention of theta alone.
  bool convention_dependent = false;
  std::string shape;  // "up", "down", "up-down", "down-up", "flat" or "mixed"
};

struct ArticulationEstimate {
  Twist twist;
  std::vector<double> thetas;
  std::vector<int> frames;  // sequence frame of each theta
  AxisKind kind = AxisKind::kRevolute;
  ScrewAxis axis;
  double residual_rms = 0.0;
  ModeToken mode;
  PriorWeights prior;
  Vec3 centroid = Vec3::Zero();  // mean cluster position in the anchor frame
  int iterations = 0;
  double cost = 0.0;
};

enum class TypeRule {
  kSweptRotation,  // REVOLUTE iff |omega| * range(theta) >= min_rotation_deg
  kPitchRatio,     // PRISMATIC iff |omega| / |v| < pitch_cutoff (world frame)
};

struct EstimatorOptions {
  double alpha = 1.0;
  double eta_star = 0.994;
  double sigmoid_k = 200.0;
  int max_iterations = 200;
  double tolerance = 1e-10;
  TypeRule type_rule = TypeRule::kSweptRotation;
  double min_rotation_deg = 5.0;
  double pitch_cutoff = 1.0;
  int secant_stride = 3;
  double min_secant_norm = 0.03;
  std::size_t max_secants = 2000;
  /// When set, theta grows in the direction that brings the part closer to
  /// this point (normally the camera position).
  std::optional<Vec3> viewpoint;
};

// --------------------------------------------------------------------------
// Prior

inline SecantSet sample_secants(const PointTracks3D& tracks, int stride = 3,
                                double min_norm = 0.03, std::size_t max_secants = 2000) {
  if (tracks.tracks == 0 || tracks.frames == 0) {
    fail(ErrorKind::kInvalidArgument, "sample_secants: empty cluster");
  }
  if (stride < 1) fail(ErrorKind::kInvalidArgument, "sample_secants: stride must be >= 1");
  SecantSet all;
  for (int f = 0; f < tracks.tracks; ++f) {
    int t0 = -1;
    for (int t = 0; t < tracks.frames; ++t) {
      if (!tracks.visible(t, f)) continue;
      if (t0 < 0) {
        t0 = t;
        continue;
      }
      if ((t - t0) % stride != 0) continue;
      const Vec3 x = tracks.at(t, f) - tracks.at(t0, f);
      if (x.norm() < min_norm) continue;
      all.vectors.push_back(x);
      all.end_times.push_back(t);
      all.source_track.push_back(f);
    }
  }
  if (all.size() < 2) {
    fail(ErrorKind::kInsufficientMotion,
         "sample_secants: " + std::to_string(all.size()) + " secants above " +
             std::to_string(min_norm) + " m");
  }
  if (max_secants < 2 || all.size() <= max_secants) return all;
  // Evenly spaced deterministic subset.
  SecantSet out;
  const double step = static_cast<double>(all.size()) / static_cast<double>(max_secants);
  for (std::size_t i = 0; i < max_secants; ++i) {
    const auto j = static_cast<std::size_t>(std::floor(i * step));
    out.vectors.push_back(all.vectors[j]);
    out.end_times.push_back(all.end_times[j]);
    out.source_track.push_back(all.source_track[j]);
  }
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Median pairwise cosine over secants that do not end at the same frame,
/// gated through a sigmoid centered at eta_star.
inline PriorWeights cosine_prior(const SecantSet& secants, double eta_star = 0.994,
                                 double k = 200.0) {
  const std::size_t m = secants.size();
  std::vector<Vec3> unit(m);
  for (std::size_t i = 0; i < m; ++i) unit[i] = secants.vectors[i].normalized();
  std::vector<double> cosines;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (secants.end_times[i] == secants.end_times[j]) continue;
      cosines.push_back(unit[i].dot(unit[j]));
    }
  }
  if (cosines.empty()) {
    fail(ErrorKind::kInsufficientPairs, "cosine_prior: no secant pair with distinct end times");
  }
  PriorWeights w;
  w.eta = quantile(std::move(cosines), 0.5);
  w.lambda_pris = sigmoid(k * (w.eta - eta_star));
  w.lambda_rev = 1.0 - w.lambda_pris;
  return w;
}

// --------------------------------------------------------------------------
// Residual model

/// Data and regularizer layout of one fit. Observation pairs link
/// consecutive visible samples of the same track.
struct TwistProblem {
  std::vector<Vec3> from;       // p_a, centered
  std::vector<Vec3> to;         // p_b, centered
  std::vector<int> param_from;  // parameter index of theta_a, -1 for the anchor
  std::vector<int> param_to;
  int n_theta = 0;              // free configurations
  double w_rev = 0.0;           // alpha * lambda_rev
  double w_pris = 0.0;          // alpha * lambda_pris
  double cos_eps = 1e-9;        // smoothing of the norms in the cosine term

  [[nodiscard]] int n_params() const { return 6 + n_theta; }
  [[nodiscard]] std::size_t n_pairs() const { return from.size(); }
  [[nodiscard]] int n_residuals() const { return 3 * static_cast<int>(n_pairs()) + 4; }
};

namespace detail {

inline double theta_of(const VecX& x, int idx) { return idx < 0 ? 0.0 : x[6 + idx]; }

inline Twist unit_twist(const VecX& x) {
  const Eigen::Matrix<double, 6, 1> u = x.head<6>();
  return Twist::from_coeffs(u / u.norm());
}

// d(xi)/du for xi = u / |u|.
inline Eigen::Matrix<double, 6, 6> normalization_jacobian(const VecX& x) {
  const Eigen::Matrix<double, 6, 1> u = x.head<6>();
  const double n = u.norm();
  const Eigen::Matrix<double, 6, 1> xi = u / n;
  return (Eigen::Matrix<double, 6, 6>::Identity() - xi * xi.transpose()) / n;
}

// Derivative of J_l(phi) rho with respect to phi.
inline Mat3 translation_jacobian_phi(const Vec3& phi, const Vec3& rho) {
  const double a = phi.norm();
  const Vec3 pr = phi.cross(rho);
  const Vec3 ppr = phi.cross(pr);
  return pr * (coeff_a_prime_over_a(a) * phi.transpose()) - coeff_a(a) * skew(rho) +
         ppr * (coeff_b_prime_over_a(a) * phi.transpose()) +
         coeff_b(a) * (phi.dot(rho) * Mat3::Identity() + phi * rho.transpose() -
                       2.0 * rho * phi.transpose());
}

// Shared per-(theta_a, theta_b) quantities.
struct PairFrame {
  double delta = 0.0;
  Mat3 rotation;
  Vec3 translation;
  Mat3 jl;         // J_l(phi)
  Mat3 dt_dphi;    // d t / d phi
};

inline PairFrame pair_frame(const Twist& xi, double delta) {
  PairFrame f;
  f.delta = delta;
  const Vec3 phi = xi.omega * delta;
  const Vec3 rho = xi.vel * delta;
  f.rotation = so3_exp(phi);
  f.jl = so3_left_jacobian(phi);
  f.translation = f.jl * rho;
  f.dt_dphi = translation_jacobian_phi(phi, rho);
  return f;
}

// Jacobian of r = p_b - exp(xi * delta) p_a with respect to (xi, delta).
inline void pair_jacobian(const PairFrame& f, const Twist& xi, const Vec3& pa,
                          Eigen::Matrix<double, 3, 6>& d_xi, Vec3& d_delta) {
  const Vec3 rp = f.rotation * pa;
  const Mat3 dr_dphi = skew(rp) * f.jl - f.dt_dphi;
  const Mat3 dr_drho = -f.jl;
  d_xi.leftCols<3>() = f.delta * dr_dphi;
  d_xi.rightCols<3>() = f.delta * dr_drho;
  d_delta = dr_dphi * xi.omega + dr_drho * xi.vel;
}

struct CosineTerm {
  double value = 0.0;
  Eigen::Matrix<double, 1, 6> grad;  // with respect to xi
};

inline CosineTerm cosine_term(const Twist& xi, double eps) {
  const double nw = std::sqrt(xi.omega.squaredNorm() + eps * eps);
  const double nv = std::sqrt(xi.vel.squaredNorm() + eps * eps);
  const double s = xi.omega.dot(xi.vel);
  CosineTerm c;
  c.value = s / (nw * nv);
  c.grad.leftCols<3>() = (xi.vel / (nw * nv) - s * xi.omega / (nw * nw * nw * nv)).transpose();
  c.grad.rightCols<3>() = (xi.omega / (nw * nv) - s * xi.vel / (nw * nv * nv * nv)).transpose();
  return c;
}

// Groups pair indices by their (theta_a, theta_b) parameter indices so the
// exponential is evaluated once per group.
inline std::vector<std::pair<std::pair<int, int>, std::vector<std::size_t>>> group_pairs(
    const TwistProblem& p) {
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < p.n_pairs(); ++i) {
    groups[{p.param_from[i], p.param_to[i]}].push_back(i);
  }
  return {groups.begin(), groups.end()};
}

}  // namespace detail

/// Unweighted residual vector: [data pairs (3 each); cosine; omega (3)].
inline VecX twist_residuals(const TwistProblem& p, const VecX& x) {
  VecX r(p.n_residuals());
  const Twist xi = detail::unit_twist(x);
  for (std::size_t i = 0; i < p.n_pairs(); ++i) {
    const double delta = detail::theta_of(x, p.param_to[i]) - detail::theta_of(x, p.param_from[i]);
    const RigidTransform t = exp_map(xi, delta);
    r.segment<3>(3 * static_cast<Eigen::Index>(i)) = p.to[i] - t.apply(p.from[i]);
  }
  const auto base = 3 * static_cast<Eigen::Index>(p.n_pairs());
  r[base] = detail::cosine_term(xi, p.cos_eps).value;
  r.segment<3>(base + 1) = xi.omega;
  return r;
}

/// Analytic Jacobian of twist_residuals with respect to x.
inline MatX twist_jacobian(const TwistProblem& p, const VecX& x) {
  MatX j = MatX::Zero(p.n_residuals(), p.n_params());
  const Twist xi = detail::unit_twist(x);
  const Eigen::Matrix<double, 6, 6> nj = detail::normalization_jacobian(x);
  for (const auto& [key, members] : detail::group_pairs(p)) {
    const double delta = detail::theta_of(x, key.second) - detail::theta_of(x, key.first);
    const detail::PairFrame f = detail::pair_frame(xi, delta);
    for (std::size_t i : members) {
      Eigen::Matrix<double, 3, 6> d_xi;
      Vec3 d_delta;
      detail::pair_jacobian(f, xi, p.from[i], d_xi, d_delta);
      const auto row = 3 * static_cast<Eigen::Index>(i);
      j.block<3, 6>(row, 0) = d_xi * nj;
      if (key.second >= 0) j.block<3, 1>(row, 6 + key.second) += d_delta;
      if (key.first >= 0) j.block<3, 1>(row, 6 + key.first) -= d_delta;
    }
  }
  const auto base = 3 * static_cast<Eigen::Index>(p.n_pairs());
  j.block<1, 6>(base, 0) = detail::cosine_term(xi, p.cos_eps).grad * nj;
  j.block<3, 6>(base + 1, 0) = nj.topRows<3>();
  return j;
}

/// Objective: sum of data residual norms plus the weighted regularizer.
inline double twist_cost(const TwistProblem& p, const VecX& x) {
  const Twist xi = detail::unit_twist(x);
  double data = 0.0;
  for (const auto& [key, members] : detail::group_pairs(p)) {
    const double delta = detail::theta_of(x, key.second) - detail::theta_of(x, key.first);
    const RigidTransform t = exp_map(xi, delta);
    for (std::size_t i : members) data += (p.to[i] - t.apply(p.from[i])).norm();
  }
  return data + p.w_rev * std::abs(detail::cosine_term(xi, p.cos_eps).value) +
         p.w_pris * xi.omega.norm();
}

struct SolveResult {
  VecX x;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) on the iteratively reweighted
/// quadratic model of the sum-of-norms objective. Steps are accepted only on
/// a decrease of the true objective.
inline SolveResult solve_twist(const TwistProblem& p, VecX x, int max_iterations = 200,
                               double tolerance = 1e-10) {
  constexpr double kWeightFloor = 1e-6;
  const int n = p.n_params();
  const auto groups = detail::group_pairs(p);

  auto cost_of = [&](const VecX& xv) {
    const Twist xi = detail::unit_twist(xv);
    double data = 0.0;
    for (const auto& [key, members] : groups) {
      const double delta = detail::theta_of(xv, key.second) - detail::theta_of(xv, key.first);
      const RigidTransform t = exp_map(xi, delta);
      for (std::size_t i : members) data += (p.to[i] - t.apply(p.from[i])).norm();
    }
    return data + p.w_rev * std::abs(detail::cosine_term(xi, p.cos_eps).value) +
           p.w_pris * xi.omega.norm();
  };

  x.head<6>().normalize();
  SolveResult res;
  res.cost = cost_of(x);
  double mu = 1e-4;
  MatX h(n, n);
  VecX g(n);
  bool need_model = true;

  for (int it = 0; it < max_iterations; ++it) {
    res.iterations = it + 1;
    if (need_model) {
      h.setZero();
      g.setZero();
      const Twist xi = detail::unit_twist(x);
      const Eigen::Matrix<double, 6, 6> nj = detail::normalization_jacobian(x);
      Eigen::Matrix<double, 3, 8> jr;
      for (const auto& [key, members] : groups) {
        const double delta = detail::theta_of(x, key.second) - detail::theta_of(x, key.first);
        const detail::PairFrame f = detail::pair_frame(xi, delta);
        const int ia = key.first < 0 ? -1 : 6 + key.first;
        const int ib = key.second < 0 ? -1 : 6 + key.second;
        // Accumulate the 8x8 block [u, theta_a, theta_b] once per group.
        Eigen::Matrix<double, 8, 8> hb = Eigen::Matrix<double, 8, 8>::Zero();
        Eigen::Matrix<double, 8, 1> gb = Eigen::Matrix<double, 8, 1>::Zero();
        for (std::size_t i : members) {
          const Vec3 r = p.to[i] - (f.rotation * p.from[i] + f.translation);
          const double w = 1.0 / std::max(r.norm(), kWeightFloor);
          Eigen::Matrix<double, 3, 6> d_xi;
          Vec3 d_delta;
          detail::pair_jacobian(f, xi, p.from[i], d_xi, d_delta);
          jr.leftCols<6>() = d_xi * nj;
          jr.col(6) = -d_delta;
          jr.col(7) = d_delta;
          hb.noalias() += w * jr.transpose() * jr;
          gb.noalias() += w * jr.transpose() * r;
        }
        const int idx[8] = {0, 1, 2, 3, 4, 5, ia, ib};
        for (int a = 0; a < 8; ++a) {
          if (idx[a] < 0) continue;
          g[idx[a]] += gb[a];
          for (int b = 0; b < 8; ++b) {
            if (idx[b] < 0) continue;
            h(idx[a], idx[b]) += hb(a, b);
          }
        }
      }
      if (p.w_rev > 0.0) {
        const detail::CosineTerm c = detail::cosine_term(xi, p.cos_eps);
        const Eigen::Matrix<double, 1, 6> jc = c.grad * nj;
        const double w = p.w_rev / std::max(std::abs(c.value), kWeightFloor);
        h.topLeftCorner<6, 6>() += w * jc.transpose() * jc;
        g.head<6>() += w * jc.transpose() * c.value;
      }
      if (p.w_pris > 0.0) {
        const Eigen::Matrix<double, 3, 6> jw = nj.topRows<3>();
        const double w = p.w_pris / std::max(xi.omega.norm(), kWeightFloor);
        h.topLeftCorner<6, 6>() += w * jw.transpose() * jw;
        g.head<6>() += w * jw.transpose() * xi.omega;
      }
      if (!h.allFinite() || !g.allFinite()) {
        fail(ErrorKind::kDegenerateMotion, "twist fit: non-finite normal equations");
      }
      need_model = false;
    }

    const double diag_scale = std::max(h.diagonal().maxCoeff(), 1e-12);
    MatX a = h;
    for (int d = 0; d < n; ++d) a(d, d) += mu * std::max(h(d, d), 1e-6 * diag_scale);
    const VecX step = a.ldlt().solve(-g);
    if (!step.allFinite()) {
      fail(ErrorKind::kDegenerateMotion, "twist fit: singular normal equations");
    }
    VecX trial = x + step;
    trial.head<6>().normalize();
    const double trial_cost = cost_of(trial);
    if (trial_cost < res.cost) {
      const double decrease = (res.cost - trial_cost) / std::max(res.cost, 1e-300);
      x = trial;
      res.cost = trial_cost;
      mu = std::max(mu / 3.0, 1e-12);
      need_model = true;
      if (decrease < tolerance) {
        res.converged = true;
        break;
      }
    } else {
      mu *= 4.0;
      if (mu > 1e12) {
        // No descent direction left at machine precision.
        res.converged = true;
        break;
      }
    }
  }
  res.x = x;
  return res;
}

// --------------------------------------------------------------------------
// Estimation

namespace detail {

struct FitLayout {
  TwistProblem problem;
  std::vector<int> param_of_frame;  // -1 anchor / before anchor, -2 unobserved
  int anchor = -1;
  Vec3 center = Vec3::Zero();
};

inline FitLayout build_layout(const PointTracks3D& tracks, double w_rev, double w_pris) {
  FitLayout lay;
  Vec3 sum = Vec3::Zero();
  std::size_t count = 0;
  for (int t = 0; t < tracks.frames; ++t) {
    for (int f = 0; f < tracks.tracks; ++f) {
      if (!tracks.visible(t, f)) continue;
      sum += tracks.at(t, f);
      ++count;
    }
  }
  if (count == 0) fail(ErrorKind::kDegenerateMotion, "twist fit: cluster has no observations");
  lay.center = sum / static_cast<double>(count);

  std::vector<std::uint8_t> observed(static_cast<std::size_t>(tracks.frames), 0);
  struct RawPair {
    int a, b, f;
  };
  std::vector<RawPair> pairs;
  for (int f = 0; f < tracks.tracks; ++f) {
    int last = -1;
    for (int t = 0; t < tracks.frames; ++t) {
      if (!tracks.visible(t, f)) continue;
      if (last >= 0) {
        pairs.push_back({last, t, f});
        observed[last] = observed[t] = 1;
      }
      last = t;
    }
  }
  if (pairs.empty()) fail(ErrorKind::kDegenerateMotion, "twist fit: no track spans two frames");

  lay.param_of_frame.assign(static_cast<std::size_t>(tracks.frames), -2);
  for (int t = 0; t < tracks.frames; ++t) {
    if (!observed[t]) continue;
    if (lay.anchor < 0) {
      lay.anchor = t;
      lay.param_of_frame[t] = -1;
    } else {
      lay.param_of_frame[t] = lay.problem.n_theta++;
    }
  }
  auto& p = lay.problem;
  p.w_rev = w_rev;
  p.w_pris = w_pris;
  for (const auto& rp : pairs) {
    p.from.push_back(tracks.at(rp.a, rp.f) - lay.center);
    p.to.push_back(tracks.at(rp.b, rp.f) - lay.center);
    p.param_from.push_back(lay.param_of_frame[rp.a]);
    p.param_to.push_back(lay.param_of_frame[rp.b]);
  }
  return lay;
}

// Twist from a Kabsch fit between the anchor and the frame of largest mean
// displacement; configurations proportional to the mean-displacement profile.
inline VecX initial_guess(const PointTracks3D& tracks, const FitLayout& lay) {
  const int a = lay.anchor;
  std::vector<double> disp(static_cast<std::size_t>(tracks.frames), -1.0);
  int best = -1;
  for (int t = 0; t < tracks.frames; ++t) {
    if (lay.param_of_frame[t] < 0) continue;
    double s = 0.0;
    int n = 0;
    for (int f = 0; f < tracks.tracks; ++f) {
      if (!tracks.visible(a, f) || !tracks.visible(t, f)) continue;
      s += (tracks.at(t, f) - tracks.at(a, f)).norm();
      ++n;
    }
    if (n < 3) continue;
    disp[t] = s / n;
    if (best < 0 || disp[t] > disp[best]) best = t;
  }
  if (best < 0 || !(disp[best] > kDegenerateMagnitude)) {
    fail(ErrorKind::kDegenerateMotion, "twist fit: cluster does not move");
  }
  std::vector<Vec3> from, to;
  for (int f = 0; f < tracks.tracks; ++f) {
    if (!tracks.visible(a, f) || !tracks.visible(best, f)) continue;
    from.push_back(tracks.at(a, f) - lay.center);
    to.push_back(tracks.at(best, f) - lay.center);
  }
  const TwistAngle ta = log_map(fit_rigid_transform(from, to));
  const double scale = ta.xi.coeffs().norm();
  if (!(scale > 0.0) || !(std::abs(ta.theta) > 0.0)) {
    fail(ErrorKind::kDegenerateMotion, "twist fit: initial rigid motion is the identity");
  }
  const double theta_best = ta.theta * scale;

  // Fill displacement gaps by linear interpolation over the frame index.
  std::vector<int> known;
  for (int t = 0; t < tracks.frames; ++t) {
    if (disp[t] >= 0.0) known.push_back(t);
  }
  auto interp = [&](int t) {
    if (t == a) return 0.0;
    if (disp[t] >= 0.0) return disp[t];
    auto it = std::lower_bound(known.begin(), known.end(), t);
    if (it == known.begin()) return disp[*it];
    if (it == known.end()) return disp[known.back()];
    const int t1 = *it, t0 = *(it - 1);
    const double w = static_cast<double>(t - t0) / (t1 - t0);
    return (1 - w) * disp[t0] + w * disp[t1];
  };

  VecX x(6 + lay.problem.n_theta);
  x.head<6>() = ta.xi.coeffs() / scale;
  for (int t = 0; t < tracks.frames; ++t) {
    const int idx = lay.param_of_frame[t];
    if (idx >= 0) x[6 + idx] = theta_best * interp(t) / disp[best];
  }
  return x;
}

// Per-frame configurations; frames without observations are interpolated
// between their observed neighbors and held at the ends.
inline std::vector<double> expand_thetas(const FitLayout& lay, const VecX& x, int frames) {
  std::vector<double> out(static_cast<std::size_t>(frames), 0.0);
  std::vector<int> known;
  for (int t = 0; t < frames; ++t) {
    const int idx = lay.param_of_frame[t];
    if (idx == -2) continue;
    out[t] = theta_of(x, idx);
    known.push_back(t);
  }
  for (int t = 0; t < frames; ++t) {
    if (lay.param_of_frame[t] != -2) continue;
    auto it = std::lower_bound(known.begin(), known.end(), t);
    if (it == known.begin()) {
      out[t] = 0.0;
    } else if (it == known.end()) {
      out[t] = out[known.back()];
    } else {
      const int t1 = *it, t0 = *(it - 1);
      const double w = static_cast<double>(t - t0) / (t1 - t0);
      out[t] = (1 - w) * out[t0] + w * out[t1];
    }
  }
  return out;
}

}  // namespace detail

/// RMS per coordinate of the replay residual over consecutive visible pairs.
inline double replay_rms(const PointTracks3D& tracks, const Twist& xi,
                         std::span<const double> thetas) {
  double sq = 0.0;
  std::size_t n = 0;
  for (int f = 0; f < tracks.tracks; ++f) {
    int last = -1;
    for (int t = 0; t < tracks.frames; ++t) {
      if (!tracks.visible(t, f)) continue;
      if (last >= 0) {
        const RigidTransform m = exp_map(xi, thetas[t] - thetas[last]);
        sq += (tracks.at(t, f) - m.apply(tracks.at(last, f))).squaredNorm();
        ++n;
      }
      last = t;
    }
  }
  return n ? std::sqrt(sq / (3.0 * static_cast<double>(n))) : 0.0;
}

/// Fits the regularized twist and configurations to a track cluster, assigns
/// the joint type and fixes the gauge. The returned thetas cover every frame
/// of `tracks`; the mode field is left for infer_mode.
inline ArticulationEstimate estimate_twist(const PointTracks3D& tracks, const PriorWeights& prior,
                                           const EstimatorOptions& opt = {}) {
  if (!(opt.alpha >= 0.0) || !std::isfinite(opt.alpha)) {
    fail(ErrorKind::kInvalidArgument, "estimate_twist: alpha must be finite and >= 0");
  }
  if (std::abs(prior.lambda_pris + prior.lambda_rev - 1.0) > 1e-12) {
    fail(ErrorKind::kInvalidArgument, "estimate_twist: prior weights must sum to one");
  }
  if (tracks.frames < 2) fail(ErrorKind::kShape, "estimate_twist: need at least two frames");

  detail::FitLayout lay =
      detail::build_layout(tracks, opt.alpha * prior.lambda_rev, opt.alpha * prior.lambda_pris);
  const VecX x0 = detail::initial_guess(tracks, lay);
  const SolveResult sol = solve_twist(lay.problem, x0, opt.max_iterations, opt.tolerance);
  if (!sol.converged) {
    fail(ErrorKind::kConvergence, "estimate_twist: no convergence after " +
                                      std::to_string(sol.iterations) + " iterations (cost " +
                                      std::to_string(sol.cost) + ")");
  }

  const Twist xc = detail::unit_twist(sol.x);
  std::vector<double> thetas = detail::expand_thetas(lay, sol.x, tracks.frames);
  // Back to world coordinates: conjugation by the centering translation.
  Twist xw{xc.omega, xc.vel - xc.omega.cross(lay.center)};

  const auto [lo, hi] = std::minmax_element(thetas.begin(), thetas.end());
  const double range = *hi - *lo;
  ArticulationEstimate est;
  est.prior = prior;
  est.iterations = sol.iterations;
  est.cost = sol.cost;
  if (opt.type_rule == TypeRule::kSweptRotation) {
    const double swept_deg = xc.omega.norm() * range * 180.0 / kPi;
    est.kind = swept_deg >= opt.min_rotation_deg ? AxisKind::kRevolute : AxisKind::kPrismatic;
  } else {
    const double vn = xw.vel.norm();
    const double ratio = vn > 0.0 ? xw.omega.norm() / vn : std::numeric_limits<double>::infinity();
    est.kind = ratio < opt.pitch_cutoff ? AxisKind::kPrismatic : AxisKind::kRevolute;
  }

  double scale = 1.0;
  if (est.kind == AxisKind::kRevolute) {
    scale = xw.omega.norm();
    if (!(scale > kDegenerateMagnitude)) {
      fail(ErrorKind::kDegenerateTwist, "estimate_twist: revolute fit without rotation");
    }
    est.twist = Twist{xw.omega / scale, xw.vel / scale};
  } else {
    scale = xc.vel.norm();
    if (!(scale > kDegenerateMagnitude)) {
      fail(ErrorKind::kDegenerateTwist, "estimate_twist: prismatic fit without translation");
    }
    est.twist = Twist{Vec3::Zero(), xc.vel / scale};
  }
  for (double& th : thetas) th *= scale;

  // Orientation: the part moves toward the viewpoint for positive theta, or
  // without one, the largest excursion is positive.
  const auto extreme = std::max_element(thetas.begin(), thetas.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });
  Vec3 c0 = Vec3::Zero();
  int n0 = 0;
  for (int f = 0; f < tracks.tracks; ++f) {
    if (!tracks.visible(lay.anchor, f)) continue;
    c0 += tracks.at(lay.anchor, f);
    ++n0;
  }
  c0 /= std::max(n0, 1);
  est.centroid = c0;
  bool flip = false;
  if (opt.viewpoint) {
    const Vec3 moved = exp_map(est.twist, std::abs(*extreme)).apply(c0);
    flip = (moved - c0).dot(*opt.viewpoint - c0) < 0.0;
  } else {
    flip = *extreme < 0.0;
  }
  if (flip) {
    est.twist = Twist{-est.twist.omega, -est.twist.vel};
    for (double& th : thetas) th = -th;
  }
  // Exact zero at the first frame regardless of interpolation.
  const double th0 = thetas.front();
  for (double& th : thetas) th -= th0;
  est.thetas = std::move(thetas);
  est.axis = screw_axis_from_twist(est.twist, est.kind);
  est.residual_rms = replay_rms(tracks, est.twist, est.thetas);
  est.frames.resize(est.thetas.size());
  std::iota(est.frames.begin(), est.frames.end(), 0);
  return est;
}

// --------------------------------------------------------------------------
// Mode

/// Monotone-run decomposition of a configuration sequence. A turn is
/// registered once the sequence leaves the running extreme by more than
/// `band` times the total range.
inline std::string theta_shape(std::span<const double> thetas, double band = 0.05) {
  if (thetas.size() < 3) return "flat";
  const auto [lo, hi] = std::minmax_element(thetas.begin(), thetas.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return "flat";
  const double h = band * range;
  std::vector<int> dirs;
  double anchor = thetas.front();  // running extreme of the current run
  int dir = 0;
  for (double v : thetas) {
    if (dir == 0) {
      if (v - anchor > h) {
        dir = 1;
        anchor = v;
        dirs.push_back(1);
      } else if (anchor - v > h) {
        dir = -1;
        anchor = v;
        dirs.push_back(-1);
      }
      continue;
    }
    if (dir > 0) {
      if (v > anchor) {
        anchor = v;
      } else if (anchor - v > h) {
        dir = -1;
        anchor = v;
        dirs.push_back(-1);
      }
    } else {
      if (v < anchor) {
        anchor = v;
      } else if (v - anchor > h) {
        dir = 1;
        anchor = v;
        dirs.push_back(1);
      }
    }
  }
  if (dirs.empty()) return "flat";
  if (dirs.size() == 1) return dirs[0] > 0 ? "up" : "down";
  if (dirs.size() == 2) return dirs[0] > 0 ? "up-down" : "down-up";
  return "mixed";
}

inline ModeValue mode_for_shape(const std::string& shape) {
  if (shape == "up") return ModeValue::kOpening;
  if (shape == "down") return ModeValue::kClosing;
  if (shape == "up-down") return ModeValue::kOpeningClosing;
  if (shape == "down-up") return ModeValue::kClosingOpening;
  return ModeValue::kUnknown;
}

/// Checks a mode hint against the theta profile, or derives the mode from
/// the profile alone when no hint is given.
inline ModeToken infer_mode(std::span<const double> thetas,
                            const std::optional<ModeValue>& hint = std::nullopt) {
  ModeToken m;
  m.shape = theta_shape(thetas);
  const ModeValue from_shape = mode_for_shape(m.shape);
  const bool hinted = hint.has_value();
  const ModeValue h = hinted ? *hint : ModeValue::kUnknown;
  if (hinted) {
    m.value = h;
    m.consistent = h != ModeValue::kUnknown && h == from_shape;
    return m;
  }
  m.value = from_shape;
  m.consistent = true;
  m.convention_dependent = from_shape != ModeValue::kUnknown;
  return m;
}

/// Baseline configuration: no regularization and the pitch-ratio type rule.
inline EstimatorOptions unregularized_options(EstimatorOptions opt = {}) {
  opt.alpha = 0.0;
  opt.type_rule = TypeRule::kPitchRatio;
  return opt;
}

/// Prior, fit and mode in one call.
inline ArticulationEstimate estimate_articulation(const PointTracks3D& cluster,
                                                  const EstimatorOptions& opt = {},
                                                  const std::optional<ModeValue>& hint = std::nullopt) {
  const SecantSet secants =
      sample_secants(cluster, opt.secant_stride, opt.min_secant_norm, opt.max_secants);
  const PriorWeights prior = cosine_prior(secants, opt.eta_star, opt.sigmoid_k);
  ArticulationEstimate est = estimate_twist(cluster, prior, opt);
  est.mode = infer_mode(est.thetas, hint);
  return est;
}

}  // namespace artiscene
