// artiscene - articulated 3D scene graphs from point trajectories
//
// Pipeline configuration: one flat JSON document, every key optional,
// unknown keys rejected.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "json.hpp"

#include "artiscene/errors.hpp"
#include "artiscene/segmenter.hpp"
#include "artiscene/twist_estimator.hpp"

namespace artiscene {

struct PipelineConfig {
  // interaction segmentation
  int stride_h = 6;
  double tau = 0.05;
  int kappa = 11;
  FusionTable fusion;
  double segment_threshold = 0.5;
  int t_min = 10;
  int t_max = 600;
  double normalize_quantile = 0.99;

  // track processing
  int max_queries = 1500;
  int query_stride = 2;
  double min_track_len = 0.10;
  double jump_thresh = 0.15;
  double dbscan_eps = 0.25;
  int dbscan_min_pts = 5;
  double min_joint_visibility = 0.3;
  int smooth_window = 5;

  // twist estimation
  double eta_star = 0.994;
  double sigmoid_k = 200.0;
  double alpha = 1.0;
  std::string type_rule = "swept-rotation";
  double min_rotation_deg = 5.0;
  double pitch_cutoff = 1.0;
  int max_iterations = 200;

  // graph
  double lambda = 1.0;
  int knn_k = 5;
  double containment_thresh = 0.6;
  double joint_merge_angle_deg = 10.0;  // repeated interactions with one joint
  double joint_merge_dist = 0.10;
  double joint_merge_span = 0.25;  // along a hinge; visible panel parts differ
  double fallback_px = 10.0;

  // evaluation
  bool fold_angles = true;

  std::uint64_t seed = 0;

  [[nodiscard]] SegmenterConfig segmenter() const {
    SegmenterConfig s;
    s.stride = stride_h;
    s.tau = tau;
    s.kappa = kappa;
    s.table = fusion;
    s.threshold = segment_threshold;
    s.t_min = t_min;
    s.t_max = t_max;
    s.quantile = normalize_quantile;
    return s;
  }

  [[nodiscard]] EstimatorOptions estimator() const {
    EstimatorOptions o;
    o.alpha = alpha;
    o.eta_star = eta_star;
    o.sigmoid_k = sigmoid_k;
    o.max_iterations = max_iterations;
    o.type_rule = type_rule == "pitch-ratio" ? TypeRule::kPitchRatio : TypeRule::kSweptRotation;
    o.min_rotation_deg = min_rotation_deg;
    o.pitch_cutoff = pitch_cutoff;
    return o;
  }
};

namespace detail {

// Key table shared by parsing and serialization.
template <typename Fn>
void visit_config(PipelineConfig& c, Fn&& fn) {
  fn("stride_h", c.stride_h);
  fn("tau", c.tau);
  fn("kappa", c.kappa);
  fn("fusion_p_tt", c.fusion.p_tt);
  fn("fusion_p_tf", c.fusion.p_tf);
  fn("fusion_p_ft", c.fusion.p_ft);
  fn("fusion_p_ff", c.fusion.p_ff);
  fn("segment_threshold", c.segment_threshold);
  fn("t_min", c.t_min);
  fn("t_max", c.t_max);
  fn("normalize_quantile", c.normalize_quantile);
  fn("max_queries", c.max_queries);
  fn("query_stride", c.query_stride);
  fn("min_track_len", c.min_track_len);
  fn("jump_thresh", c.jump_thresh);
  fn("dbscan_eps", c.dbscan_eps);
  fn("dbscan_min_pts", c.dbscan_min_pts);
  fn("min_joint_visibility", c.min_joint_visibility);
  fn("smooth_window", c.smooth_window);
  fn("eta_star", c.eta_star);
  fn("sigmoid_k", c.sigmoid_k);
  fn("alpha", c.alpha);
  fn("type_rule", c.type_rule);
  fn("min_rotation_deg", c.min_rotation_deg);
  fn("pitch_cutoff", c.pitch_cutoff);
  fn("max_iterations", c.max_iterations);
  fn("lambda", c.lambda);
  fn("knn_k", c.knn_k);
  fn("containment_thresh", c.containment_thresh);
  fn("joint_merge_angle_deg", c.joint_merge_angle_deg);
  fn("joint_merge_dist", c.joint_merge_dist);
  fn("joint_merge_span", c.joint_merge_span);
  fn("fallback_px", c.fallback_px);
  fn("fold_angles", c.fold_angles);
  fn("seed", c.seed);
}

}  // namespace detail

inline void validate(const PipelineConfig& c) {
  auto need = [](bool ok, const char* what) {
    if (!ok) fail(ErrorKind::kValidation, std::string("config: ") + what);
  };
  need(c.stride_h >= 1, "stride_h must be >= 1");
  need(c.tau > 0.0, "tau must be > 0");
  need(c.kappa >= 1 && c.kappa % 2 == 1, "kappa must be a positive odd integer");
  for (double p : {c.fusion.p_tt, c.fusion.p_tf, c.fusion.p_ft, c.fusion.p_ff}) {
    need(p >= 0.0 && p <= 1.0, "fusion table entries must lie in [0, 1]");
  }
  need(c.segment_threshold > 0.0 && c.segment_threshold < 1.0, "segment_threshold must lie in (0, 1)");
  need(c.t_min >= 1 && c.t_max >= c.t_min, "need 1 <= t_min <= t_max");
  need(c.normalize_quantile > 0.0 && c.normalize_quantile <= 1.0, "normalize_quantile must lie in (0, 1]");
  need(c.max_queries >= 1, "max_queries must be >= 1");
  need(c.query_stride >= 1, "query_stride must be >= 1");
  need(c.min_track_len > 0.0, "min_track_len must be > 0");
  need(c.jump_thresh > 0.0, "jump_thresh must be > 0");
  need(c.dbscan_eps > 0.0, "dbscan_eps must be > 0");
  need(c.dbscan_min_pts >= 1, "dbscan_min_pts must be >= 1");
  need(c.min_joint_visibility > 0.0 && c.min_joint_visibility <= 1.0,
       "min_joint_visibility must lie in (0, 1]");
  need(c.smooth_window >= 1 && c.smooth_window % 2 == 1, "smooth_window must be a positive odd integer");
  need(c.eta_star > 0.0 && c.eta_star < 1.0, "eta_star must lie in (0, 1)");
  need(c.sigmoid_k > 0.0, "sigmoid_k must be > 0");
  need(c.alpha >= 0.0 && std::isfinite(c.alpha), "alpha must be finite and >= 0");
  need(c.type_rule == "swept-rotation" || c.type_rule == "pitch-ratio",
       "type_rule must be 'swept-rotation' or 'pitch-ratio'");
  need(c.min_rotation_deg > 0.0, "min_rotation_deg must be > 0");
  need(c.pitch_cutoff > 0.0, "pitch_cutoff must be > 0");
  need(c.max_iterations >= 1, "max_iterations must be >= 1");
  need(c.lambda >= 0.0 && std::isfinite(c.lambda), "lambda must be finite and >= 0");
  need(c.knn_k >= 1, "knn_k must be >= 1");
  need(c.containment_thresh > 0.0 && c.containment_thresh <= 1.0,
       "containment_thresh must lie in (0, 1]");
  need(c.fallback_px > 0.0, "fallback_px must be > 0");
  need(c.joint_merge_angle_deg >= 0.0 && c.joint_merge_angle_deg <= 90.0,
       "joint_merge_angle_deg must lie in [0, 90]");
  need(c.joint_merge_dist >= 0.0, "joint_merge_dist must be >= 0");
  need(c.joint_merge_span >= 0.0, "joint_merge_span must be >= 0");
}

/// Applies the keys of `j` on top of `base`.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {}) {
  if (!j.is_object()) fail(ErrorKind::kValidation, "config: expected a JSON object");
  std::map<std::string, std::function<void(const nlohmann::json&)>> setters;
  detail::visit_config(base, [&](const char* key, auto& field) {
    setters[key] = [&field, key](const nlohmann::json& v) {
      using T = std::remove_reference_t<decltype(field)>;
      try {
        if constexpr (std::is_same_v<T, bool>) {
          if (!v.is_boolean()) throw std::runtime_error("expected a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (!v.is_string()) throw std::runtime_error("expected a string");
        } else if constexpr (std::is_unsigned_v<T>) {
          if (!v.is_number_unsigned()) throw std::runtime_error("expected a non-negative integer");
        } else if constexpr (std::is_integral_v<T>) {
          if (!v.is_number_integer()) throw std::runtime_error("expected an integer");
        } else {
          if (!v.is_number()) throw std::runtime_error("expected a number");
        }
        field = v.get<T>();
      } catch (const std::exception& e) {
        fail(ErrorKind::kValidation, std::string("config: key '") + key + "': " + e.what());
      }
    };
  });
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) fail(ErrorKind::kValidation, "config: unknown key '" + key + "'");
    it->second(value);
  }
  validate(base);
  return base;
}

inline nlohmann::json config_to_json(PipelineConfig c) {
  nlohmann::json j = nlohmann::json::object();
  detail::visit_config(c, [&](const char* key, const auto& field) { j[key] = field; });
  return j;
}

}  // namespace artiscene
