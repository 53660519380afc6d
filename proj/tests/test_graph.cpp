// artiscene - articulated 3D scene graphs from point trajectories
//
// Unit tests: candidate retrieval, matching cost, assignment, containment and
// graph serialization.

#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "artiscene/bip.hpp"
#include "artiscene/graph.hpp"
#include "artiscene/pipeline.hpp"
#include "artiscene/sim.hpp"
#include "test_util.hpp"

namespace artiscene {
namespace {

ObjectNode node_at(int id, const Vec3& c) { return make_object(id, {c}); }

TEST(KnnCandidates, SingleObject) {
  const std::vector<ObjectNode> objs = {node_at(7, Vec3(3, 0, 0))};
  EXPECT_EQ(knn_candidates(Vec3::Zero(), objs, 5), std::vector<int>{7});
}

TEST(KnnCandidates, LineNearestTwo) {
  std::vector<ObjectNode> objs;
  for (int i = 0; i < 5; ++i) objs.push_back(node_at(10 + i, Vec3(i, 0, 0)));
  EXPECT_EQ(knn_candidates(Vec3(-0.5, 0, 0), objs, 2), (std::vector<int>{10, 11}));
}

TEST(KnnCandidates, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ObjectNode> objs;
    const int n = 1 + trial % 9;
    for (int i = 0; i < n; ++i) objs.push_back(node_at(i, Vec3(u(rng), u(rng), u(rng))));
    const Vec3 q(u(rng), u(rng), u(rng));
    std::vector<std::pair<double, int>> all;
    for (const auto& o : objs) all.emplace_back((o.centroid - q).norm(), o.id);
    std::sort(all.begin(), all.end());
    std::vector<int> want;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, all.size()); ++i) want.push_back(all[i].second);
    EXPECT_EQ(knn_candidates(q, objs, 3), want);
  }
}

// Flat square object 2 m in front of an identity camera, sliding along +x.
struct MatchScene {
  CameraIntrinsics k{60.0, 60.0, 31.5, 23.5, 64, 48};
  std::vector<RigidTransform> poses;
  ObjectNode object;
  ArticulationEstimate art;

  MatchScene() {
    std::vector<Vec3> pts;
    for (int i = 0; i <= 6; ++i) {
      for (int j = 0; j <= 6; ++j) pts.emplace_back(-0.3 + 0.1 * i, -0.3 + 0.1 * j, 2.0);
    }
    object = make_object(0, pts);
    art.twist = {Vec3::Zero(), Vec3::UnitX()};
    art.kind = AxisKind::kPrismatic;
    for (int t = 0; t < 4; ++t) {
      art.frames.push_back(t);
      art.thetas.push_back(0.05 * t);
      poses.push_back(RigidTransform::identity());
    }
  }

  [[nodiscard]] MatchFrames frames() const { return {poses, k}; }

  // Dynamic keypoints ride on the replayed object, static ones sit in a corner.
  [[nodiscard]] PointTracks2D keypoints(std::vector<TrackLabel>& labels) const {
    const int n_dyn = 8, n_stat = 6;
    PointTracks2D kp(4, n_dyn + n_stat);
    labels.assign(n_dyn, TrackLabel::kDynamic);
    labels.resize(n_dyn + n_stat, TrackLabel::kStatic);
    for (int t = 0; t < 4; ++t) {
      const auto moved = replay_points(object.points, art.twist, art.thetas[t]);
      const auto proj = project(moved, k, poses[t]);
      for (int f = 0; f < n_dyn; ++f) {
        const auto& p = proj[static_cast<std::size_t>(5 * f + 3)];
        kp.positions[kp.index(t, f)] = Vec2(p.u, p.v);
        kp.visibility[kp.index(t, f)] = 1;
      }
      for (int f = n_dyn; f < n_dyn + n_stat; ++f) {
        kp.positions[kp.index(t, f)] = Vec2(1.0 + f, 2.0);
        kp.visibility[kp.index(t, f)] = 1;
      }
    }
    return kp;
  }
};

TEST(MatchCost, PerfectMatchIsZero) {
  const MatchScene s;
  std::vector<TrackLabel> labels;
  const PointTracks2D kp = s.keypoints(labels);
  EXPECT_EQ(match_cost(s.art, kp, labels, s.object, s.frames()), 0.0);
}

TEST(MatchCost, InvertedLabelsIsTwo) {
  const MatchScene s;
  std::vector<TrackLabel> labels;
  const PointTracks2D kp = s.keypoints(labels);
  for (auto& l : labels) l = l == TrackLabel::kDynamic ? TrackLabel::kStatic : TrackLabel::kDynamic;
  EXPECT_EQ(match_cost(s.art, kp, labels, s.object, s.frames()), 2.0);
}

TEST(MatchCost, NoEvaluableFrame) {
  MatchScene s;
  std::vector<TrackLabel> labels;
  const PointTracks2D kp = s.keypoints(labels);
  // Behind the camera: nothing projects.
  s.object = make_object(0, {Vec3(0, 0, -1), Vec3(0.1, 0, -1), Vec3(0, 0.1, -1)});
  EXPECT_ARTI_ERROR(match_cost(s.art, kp, labels, s.object, s.frames()),
                    ErrorKind::kUnmatchedCost);
}

TEST(MatchCost, InvariantToKeypointAndFramePermutation) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const MatchScene s;
    const int n = 40;
    PointTracks2D kp(4, n);
    std::vector<TrackLabel> labels(n);
    for (int f = 0; f < n; ++f) {
      labels[f] = static_cast<TrackLabel>(std::uniform_int_distribution<int>(0, 2)(rng));
      for (int t = 0; t < 4; ++t) {
        kp.positions[kp.index(t, f)] = Vec2(64.0 * u(rng), 48.0 * u(rng));
        kp.visibility[kp.index(t, f)] = u(rng) < 0.8;
      }
    }
    const double base = match_cost(s.art, kp, labels, s.object, s.frames());

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    PointTracks2D kp2(4, n);
    std::vector<TrackLabel> labels2(n);
    for (int f = 0; f < n; ++f) {
      labels2[f] = labels[perm[f]];
      for (int t = 0; t < 4; ++t) {
        kp2.positions[kp2.index(t, f)] = kp.at(t, perm[f]);
        kp2.visibility[kp2.index(t, f)] = kp.visible(t, perm[f]);
      }
    }
    EXPECT_NEAR(match_cost(s.art, kp2, labels2, s.object, s.frames()), base, 1e-12);

    ArticulationEstimate shuffled = s.art;
    std::vector<std::size_t> order = {2, 0, 3, 1};
    for (std::size_t i = 0; i < order.size(); ++i) {
      shuffled.frames[i] = s.art.frames[order[i]];
      shuffled.thetas[i] = s.art.thetas[order[i]];
    }
    EXPECT_NEAR(match_cost(shuffled, kp, labels, s.object, s.frames()), base, 1e-12);
  }
}

TEST(MatchCost, LabelCountMismatch) {
  const MatchScene s;
  std::vector<TrackLabel> labels;
  const PointTracks2D kp = s.keypoints(labels);
  labels.pop_back();
  EXPECT_ARTI_ERROR(match_cost(s.art, kp, labels, s.object, s.frames()), ErrorKind::kShape);
}

// --------------------------------------------------------------------------

double brute_force(const MatchProblem& mp, std::vector<int>& best_assign) {
  const int na = static_cast<int>(mp.p.rows());
  const int no = static_cast<int>(mp.p.cols());
  double best = kInf;
  std::vector<int> cur(na, -1);
  std::vector<char> used(no, 0);
  auto rec = [&](auto&& self, int i) -> void {
    if (i == na) {
      if (!satisfies_constraints(mp, cur)) return;
      const double v = bip_objective(mp, cur);
      if (v < best) {
        best = v;
        best_assign = cur;
      }
      return;
    }
    for (int j = 0; j < no; ++j) {
      if (used[j]) continue;
      used[j] = 1;
      cur[i] = j;
      self(self, i + 1);
      used[j] = 0;
    }
  };
  rec(rec, 0);
  return best;
}

MatchProblem random_problem(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int na = std::uniform_int_distribution<int>(1, 3)(rng);
  const int no = std::uniform_int_distribution<int>(na, 6)(rng);
  MatchProblem mp;
  mp.p.resize(na, no);
  mp.q = Eigen::MatrixXd::Zero(no, no);
  mp.lambda = 2.0 * u(rng);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < no; ++j) mp.p(i, j) = u(rng) < 0.2 ? kInf : 2.0 * u(rng);
  }
  for (int j = 0; j < no; ++j) {
    for (int l = j + 1; l < no; ++l) mp.q(j, l) = mp.q(l, j) = u(rng) < 0.5 ? 0.0 : u(rng);
  }
  return mp;
}

TEST(SolveBip, SingleArticulationSingleObject) {
  MatchProblem mp;
  mp.p = Eigen::MatrixXd::Constant(1, 1, 0.4);
  mp.q = Eigen::MatrixXd::Zero(1, 1);
  const BipSolution s = solve_bip(mp);
  EXPECT_EQ(s.object_of, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(s.objective, 0.4);
}

TEST(SolveBip, TradesCostForOverlapExactlyPastBreakEven) {
  // Objects 0 and 1 are each articulation's cheapest but overlap at 0.8;
  // object 2 costs 0.3 more and overlaps nothing.
  MatchProblem mp;
  mp.p.resize(2, 3);
  mp.p << 0.0, 1.0, 0.3, 1.0, 0.0, 0.3;
  mp.q = Eigen::MatrixXd::Zero(3, 3);
  mp.q(0, 1) = mp.q(1, 0) = 0.8;
  for (double lambda = 0.0; lambda <= 1.0 + 1e-12; lambda += 0.025) {
    if (std::abs(0.8 * lambda - 0.3) < 1e-9) continue;
    mp.lambda = lambda;
    const BipSolution s = solve_bip(mp);
    const bool avoided = s.object_of[0] == 2 || s.object_of[1] == 2;
    EXPECT_EQ(avoided, 0.3 < 0.8 * lambda) << "lambda " << lambda;
    std::vector<int> oracle;
    EXPECT_NEAR(s.objective, brute_force(mp, oracle), 1e-12);
  }
}

TEST(SolveBip, MatchesEnumerationOnRandomInstances) {
  std::mt19937_64 rng(5);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const MatchProblem mp = random_problem(rng);
    std::vector<int> oracle;
    const double want = brute_force(mp, oracle);
    if (!std::isfinite(want)) {
      EXPECT_ARTI_ERROR(solve_bip(mp), ErrorKind::kInfeasible);
      continue;
    }
    const BipSolution s = solve_bip(mp);
    EXPECT_TRUE(satisfies_constraints(mp, s.object_of));
    EXPECT_NEAR(s.objective, want, 1e-12);
    EXPECT_NEAR(bip_objective(mp, s.object_of), s.objective, 1e-12);
    ++solved;
  }
  EXPECT_GT(solved, 150);
}

TEST(SolveBip, NeverWorseThanGreedy) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    MatchProblem mp = random_problem(rng);
    for (Eigen::Index i = 0; i < mp.p.size(); ++i) {
      if (!std::isfinite(mp.p.data()[i])) mp.p.data()[i] = 1.5;
    }
    const BipSolution g = solve_greedy(mp);
    EXPECT_LE(solve_bip(mp).objective, bip_objective(mp, g.object_of) + 1e-12);
  }
}

TEST(SolveBip, TieBreakIsLexicographic) {
  MatchProblem mp;
  mp.p = Eigen::MatrixXd::Constant(2, 3, 0.5);
  mp.q = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_EQ(solve_bip(mp).object_of, (std::vector<int>{0, 1}));
}

TEST(SolveBip, FewerObjectsThanArticulations) {
  MatchProblem mp;
  mp.p = Eigen::MatrixXd::Zero(3, 2);
  mp.q = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_ARTI_ERROR(solve_bip(mp), ErrorKind::kInfeasible);
}

TEST(SolveBip, RejectsMalformedProblems) {
  MatchProblem mp;
  mp.p = Eigen::MatrixXd::Zero(1, 2);
  mp.q = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_ARTI_ERROR(solve_bip(mp), ErrorKind::kShape);
  mp.q = Eigen::MatrixXd::Zero(2, 2);
  mp.q(0, 1) = 0.5;
  EXPECT_ARTI_ERROR(solve_bip(mp), ErrorKind::kInvalidArgument);
  mp.q(1, 0) = 0.5;
  mp.p(0, 0) = -1.0;
  EXPECT_ARTI_ERROR(solve_bip(mp), ErrorKind::kInvalidArgument);
}

// --------------------------------------------------------------------------

ArticulationEstimate joint(AxisKind kind, const Vec3& dir, const Vec3& point, const Vec3& centroid) {
  ArticulationEstimate e;
  e.kind = kind;
  e.axis = {kind, dir.normalized(), point};
  e.centroid = centroid;
  return e;
}

TEST(GroupJoints, ReopenedDrawerJoinsItsNeighbourDoesNot) {
  const Vec3 y = Vec3::UnitY();
  const std::vector<ArticulationEstimate> arts = {
      joint(AxisKind::kPrismatic, -y, Vec3::Zero(), Vec3(0.3, 1.5, 0.68)),
      joint(AxisKind::kPrismatic, -y, Vec3::Zero(), Vec3(0.3, 1.5, 0.33)),
      // Same top drawer, pulled again and seen from the open state.
      joint(AxisKind::kPrismatic, Vec3(0.01, 1.0, 0.0), Vec3::Zero(), Vec3(0.32, 1.15, 0.69))};
  EXPECT_EQ(group_joints(arts, 10.0, 0.1, 0.25), (std::vector<int>{0, 1, 0}));
}

TEST(GroupJoints, RevoluteNeedsTheSameHingeLine) {
  const Vec3 z = Vec3::UnitZ();
  const std::vector<ArticulationEstimate> arts = {
      joint(AxisKind::kRevolute, z, Vec3(-0.67, 1.49, 0.0), Vec3(-0.42, 1.47, 0.53)),
      // Same door seen open: a different part of the panel is tracked.
      joint(AxisKind::kRevolute, -z, Vec3(-0.66, 1.50, 0.4), Vec3(-0.53, 1.07, 0.70)),
      // Parallel hinge 0.3 m away.
      joint(AxisKind::kRevolute, z, Vec3(-0.37, 1.49, 0.0), Vec3(-0.12, 1.47, 0.53)),
      // Coaxial but a door higher up.
      joint(AxisKind::kRevolute, z, Vec3(-0.67, 1.49, 0.0), Vec3(-0.42, 1.47, 1.10)),
      // Same line, other kind.
      joint(AxisKind::kPrismatic, z, Vec3::Zero(), Vec3(-0.42, 1.47, 0.53))};
  EXPECT_EQ(group_joints(arts, 10.0, 0.1, 0.25), (std::vector<int>{0, 0, 1, 2, 3}));
}

TEST(GroupJoints, TiltedAxesStaySeparate) {
  const std::vector<ArticulationEstimate> arts = {
      joint(AxisKind::kPrismatic, Vec3::UnitY(), Vec3::Zero(), Vec3::Zero()),
      joint(AxisKind::kPrismatic, Vec3(0.0, 1.0, std::tan(15.0 * kPi / 180.0)), Vec3::Zero(), Vec3::Zero())};
  EXPECT_EQ(group_joints(arts, 10.0, 0.1, 0.25), (std::vector<int>{0, 1}));
  EXPECT_EQ(group_joints(arts, 20.0, 0.1, 0.25), (std::vector<int>{0, 0}));
}

TEST(GroupJoints, TransitiveChains) {
  const Vec3 y = Vec3::UnitY();
  std::vector<ArticulationEstimate> arts;
  for (int i = 0; i < 4; ++i) arts.push_back(joint(AxisKind::kPrismatic, y, Vec3::Zero(), Vec3(0.08 * i, 0, 0)));
  EXPECT_EQ(group_joints(arts, 10.0, 0.1, 0.25), (std::vector<int>{0, 0, 0, 0}));
  EXPECT_TRUE(group_joints({}, 10.0, 0.1, 0.25).empty());
}

TEST(GroupMatchProblem, MeansFiniteCostsPerGroup) {
  MatchProblem mp;
  mp.p.resize(3, 2);
  mp.p << 0.2, 0.9, kInf, 0.5, 0.4, kInf;
  mp.q = Eigen::MatrixXd::Zero(2, 2);
  mp.lambda = 0.5;
  const MatchProblem g = group_match_problem(mp, {0, 1, 0});
  ASSERT_EQ(g.p.rows(), 2);
  EXPECT_DOUBLE_EQ(g.p(0, 0), 0.3);
  EXPECT_DOUBLE_EQ(g.p(0, 1), 0.9);
  EXPECT_FALSE(std::isfinite(g.p(1, 0)));
  EXPECT_DOUBLE_EQ(g.p(1, 1), 0.5);
  EXPECT_EQ(g.lambda, 0.5);
  // Two articulations of one joint fit a single object.
  EXPECT_EQ(solve_bip(g).object_of, (std::vector<int>{0, 1}));
  EXPECT_ARTI_ERROR(group_match_problem(mp, {0, 1}), ErrorKind::kShape);
}

// --------------------------------------------------------------------------

Mask rect(int r0, int r1, int c0, int c1) {
  Mask m(10, 10);
  for (int r = r0; r < r1; ++r) {
    for (int c = c0; c < c1; ++c) m.set(r, c);
  }
  return m;
}

TEST(ClassifyContainment, OpenOnly) {
  EXPECT_EQ(classify_containment(rect(2, 4, 2, 4), rect(0, 5, 0, 5), rect(6, 10, 6, 10)),
            ChildRelation::kArticulated);
}

TEST(ClassifyContainment, ClosedOnly) {
  EXPECT_EQ(classify_containment(rect(7, 9, 7, 9), rect(0, 5, 0, 5), rect(6, 10, 6, 10)),
            ChildRelation::kStatic);
}

TEST(ClassifyContainment, BothAtPointSevenPrefersArticulated) {
  // Child is one row of 10 pixels; open covers columns 0..6, closed 3..9.
  const Mask child = rect(0, 1, 0, 10);
  const Mask open = rect(0, 1, 0, 7);
  const Mask closed = rect(0, 1, 3, 10);
  EXPECT_DOUBLE_EQ(containment(child, open), 0.7);
  EXPECT_DOUBLE_EQ(containment(child, closed), 0.7);
  EXPECT_EQ(classify_containment(child, open, closed), ChildRelation::kArticulated);
}

TEST(ClassifyContainment, NeitherIsNone) {
  EXPECT_EQ(classify_containment(rect(0, 10, 0, 10), rect(0, 2, 0, 2), rect(8, 10, 8, 10)),
            ChildRelation::kNone);
}

TEST(ClassifyContainment, InvalidThresholdAndShape) {
  const Mask m = rect(0, 2, 0, 2);
  EXPECT_ARTI_ERROR(classify_containment(m, m, m, 0.0), ErrorKind::kInvalidArgument);
  EXPECT_ARTI_ERROR(classify_containment(m, Mask(3, 3), m), ErrorKind::kShape);
}

TEST(ClassifyContainment, MonotoneInOpenOverlap) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Mask child(10, 10), open(10, 10), closed(10, 10);
    for (std::size_t i = 0; i < child.data.size(); ++i) {
      child.data[i] = u(rng) < 0.3;
      open.data[i] = u(rng) < 0.5;
      closed.data[i] = u(rng) < 0.5;
    }
    ChildRelation prev = classify_containment(child, open, closed);
    for (std::size_t i = 0; i < child.data.size(); ++i) {
      if (!child.data[i] || open.data[i]) continue;
      open.data[i] = 1;
      const ChildRelation now = classify_containment(child, open, closed);
      if (prev == ChildRelation::kArticulated) {
        EXPECT_EQ(now, ChildRelation::kArticulated);
      }
      prev = now;
    }
  }
}

// --------------------------------------------------------------------------

ArticulationEstimate profile(std::vector<double> thetas, int first_frame = 100) {
  ArticulationEstimate a;
  a.thetas = std::move(thetas);
  for (std::size_t i = 0; i < a.thetas.size(); ++i) a.frames.push_back(first_frame + static_cast<int>(i));
  return a;
}

TEST(MaxOpenFrame, MonotoneOpeningIsLast) {
  EXPECT_EQ(max_open_frame(profile({0.0, 0.1, 0.2, 0.4, 0.5})), 104);
}

TEST(MaxOpenFrame, TriangleIsApex) {
  EXPECT_EQ(max_open_frame(profile({0.0, 0.2, 0.5, 0.7, 0.4, 0.1})), 103);
}

TEST(MaxOpenFrame, TiesGoEarliest) {
  EXPECT_EQ(max_open_frame(profile({0.0, 0.5, 0.5, 0.2})), 101);
}

TEST(MaxOpenFrame, MirroredModeFlipsOrientation) {
  ArticulationEstimate a = profile({0.0, -0.2, -0.5, -0.6});
  a.mode.value = ModeValue::kOpening;
  EXPECT_EQ(max_open_frame(a), 103);
}

TEST(MaxOpenFrame, NoisyProfileMatchesEnumeration) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> th(25);
    for (auto& v : th) v = n(rng);
    std::size_t best = 0;
    for (std::size_t i = 0; i < th.size(); ++i) {
      if (th[i] > th[best]) best = i;
    }
    EXPECT_EQ(max_open_frame(profile(th, 0)), static_cast<int>(best));
  }
}

TEST(MaxOpenFrame, EmptyRejected) {
  EXPECT_ARTI_ERROR(max_open_frame(profile({})), ErrorKind::kInvalidArgument);
}

// --------------------------------------------------------------------------

TEST(GraphJson, EmptyRoundtrip) {
  const SceneGraph g;
  const Json doc = serialize_graph(g);
  EXPECT_EQ(serialize_graph(load_graph(doc)).dump(), doc.dump());
}

TEST(GraphJson, SimulatedGraphRoundtripIsBitIdentical) {
  const SimOutput sim = simulate(preset("fridge", 4));
  const PipelineConfig cfg;
  const SceneGraph g = run_match(sim.bundle, run_estimate(sim.bundle, run_segment(sim.bundle, cfg).segments, cfg), cfg);
  ASSERT_FALSE(g.articulations.empty());
  ASSERT_FALSE(g.children.empty());
  const Json doc = serialize_graph(g);
  const SceneGraph back = load_graph(Json::parse(doc.dump()));
  EXPECT_EQ(serialize_graph(back).dump(), doc.dump());
  ASSERT_EQ(back.articulations.size(), g.articulations.size());
  for (std::size_t i = 0; i < g.articulations.size(); ++i) {
    const auto& a = g.articulations[i].estimate;
    const auto& b = back.articulations[i].estimate;
    for (int c = 0; c < 3; ++c) {
      EXPECT_EQ(a.twist.omega[c], b.twist.omega[c]);
      EXPECT_EQ(a.twist.vel[c], b.twist.vel[c]);
    }
    EXPECT_EQ(a.thetas, b.thetas);
  }
}

TEST(GraphJson, UnknownVersionRejected) {
  Json doc = serialize_graph(SceneGraph{});
  doc["version"] = kGraphVersion + 1;
  EXPECT_ARTI_ERROR(load_graph(doc), ErrorKind::kVersion);
  doc.erase("version");
  EXPECT_ARTI_ERROR(load_graph(doc), ErrorKind::kVersion);
}

TEST(GraphJson, MalformedIsValidationError) {
  Json doc = serialize_graph(SceneGraph{});
  doc.erase("matches");
  EXPECT_ARTI_ERROR(load_graph(doc), ErrorKind::kValidation);
}

}  // namespace
}  // namespace artiscene
