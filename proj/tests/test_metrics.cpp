// artiscene - articulated 3D scene graphs from point trajectories
//
// Unit tests: axis, type, segmentation, part and child metrics, and the
// Hungarian solver behind them.

#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "artiscene/hungarian.hpp"
#include "artiscene/metrics.hpp"
#include "test_util.hpp"

namespace artiscene {
namespace {

ScrewAxis line(const Vec3& d, const Vec3& p) { return {AxisKind::kRevolute, d, p}; }

TEST(AxisAngleError, Identical) {
  const ScrewAxis a = line(Vec3(0.3, -0.2, 0.9).normalized(), Vec3(1, 2, 3));
  EXPECT_EQ(axis_angle_error(a, a), 0.0);
}

TEST(AxisAngleError, AntiparallelFolds) {
  EXPECT_EQ(axis_angle_error(line(Vec3::UnitZ(), Vec3::Zero()), line(-Vec3::UnitZ(), Vec3::Zero())), 0.0);
  EXPECT_NEAR(axis_angle_error(line(Vec3::UnitZ(), Vec3::Zero()), line(-Vec3::UnitZ(), Vec3::Zero()), false),
              180.0, 1e-12);
}

TEST(AxisAngleError, FortyFive) {
  EXPECT_NEAR(axis_angle_error(line(Vec3::UnitX(), Vec3::Zero()),
                               line(Vec3(1, 1, 0).normalized(), Vec3::Zero())),
              45.0, 1e-12);
}

TEST(AxisAngleError, SymmetricAndSignInvariant) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const ScrewAxis a = line(Vec3(n(rng), n(rng), n(rng)).normalized(), Vec3::Zero());
    const ScrewAxis b = line(Vec3(n(rng), n(rng), n(rng)).normalized(), Vec3::Zero());
    const double e = axis_angle_error(a, b);
    EXPECT_NEAR(axis_angle_error(b, a), e, 1e-12);
    EXPECT_NEAR(axis_angle_error(line(-a.direction, a.point), b), e, 1e-9);
    EXPECT_NEAR(axis_angle_error(a, line(-b.direction, b.point)), e, 1e-9);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 90.0);
  }
}

TEST(AxisPositionError, Identical) {
  const ScrewAxis a = line(Vec3::UnitZ(), Vec3(1, 1, 0));
  EXPECT_EQ(axis_position_error(a, a), 0.0);
}

TEST(AxisPositionError, ParallelOffset) {
  EXPECT_NEAR(axis_position_error(line(Vec3::UnitZ(), Vec3(0.3, 0, 0)), line(Vec3::UnitZ(), Vec3::Zero())),
              0.3, 1e-15);
}

TEST(AxisPositionError, SkewLines) {
  const double d = axis_position_error(line(Vec3::UnitZ(), Vec3::Zero()), line(Vec3::UnitX(), Vec3(0, 1, 0)));
  EXPECT_NEAR(d, 1.0, 1e-12);
}

TEST(AxisPositionError, IntersectingLinesAreZero) {
  // The x-axis through (0, 0, 1) meets the z-axis there.
  const double d = axis_position_error(line(Vec3::UnitZ(), Vec3::Zero()), line(Vec3::UnitX(), Vec3(0, 0, 1)));
  EXPECT_NEAR(d, 0.0, 1e-12);
}

TEST(AxisPositionError, InvariantToSlidingSupportPoints) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 da = Vec3(n(rng), n(rng), n(rng)).normalized();
    // Every fourth pair is parallel to exercise the other branch.
    const Vec3 db = trial % 4 == 0 ? da : Vec3(n(rng), n(rng), n(rng)).normalized();
    const ScrewAxis a = line(da, Vec3(n(rng), n(rng), n(rng)));
    const ScrewAxis b = line(db, Vec3(n(rng), n(rng), n(rng)));
    const double base = axis_position_error(a, b);
    EXPECT_GE(base, 0.0);
    const ScrewAxis a2 = line(da, a.point + 3.0 * n(rng) * da);
    const ScrewAxis b2 = line(db, b.point + 3.0 * n(rng) * db);
    EXPECT_NEAR(axis_position_error(a2, b2), base, 1e-9);
  }
}

TEST(TypeMetrics, AllCorrect) {
  const std::vector<AxisKind> k = {AxisKind::kPrismatic, AxisKind::kRevolute, AxisKind::kRevolute};
  const TypeMetrics m = type_metrics(k, k);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.prismatic_recall, 1.0);
  EXPECT_EQ(m.revolute_recall, 1.0);
}

TEST(TypeMetrics, AllPrismaticOnHalfHalf) {
  const std::vector<AxisKind> gt = {AxisKind::kPrismatic, AxisKind::kPrismatic,
                                    AxisKind::kRevolute, AxisKind::kRevolute};
  const std::vector<AxisKind> pred(4, AxisKind::kPrismatic);
  const TypeMetrics m = type_metrics(pred, gt);
  EXPECT_EQ(m.accuracy, 0.5);
  EXPECT_EQ(m.prismatic_recall, 1.0);
  EXPECT_EQ(m.revolute_recall, 0.0);
}

TEST(TypeMetrics, RandomMatchesHandCount) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<AxisKind> pred, gt;
    int ok = 0, np = 0, hp = 0, nr = 0, hr = 0;
    for (int i = 0; i < 20; ++i) {
      pred.push_back(coin(rng) ? AxisKind::kPrismatic : AxisKind::kRevolute);
      gt.push_back(coin(rng) ? AxisKind::kPrismatic : AxisKind::kRevolute);
      ok += pred.back() == gt.back();
      if (gt.back() == AxisKind::kPrismatic) {
        ++np;
        hp += pred.back() == gt.back();
      } else {
        ++nr;
        hr += pred.back() == gt.back();
      }
    }
    const TypeMetrics m = type_metrics(pred, gt);
    EXPECT_DOUBLE_EQ(m.accuracy, ok / 20.0);
    EXPECT_DOUBLE_EQ(m.prismatic_recall, np ? static_cast<double>(hp) / np : 0.0);
    EXPECT_DOUBLE_EQ(m.revolute_recall, nr ? static_cast<double>(hr) / nr : 0.0);
  }
}

TEST(TypeMetrics, LengthMismatch) {
  const std::vector<AxisKind> a(2, AxisKind::kRevolute), b(3, AxisKind::kRevolute);
  EXPECT_ARTI_ERROR(type_metrics(a, b), ErrorKind::kShape);
}

std::vector<std::uint8_t> run(int n, int s, int e) {
  std::vector<std::uint8_t> v(static_cast<std::size_t>(n), 0);
  for (int i = s; i < e; ++i) v[i] = 1;
  return v;
}

TEST(Iou1d, Examples) {
  EXPECT_EQ(iou_1d(run(20, 3, 9), run(20, 3, 9)), 1.0);
  EXPECT_EQ(iou_1d(run(20, 0, 5), run(20, 10, 15)), 0.0);
  EXPECT_DOUBLE_EQ(iou_1d(run(20, 0, 6), run(20, 3, 9)), 1.0 / 3.0);
  EXPECT_EQ(iou_1d(run(20, 0, 0), run(20, 0, 0)), 0.0);
}

TEST(Iou1d, Symmetric) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint8_t> a(50), b(50);
    for (int i = 0; i < 50; ++i) {
      a[i] = coin(rng);
      b[i] = coin(rng);
    }
    EXPECT_EQ(iou_1d(a, b), iou_1d(b, a));
  }
}

TEST(SegmentMatching, ExactSet) {
  const std::vector<InteractionSegment> s = {{0, 10}, {20, 35}, {50, 60}};
  const SegmentMetrics m = segment_matching(s, s, 30.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.mean_iou, 1.0);
  EXPECT_EQ(m.onset_error_s, 0.0);
  EXPECT_EQ(m.offset_error_s, 0.0);
}

TEST(SegmentMatching, OnePredCoveringTwoTruths) {
  const std::vector<InteractionSegment> pred = {{0, 30}};
  const std::vector<InteractionSegment> gt = {{0, 20}, {22, 30}};
  const SegmentMetrics m = segment_matching(pred, gt, 30.0);
  ASSERT_EQ(m.matches.size(), 1u);
  EXPECT_EQ(m.matches[0].gt, 0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 0.5);
  EXPECT_DOUBLE_EQ(m.offset_error_s, 10.0 / 30.0);
}

TEST(SegmentMatching, EmptyPredictions) {
  const std::vector<InteractionSegment> gt = {{0, 20}};
  const SegmentMetrics m = segment_matching({}, gt, 30.0);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
}

TEST(SegmentMatching, GateDropsWeakPairs) {
  const std::vector<InteractionSegment> pred = {{0, 10}};
  const std::vector<InteractionSegment> gt = {{6, 16}};
  EXPECT_TRUE(segment_matching(pred, gt, 30.0).matches.empty());
}

TEST(SegmentMatching, SwapExchangesPrecisionAndRecall) {
  std::mt19937_64 rng(5);
  auto random_segs = [&](int n) {
    std::vector<InteractionSegment> s;
    int t = 0;
    for (int i = 0; i < n; ++i) {
      t += std::uniform_int_distribution<int>(0, 15)(rng);
      const int len = std::uniform_int_distribution<int>(5, 25)(rng);
      s.push_back({t, t + len});
      t += len;
    }
    return s;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_segs(1 + trial % 4);
    const auto b = random_segs(1 + (trial / 4) % 4);
    const SegmentMetrics ab = segment_matching(a, b, 30.0);
    const SegmentMetrics ba = segment_matching(b, a, 30.0);
    EXPECT_EQ(ab.matches.size(), ba.matches.size());
    EXPECT_DOUBLE_EQ(ab.precision, ba.recall);
    EXPECT_DOUBLE_EQ(ab.recall, ba.precision);
  }
}

double brute_force_assignment(const Eigen::MatrixXd& c) {
  // Rows <= cols: try every ordered choice of columns.
  const bool transpose = c.rows() > c.cols();
  const Eigen::MatrixXd a = transpose ? Eigen::MatrixXd(c.transpose()) : c;
  std::vector<int> cols(static_cast<std::size_t>(a.cols()));
  std::iota(cols.begin(), cols.end(), 0);
  double best = kInf;
  do {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) s += a(i, cols[i]);
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

TEST(Hungarian, DiagonalFavoured) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(4, 4, 5.0);
  c.diagonal().setZero();
  const Assignment a = hungarian(c);
  EXPECT_EQ(a.row_to_col, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(a.cost, 0.0);
}

TEST(Hungarian, EqualCostsTakeLowestColumns) {
  const Assignment a = hungarian(Eigen::MatrixXd::Constant(3, 5, 1.0));
  EXPECT_EQ(a.row_to_col, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(a.cost, 3.0);
}

TEST(Hungarian, MoreRowsThanColumns) {
  Eigen::MatrixXd c(3, 2);
  c << 1, 9, 9, 1, 0, 0;
  const Assignment a = hungarian(c);
  ASSERT_EQ(a.row_to_col.size(), 3u);
  EXPECT_EQ(std::count(a.row_to_col.begin(), a.row_to_col.end(), -1), 1);
  EXPECT_DOUBLE_EQ(a.cost, brute_force_assignment(c));
}

TEST(Hungarian, MatchesBruteForce) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 7)(rng);
    const int m = std::uniform_int_distribution<int>(1, 7)(rng);
    Eigen::MatrixXd c(n, m);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
    const Assignment a = hungarian(c);
    EXPECT_NEAR(a.cost, brute_force_assignment(c), 1e-9);
    std::vector<char> used(static_cast<std::size_t>(m), 0);
    double sum = 0.0;
    int assigned = 0;
    for (int i = 0; i < n; ++i) {
      const int j = a.row_to_col[i];
      if (j < 0) continue;
      EXPECT_FALSE(used[j]);
      used[j] = 1;
      sum += c(i, j);
      ++assigned;
    }
    EXPECT_EQ(assigned, std::min(n, m));
    EXPECT_NEAR(sum, a.cost, 1e-12);
  }
}

Aabb box(const Vec3& lo, const Vec3& hi) { return {lo, hi}; }

TEST(PartMetrics, IdenticalBoxes) {
  const std::vector<Aabb> b = {box({0, 0, 0}, {1, 1, 1}), box({2, 0, 0}, {3, 2, 1})};
  const PartMetrics m = part_segmentation_metrics(b, b);
  EXPECT_EQ(m.mean_iou, 1.0);
  for (double r : m.recall) EXPECT_EQ(r, 1.0);
}

TEST(PartMetrics, HalfSharedVolume) {
  const std::vector<Aabb> pred = {box({0, 0, 0}, {2, 1, 1})};
  const std::vector<Aabb> gt = {box({1, 0, 0}, {3, 1, 1})};
  const PartMetrics m = part_segmentation_metrics(pred, gt);
  EXPECT_DOUBLE_EQ(m.mean_iou, 1.0 / 3.0);
  EXPECT_EQ(m.recall[0], 1.0);
  EXPECT_EQ(m.recall[1], 0.0);
  EXPECT_EQ(m.recall[2], 0.0);
}

TEST(PartMetrics, Disjoint) {
  const std::vector<Aabb> pred = {box({0, 0, 0}, {1, 1, 1})};
  const std::vector<Aabb> gt = {box({5, 5, 5}, {6, 6, 6})};
  const PartMetrics m = part_segmentation_metrics(pred, gt);
  EXPECT_EQ(m.mean_iou, 0.0);
  for (double r : m.recall) EXPECT_EQ(r, 0.0);
}

// One point at the center of every voxel of an nx x ny x nz block.
std::vector<Vec3> lattice(int nx, int ny, int nz, const Vec3& offset) {
  const double v = 0.015;
  std::vector<Vec3> p;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < nz; ++k) p.push_back(offset + v * Vec3(i + 0.5, j + 0.5, k + 0.5));
    }
  }
  return p;
}

TEST(ChildMetrics, IdenticalSets) {
  const std::vector<ChildInstance> c = {{lattice(4, 4, 4, Vec3::Zero()), ChildRelation::kStatic}};
  const ChildMetrics m = child_metrics(c, c);
  EXPECT_EQ(m.mean_iou, 1.0);
  EXPECT_EQ(m.recall_25, 1.0);
  EXPECT_EQ(m.relation_accuracy, 1.0);
}

TEST(ChildMetrics, OffsetTwoVoxelsShareNothing) {
  const std::vector<ChildInstance> a = {{lattice(2, 2, 2, Vec3::Zero()), ChildRelation::kStatic}};
  const std::vector<ChildInstance> b = {{lattice(2, 2, 2, Vec3(0.03, 0, 0)), ChildRelation::kStatic}};
  const ChildMetrics m = child_metrics(a, b);
  EXPECT_EQ(m.mean_iou, 0.0);
  EXPECT_EQ(m.recall_25, 0.0);
}

TEST(ChildMetrics, InterleavedLattices) {
  // A fills a 4x4x4 block; B fills the even-parity voxels of the same block
  // shifted by one voxel in x.
  std::vector<Vec3> a = lattice(4, 4, 4, Vec3::Zero());
  std::vector<Vec3> b;
  for (const auto& p : lattice(4, 4, 4, Vec3(0.015, 0, 0))) {
    const auto i = static_cast<int>(std::floor(p.x() / 0.015));
    const auto j = static_cast<int>(std::floor(p.y() / 0.015));
    const auto k = static_cast<int>(std::floor(p.z() / 0.015));
    if ((i + j + k) % 2 == 0) b.push_back(p);
  }
  // |B| = 32; shared voxels have i in 1..3 and even parity: 3*16/2 = 24.
  // IoU = 24 / (64 + 32 - 24) = 1/3.
  EXPECT_EQ(b.size(), 32u);
  EXPECT_DOUBLE_EQ(voxel_iou(a, b), 24.0 / 72.0);
  const std::vector<ChildInstance> pa = {{a, ChildRelation::kArticulated}};
  const std::vector<ChildInstance> gb = {{b, ChildRelation::kStatic}};
  const ChildMetrics m = child_metrics(pa, gb);
  EXPECT_DOUBLE_EQ(m.mean_iou, 1.0 / 3.0);
  EXPECT_EQ(m.recall_25, 1.0);
  EXPECT_EQ(m.relation_accuracy, 0.0);
}

}  // namespace
}  // namespace artiscene
