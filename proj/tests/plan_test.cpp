#include <gtest/gtest.h>

#include <random>

#include "pt/errors.hpp"
#include "pt/plan.hpp"
#include "support/fixtures.hpp"
#include "support/sampling_oracle.hpp"

namespace pt {
namespace {

using testing::line_trajectory;
using testing::random_trajectory;

PlanFeatureSpec first_two() {
  PlanFeatureSpec spec;
  spec.state_indices = {0, 1};
  return spec;
}

TEST(SamplePlanIndices, FixedTimeWorkedExample) {
  auto traj = line_trajectory(11, 2);
  EXPECT_EQ(sample_plan_indices(traj, 0, 5, SamplingMethod::kFixedTime, first_two()),
            (std::vector<std::size_t>{2, 4, 6, 8, 10}));
}

TEST(SamplePlanIndices, LogTimeWorkedExample) {
  auto traj = line_trajectory(8, 2);
  EXPECT_EQ(sample_plan_indices(traj, 0, 3, SamplingMethod::kLogTime, first_two()),
            (std::vector<std::size_t>{1, 3, 7}));
}

// Distance picks the first index reaching the target while time rounds to the
// nearest, so the two agree on a uniform line when n divides the horizon.
TEST(SamplePlanIndices, DistanceMatchesTimeOnStraightLine) {
  for (std::size_t length : {5u, 11u, 37u, 101u}) {
    auto traj = line_trajectory(length, 2);
    for (std::size_t n = 1; n < length; ++n) {
      if ((length - 1) % n != 0) continue;
      EXPECT_EQ(sample_plan_indices(traj, 0, n, SamplingMethod::kFixedDistance, first_two()),
                sample_plan_indices(traj, 0, n, SamplingMethod::kFixedTime, first_two()))
          << "T=" << length << " n=" << n;
    }
  }
}

TEST(SamplePlanIndices, LastStepGivesDegeneratePlan) {
  auto traj = line_trajectory(6, 2);
  for (auto m : {SamplingMethod::kFixedTime, SamplingMethod::kLogDistance}) {
    EXPECT_EQ(sample_plan_indices(traj, 5, 4, m, first_two()),
              (std::vector<std::size_t>(4, 5)));
  }
}

TEST(SamplePlanIndices, StartOutsideTrajectoryIsRejected) {
  auto traj = line_trajectory(6, 2);
  EXPECT_THROW(sample_plan_indices(traj, 6, 2, SamplingMethod::kFixedTime, first_two()),
               ContractViolation);
}

TEST(SamplePlanIndices, StationaryTrajectoryRepeatsLastIndex) {
  std::vector<Real> states(10 * 2, Real(1));
  auto traj = make_trajectory(2, 1, states, std::vector<Real>(10, 0), std::vector<Real>(10, 0),
                              false);
  auto idx = sample_plan_indices(traj, 0, 4, SamplingMethod::kFixedDistance, first_two());
  EXPECT_EQ(idx.back(), 9u);
  for (std::size_t i : idx) EXPECT_GE(i, 1u);
}

struct Case {
  std::size_t length, t0, n;
  SamplingMethod method;
};

std::vector<Case> random_cases(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> len(1, 120), n_pick(1, 20);
  std::uniform_int_distribution<int> method(0, 3);
  std::vector<Case> cases;
  for (std::size_t i = 0; i < count; ++i) {
    Case c;
    c.length = len(rng);
    c.t0 = std::uniform_int_distribution<std::size_t>(0, c.length - 1)(rng);
    c.n = n_pick(rng);
    c.method = static_cast<SamplingMethod>(method(rng));
    cases.push_back(c);
  }
  return cases;
}

TEST(SamplePlanIndices, MatchesBruteForceOracle) {
  Rng rng(7);
  for (const Case& c : random_cases(500, 11)) {
    auto traj = random_trajectory(rng, c.length, 3, 2);
    auto got = sample_plan_indices(traj, c.t0, c.n, c.method, first_two());
    auto want = testing::oracle_plan_indices(traj, c.t0, c.n, c.method, first_two());
    ASSERT_EQ(got, want) << "T=" << c.length << " t0=" << c.t0 << " n=" << c.n
                         << " method=" << to_string(c.method);
  }
}

TEST(SamplePlanIndices, IndicesNonDecreasingAndInRange) {
  Rng rng(3);
  for (const Case& c : random_cases(500, 12)) {
    auto traj = random_trajectory(rng, c.length, 2, 1);
    auto idx = sample_plan_indices(traj, c.t0, c.n, c.method, first_two());
    ASSERT_EQ(idx.size(), c.n);
    EXPECT_EQ(idx.back(), c.length - 1);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (c.t0 + 1 < c.length) {
        EXPECT_GT(idx[k], c.t0);
      }
      EXPECT_LT(idx[k], c.length);
      if (k > 0) {
        EXPECT_GE(idx[k], idx[k - 1]);
      }
    }
  }
}

TEST(SamplePlanIndices, LogTimeGapsGrow) {
  for (std::size_t length : {20u, 64u, 200u}) {
    for (std::size_t n = 2; n <= 8; ++n) {
      auto traj = line_trajectory(length, 2);
      auto idx = sample_plan_indices(traj, 0, n, SamplingMethod::kLogTime, first_two());
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        const long prev_gap = static_cast<long>(idx[k]) - static_cast<long>(idx[k - 1]);
        const long gap = static_cast<long>(idx[k + 1]) - static_cast<long>(idx[k]);
        EXPECT_GE(gap, prev_gap - 1) << "T=" << length << " n=" << n << " k=" << k;
      }
    }
  }
}

TEST(SamplePlanIndices, FixedDistanceOvershootBoundedByOneStep) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto traj = random_trajectory(rng, 40, 2, 1);
    const std::size_t n = 6;
    auto idx = sample_plan_indices(traj, 0, n, SamplingMethod::kFixedDistance, first_two());
    const double total = testing::oracle_arc_length(traj, 0, 39, {0, 1});
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double target = total * static_cast<double>(k + 1) / n;
      const double reached = testing::oracle_arc_length(traj, 0, idx[k], {0, 1});
      const double step = idx[k] == 0 ? 0.0
                                      : reached - testing::oracle_arc_length(traj, 0, idx[k] - 1, {0, 1});
      EXPECT_GE(reached + 1e-9, target);
      EXPECT_LE(reached - target, step + 1e-9);
    }
  }
}

TEST(ExtractPlan, AllStateDimsGiveSnapshots) {
  Rng rng(1);
  auto traj = random_trajectory(rng, 12, 3, 2);
  PlanFeatureSpec spec;
  spec.state_indices = {0, 1, 2};
  std::vector<std::size_t> idx = {3, 7, 11};
  auto plan = extract_plan(traj, idx, spec, traj.rtg);
  ASSERT_EQ(plan.feature_dim, 3u);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(plan.row(k)[i], traj.state(idx[k])[i]);
  }
  EXPECT_FALSE(plan.is_relative);
}

TEST(ExtractPlan, ZeroRewardsGiveZeroRtgColumn) {
  auto traj = line_trajectory(9, 2);
  PlanFeatureSpec spec = first_two();
  spec.include_rtg = true;
  std::vector<std::size_t> idx = {2, 5, 8};
  auto plan = extract_plan(traj, idx, spec, traj.rtg);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(plan.row(k)[2], 0.0);
}

TEST(ExtractPlan, ActionsAndRtgConcatenatedInOrder) {
  auto traj = make_trajectory(2, 1, {0, 1, 2, 3, 4, 5}, {10, 20, 30}, {1, 0, 2}, true);
  PlanFeatureSpec spec;
  spec.state_indices = {1};
  spec.include_actions = true;
  spec.include_rtg = true;
  std::vector<std::size_t> idx = {1, 2};
  auto plan = extract_plan(traj, idx, spec, traj.rtg);
  EXPECT_EQ(plan.tokens, (std::vector<double>{3, 20, 2, 5, 30, 2}));
  EXPECT_EQ(plan.source_indices, idx);
}

TEST(MakeRelative, ZeroAnchorLeavesTokens) {
  auto traj = line_trajectory(9, 2);
  std::vector<std::size_t> idx = {4, 8};
  auto plan = extract_plan(traj, idx, first_two(), traj.rtg);
  std::vector<Real> zero(2, 0);
  auto rel = make_relative(plan, zero, first_two());
  EXPECT_EQ(rel.tokens, plan.tokens);
  EXPECT_TRUE(rel.is_relative);
}

TEST(MakeRelative, SubtractsAnchorFromStateColumnsOnly) {
  Plan plan;
  plan.n_tokens = 1;
  plan.feature_dim = 3;
  plan.state_features = 2;
  plan.tokens = {3, 4, 7};
  PlanFeatureSpec spec = first_two();
  spec.include_rtg = true;
  std::vector<Real> anchor = {1, 1, 9};
  auto rel = make_relative(plan, anchor, spec);
  EXPECT_EQ(rel.tokens, (std::vector<double>{2, 3, 7}));
}

TEST(MakeRelative, RejectsRelativePlan) {
  Plan plan;
  plan.is_relative = true;
  std::vector<Real> anchor = {0, 0};
  EXPECT_THROW(make_relative(plan, anchor, first_two()), ContractViolation);
  EXPECT_THROW(make_absolute(Plan{}, anchor, first_two()), ContractViolation);
}

TEST(MakeRelative, RoundTripIsBitExact) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    auto traj = random_trajectory(rng, 30, 4, 2);
    PlanFeatureSpec spec;
    spec.state_indices = {0, 2, 3};
    spec.include_actions = true;
    spec.include_rtg = true;
    const std::size_t t0 = static_cast<std::size_t>(trial % 29);
    auto idx = sample_plan_indices(traj, t0, 5, SamplingMethod::kLogDistance, spec);
    auto plan = extract_plan(traj, idx, spec, traj.rtg);
    auto anchor = traj.state(t0);
    auto back = make_absolute(make_relative(plan, anchor, spec), anchor, spec);
    EXPECT_EQ(back.tokens, plan.tokens);
    EXPECT_FALSE(back.is_relative);
  }
}

}  // namespace
}  // namespace pt
