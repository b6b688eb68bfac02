#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "pt/errors.hpp"
#include "pt/sequence.hpp"
#include "support/fixtures.hpp"
#include "support/sequence_checks.hpp"

namespace pt {
namespace {

namespace fs = std::filesystem;
using testing::random_trajectory;

std::vector<Real> suffix_sums(const std::vector<Real>& r) {
  std::vector<Real> out(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) {
    double s = 0;
    for (std::size_t u = t; u < r.size(); ++u) s += r[u];
    out[t] = static_cast<Real>(s);
  }
  return out;
}

TEST(ComputeRtg, Examples) {
  EXPECT_EQ(compute_rtg(std::vector<Real>{0, 0, 0}), (std::vector<Real>{0, 0, 0}));
  EXPECT_EQ(compute_rtg(std::vector<Real>{1, 0, 2}), (std::vector<Real>{3, 2, 2}));
  EXPECT_EQ(compute_rtg(std::vector<Real>{5}), (std::vector<Real>{5}));
}

TEST(ComputeRtg, MatchesSuffixSumsAndRecurrence) {
  Rng rng(1);
  std::uniform_int_distribution<int> reward(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Real> r(1 + trial);
    for (auto& v : r) v = static_cast<Real>(reward(rng));
    auto rtg = compute_rtg(r);
    EXPECT_EQ(rtg, suffix_sums(r));
    for (std::size_t t = 0; t + 1 < r.size(); ++t) EXPECT_EQ(rtg[t], r[t] + rtg[t + 1]);
    EXPECT_EQ(rtg.back(), r.back());
  }
}

class DatasetFileTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pt_data_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  fs::path dir_;
};

Dataset random_dataset(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.env_name = "toy";
  d.state_dim = 3;
  d.action_dim = 2;
  d.return_scale = 4.0;
  std::uniform_int_distribution<std::size_t> len(1, 40);
  for (std::size_t i = 0; i < count; ++i) d.trajectories.push_back(random_trajectory(rng, len(rng), 3, 2));
  return d;
}

TEST_F(DatasetFileTest, RoundTripIsBitExact) {
  auto d = random_dataset(20, 3);
  save_dataset(path("d.jsonl"), d);
  auto back = load_dataset(path("d.jsonl"));
  EXPECT_EQ(back.env_name, d.env_name);
  EXPECT_EQ(back.state_dim, d.state_dim);
  EXPECT_EQ(back.action_dim, d.action_dim);
  EXPECT_EQ(back.return_scale, d.return_scale);
  ASSERT_EQ(back.trajectories.size(), d.trajectories.size());
  for (std::size_t i = 0; i < d.trajectories.size(); ++i) {
    EXPECT_EQ(back.trajectories[i].states, d.trajectories[i].states);
    EXPECT_EQ(back.trajectories[i].actions, d.trajectories[i].actions);
    EXPECT_EQ(back.trajectories[i].rewards, d.trajectories[i].rewards);
    EXPECT_EQ(back.trajectories[i].rtg, d.trajectories[i].rtg);
  }
}

TEST_F(DatasetFileTest, EmptyFileGivesEmptyDatasetWithoutStats) {
  write("empty.jsonl", "");
  auto d = load_dataset(path("empty.jsonl"));
  EXPECT_TRUE(d.trajectories.empty());
  EXPECT_THROW(compute_stats(d), SchemaError);
}

TEST_F(DatasetFileTest, MismatchedActionLengthNamesTrajectory) {
  write("bad.jsonl",
        R"({"format":"pt-trajectories","version":1,"env_name":"x","state_dim":1,"action_dim":1,"return_scale":1})"
        "\n"
        R"({"states":[0,1],"actions":[0,0],"rewards":[0,1]})"
        "\n"
        R"({"states":[0,1],"actions":[0],"rewards":[0,1]})"
        "\n");
  try {
    load_dataset(path("bad.jsonl"));
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("trajectory 1"), std::string::npos) << msg;
  }
}

TEST_F(DatasetFileTest, MalformedJsonReportsLine) {
  write("bad.jsonl",
        R"({"format":"pt-trajectories","version":1,"env_name":"x","state_dim":1,"action_dim":1,"return_scale":1})"
        "\n{not json\n");
  try {
    load_dataset(path("bad.jsonl"));
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST_F(DatasetFileTest, InconsistentStoredRtgIsRejected) {
  write("bad.jsonl",
        R"({"format":"pt-trajectories","version":1,"env_name":"x","state_dim":1,"action_dim":1,"return_scale":1})"
        "\n"
        R"({"states":[0,1],"actions":[0,0],"rewards":[1,1],"rtg":[1,1]})"
        "\n");
  EXPECT_THROW(load_dataset(path("bad.jsonl")), SchemaError);
}

TEST_F(DatasetFileTest, MissingFileIsReported) {
  EXPECT_THROW(load_dataset(path("nope.jsonl")), SchemaError);
}

TEST(DatasetStats, StdIsFlooredAndNormalizationInverts) {
  auto d = random_dataset(10, 4);
  // Constant third state dim.
  for (auto& t : d.trajectories) {
    for (std::size_t s = 0; s < t.length(); ++s) t.states.at(s, 2) = 1.5f;
  }
  auto stats = compute_stats(d);
  EXPECT_EQ(stats.state_std[2], kMinStateStd);
  Rng rng(5);
  std::normal_distribution<double> noise(0, 3);
  for (int i = 0; i < 100; ++i) {
    std::vector<Real> s = {static_cast<Real>(noise(rng)), static_cast<Real>(noise(rng)), 1.5f};
    auto back = stats.denormalize_state(stats.normalize_state(s));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(back[j], s[j], 1e-5);
  }
}

TEST(DatasetStats, ReturnsAndMoments) {
  Dataset d;
  d.state_dim = 1;
  d.action_dim = 1;
  d.trajectories.push_back(make_trajectory(1, 1, {1, 3}, {0, 0}, {1, 2}, false));
  d.trajectories.push_back(make_trajectory(1, 1, {5}, {0}, {7}, true));
  auto stats = compute_stats(d);
  EXPECT_DOUBLE_EQ(stats.state_mean[0], 3.0);
  EXPECT_DOUBLE_EQ(stats.state_std[0], std::sqrt(8.0 / 3.0));
  EXPECT_DOUBLE_EQ(stats.max_return, 7.0);
  EXPECT_DOUBLE_EQ(stats.min_return, 3.0);
}

TEST(PrepareTrainingData, ScalesReturnsAndNormalizesStates) {
  auto d = random_dataset(5, 6);
  auto data = prepare_training_data(d);
  ASSERT_EQ(data.trajectories.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& src = d.trajectories[i];
    const auto& dst = data.trajectories[i];
    for (std::size_t t = 0; t < src.length(); ++t) {
      EXPECT_FLOAT_EQ(dst.rtg[t], src.rtg[t] / 4.0f);
      auto norm = data.stats.normalize_state(src.state(t));
      for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(dst.state(t)[j], norm[j]);
    }
  }
  EXPECT_EQ(data.cumulative_steps.back(), d.total_steps());
}

PTConfig batch_config() {
  auto cfg = testing::small_config(3, 2);
  cfg.max_trajectory_ratio = 0.5;
  return cfg;
}

TEST(SampleBatch, DeterministicForSeed) {
  auto data = prepare_training_data(random_dataset(12, 7));
  auto cfg = batch_config();
  auto a = sample_batch(data, cfg, {16, 42});
  auto b = sample_batch(data, cfg, {16, 42});
  ASSERT_EQ(a.size(), 16u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].size(), b[i].size());
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      EXPECT_EQ(a[i].tokens[j].features, b[i].tokens[j].features);
    }
    EXPECT_EQ(a[i].action_targets, b[i].action_targets);
    EXPECT_EQ(a[i].plan_targets, b[i].plan_targets);
  }
}

TEST(SampleBatch, ZeroRatioStartsAtZero) {
  auto data = prepare_training_data(random_dataset(12, 8));
  auto cfg = batch_config();
  cfg.max_trajectory_ratio = 0.0;
  for (auto& seq : sample_batch(data, cfg, {64, 1})) {
    EXPECT_EQ(seq.tokens[first_state_position(cfg)].timestep, 0u);
  }
}

TEST(SampleBatch, SequencesSatisfyInvariantsAndPlansAreAnchored) {
  auto data = prepare_training_data(random_dataset(12, 9));
  auto cfg = batch_config();
  for (auto& seq : sample_batch(data, cfg, {64, 2})) {
    std::size_t steps = 0;
    for (std::size_t k = 0; k < cfg.context_len; ++k) {
      if (!seq.tokens[state_position(cfg, k)].padding) ++steps;
    }
    EXPECT_EQ(testing::check_training_sequence(seq, cfg, steps), "");
    // The final plan token is the trajectory's last state relative to s0, and
    // the goal token carries that same last state.
    const auto& s0 = seq.tokens[first_state_position(cfg)].features;
    const auto& goal = seq.tokens[0].features;
    const auto& last_plan = seq.tokens[plan_slot_position(cfg, cfg.plan_tokens() - 1)].features;
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(goal[j], s0[j]);
      EXPECT_NEAR(last_plan[j], goal[2 + j] - s0[j], 1e-5);
    }
  }
}

TEST(SampleTrajectoryIndex, FrequencyProportionalToLength) {
  Dataset d;
  d.state_dim = 1;
  d.action_dim = 1;
  const std::vector<std::size_t> lengths = {1, 3, 5, 10, 20, 41};
  for (std::size_t len : lengths) {
    d.trajectories.push_back(make_trajectory(1, 1, std::vector<Real>(len, 0),
                                             std::vector<Real>(len, 0),
                                             std::vector<Real>(len, 0), false));
  }
  auto data = prepare_training_data(d);
  Rng rng(123);
  const int draws = 100000;
  std::vector<double> counts(lengths.size(), 0);
  for (int i = 0; i < draws; ++i) counts[sample_trajectory_index(data, rng)] += 1;
  const double total = 80;
  double chi2 = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const double expected = draws * lengths[i] / total;
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  // 5 degrees of freedom, 99.9th percentile.
  EXPECT_LT(chi2, 20.52);
}

TEST(SampleWindowStart, RespectsCap) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_LE(sample_window_start(21, 0.5, rng), 10u);
    EXPECT_EQ(sample_window_start(21, 0.0, rng), 0u);
    EXPECT_EQ(sample_window_start(1, 1.0, rng), 0u);
  }
}

}  // namespace
}  // namespace pt
