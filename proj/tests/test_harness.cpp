#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "discreg/harness.hpp"

using namespace discreg;

namespace {

SweepSpec small_spec(Experiment e) {
  SweepSpec spec;
  spec.experiment = e;
  spec.n_instances = 4;
  spec.master_seed = 99;
  spec.n_iter = 500;
  switch (e) {
    case Experiment::kTd0Discount:
    case Experiment::kLstdDiscount:
      spec.sweep_values = {0.9, 0.95, 0.99};
      spec.secondary_values = {1, 4};
      break;
    case Experiment::kTd0L2:
    case Experiment::kLstdL2:
      spec.sweep_values = {0.0, 0.001};
      spec.secondary_values = {2};
      break;
    case Experiment::kUniformity:
      spec.sweep_values = {0.95, 0.99};
      spec.secondary_values = {0.1, 0.6};
      break;
    case Experiment::kMixing:
      spec.sweep_values = {0.95, 0.99};
      spec.secondary_values = {2, 20};
      break;
    case Experiment::kPolicyOpt:
      spec.sweep_values = {0.95, 0.99};
      spec.secondary_values = {4};
      spec.traj_len = 10;
      spec.episodes = 2;
      break;
    case Experiment::kGrid2d:
      spec.sweep_values = {0.95, 0.99};
      spec.secondary_values = {0.0, 0.001};
      spec.n_traj = 4;
      spec.traj_len = 10;
      spec.episodes = 2;
      break;
  }
  return spec;
}

const Experiment kAll[] = {Experiment::kTd0Discount, Experiment::kTd0L2,      Experiment::kLstdDiscount,
                           Experiment::kLstdL2,      Experiment::kUniformity, Experiment::kMixing,
                           Experiment::kPolicyOpt,   Experiment::kGrid2d};

}  // namespace

TEST(ExperimentNames, RoundTrip) {
  for (auto e : kAll) EXPECT_EQ(experiment_from_string(to_string(e)), e);
  EXPECT_THROW(experiment_from_string("nope"), std::invalid_argument);
}

TEST(SweepSpec, Validation) {
  auto spec = small_spec(Experiment::kTd0Discount);
  EXPECT_NO_THROW(spec.validate());
  auto empty = spec;
  empty.sweep_values.clear();
  EXPECT_THROW(empty.validate(), std::invalid_argument);
  auto zero = spec;
  zero.n_instances = 0;
  EXPECT_THROW(zero.validate(), std::invalid_argument);
  auto high = spec;
  high.sweep_values = {0.995};
  EXPECT_THROW(high.validate(), std::invalid_argument);
}

TEST(RunSweep, EveryExperimentProducesOrderedRows) {
  for (auto e : kAll) {
    const auto spec = small_spec(e);
    const auto result = run_sweep(spec, 2);
    ASSERT_EQ(result.rows.size(), spec.sweep_values.size() * spec.secondary_values.size())
        << to_string(e);
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      const auto& row = result.rows[i];
      EXPECT_EQ(row.experiment, to_string(e));
      EXPECT_EQ(row.n_reps, spec.n_instances);
      EXPECT_TRUE(std::isfinite(row.loss_mean));
      EXPECT_LE(row.ci_low, row.loss_mean);
      EXPECT_LE(row.loss_mean, row.ci_high);
      if (i > 0) {
        const auto& prev = result.rows[i - 1];
        EXPECT_TRUE(prev.secondary < row.secondary ||
                    (prev.secondary == row.secondary && prev.sweep < row.sweep));
      }
    }
  }
}

TEST(RunSweep, IndependentOfWorkerCount) {
  for (auto e : {Experiment::kTd0Discount, Experiment::kMixing, Experiment::kGrid2d}) {
    const auto spec = small_spec(e);
    const std::string one = result_to_csv(run_sweep(spec, 1));
    EXPECT_EQ(one, result_to_csv(run_sweep(spec, 3)));
    EXPECT_EQ(one, result_to_csv(run_sweep(spec, 8)));
  }
}

TEST(RunSweep, SeedChangesResults) {
  auto spec = small_spec(Experiment::kLstdDiscount);
  const auto a = run_sweep(spec, 1);
  spec.master_seed += 1;
  EXPECT_NE(result_to_csv(a), result_to_csv(run_sweep(spec, 1)));
}

TEST(RunSweep, RankingLoss) {
  auto spec = small_spec(Experiment::kLstdDiscount);
  spec.loss = LossKind::kRanking;
  for (const auto& row : run_sweep(spec, 1).rows) {
    EXPECT_GE(row.loss_mean, -1.0);
    EXPECT_LE(row.loss_mean, 1.0);
  }
}

TEST(RunSweep, MixingReportsRejections) {
  const auto result = run_sweep(small_spec(Experiment::kMixing), 1);
  EXPECT_GE(result.total_attempts, 2u * 4u);
  EXPECT_LE(result.rejected_attempts, result.total_attempts);
}

TEST(RunSweep, FailureNamesGridPointAndSeed) {
  auto spec = small_spec(Experiment::kUniformity);
  spec.secondary_values = {0.1, 0.999};  // beyond the maximal TV 1 - 1/80
  try {
    run_sweep(spec, 2);
    FAIL() << "expected SweepError";
  } catch (const SweepError& e) {
    EXPECT_EQ(e.secondary(), 0.999);
    EXPECT_NE(std::string(e.what()).find("seed="), std::string::npos);
    EXPECT_NE(e.seed(), 0u);
  }
}

TEST(CurveArgmins, AgreesWithCsvScan) {
  const auto result = run_sweep(small_spec(Experiment::kTd0Discount), 1);
  const auto parsed = result_from_csv(result_to_csv(result));
  std::map<double, std::pair<double, double>> best;  // secondary -> (loss, sweep)
  for (const auto& row : parsed.rows) {
    auto it = best.find(row.secondary);
    if (it == best.end() || row.loss_mean < it->second.first) {
      best[row.secondary] = {row.loss_mean, row.sweep};
    }
  }
  const auto marks = curve_argmins(result);
  ASSERT_EQ(marks.size(), best.size());
  for (const auto& m : marks) EXPECT_EQ(result.rows[m.row].sweep, best[m.secondary].second);
}

TEST(Csv, EmptySingleAndRoundTrip) {
  SweepResult empty;
  EXPECT_EQ(result_to_csv(empty), "experiment,secondary,sweep,loss_mean,ci_low,ci_high,n_reps\n");
  EXPECT_TRUE(result_from_csv(result_to_csv(empty)).rows.empty());

  SweepResult one;
  one.rows.push_back({"td0_discount", 2, 0.9, 1.0 / 3.0, 0.1, 0.5, 100});
  const std::string text = result_to_csv(one);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(result_from_csv(text).rows, one.rows);

  const auto result = run_sweep(small_spec(Experiment::kLstdL2), 1);
  const auto back = result_from_csv(result_to_csv(result));
  ASSERT_EQ(back.rows.size(), result.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    for (auto field : {&SweepRow::secondary, &SweepRow::sweep, &SweepRow::loss_mean,
                       &SweepRow::ci_low, &SweepRow::ci_high}) {
      const double a = result.rows[i].*field, b = back.rows[i].*field;
      EXPECT_LE(std::abs(a - b), 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
  EXPECT_THROW(result_from_csv("bad header\n"), std::invalid_argument);
  EXPECT_THROW(result_from_csv(std::string(text.substr(0, text.find('\n') + 1)) + "a,1,2\n"),
               std::invalid_argument);
}

TEST(Csv, FileRoundTrip) {
  const auto result = run_sweep(small_spec(Experiment::kTd0L2), 1);
  const std::string path = ::testing::TempDir() + "sweep.csv";
  emit_csv(result, path);
  EXPECT_EQ(load_result_csv(path).rows, result_from_csv(result_to_csv(result)).rows);
}

TEST(Svg, CurvesBandsAndStars) {
  const auto result = run_sweep(small_spec(Experiment::kTd0Discount), 1);
  const std::string svg = result_to_svg(result, "t & <x>");
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = svg.find(needle); pos != std::string::npos; pos = svg.find(needle, pos + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count("<polyline"), 2u);
  EXPECT_EQ(count("<polygon"), 2u);
  EXPECT_EQ(count("<path"), 2u);
  EXPECT_NE(svg.find("t &amp; &lt;x&gt;"), std::string::npos);
  EXPECT_NE(result_to_svg(SweepResult{}).find("</svg>"), std::string::npos);
}

TEST(FigurePreset, Examples) {
  for (const auto& name : figure_names()) {
    const auto spec = figure_preset(name);
    EXPECT_NO_THROW(spec.validate()) << name;
    EXPECT_EQ(spec.n_instances, 100u);
    EXPECT_EQ(spec.gamma_eval, 0.99);
  }
  const auto f1a = figure_preset("fig1a");
  EXPECT_EQ(f1a.experiment, Experiment::kTd0Discount);
  EXPECT_EQ(f1a.sweep_values.back(), 0.99);
  EXPECT_EQ(f1a.traj_len, 50u);
  const auto f2c = figure_preset("fig2c");
  EXPECT_EQ(f2c.experiment, Experiment::kMixing);
  EXPECT_EQ(f2c.n_traj, 2u);
  EXPECT_EQ(f2c.traj_len, 50u);
  EXPECT_EQ(figure_preset("fig2a").iid_samples, 400u);
  const auto f4 = figure_preset("fig4");
  EXPECT_EQ(f4.experiment, Experiment::kGrid2d);
  EXPECT_EQ(f4.n_traj, 8u);
  EXPECT_EQ(f4.traj_len, 10u);
  EXPECT_EQ(f4.episodes, 5u);
  EXPECT_EQ(f4.epsilon, 0.1);
  EXPECT_THROW(figure_preset("fig9"), std::invalid_argument);
}

TEST(SweepConfig, JsonRoundTripAndOverrides) {
  const auto spec = figure_preset("fig3b");
  const auto back = sweep_spec_from_json(sweep_spec_to_json(spec));
  EXPECT_EQ(sweep_spec_to_json(back), sweep_spec_to_json(spec));
  const auto over = sweep_spec_from_json(R"({"preset": "fig1a", "n_instances": 7, "master_seed": 3})");
  EXPECT_EQ(over.n_instances, 7u);
  EXPECT_EQ(over.master_seed, 3u);
  EXPECT_EQ(over.sweep_values, figure_preset("fig1a").sweep_values);
  EXPECT_THROW(sweep_spec_from_json(R"({"preset": "fig1a", "bogus": 1})"), std::invalid_argument);
  EXPECT_THROW(sweep_spec_from_json(R"({"experiment": "td0_discount"})"), std::invalid_argument);
}
