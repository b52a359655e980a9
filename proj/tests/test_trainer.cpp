#include <doctest.h>

#include "xorp/trainer.hpp"

#include <set>

using namespace xorp;

namespace {

TrainConfig config_for(int p, std::uint64_t seed) {
  TrainConfig c;
  c.p = p;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("resolve fills size defaults") {
  const auto c = resolve(config_for(5, 1));
  CHECK(c.batch_size == 250);
  CHECK(c.hidden_width == 5);
  CHECK(c.stop_examples == 500);
  CHECK(batches_to_certify(c.stop_examples, c.batch_size) == 2);
  CHECK(batches_to_certify(500, 2) == 250);
  CHECK(batches_to_certify(500, 3) == 167);

  auto bad = config_for(5, 1);
  bad.lr = 0.0;
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
  bad = config_for(1, 1);
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
  bad = config_for(5, 1);
  bad.max_epochs = 0;
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
  bad.max_epochs = 10;
  bad.optimizer = Momentum{2.0};
  CHECK_THROWS_AS(resolve(bad), std::invalid_argument);
}

TEST_CASE("batch presets") {
  CHECK(preset_batch_size(BatchPreset::TenP2, 5) == 250);
  CHECK(preset_batch_size(BatchPreset::P2, 5) == 25);
  CHECK(preset_batch_size(BatchPreset::P2Over10, 5) == 2);
  CHECK(preset_batch_size(BatchPreset::P2Over100, 5) == 1);
  CHECK(preset_batch_size(BatchPreset::P2Over100, 61) == 37);
  CHECK(parse_batch_preset("p2/10") == BatchPreset::P2Over10);
  CHECK_FALSE(parse_batch_preset("p3"));
}

TEST_CASE("classify_failure") {
  const std::vector<double> low = {0.2, 0.35, 0.3};
  const std::vector<double> high = {0.5, 0.97, 0.96};
  CHECK(classify_failure({low}, 0.2) == FailureKind::NeverLearned);
  CHECK(classify_failure({high}, 0.9) == FailureKind::TrappedFalseMinimum);

  TrainingTrace fired{high};
  fired.stop_rule_fired = true;
  CHECK(classify_failure(fired, 24.0 / 25.0) == FailureKind::GeneralizationGap);
  CHECK_THROWS_AS(classify_failure(fired, 1.0), std::logic_error);

  TrainingTrace diverged{high};
  diverged.diverged = true;
  diverged.stop_rule_fired = true;
  diverged.cap_below_certification = true;
  CHECK(classify_failure(diverged, 0.0) == FailureKind::Diverged);

  TrainingTrace cut{high};
  cut.certifying_at_cap = true;
  CHECK(classify_failure(cut, 1.0) == FailureKind::EpochCap);
  TrainingTrace tiny{low};
  tiny.cap_below_certification = true;
  CHECK(classify_failure(tiny, 0.2) == FailureKind::EpochCap);
}

TEST_CASE("a one-epoch cap can never certify") {
  auto c = config_for(5, 3);
  c.max_epochs = 1;
  const auto outcome = run_trial(c);
  CHECK_FALSE(outcome.success);
  CHECK(outcome.failure == FailureKind::EpochCap);
  CHECK(outcome.epochs_used == 1);
  CHECK(outcome.train_acc_history.size() == 1);
}

TEST_CASE("runs are reproducible bit for bit") {
  auto c = config_for(3, 77);
  c.max_epochs = 400;
  const auto a = run_trial(c);
  const auto b = run_trial(c);
  CHECK(a.success == b.success);
  CHECK(a.epochs_used == b.epochs_used);
  CHECK(a.train_acc_history == b.train_acc_history);
  CHECK(a.final_train_loss == b.final_train_loss);
  CHECK(a.final_params.w1 == b.final_params.w1);
  CHECK(a.final_params.b2 == b.final_params.b2);
  c.seed = 78;
  CHECK(run_trial(c).train_acc_history != a.train_acc_history);
}

TEST_CASE("successful runs honour the protocol") {
  int successes = 0;
  for (std::uint64_t t = 0; t < 6; ++t) {
    for (int p : {2, 3, 5}) {
      const auto c = resolve(config_for(p, derive_seed(42, t)));
      const auto outcome = run_trial(c);
      CHECK(outcome.weight_updates == outcome.epochs_used);
      if (!outcome.success) continue;
      ++successes;
      CHECK(outcome.stop_rule_fired);
      CHECK(outcome.final_test_acc == 1.0);
      CHECK_FALSE(outcome.failure);
      const auto need = batches_to_certify(c.stop_examples, c.batch_size);
      REQUIRE(need == 2);
      REQUIRE(outcome.train_acc_history.size() >= 2);
      const auto n = outcome.train_acc_history.size();
      CHECK(outcome.train_acc_history[n - 1] == 1.0);
      CHECK(outcome.train_acc_history[n - 2] == 1.0);
      const auto grid = full_test_grid(p);
      const auto predicted = predict(forward(outcome.final_params, c.activation, grid.inputs));
      for (int i = 0; i < p * p; ++i) CHECK(predicted[i] == class_label(grid.a[i], grid.b[i], p));
    }
  }
  CHECK(successes >= 12);
}

TEST_CASE("small batches certify over many consecutive perfect batches") {
  auto c = config_for(3, 5);
  c.batch_size = 3;
  c.lr = 0.01;
  const auto outcome = run_trial(c);
  REQUIRE(outcome.success);
  const auto need = batches_to_certify(180, 3);
  REQUIRE(outcome.train_acc_history.size() >= static_cast<std::size_t>(need));
  for (long i = 1; i <= need; ++i)
    CHECK(outcome.train_acc_history[outcome.train_acc_history.size() - i] == 1.0);
}

TEST_CASE("an absurd learning rate diverges") {
  auto c = config_for(3, 1);
  c.optimizer = Vanilla{};
  c.lr = 1e300;
  const auto outcome = run_trial(c);
  CHECK_FALSE(outcome.success);
  CHECK(outcome.failure == FailureKind::Diverged);
  CHECK(outcome.weight_updates == outcome.epochs_used);
}

TEST_CASE("derive_seed and downsample") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t base : {0ULL, 1ULL, 42ULL})
    for (std::uint64_t t = 0; t < 100; ++t) seen.insert(derive_seed(base, t));
  CHECK(seen.size() == 300);
  CHECK(derive_seed(42, 3) == derive_seed(42, 3));

  const std::vector<double> v = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(downsample(v, 20) == v);
  CHECK(downsample(v, 1) == std::vector<double>{9});
  CHECK(downsample(v, 0).empty());
  const auto d = downsample(v, 4);
  CHECK(d.size() == 4);
  CHECK(d.front() == 0);
  CHECK(d.back() == 9);
}

TEST_CASE("failure kind names") {
  CHECK(to_string(FailureKind::NeverLearned) == "never_learned");
  CHECK(to_string(FailureKind::TrappedFalseMinimum) == "trapped");
  CHECK(to_string(FailureKind::GeneralizationGap) == "generalization_gap");
  CHECK(to_string(FailureKind::Diverged) == "diverged");
  CHECK(to_string(FailureKind::EpochCap) == "epoch_cap");
}
