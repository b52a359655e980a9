// One training run: noisy batches until 20 p^2 consecutive training examples are classified
// perfectly (or the epoch cap is hit), then a clean evaluation on all p^2 pairs.
#ifndef XORP_TRAINER_HPP
#define XORP_TRAINER_HPP

#include "xorp/activations.hpp"
#include "xorp/dataset.hpp"
#include "xorp/network.hpp"
#include "xorp/optimizers.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace xorp {

enum class BatchPreset { TenP2, P2, P2Over10, P2Over100 };

/// 10p^2, p^2, max(1, p^2/10), max(1, p^2/100).
int preset_batch_size(BatchPreset preset, int p);
std::optional<BatchPreset> parse_batch_preset(std::string_view name);

struct TrainConfig {
  int p = 5;
  OptimizerKind optimizer = Adam{};
  ActivationKind activation = ActivationKind::Elu;
  double lr = 0.1;
  int batch_size = 0;  // 0: 10 p^2
  double noise_sigma = 0.1;
  NoiseMode noise_mode = NoiseMode::Hot;
  int hidden_width = 0;  // 0: p
  int max_epochs = 10000;
  long stop_examples = 0;  // 0: 20 p^2
  std::uint64_t seed = 1;
  double init_sigma = 1.0;
  BiasInit bias_init = BiasInit::Gaussian;
};

/// Fills the size defaults from p and checks every field; throws std::invalid_argument.
TrainConfig resolve(TrainConfig config);

enum class FailureKind { NeverLearned, TrappedFalseMinimum, GeneralizationGap, Diverged, EpochCap };

std::string_view to_string(FailureKind kind);

/// Training accuracy at or below this never counts as having learned anything.
inline constexpr double kNeverLearnedCeiling = 0.40;
/// Typical plateau of a run stuck in a false minimum. Reporting only.
inline constexpr double kTrappedPlateau = 0.85;

struct TrialOutcome {
  bool success = false;
  std::optional<FailureKind> failure;
  int epochs_used = 0;
  long weight_updates = 0;
  bool stop_rule_fired = false;
  double best_train_acc = 0.0;
  double final_train_loss = 0.0;
  double final_test_acc = 0.0;
  std::vector<double> train_acc_history;
  MlpParamsd final_params;
};

struct TrainingTrace {
  std::span<const double> train_acc_history;
  bool stop_rule_fired = false;
  bool diverged = false;
  bool cap_below_certification = false;  // max_epochs < batches needed to certify
  bool certifying_at_cap = false;         // a perfect streak was cut off by the cap
};

/// Throws std::logic_error when called on a successful run.
FailureKind classify_failure(const TrainingTrace& trace, double test_acc);

/// Consecutive perfect batches needed before the stop rule can fire.
long batches_to_certify(long stop_examples, int batch_size);

TrialOutcome run_trial(const TrainConfig& config);

/// Order-independent per-trial seed.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t trial_index);

/// Evenly spaced subsample that always keeps the last entry.
std::vector<double> downsample(std::span<const double> values, std::size_t max_points);

}  // namespace xorp

#endif  // XORP_TRAINER_HPP
