#include "xorp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace xorp {

int preset_batch_size(BatchPreset preset, int p) {
  const int p2 = p * p;
  switch (preset) {
    case BatchPreset::TenP2: return 10 * p2;
    case BatchPreset::P2: return p2;
    case BatchPreset::P2Over10: return std::max(1, p2 / 10);
    case BatchPreset::P2Over100: return std::max(1, p2 / 100);
  }
  return 10 * p2;
}

std::optional<BatchPreset> parse_batch_preset(std::string_view name) {
  if (name == "10p2") return BatchPreset::TenP2;
  if (name == "p2") return BatchPreset::P2;
  if (name == "p2/10") return BatchPreset::P2Over10;
  if (name == "p2/100") return BatchPreset::P2Over100;
  return std::nullopt;
}

TrainConfig resolve(TrainConfig c) {
  if (c.p < 2) throw std::invalid_argument("p must be >= 2");
  if (c.batch_size == 0) c.batch_size = preset_batch_size(BatchPreset::TenP2, c.p);
  if (c.hidden_width == 0) c.hidden_width = c.p;
  if (c.stop_examples == 0) c.stop_examples = 20L * c.p * c.p;
  if (c.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (c.hidden_width < 1) throw std::invalid_argument("hidden_width must be >= 1");
  if (c.max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (c.stop_examples < 1) throw std::invalid_argument("stop_examples must be >= 1");
  if (!(c.noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
  if (!(c.lr > 0.0) || !std::isfinite(c.lr)) throw std::invalid_argument("learning rate must be > 0");
  if (!(c.init_sigma > 0.0)) throw std::invalid_argument("init_sigma must be > 0");
  validate(c.optimizer);
  return c;
}

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::NeverLearned: return "never_learned";
    case FailureKind::TrappedFalseMinimum: return "trapped";
    case FailureKind::GeneralizationGap: return "generalization_gap";
    case FailureKind::Diverged: return "diverged";
    case FailureKind::EpochCap: return "epoch_cap";
  }
  return "?";
}

long batches_to_certify(long stop_examples, int batch_size) {
  return (stop_examples + batch_size - 1) / batch_size;
}

FailureKind classify_failure(const TrainingTrace& trace, double test_acc) {
  if (trace.diverged) return FailureKind::Diverged;
  if (trace.stop_rule_fired) {
    if (test_acc >= 1.0) throw std::logic_error("classify_failure called on a successful run");
    return FailureKind::GeneralizationGap;
  }
  if (trace.cap_below_certification || trace.certifying_at_cap) return FailureKind::EpochCap;
  const double best = trace.train_acc_history.empty()
                          ? 0.0
                          : *std::max_element(trace.train_acc_history.begin(),
                                              trace.train_acc_history.end());
  return best <= kNeverLearnedCeiling ? FailureKind::NeverLearned
                                      : FailureKind::TrappedFalseMinimum;
}

namespace {

// Flush-to-zero and denormals-are-zero for the calling thread while in scope.
class FlushDenormals {
 public:
#if defined(__SSE__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
  ~FlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

}  // namespace

TrialOutcome run_trial(const TrainConfig& raw) {
  const TrainConfig config = resolve(raw);
  const FlushDenormals flush;
  const ProblemSpec problem = make_problem(config.p, config.noise_sigma, config.batch_size, config.noise_mode);

  Rng rng(config.seed);
  auto params = init_params<double>(config.p, config.hidden_width, rng, config.init_sigma,
                                    config.bias_init);
  auto state = init_state(config.optimizer, params);

  TrialOutcome outcome;
  outcome.train_acc_history.reserve(std::min(config.max_epochs, 100000));
  long perfect_streak = 0;
  bool diverged = false;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const Batch batch = sample_batch(problem, rng);
    const auto cache = forward(params, config.activation, batch.inputs);
    const double batch_loss = loss(cache, batch.labels);
    const double acc = accuracy(cache, batch.labels);
    outcome.train_acc_history.push_back(acc);
    outcome.best_train_acc = std::max(outcome.best_train_acc, acc);
    outcome.final_train_loss = batch_loss;

    if (!std::isfinite(batch_loss)) {
      diverged = true;
      break;
    }
    const auto grads = backward(params, config.activation, cache, batch.labels);
    if (step(config.optimizer, state, params, grads, config.lr, batch_loss) ==
        StepStatus::Diverged) {
      diverged = true;
      break;
    }
    outcome.epochs_used = epoch;
    outcome.weight_updates = state.step;

    perfect_streak = acc == 1.0 ? perfect_streak + config.batch_size : 0;
    if (perfect_streak >= config.stop_examples) {
      outcome.stop_rule_fired = true;
      break;
    }
  }

  if (params.all_finite()) {
    const Batch grid = full_test_grid(config.p);
    outcome.final_test_acc = accuracy(params, config.activation, grid.inputs, grid.labels);
  }
  outcome.success = !diverged && outcome.stop_rule_fired && outcome.final_test_acc == 1.0;
  if (!outcome.success) {
    TrainingTrace trace;
    trace.train_acc_history = outcome.train_acc_history;
    trace.stop_rule_fired = outcome.stop_rule_fired;
    trace.diverged = diverged;
    trace.cap_below_certification =
        config.max_epochs < batches_to_certify(config.stop_examples, config.batch_size);
    trace.certifying_at_cap = !diverged && !outcome.stop_rule_fired && perfect_streak > 0;
    outcome.failure = classify_failure(trace, outcome.final_test_acc);
  }
  outcome.final_params = std::move(params);
  return outcome;
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
  // splitmix64 over a combination of the two inputs.
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (trial_index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> downsample(std::span<const double> values, std::size_t max_points) {
  if (max_points == 0 || values.empty()) return {};
  if (values.size() <= max_points) return {values.begin(), values.end()};
  if (max_points == 1) return {values.back()};
  std::vector<double> out;
  out.reserve(max_points);
  const double stride = static_cast<double>(values.size() - 1) / static_cast<double>(max_points - 1);
  for (std::size_t i = 0; i < max_points; ++i) {
    const auto index = static_cast<std::size_t>(std::llround(stride * static_cast<double>(i)));
    out.push_back(values[std::min(index, values.size() - 1)]);
  }
  return out;
}

}  // namespace xorp
