// Benchmark sweeps over (optimizer, activation, learning rate, p) cells, with a resumable
// manifest of finished trials and the "0 unless enough trials succeed" aggregation.
#ifndef XORP_SWEEP_HPP
#define XORP_SWEEP_HPP

#include "xorp/trainer.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xorp {

struct SweepSpec {
  std::vector<int> primes;
  std::vector<OptimizerKind> optimizers;
  std::vector<ActivationKind> activations;
  std::vector<double> lrs = {0.01, 0.1, 1.0, 5.0};
  int trials_per_cell = 10;
  int min_successes = 5;
  std::uint64_t base_seed = 42;
  int parallelism = 0;  // 0: hardware concurrency
  int max_epochs = 10000;
  std::optional<BatchPreset> batch_preset;  // takes precedence over batch_size
  int batch_size = 0;                       // 0: 10 p^2
  double noise_sigma = 0.1;
  NoiseMode noise_mode = NoiseMode::Hot;
  int hidden_width = 0;  // 0: p
  double init_sigma = 1.0;
  BiasInit bias_init = BiasInit::Gaussian;
  bool allow_composite = false;
  std::size_t history_points = 50;  // accuracy samples kept per trial in the manifest
};

/// Throws std::invalid_argument on an inconsistent SweepSpec.
void validate(const SweepSpec& spec);

/// Reads the key = value sweep file format (see README). Throws std::invalid_argument with
/// the offending line number on parse errors.
SweepSpec parse_sweep_config(std::istream& in);
SweepSpec load_sweep_config(const std::filesystem::path& path);

struct CellKey {
  std::string optimizer;
  ActivationKind activation = ActivationKind::Elu;
  double lr = 0.0;
  int p = 0;

  bool operator==(const CellKey&) const = default;
};

/// Stable textual key, e.g. "adam/elu/0.1/5".
std::string to_string(const CellKey& key);

/// One finished trial, as stored in the manifest and the jsonl output.
struct TrialRecord {
  CellKey cell;
  int trial = 0;
  std::uint64_t seed = 0;
  int batch_size = 0;
  bool success = false;
  std::optional<FailureKind> failure;
  int epochs_used = 0;
  long weight_updates = 0;
  bool stop_rule_fired = false;
  double best_train_acc = 0.0;
  double final_test_acc = 0.0;
  double final_train_loss = 0.0;
  std::vector<double> history;  // downsampled training accuracy
};

inline constexpr std::size_t kFailureKinds = 5;

struct CellResult {
  CellKey key;
  int successes = 0;
  std::array<int, kFailureKinds> failures{};  // indexed by FailureKind
  double mean_epochs = 0.0;  // over successful trials, full precision
  long reported = 0;         // rounded mean, or 0 when successes < min_successes
  std::vector<TrialRecord> trials;
};

struct SweepResult {
  int min_successes = 5;
  std::vector<int> primes;
  std::vector<std::string> optimizers;
  std::vector<ActivationKind> activations;
  std::vector<double> lrs;
  std::vector<CellResult> cells;  // optimizer-major, then activation, lr, p

  const CellResult* find(const CellKey& key) const;
};

/// The trial configuration a sweep uses for one cell and trial index.
TrainConfig trial_config(const SweepSpec& spec, const OptimizerKind& optimizer,
                         ActivationKind activation, double lr, int p, int trial);

/// Mean over successes, reported value, and failure counts.
CellResult aggregate(CellKey key, std::vector<TrialRecord> trials, int min_successes);

struct SweepOptions {
  std::optional<std::filesystem::path> manifest;
  std::function<void(const TrialRecord&, std::size_t done, std::size_t total)> on_trial;
  /// Stop scheduling new trials after this many have run in this call (for tests that
  /// simulate an interruption). 0 means no limit.
  std::size_t max_new_trials = 0;
};

/// The manifest on disk was written by a sweep with different settings, or is not a manifest.
struct ManifestMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runs every pending trial (skipping those already in the manifest) and aggregates.
/// Throws ManifestMismatch if the manifest belongs to an incompatible sweep.
SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

TrialRecord make_record(const CellKey& cell, int trial, const TrainConfig& config,
                        const TrialOutcome& outcome, std::size_t history_points);

enum class BestLrAxis {
  Optimizers,   // fixed activation, one row per optimizer
  Activations,  // fixed optimizer, one row per activation
};

struct BestLrEntry {
  long value = 0;                 // 0 when no lr qualifies
  std::optional<double> best_lr;  // unset when no lr qualifies
};

struct BestLrTable {
  BestLrAxis axis = BestLrAxis::Optimizers;
  std::string fixed;
  std::vector<std::string> rows;
  std::vector<int> primes;
  std::vector<std::vector<std::optional<BestLrEntry>>> entries;  // nullopt: no cell swept
};

/// Per (row, p), the lr with the lowest mean epochs among cells with enough successes;
/// ties go to the lower lr.
BestLrTable best_lr_view(const SweepResult& result, BestLrAxis axis, const std::string& fixed);

}  // namespace xorp

#endif  // XORP_SWEEP_HPP
