#include "xorp/sweep.hpp"

#include "xorp/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace xorp {

namespace {

constexpr int kManifestVersion = 1;

std::string trial_key(const CellKey& cell, int trial) {
  return to_string(cell) + "#" + std::to_string(trial);
}

std::string_view bias_name(BiasInit b) { return b == BiasInit::Gaussian ? "gaussian" : "zero"; }

nlohmann::json fingerprint(const SweepSpec& spec) {
  nlohmann::json optimizers = nlohmann::json::object();
  for (const auto& kind : spec.optimizers) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [key, value] : optimizer_params(kind)) params[key] = value;
    optimizers[std::string(to_string(kind))] = params;
  }
  std::string batch = spec.batch_preset ? std::to_string(static_cast<int>(*spec.batch_preset))
                                        : std::string("n") + std::to_string(spec.batch_size);
  return {
      {"base_seed", spec.base_seed},
      {"max_epochs", spec.max_epochs},
      {"batch", batch},
      {"noise_sigma", spec.noise_sigma},
      {"noise_mode", spec.noise_mode == NoiseMode::Hot ? "hot" : "all"},
      {"hidden_width", spec.hidden_width},
      {"init_sigma", spec.init_sigma},
      {"init_bias", std::string(bias_name(spec.bias_init))},
      {"history_points", spec.history_points},
      {"optimizers", optimizers},
  };
}

void check_compatible(const nlohmann::json& stored, const nlohmann::json& current) {
  for (const auto& [key, value] : current.items()) {
    if (key == "optimizers") continue;
    if (!stored.contains(key) || stored.at(key) != value)
      throw ManifestMismatch("manifest was written by a sweep with a different '" + key + "'");
  }
  const auto& stored_opts = stored.at("optimizers");
  for (const auto& [name, params] : current.at("optimizers").items())
    if (stored_opts.contains(name) && stored_opts.at(name) != params)
      throw ManifestMismatch("manifest was written with different " + name + " hyperparameters");
}

nlohmann::json merged_fingerprint(const nlohmann::json& stored, nlohmann::json current) {
  for (const auto& [name, params] : stored.at("optimizers").items())
    if (!current["optimizers"].contains(name)) current["optimizers"][name] = params;
  return current;
}

struct Manifest {
  nlohmann::json fingerprint;
  std::map<std::string, TrialRecord> records;
};

Manifest load_manifest(const std::filesystem::path& path, const nlohmann::json& current) {
  Manifest manifest{current, {}};
  std::ifstream in(path);
  if (!in) return manifest;
  std::string line;
  if (!std::getline(in, line)) return manifest;
  const auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("xorp_manifest"))
    throw ManifestMismatch(path.string() + " is not a sweep manifest");
  check_compatible(header.at("fingerprint"), current);
  manifest.fingerprint = merged_fingerprint(header.at("fingerprint"), current);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;  // torn trailing line
    auto record = record_from_json(j);
    manifest.records.emplace(trial_key(record.cell, record.trial), std::move(record));
  }
  return manifest;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ostringstream text;
  text << nlohmann::json{{"xorp_manifest", kManifestVersion}, {"fingerprint", manifest.fingerprint}}
              .dump()
       << '\n';
  for (const auto& [key, record] : manifest.records) text << to_json(record).dump() << '\n';
  write_file_atomic(path, text.str());
}

}  // namespace

void validate(const SweepSpec& spec) {
  if (spec.trials_per_cell < 1) throw std::invalid_argument("trials_per_cell must be >= 1");
  if (spec.min_successes < 0) throw std::invalid_argument("min_successes must be >= 0");
  if (spec.trials_per_cell < spec.min_successes)
    throw std::invalid_argument("trials_per_cell must be >= min_successes");
  if (spec.lrs.empty()) throw std::invalid_argument("lrs must not be empty");
  for (double lr : spec.lrs)
    if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("every lr must be > 0");
  if (spec.max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (spec.parallelism < 0) throw std::invalid_argument("parallelism must be >= 0");
  for (int p : spec.primes) {
    if (p < 2) throw std::invalid_argument("every p must be >= 2");
    if (!spec.allow_composite && !is_prime(p))
      throw std::invalid_argument("p = " + std::to_string(p) +
                                  " is composite (set allow_composite to run it anyway)");
  }
  std::set<std::string_view> names;
  for (const auto& kind : spec.optimizers) {
    validate(kind);
    if (!names.insert(to_string(kind)).second)
      throw std::invalid_argument("optimizer " + std::string(to_string(kind)) + " listed twice");
  }
}

std::string to_string(const CellKey& key) {
  return key.optimizer + "/" + std::string(to_string(key.activation)) + "/" +
         format_number(key.lr) + "/" + std::to_string(key.p);
}

const CellResult* SweepResult::find(const CellKey& key) const {
  for (const auto& cell : cells)
    if (cell.key == key) return &cell;
  return nullptr;
}

TrainConfig trial_config(const SweepSpec& spec, const OptimizerKind& optimizer,
                         ActivationKind activation, double lr, int p, int trial) {
  TrainConfig c;
  c.p = p;
  c.optimizer = optimizer;
  c.activation = activation;
  c.lr = lr;
  c.batch_size = spec.batch_preset ? preset_batch_size(*spec.batch_preset, p) : spec.batch_size;
  c.noise_sigma = spec.noise_sigma;
  c.noise_mode = spec.noise_mode;
  c.hidden_width = spec.hidden_width;
  c.max_epochs = spec.max_epochs;
  c.seed = derive_seed(spec.base_seed, static_cast<std::uint64_t>(trial));
  c.init_sigma = spec.init_sigma;
  c.bias_init = spec.bias_init;
  return resolve(c);
}

TrialRecord make_record(const CellKey& cell, int trial, const TrainConfig& config,
                        const TrialOutcome& outcome, std::size_t history_points) {
  TrialRecord r;
  r.cell = cell;
  r.trial = trial;
  r.seed = config.seed;
  r.batch_size = config.batch_size;
  r.success = outcome.success;
  r.failure = outcome.failure;
  r.epochs_used = outcome.epochs_used;
  r.weight_updates = outcome.weight_updates;
  r.stop_rule_fired = outcome.stop_rule_fired;
  r.best_train_acc = outcome.best_train_acc;
  r.final_test_acc = outcome.final_test_acc;
  r.final_train_loss = outcome.final_train_loss;
  r.history = downsample(outcome.train_acc_history, history_points);
  return r;
}

CellResult aggregate(CellKey key, std::vector<TrialRecord> trials, int min_successes) {
  CellResult cell;
  cell.key = std::move(key);
  std::sort(trials.begin(), trials.end(),
            [](const TrialRecord& a, const TrialRecord& b) { return a.trial < b.trial; });
  double total = 0.0;
  for (const auto& t : trials) {
    if (t.success) {
      ++cell.successes;
      total += t.epochs_used;
    } else if (t.failure) {
      ++cell.failures[static_cast<std::size_t>(*t.failure)];
    }
  }
  cell.mean_epochs = cell.successes > 0 ? total / cell.successes : 0.0;
  cell.reported = cell.successes >= min_successes && cell.successes > 0
                      ? std::lround(cell.mean_epochs)
                      : 0;
  cell.trials = std::move(trials);
  return cell;
}

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options) {
  validate(spec);

  struct Job {
    CellKey cell;
    const OptimizerKind* optimizer;
    int trial;
  };
  std::vector<CellKey> cells;
  std::vector<Job> jobs;
  for (const auto& optimizer : spec.optimizers)
    for (auto activation : spec.activations)
      for (double lr : spec.lrs)
        for (int p : spec.primes) {
          CellKey key{std::string(to_string(optimizer)), activation, lr, p};
          for (int t = 0; t < spec.trials_per_cell; ++t) jobs.push_back({key, &optimizer, t});
          cells.push_back(std::move(key));
        }

  const auto current = fingerprint(spec);
  Manifest manifest = options.manifest ? load_manifest(*options.manifest, current)
                                       : Manifest{current, {}};

  std::vector<const Job*> pending;
  for (const auto& job : jobs)
    if (!manifest.records.contains(trial_key(job.cell, job.trial))) pending.push_back(&job);
  if (options.max_new_trials > 0 && pending.size() > options.max_new_trials)
    pending.resize(options.max_new_trials);

  std::mutex mutex;
  std::size_t done = jobs.size() - pending.size();
  std::exception_ptr failure;
  auto last_save = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= pending.size()) return;
      const Job& job = *pending[index];
      try {
        const auto config = trial_config(spec, *job.optimizer, job.cell.activation, job.cell.lr,
                                         job.cell.p, job.trial);
        const auto outcome = run_trial(config);
        auto record = make_record(job.cell, job.trial, config, outcome, spec.history_points);

        std::lock_guard lock(mutex);
        ++done;
        if (options.on_trial) options.on_trial(record, done, jobs.size());
        manifest.records.insert_or_assign(trial_key(job.cell, job.trial), std::move(record));
        const auto now = std::chrono::steady_clock::now();
        if (options.manifest && now - last_save > std::chrono::seconds(1)) {
          save_manifest(*options.manifest, manifest);
          last_save = now;
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        next.store(pending.size());
        return;
      }
    }
  };

  int workers = spec.parallelism > 0 ? spec.parallelism
                                     : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp<int>(workers, 1, static_cast<int>(std::max<std::size_t>(pending.size(), 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int i = 0; i < workers; ++i) threads.emplace_back(worker);
  }
  if (options.manifest) save_manifest(*options.manifest, manifest);
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  result.min_successes = spec.min_successes;
  result.primes = spec.primes;
  for (const auto& kind : spec.optimizers) result.optimizers.emplace_back(to_string(kind));
  result.activations = spec.activations;
  result.lrs = spec.lrs;
  for (auto& key : cells) {
    std::vector<TrialRecord> trials;
    for (int t = 0; t < spec.trials_per_cell; ++t) {
      auto it = manifest.records.find(trial_key(key, t));
      if (it != manifest.records.end()) trials.push_back(it->second);
    }
    result.cells.push_back(aggregate(std::move(key), std::move(trials), spec.min_successes));
  }
  return result;
}

BestLrTable best_lr_view(const SweepResult& result, BestLrAxis axis, const std::string& fixed) {
  BestLrTable table;
  table.axis = axis;
  table.fixed = fixed;
  table.primes = result.primes;
  if (axis == BestLrAxis::Optimizers) {
    table.rows = result.optimizers;
  } else {
    for (auto a : result.activations) table.rows.emplace_back(to_string(a));
  }

  for (const auto& row : table.rows) {
    std::vector<std::optional<BestLrEntry>> line;
    for (int p : table.primes) {
      std::optional<BestLrEntry> entry;
      const CellResult* best = nullptr;
      for (const auto& cell : result.cells) {
        const bool matches =
            cell.key.p == p &&
            (axis == BestLrAxis::Optimizers
                 ? cell.key.optimizer == row && to_string(cell.key.activation) == fixed
                 : cell.key.optimizer == fixed && to_string(cell.key.activation) == row);
        if (!matches) continue;
        if (!entry) entry = BestLrEntry{};
        if (cell.reported == 0) continue;
        if (!best || cell.mean_epochs < best->mean_epochs ||
            (cell.mean_epochs == best->mean_epochs && cell.key.lr < best->key.lr))
          best = &cell;
      }
      if (best) *entry = BestLrEntry{best->reported, best->key.lr};
      line.push_back(entry);
    }
    table.entries.push_back(std::move(line));
  }
  return table;
}

}  // namespace xorp
