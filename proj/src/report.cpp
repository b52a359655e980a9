#include "xorp/report.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <system_error>

namespace xorp {

namespace {

std::optional<FailureKind> parse_failure(std::string_view name) {
  for (auto kind : {FailureKind::NeverLearned, FailureKind::TrappedFalseMinimum,
                    FailureKind::GeneralizationGap, FailureKind::Diverged, FailureKind::EpochCap})
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

std::string_view noise_mode_name(NoiseMode mode) { return mode == NoiseMode::Hot ? "hot" : "all"; }

}  // namespace

std::optional<OutputFormat> parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "markdown" || name == "md") return OutputFormat::Markdown;
  if (name == "jsonl") return OutputFormat::Jsonl;
  return std::nullopt;
}

std::string format_number(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return std::to_string(value);
  return {buf, end};
}

nlohmann::json to_json(const TrialRecord& r) {
  return {
      {"optimizer", r.cell.optimizer},
      {"activation", std::string(to_string(r.cell.activation))},
      {"lr", r.cell.lr},
      {"p", r.cell.p},
      {"trial", r.trial},
      {"seed", r.seed},
      {"batch_size", r.batch_size},
      {"success", r.success},
      {"failure", r.failure ? nlohmann::json(std::string(to_string(*r.failure))) : nlohmann::json()},
      {"epochs_used", r.epochs_used},
      {"weight_updates", r.weight_updates},
      {"stop_rule_fired", r.stop_rule_fired},
      {"best_train_acc", r.best_train_acc},
      {"final_test_acc", r.final_test_acc},
      {"final_train_loss", r.final_train_loss},
      {"train_acc_history", r.history},
  };
}

TrialRecord record_from_json(const nlohmann::json& j) {
  TrialRecord r;
  r.cell.optimizer = j.at("optimizer").get<std::string>();
  const auto activation = parse_activation(j.at("activation").get<std::string>());
  if (!activation) throw std::invalid_argument("unknown activation in trial record");
  r.cell.activation = *activation;
  r.cell.lr = j.at("lr").get<double>();
  r.cell.p = j.at("p").get<int>();
  r.trial = j.at("trial").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.batch_size = j.at("batch_size").get<int>();
  r.success = j.at("success").get<bool>();
  if (!j.at("failure").is_null()) {
    const auto kind = parse_failure(j.at("failure").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown failure kind in trial record");
    r.failure = *kind;
  }
  r.epochs_used = j.at("epochs_used").get<int>();
  r.weight_updates = j.at("weight_updates").get<long>();
  r.stop_rule_fired = j.at("stop_rule_fired").get<bool>();
  r.best_train_acc = j.at("best_train_acc").get<double>();
  r.final_test_acc = j.at("final_test_acc").get<double>();
  // Non-finite losses serialise as null.
  r.final_train_loss = j.at("final_train_loss").is_null()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : j.at("final_train_loss").get<double>();
  r.history = j.at("train_acc_history").get<std::vector<double>>();
  return r;
}

nlohmann::json trial_json(const TrainConfig& raw, const TrialOutcome& outcome,
                          std::size_t history_points) {
  const TrainConfig c = resolve(raw);
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [key, value] : optimizer_params(c.optimizer)) params[key] = value;
  nlohmann::json config = {
      {"p", c.p},
      {"optimizer", std::string(to_string(c.optimizer))},
      {"optimizer_params", params},
      {"activation", std::string(to_string(c.activation))},
      {"lr", c.lr},
      {"batch_size", c.batch_size},
      {"noise_sigma", c.noise_sigma},
      {"noise_mode", std::string(noise_mode_name(c.noise_mode))},
      {"hidden_width", c.hidden_width},
      {"max_epochs", c.max_epochs},
      {"stop_examples", c.stop_examples},
      {"seed", c.seed},
      {"init_sigma", c.init_sigma},
      {"init_bias", c.bias_init == BiasInit::Gaussian ? "gaussian" : "zero"},
  };
  return {
      {"config", config},
      {"success", outcome.success},
      {"failure", outcome.failure ? nlohmann::json(std::string(to_string(*outcome.failure)))
                                  : nlohmann::json()},
      {"epochs_used", outcome.epochs_used},
      {"weight_updates", outcome.weight_updates},
      {"stop_rule_fired", outcome.stop_rule_fired},
      {"best_train_acc", outcome.best_train_acc},
      {"final_test_acc", outcome.final_test_acc},
      {"final_train_loss", outcome.final_train_loss},
      {"train_acc_history", downsample(outcome.train_acc_history, history_points)},
  };
}

void write_csv(std::ostream& out, const SweepResult& result) {
  out << kCsvHeader << '\n';
  for (const auto& cell : result.cells) {
    out << cell.key.optimizer << ',' << to_string(cell.key.activation) << ','
        << format_number(cell.key.lr) << ',' << cell.key.p << ',' << cell.reported << ','
        << cell.successes;
    for (auto kind : {FailureKind::NeverLearned, FailureKind::TrappedFalseMinimum,
                      FailureKind::GeneralizationGap, FailureKind::Diverged, FailureKind::EpochCap})
      out << ',' << cell.failures[static_cast<std::size_t>(kind)];
    out << '\n';
  }
}

void write_jsonl(std::ostream& out, const SweepResult& result) {
  for (const auto& cell : result.cells)
    for (const auto& trial : cell.trials) out << to_json(trial).dump() << '\n';
}

void write_best_lr_markdown(std::ostream& out, const BestLrTable& table) {
  const bool by_optimizer = table.axis == BestLrAxis::Optimizers;
  out << "### Best learning rate, " << (by_optimizer ? "activation " : "optimizer ") << table.fixed
      << "\n\n| " << (by_optimizer ? "Method" : "Activation");
  for (int p : table.primes) out << " | " << p;
  out << " |\n|---";
  for (std::size_t i = 0; i < table.primes.size(); ++i) out << "|---:";
  out << "|\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << "| " << table.rows[r];
    for (const auto& entry : table.entries[r]) out << " | " << (entry ? std::to_string(entry->value) : "");
    out << " |\n";
  }
  out << '\n';
}

void write_markdown(std::ostream& out, const SweepResult& result) {
  out << "## Mean epochs in successful runs (0: fewer than " << result.min_successes
      << " successes)\n\n| Method | Activation | Rate";
  for (int p : result.primes) out << " | " << p;
  out << " |\n|---|---|---:";
  for (std::size_t i = 0; i < result.primes.size(); ++i) out << "|---:";
  out << "|\n";
  for (const auto& optimizer : result.optimizers) {
    for (auto activation : result.activations) {
      for (double lr : result.lrs) {
        out << "| " << optimizer << " | " << to_string(activation) << " | " << format_number(lr);
        for (int p : result.primes) {
          const auto* cell = result.find({optimizer, activation, lr, p});
          out << " | " << (cell ? std::to_string(cell->reported) : "");
        }
        out << " |\n";
      }
    }
  }
  out << '\n';
  for (auto activation : result.activations)
    write_best_lr_markdown(out, best_lr_view(result, BestLrAxis::Optimizers,
                                             std::string(to_string(activation))));
  for (const auto& optimizer : result.optimizers)
    write_best_lr_markdown(out, best_lr_view(result, BestLrAxis::Activations, optimizer));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open " + tmp.string() + " for writing");
    file.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    file.flush();
    if (!file) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

void emit(const SweepResult& result, OutputFormat format, const std::filesystem::path& path) {
  std::ostringstream text;
  switch (format) {
    case OutputFormat::Csv: write_csv(text, result); break;
    case OutputFormat::Markdown: write_markdown(text, result); break;
    case OutputFormat::Jsonl: write_jsonl(text, result); break;
  }
  write_file_atomic(path, text.str());
}

}  // namespace xorp
