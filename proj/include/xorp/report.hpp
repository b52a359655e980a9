// Output formats for trials and sweeps: CSV cell table, markdown tables, one-trial-per-line JSON.
#ifndef XORP_REPORT_HPP
#define XORP_REPORT_HPP

#include "xorp/sweep.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xorp {

enum class OutputFormat { Csv, Markdown, Jsonl };

std::optional<OutputFormat> parse_format(std::string_view name);

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips, e.g. 0.01, 0.1, 1, 5.
std::string format_number(double value);

inline constexpr std::string_view kCsvHeader =
    "method,activation,lr,p,mean_epochs,successes,failures_never,failures_trapped,"
    "failures_gap,failures_diverged,failures_cap";

nlohmann::json to_json(const TrialRecord& record);
/// Throws nlohmann::json::exception on missing or mistyped fields.
TrialRecord record_from_json(const nlohmann::json& j);

/// Config echo plus outcome fields for a single run.
nlohmann::json trial_json(const TrainConfig& config, const TrialOutcome& outcome,
                          std::size_t history_points);

void write_csv(std::ostream& out, const SweepResult& result);
void write_jsonl(std::ostream& out, const SweepResult& result);
/// Full cell table (method, activation, rate by p), then the best-lr reductions.
void write_markdown(std::ostream& out, const SweepResult& result);
void write_best_lr_markdown(std::ostream& out, const BestLrTable& table);

/// Writes via a temporary sibling file and rename. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Renders the result and writes it atomically. Throws IoError.
void emit(const SweepResult& result, OutputFormat format, const std::filesystem::path& path);

}  // namespace xorp

#endif  // XORP_REPORT_HPP
