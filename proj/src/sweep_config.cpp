#include "xorp/sweep.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace xorp {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw std::invalid_argument("not a number: '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw std::invalid_argument("not a boolean: '" + text + "'");
}

struct PendingParam {
  std::string optimizer;
  std::string key;
  double value;
  int line;
};

}  // namespace

SweepSpec parse_sweep_config(std::istream& in) {
  SweepSpec spec;
  std::vector<PendingParam> params;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const auto line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "primes") {
        spec.primes.clear();
        for (const auto& item : split_list(value)) spec.primes.push_back(parse_number<int>(item));
      } else if (key == "optimizers") {
        spec.optimizers.clear();
        for (const auto& item : split_list(value)) {
          auto kind = parse_optimizer(item);
          if (!kind) throw std::invalid_argument("unknown optimizer '" + item + "'");
          spec.optimizers.push_back(*kind);
        }
      } else if (key == "activations") {
        spec.activations.clear();
        for (const auto& item : split_list(value)) {
          auto kind = parse_activation(item);
          if (!kind) throw std::invalid_argument("unknown activation '" + item + "'");
          spec.activations.push_back(*kind);
        }
      } else if (key == "lrs") {
        spec.lrs.clear();
        for (const auto& item : split_list(value)) spec.lrs.push_back(parse_number<double>(item));
      } else if (key == "trials") {
        spec.trials_per_cell = parse_number<int>(value);
      } else if (key == "min_successes") {
        spec.min_successes = parse_number<int>(value);
      } else if (key == "seed") {
        spec.base_seed = parse_number<std::uint64_t>(value);
      } else if (key == "jobs") {
        spec.parallelism = parse_number<int>(value);
      } else if (key == "max_epochs") {
        spec.max_epochs = parse_number<int>(value);
      } else if (key == "batch_size") {
        if (auto preset = parse_batch_preset(value)) {
          spec.batch_preset = preset;
        } else {
          spec.batch_preset.reset();
          spec.batch_size = parse_number<int>(value);
        }
      } else if (key == "noise_sigma") {
        spec.noise_sigma = parse_number<double>(value);
      } else if (key == "noise_mode") {
        if (value != "hot" && value != "all")
          throw std::invalid_argument("noise_mode must be hot or all");
        spec.noise_mode = value == "hot" ? NoiseMode::Hot : NoiseMode::All;
      } else if (key == "hidden_width") {
        spec.hidden_width = parse_number<int>(value);
      } else if (key == "init_sigma") {
        spec.init_sigma = parse_number<double>(value);
      } else if (key == "init_bias") {
        if (value != "gaussian" && value != "zero")
          throw std::invalid_argument("init_bias must be gaussian or zero");
        spec.bias_init = value == "gaussian" ? BiasInit::Gaussian : BiasInit::Zero;
      } else if (key == "allow_composite") {
        spec.allow_composite = parse_bool(value);
      } else if (key == "history_points") {
        spec.history_points = parse_number<std::size_t>(value);
      } else if (key == "opt_param") {
        // optimizer.key=value
        const auto dot = value.find('.');
        const auto inner_eq = value.find('=');
        if (dot == std::string::npos || inner_eq == std::string::npos || inner_eq < dot)
          throw std::invalid_argument("opt_param expects optimizer.key=value");
        params.push_back({trim(std::string_view(value).substr(0, dot)),
                          trim(std::string_view(value).substr(dot + 1, inner_eq - dot - 1)),
                          parse_number<double>(trim(std::string_view(value).substr(inner_eq + 1))),
                          line_no});
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      const std::string what = e.what();
      if (what.rfind("line ", 0) == 0) throw;
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + what);
    }
  }

  for (const auto& param : params) {
    auto it = std::find_if(spec.optimizers.begin(), spec.optimizers.end(),
                           [&](const OptimizerKind& k) { return to_string(k) == param.optimizer; });
    if (it == spec.optimizers.end())
      throw std::invalid_argument("line " + std::to_string(param.line) + ": optimizer '" +
                                  param.optimizer + "' is not in the optimizers list");
    try {
      set_optimizer_param(*it, param.key, param.value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(param.line) + ": " + e.what());
    }
  }
  return spec;
}

SweepSpec load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read sweep config " + path.string());
  return parse_sweep_config(in);
}

}  // namespace xorp
