#include "xorp/checkpoint.hpp"

#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace xorp {

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  out << "p,h,activation,seed\n"
      << c.p << ',' << c.hidden << ',' << to_string(c.activation) << ',' << c.seed << '\n';
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for_each_tensor(
      [&](const auto& t) {
        for (Eigen::Index i = 0; i < t.rows(); ++i)
          for (Eigen::Index j = 0; j < t.cols(); ++j) out << t(i, j) << '\n';
      },
      c.params);
  out.precision(old_precision);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "p,h,activation,seed")
    throw std::runtime_error("checkpoint: missing header line");
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing header values");

  Checkpoint c;
  std::istringstream fields(line);
  std::string p, h, activation, seed;
  if (!std::getline(fields, p, ',') || !std::getline(fields, h, ',') ||
      !std::getline(fields, activation, ',') || !std::getline(fields, seed))
    throw std::runtime_error("checkpoint: expected 4 header fields");
  try {
    c.p = std::stoi(p);
    c.hidden = std::stoi(h);
    c.seed = std::stoull(seed);
  } catch (const std::exception&) {
    throw std::runtime_error("checkpoint: non-numeric header field");
  }
  const auto kind = parse_activation(activation);
  if (!kind) throw std::runtime_error("checkpoint: unknown activation '" + activation + "'");
  c.activation = *kind;
  if (c.p < 2 || c.hidden < 1) throw std::runtime_error("checkpoint: invalid sizes");

  c.params = MlpParamsd::zeros(2 * c.p, c.hidden, c.p);
  for_each_tensor(
      [&](auto& t) {
        for (Eigen::Index i = 0; i < t.rows(); ++i)
          for (Eigen::Index j = 0; j < t.cols(); ++j)
            if (!(in >> t(i, j))) throw std::runtime_error("checkpoint: truncated parameter list");
      },
      c.params);
  return c;
}

}  // namespace xorp
