#include "xorp/optimizers.hpp"

#include <stdexcept>

namespace xorp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, std::string_view key, double value, const char* range) {
  if (!ok)
    throw std::invalid_argument("optimizer parameter " + std::string(key) + "=" +
                                std::to_string(value) + " must be in " + range);
}

void check_decay(std::string_view key, double v) { require(v >= 0.0 && v < 1.0, key, v, "[0, 1)"); }
void check_positive(std::string_view key, double v) { require(v > 0.0, key, v, "(0, inf)"); }

bool set_l4(L4Settings& l4, std::string_view key, double value) {
  if (key == "alpha") {
    require(value > 0.0 && value <= 1.0, key, value, "(0, 1]");
    l4.alpha = value;
  } else if (key == "gamma") {
    require(value > 0.0 && value <= 1.0, key, value, "(0, 1]");
    l4.gamma = value;
  } else if (key == "gamma0") {
    check_decay(key, value);
    l4.gamma0 = value;
  } else if (key == "forget_time") {
    check_positive(key, value);
    l4.forget_time = value;
  } else if (key == "tiny") {
    check_positive(key, value);
    l4.tiny = value;
  } else {
    return false;
  }
  return true;
}

bool set_adam(Adam& adam, std::string_view key, double value) {
  if (key == "beta1") {
    check_decay(key, value);
    adam.beta1 = value;
  } else if (key == "beta2") {
    check_decay(key, value);
    adam.beta2 = value;
  } else if (key == "eps") {
    check_positive(key, value);
    adam.eps = value;
  } else {
    return false;
  }
  return true;
}

void append_l4(std::vector<std::pair<std::string, double>>& out, const L4Settings& l4) {
  out.insert(out.end(), {{"alpha", l4.alpha},
                         {"gamma", l4.gamma},
                         {"gamma0", l4.gamma0},
                         {"forget_time", l4.forget_time},
                         {"tiny", l4.tiny}});
}

}  // namespace

const std::vector<std::string_view>& optimizer_names() {
  static const std::vector<std::string_view> names = {
      "vanilla", "momentum", "nesterov", "adagrad", "adadelta",
      "rmsprop", "adam",     "l4adam",   "l4mom"};
  return names;
}

std::string_view to_string(const OptimizerKind& kind) {
  return optimizer_names()[kind.index()];
}

std::optional<OptimizerKind> parse_optimizer(std::string_view name) {
  if (name == "vanilla") return Vanilla{};
  if (name == "momentum") return Momentum{};
  if (name == "nesterov") return Nesterov{};
  if (name == "adagrad") return Adagrad{};
  if (name == "adadelta") return Adadelta{};
  if (name == "rmsprop") return RmsProp{};
  if (name == "adam") return Adam{};
  if (name == "l4adam") return L4Adam{};
  if (name == "l4mom") return L4Mom{};
  return std::nullopt;
}

void set_optimizer_param(OptimizerKind& kind, std::string_view key, double value) {
  const bool known = std::visit(
      overloaded{
          [](Vanilla&) { return false; },
          [&](Momentum& m) {
            if (key != "mu") return false;
            check_decay(key, value);
            m.mu = value;
            return true;
          },
          [&](Nesterov& m) {
            if (key != "mu") return false;
            check_decay(key, value);
            m.mu = value;
            return true;
          },
          [&](Adagrad& a) {
            if (key == "eps") {
              check_positive(key, value);
              a.eps = value;
            } else if (key == "init_acc") {
              require(value >= 0.0, key, value, "[0, inf)");
              a.init_acc = value;
            } else {
              return false;
            }
            return true;
          },
          [&](Adadelta& a) {
            if (key == "rho") {
              check_decay(key, value);
              a.rho = value;
            } else if (key == "eps") {
              check_positive(key, value);
              a.eps = value;
            } else {
              return false;
            }
            return true;
          },
          [&](RmsProp& r) {
            if (key == "decay") {
              check_decay(key, value);
              r.decay = value;
            } else if (key == "eps") {
              check_positive(key, value);
              r.eps = value;
            } else {
              return false;
            }
            return true;
          },
          [&](Adam& a) { return set_adam(a, key, value); },
          [&](L4Adam& a) { return set_l4(a.l4, key, value) || set_adam(a.inner, key, value); },
          [&](L4Mom& m) {
            if (key == "mu") {
              check_decay(key, value);
              m.mu = value;
              return true;
            }
            return set_l4(m.l4, key, value);
          },
      },
      kind);
  if (!known)
    throw std::invalid_argument("optimizer " + std::string(to_string(kind)) +
                                " has no parameter '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, double>> optimizer_params(const OptimizerKind& kind) {
  std::vector<std::pair<std::string, double>> out;
  std::visit(overloaded{
                 [](const Vanilla&) {},
                 [&](const Momentum& m) { out.emplace_back("mu", m.mu); },
                 [&](const Nesterov& m) { out.emplace_back("mu", m.mu); },
                 [&](const Adagrad& a) {
                   out.emplace_back("eps", a.eps);
                   out.emplace_back("init_acc", a.init_acc);
                 },
                 [&](const Adadelta& a) {
                   out.emplace_back("rho", a.rho);
                   out.emplace_back("eps", a.eps);
                 },
                 [&](const RmsProp& r) {
                   out.emplace_back("decay", r.decay);
                   out.emplace_back("eps", r.eps);
                 },
                 [&](const Adam& a) {
                   out.emplace_back("beta1", a.beta1);
                   out.emplace_back("beta2", a.beta2);
                   out.emplace_back("eps", a.eps);
                 },
                 [&](const L4Adam& a) {
                   append_l4(out, a.l4);
                   out.emplace_back("beta1", a.inner.beta1);
                   out.emplace_back("beta2", a.inner.beta2);
                   out.emplace_back("eps", a.inner.eps);
                 },
                 [&](const L4Mom& m) {
                   append_l4(out, m.l4);
                   out.emplace_back("mu", m.mu);
                 },
             },
             kind);
  return out;
}

void validate(const OptimizerKind& kind) {
  // Re-applying every parameter through the setter runs the same range checks.
  OptimizerKind copy = kind;
  for (const auto& [key, value] : optimizer_params(kind)) set_optimizer_param(copy, key, value);
}

}  // namespace xorp
