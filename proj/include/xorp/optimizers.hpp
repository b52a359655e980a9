// Per-parameter update rules. One OptimizerState per training run; step() applies exactly
// one update to every tensor of an MlpParams.
#ifndef XORP_OPTIMIZERS_HPP
#define XORP_OPTIMIZERS_HPP

#include "xorp/network.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace xorp {

struct Vanilla {};
struct Momentum {
  double mu = 0.9;
};
struct Nesterov {
  double mu = 0.9;
};
struct Adagrad {
  double eps = 1e-8;
  double init_acc = 0.1;
};
struct Adadelta {
  double rho = 0.95;
  double eps = 1e-8;
};
struct RmsProp {
  double decay = 0.9;
  double eps = 1e-10;
};
struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Loss-based step size: eta = alpha * (loss - gamma * L_min) / (g . v + tiny), where v is
/// the direction proposed by the inner rule and L_min is a running minimum of the loss,
/// seeded with gamma0 * first loss and relaxed upward by a factor (1 + 1/forget_time) per step.
struct L4Settings {
  double alpha = 0.15;
  double gamma = 0.9;
  double gamma0 = 0.75;
  double forget_time = 1000.0;
  double tiny = 1e-12;
};
struct L4Adam {
  L4Settings l4;
  Adam inner{0.9, 0.999, 1e-4};
};
struct L4Mom {
  L4Settings l4;
  double mu = 0.9;
};

using OptimizerKind =
    std::variant<Vanilla, Momentum, Nesterov, Adagrad, Adadelta, RmsProp, Adam, L4Adam, L4Mom>;

std::string_view to_string(const OptimizerKind& kind);
const std::vector<std::string_view>& optimizer_names();
/// Default hyperparameters for a CLI name, or nullopt if the name is unknown.
std::optional<OptimizerKind> parse_optimizer(std::string_view name);
/// Override one hyperparameter by key (mu, eps, beta1, ...). Throws std::invalid_argument
/// for keys the optimizer does not have, or values outside their valid range.
void set_optimizer_param(OptimizerKind& kind, std::string_view key, double value);
/// Throws std::invalid_argument if any coefficient is out of range.
void validate(const OptimizerKind& kind);
/// "key=value" pairs for logging and JSON echo.
std::vector<std::pair<std::string, double>> optimizer_params(const OptimizerKind& kind);

template <typename Scalar>
struct OptimizerState {
  // first: momentum accumulator, Adam m, Adagrad sum of squares, or E[g^2].
  // second: Adam v or Adadelta E[dx^2].
  MlpParams<Scalar> first;
  MlpParams<Scalar> second;
  long step = 0;
  std::optional<Scalar> min_loss;  // L4 only
  Scalar last_l4_rate = Scalar(0);
};

enum class StepStatus { Ok, Diverged };

template <typename Scalar>
OptimizerState<Scalar> init_state(const OptimizerKind& kind, const MlpParams<Scalar>& params) {
  OptimizerState<Scalar> state;
  state.first = params.zeros_like();
  state.second = params.zeros_like();
  if (const auto* adagrad = std::get_if<Adagrad>(&kind)) {
    for_each_tensor([&](auto& t) { t.setConstant(Scalar(adagrad->init_acc)); }, state.first);
  }
  return state;
}

namespace detail {

template <typename Scalar>
bool finite(const MlpParams<Scalar>& g) {
  return g.all_finite();
}

// Adam moment update; writes the bias-corrected direction m_hat / (sqrt(v_hat) + eps) into out.
template <typename Scalar>
void adam_direction(const Adam& adam, OptimizerState<Scalar>& state, const MlpParams<Scalar>& grads,
                    MlpParams<Scalar>& out) {
  const Scalar b1 = Scalar(adam.beta1), b2 = Scalar(adam.beta2), eps = Scalar(adam.eps);
  const auto t = static_cast<Scalar>(state.step);
  const Scalar c1 = Scalar(1) - std::pow(b1, t);
  const Scalar c2 = Scalar(1) - std::pow(b2, t);
  for_each_tensor(
      [&](auto& m, auto& v, const auto& g, auto& d) {
        m = b1 * m + (Scalar(1) - b1) * g;
        v.array() = b2 * v.array() + (Scalar(1) - b2) * g.array().square();
        d.array() = (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
      },
      state.first, state.second, grads, out);
}

template <typename Scalar>
void l4_apply(const L4Settings& l4, OptimizerState<Scalar>& state, MlpParams<Scalar>& params,
              const MlpParams<Scalar>& grads, const MlpParams<Scalar>& direction, Scalar loss) {
  state.min_loss = state.min_loss ? std::min(*state.min_loss, loss) : Scalar(l4.gamma0) * loss;
  const Scalar gv = dot(grads, direction);
  const Scalar gap = std::max(Scalar(0), loss - Scalar(l4.gamma) * *state.min_loss);
  const Scalar rate = gv > Scalar(0) ? Scalar(l4.alpha) * gap / (gv + Scalar(l4.tiny)) : Scalar(0);
  state.last_l4_rate = rate;
  for_each_tensor([&](auto& theta, const auto& v) { theta -= rate * v; }, params, direction);
  *state.min_loss *= Scalar(1) + Scalar(1) / Scalar(l4.forget_time);
}

}  // namespace detail

/// Applies one update in place. `loss` is only read by the L4 rules; for those, `lr` has no
/// effect because the loss-based rate already fixes the step length. Non-finite gradients or
/// loss leave params and state untouched and return Diverged.
template <typename Scalar>
StepStatus step(const OptimizerKind& kind, OptimizerState<Scalar>& state, MlpParams<Scalar>& params,
                const MlpParams<Scalar>& grads, Scalar lr, Scalar loss) {
  if (!grads.same_shape(params) || !state.first.same_shape(params))
    throw std::invalid_argument("optimizer step: gradient/state shape does not match parameters");
  if (!std::isfinite(loss) || !detail::finite(grads)) return StepStatus::Diverged;
  ++state.step;

  std::visit(
      [&](const auto& rule) {
        using Rule = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<Rule, Vanilla>) {
          for_each_tensor([&](auto& theta, const auto& g) { theta -= lr * g; }, params, grads);
        } else if constexpr (std::is_same_v<Rule, Momentum>) {
          const Scalar mu = Scalar(rule.mu);
          for_each_tensor(
              [&](auto& theta, auto& acc, const auto& g) {
                acc = mu * acc + g;
                theta -= lr * acc;
              },
              params, state.first, grads);
        } else if constexpr (std::is_same_v<Rule, Nesterov>) {
          const Scalar mu = Scalar(rule.mu);
          for_each_tensor(
              [&](auto& theta, auto& acc, const auto& g) {
                acc = mu * acc + g;
                theta -= lr * (g + mu * acc);
              },
              params, state.first, grads);
        } else if constexpr (std::is_same_v<Rule, Adagrad>) {
          const Scalar eps = Scalar(rule.eps);
          for_each_tensor(
              [&](auto& theta, auto& acc, const auto& g) {
                acc.array() += g.array().square();
                theta.array() -= lr * g.array() / (acc.array().sqrt() + eps);
              },
              params, state.first, grads);
        } else if constexpr (std::is_same_v<Rule, Adadelta>) {
          const Scalar rho = Scalar(rule.rho), eps = Scalar(rule.eps);
          for_each_tensor(
              [&](auto& theta, auto& eg2, auto& edx2, const auto& g) {
                eg2.array() = rho * eg2.array() + (Scalar(1) - rho) * g.array().square();
                const auto update =
                    ((edx2.array() + eps).sqrt() / (eg2.array() + eps).sqrt() * g.array()).eval();
                edx2.array() = rho * edx2.array() + (Scalar(1) - rho) * update.square();
                theta.array() -= lr * update;
              },
              params, state.first, state.second, grads);
        } else if constexpr (std::is_same_v<Rule, RmsProp>) {
          const Scalar decay = Scalar(rule.decay), eps = Scalar(rule.eps);
          for_each_tensor(
              [&](auto& theta, auto& eg2, const auto& g) {
                eg2.array() = decay * eg2.array() + (Scalar(1) - decay) * g.array().square();
                theta.array() -= lr * g.array() / (eg2.array() + eps).sqrt();
              },
              params, state.first, grads);
        } else if constexpr (std::is_same_v<Rule, Adam>) {
          auto direction = params.zeros_like();
          detail::adam_direction(rule, state, grads, direction);
          for_each_tensor([&](auto& theta, const auto& d) { theta -= lr * d; }, params, direction);
        } else if constexpr (std::is_same_v<Rule, L4Adam>) {
          auto direction = params.zeros_like();
          detail::adam_direction(rule.inner, state, grads, direction);
          detail::l4_apply(rule.l4, state, params, grads, direction, loss);
        } else if constexpr (std::is_same_v<Rule, L4Mom>) {
          const Scalar mu = Scalar(rule.mu);
          for_each_tensor([&](auto& acc, const auto& g) { acc = mu * acc + g; }, state.first, grads);
          detail::l4_apply(rule.l4, state, params, grads, state.first, loss);
        }
      },
      kind);

  return params.all_finite() ? StepStatus::Ok : StepStatus::Diverged;
}

}  // namespace xorp

#endif  // XORP_OPTIMIZERS_HPP
