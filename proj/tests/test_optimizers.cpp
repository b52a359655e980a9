#include <doctest.h>

#include "xorp/optimizers.hpp"

#include <cmath>
#include <limits>

using namespace xorp;

namespace {

// 1-1-1 network: four scalars, all set to the same value.
MlpParamsd scalars(double v) {
  auto p = MlpParamsd::zeros(1, 1, 1);
  for_each_tensor([v](auto& t) { t.setConstant(v); }, p);
  return p;
}

double value(const MlpParamsd& p) { return p.w1(0, 0); }

bool uniform(const MlpParamsd& p) {
  const double v = value(p);
  return p.b1(0) == v && p.w2(0, 0) == v && p.b2(0) == v;
}

// One step from theta with gradient g on every scalar; returns the new value.
double one_step(const OptimizerKind& kind, OptimizerState<double>& state, double theta, double g,
                double lr, double loss = 1.0) {
  auto params = scalars(theta);
  REQUIRE(step(kind, state, params, scalars(g), lr, loss) == StepStatus::Ok);
  REQUIRE(uniform(params));
  return value(params);
}

constexpr double kTol = 1e-12;

}  // namespace

TEST_CASE("vanilla") {
  const OptimizerKind kind = Vanilla{};
  auto state = init_state(kind, scalars(0.0));
  CHECK(one_step(kind, state, 1.0, 0.5, 0.1) == doctest::Approx(0.95).epsilon(kTol));
  CHECK(state.step == 1);
}

TEST_CASE("momentum two steps") {
  const OptimizerKind kind = Momentum{0.9};
  auto state = init_state(kind, scalars(0.0));
  const double lr = 0.1, g1 = 0.5, g2 = -0.2;
  const double t1 = one_step(kind, state, 1.0, g1, lr);
  CHECK(std::abs(t1 - (1.0 - lr * g1)) < kTol);
  const double t2 = one_step(kind, state, t1, g2, lr);
  CHECK(std::abs(t2 - (t1 - lr * (0.9 * g1 + g2))) < kTol);
}

TEST_CASE("nesterov two steps") {
  const OptimizerKind kind = Nesterov{0.9};
  auto state = init_state(kind, scalars(0.0));
  const double lr = 0.1, g1 = 0.5, g2 = -0.2;
  const double t1 = one_step(kind, state, 1.0, g1, lr);
  CHECK(std::abs(t1 - (1.0 - lr * (g1 + 0.9 * g1))) < kTol);
  const double acc2 = 0.9 * g1 + g2;
  const double t2 = one_step(kind, state, t1, g2, lr);
  CHECK(std::abs(t2 - (t1 - lr * (g2 + 0.9 * acc2))) < kTol);
}

TEST_CASE("adagrad with initial accumulator") {
  const OptimizerKind kind = Adagrad{};
  auto state = init_state(kind, scalars(0.0));
  CHECK(value(state.first) == 0.1);
  const double t1 = one_step(kind, state, 1.0, 1.0, 1.0);
  CHECK(std::abs(t1 - (1.0 - 1.0 / (std::sqrt(1.1) + 1e-8))) < kTol);
  CHECK(1.0 - t1 == doctest::Approx(0.95346).epsilon(1e-5));
  const double t2 = one_step(kind, state, t1, 0.5, 1.0);
  CHECK(std::abs(t2 - (t1 - 0.5 / (std::sqrt(1.35) + 1e-8))) < kTol);
}

TEST_CASE("adadelta two steps") {
  const double rho = 0.95, eps = 1e-8, lr = 1.0, g1 = 0.5, g2 = 0.3;
  const OptimizerKind kind = Adadelta{rho, eps};
  auto state = init_state(kind, scalars(0.0));
  const double eg1 = (1 - rho) * g1 * g1;
  const double u1 = std::sqrt(eps) / std::sqrt(eg1 + eps) * g1;
  const double t1 = one_step(kind, state, 1.0, g1, lr);
  CHECK(std::abs(t1 - (1.0 - lr * u1)) < kTol);
  const double edx1 = (1 - rho) * u1 * u1;
  const double eg2 = rho * eg1 + (1 - rho) * g2 * g2;
  const double u2 = std::sqrt(edx1 + eps) / std::sqrt(eg2 + eps) * g2;
  const double t2 = one_step(kind, state, t1, g2, lr);
  CHECK(std::abs(t2 - (t1 - lr * u2)) < kTol);
  CHECK(std::abs(value(state.second) - (rho * edx1 + (1 - rho) * u2 * u2)) < kTol);
}

TEST_CASE("rmsprop two steps") {
  const OptimizerKind kind = RmsProp{};
  auto state = init_state(kind, scalars(0.0));
  const double lr = 0.01, g1 = 0.5, g2 = -1.0;
  const double v1 = 0.1 * g1 * g1;
  const double t1 = one_step(kind, state, 1.0, g1, lr);
  CHECK(std::abs(t1 - (1.0 - lr * g1 / std::sqrt(v1 + 1e-10))) < kTol);
  const double v2 = 0.9 * v1 + 0.1 * g2 * g2;
  const double t2 = one_step(kind, state, t1, g2, lr);
  CHECK(std::abs(t2 - (t1 - lr * g2 / std::sqrt(v2 + 1e-10))) < kTol);
}

TEST_CASE("adam t=1 and t=2") {
  const OptimizerKind kind = Adam{};
  auto state = init_state(kind, scalars(0.0));
  const double lr = 0.1, g1 = 0.5, g2 = 0.25;
  const double t1 = one_step(kind, state, 1.0, g1, lr);
  // Bias correction makes the first step lr * g / (|g| + eps).
  CHECK(std::abs(t1 - (1.0 - lr * g1 / (std::abs(g1) + 1e-8))) < kTol);
  const double m2 = 0.9 * (0.1 * g1) + 0.1 * g2;
  const double v2 = 0.999 * (0.001 * g1 * g1) + 0.001 * g2 * g2;
  const double mhat = m2 / (1 - 0.81), vhat = v2 / (1 - 0.999 * 0.999);
  const double t2 = one_step(kind, state, t1, g2, lr);
  CHECK(std::abs(t2 - (t1 - lr * mhat / (std::sqrt(vhat) + 1e-8))) < kTol);
}

TEST_CASE("adam first step is scale invariant") {
  const OptimizerKind kind = Adam{};
  for (double c : {1e-3, 1.0, 1e3}) {
    auto s1 = init_state(kind, scalars(0.0));
    auto s2 = init_state(kind, scalars(0.0));
    const double d1 = 1.0 - one_step(kind, s1, 1.0, 0.5, 0.1);
    const double d2 = 1.0 - one_step(kind, s2, 1.0, 0.5 * c, 0.1);
    CHECK(std::abs(d1 - d2) <= 10 * 1e-8 * 0.1 / std::min(1.0, 0.5 * c));
  }
}

TEST_CASE("L4 with momentum, pinned running minimum") {
  const L4Settings l4;
  const OptimizerKind kind = L4Mom{l4, 0.9};
  auto state = init_state(kind, scalars(0.0));
  state.step = 5;
  state.min_loss = 0.5;
  const double g = 0.5, loss = 1.0;
  // Direction = accumulator = g on each of the four scalars, so g.v = 4 g^2.
  const double rate = l4.alpha * (loss - l4.gamma * 0.5) / (4 * g * g + l4.tiny);
  const double t1 = one_step(kind, state, 1.0, g, 123.0, loss);
  CHECK(std::abs(t1 - (1.0 - rate * g)) < kTol);
  CHECK(std::abs(state.last_l4_rate - rate) < kTol);
  CHECK(std::abs(*state.min_loss - 0.5 * (1 + 1 / l4.forget_time)) < kTol);
}

TEST_CASE("L4 with Adam, pinned running minimum") {
  const L4Settings l4;
  const OptimizerKind kind = L4Adam{};
  auto state = init_state(kind, scalars(0.0));
  state.min_loss = 2.0;
  const double g = 0.5, loss = 1.0;
  const double v = g / (g + 1e-4);
  const double rate = l4.alpha * (loss - l4.gamma * loss) / (4 * g * v + l4.tiny);
  const double t1 = one_step(kind, state, 1.0, g, 0.1, loss);
  CHECK(std::abs(t1 - (1.0 - rate * v)) < kTol);
  CHECK(std::abs(*state.min_loss - loss * (1 + 1 / l4.forget_time)) < kTol);
}

TEST_CASE("L4 seeds its minimum from the first loss and ignores lr") {
  const OptimizerKind kind = L4Mom{};
  auto s1 = init_state(kind, scalars(0.0));
  auto s2 = init_state(kind, scalars(0.0));
  const double a = one_step(kind, s1, 1.0, 0.5, 0.01, 2.0);
  const double b = one_step(kind, s2, 1.0, 0.5, 5.0, 2.0);
  CHECK(a == b);
  CHECK(std::abs(*s1.min_loss - 0.75 * 2.0 * 1.001) < kTol);
}

TEST_CASE("L4 rate vanishes exactly at the running minimum") {
  L4Mom rule;
  rule.l4.gamma = 1.0;
  const OptimizerKind kind = rule;
  auto state = init_state(kind, scalars(0.0));
  state.step = 3;
  state.min_loss = 0.4;
  CHECK(one_step(kind, state, 1.0, 0.5, 0.1, 0.4) == 1.0);
  CHECK(state.last_l4_rate == 0.0);
  CHECK(one_step(kind, state, 1.0, 0.5, 0.1, 0.6) < 1.0);
  CHECK(state.last_l4_rate > 0.0);

  // Never negative, even when the direction opposes the gradient.
  auto opposed = init_state(kind, scalars(0.0));
  opposed.first = scalars(-10.0);
  opposed.min_loss = 0.1;
  opposed.step = 1;
  CHECK(one_step(kind, opposed, 1.0, 0.5, 0.1, 1.0) == 1.0);
  CHECK(opposed.last_l4_rate == 0.0);
}

TEST_CASE("every rule converges on a quadratic bowl at some grid rate") {
  for (auto name : optimizer_names()) {
    CAPTURE(name);
    const auto kind = *parse_optimizer(name);
    bool converged = false;
    for (double lr : {0.01, 0.1, 1.0, 5.0}) {
      auto params = scalars(1.0);
      auto state = init_state(kind, params);
      for (int i = 0; i < 10000 && !converged; ++i) {
        const double f = 0.5 * dot(params, params);
        if (step(kind, state, params, params, lr, f) != StepStatus::Ok) break;
        converged = params.w1.cwiseAbs().maxCoeff() < 1e-3 && params.b2.cwiseAbs().maxCoeff() < 1e-3;
      }
      if (converged) break;
    }
    CHECK(converged);
  }
}

TEST_CASE("non-finite input is reported and changes nothing") {
  for (auto name : optimizer_names()) {
    const auto kind = *parse_optimizer(name);
    auto params = scalars(1.0);
    auto state = init_state(kind, params);
    auto bad = scalars(0.5);
    bad.w2(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK(step(kind, state, params, bad, 0.1, 1.0) == StepStatus::Diverged);
    CHECK(step(kind, state, params, scalars(0.5), 0.1, std::numeric_limits<double>::infinity()) ==
          StepStatus::Diverged);
    CHECK(state.step == 0);
    CHECK(uniform(params));
    CHECK(value(params) == 1.0);
  }
  const OptimizerKind vanilla = Vanilla{};
  auto params = scalars(1.0);
  auto state = init_state(vanilla, params);
  CHECK(step(vanilla, state, params, scalars(1e300), 1e300, 1.0) == StepStatus::Diverged);
  CHECK_THROWS_AS(step(vanilla, state, params, MlpParamsd::zeros(2, 1, 1), 0.1, 1.0),
                  std::invalid_argument);
}

TEST_CASE("names, parameters and validation") {
  CHECK(optimizer_names().size() == 9);
  for (auto name : optimizer_names()) CHECK(to_string(*parse_optimizer(name)) == name);
  CHECK_FALSE(parse_optimizer("sgdx"));

  OptimizerKind adam = Adam{};
  set_optimizer_param(adam, "beta1", 0.8);
  CHECK(std::get<Adam>(adam).beta1 == 0.8);
  CHECK_THROWS_AS(set_optimizer_param(adam, "beta1", 1.0), std::invalid_argument);
  CHECK_THROWS_AS(set_optimizer_param(adam, "mu", 0.5), std::invalid_argument);

  OptimizerKind l4 = L4Adam{};
  set_optimizer_param(l4, "alpha", 0.3);
  set_optimizer_param(l4, "eps", 1e-6);
  CHECK(std::get<L4Adam>(l4).l4.alpha == 0.3);
  CHECK(std::get<L4Adam>(l4).inner.eps == 1e-6);
  CHECK_THROWS_AS(set_optimizer_param(l4, "forget_time", 0.0), std::invalid_argument);

  CHECK_THROWS_AS(validate(OptimizerKind{Momentum{1.5}}), std::invalid_argument);
  CHECK_NOTHROW(validate(OptimizerKind{L4Mom{}}));
  CHECK(optimizer_params(Adagrad{}).size() == 2);
  CHECK(optimizer_params(Vanilla{}).empty());
}
