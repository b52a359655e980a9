// Elementwise activation functions and their derivatives.
//
// The piecewise-linear members of the family are written as the max of their affine
// segments. Derivatives at a kink are right-hand derivatives: the slope of the segment
// that is active just to the right of the kink.
#ifndef XORP_ACTIVATIONS_HPP
#define XORP_ACTIVATIONS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <span>
#include <string_view>

namespace xorp {

enum class ActivationKind { Sigmoid, Tanh, Elu, Relu, LeakyRelu, BoundedRelu, Lelu, L3Elu, LlElu };

inline constexpr std::array<ActivationKind, 9> kAllActivations = {
    ActivationKind::Sigmoid,   ActivationKind::Tanh,        ActivationKind::Elu,
    ActivationKind::Relu,      ActivationKind::LeakyRelu,   ActivationKind::BoundedRelu,
    ActivationKind::Lelu,      ActivationKind::L3Elu,       ActivationKind::LlElu};

constexpr bool is_differentiable(ActivationKind kind) {
  return kind == ActivationKind::Sigmoid || kind == ActivationKind::Tanh ||
         kind == ActivationKind::Elu;
}

constexpr std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Elu: return "elu";
    case ActivationKind::Relu: return "relu";
    case ActivationKind::LeakyRelu: return "leaky-relu";
    case ActivationKind::BoundedRelu: return "bounded-relu";
    case ActivationKind::Lelu: return "lelu";
    case ActivationKind::L3Elu: return "l3elu";
    case ActivationKind::LlElu: return "llelu";
  }
  return "?";
}

inline std::optional<ActivationKind> parse_activation(std::string_view name) {
  for (auto kind : kAllActivations)
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

namespace detail {

struct Segment {
  double slope;
  double intercept;
};

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kBoundedReluCap = 2.0;
inline constexpr double kL3Slope = 0.231;
inline constexpr double kL3Intercept = -0.387;

inline constexpr std::array<Segment, 2> kReluSegments = {{{0.0, 0.0}, {1.0, 0.0}}};
inline constexpr std::array<Segment, 2> kLeakyReluSegments = {{{kLeakySlope, 0.0}, {1.0, 0.0}}};
inline constexpr std::array<Segment, 2> kLeluSegments = {{{0.0, -1.0}, {1.0, 0.0}}};
inline constexpr std::array<Segment, 3> kL3EluSegments = {
    {{0.0, -1.0}, {kL3Slope, kL3Intercept}, {1.0, 0.0}}};
// -1 + (x + 1) / 5
inline constexpr std::array<Segment, 2> kLlEluSegments = {{{0.2, -0.8}, {1.0, 0.0}}};

template <typename Scalar>
Scalar max_of_segments(std::span<const Segment> segments, Scalar x) {
  Scalar best = Scalar(segments[0].slope) * x + Scalar(segments[0].intercept);
  for (const auto& s : segments.subspan(1)) best = std::max(best, Scalar(s.slope) * x + Scalar(s.intercept));
  return best;
}

// Slope of the active segment; ties go to the steeper segment, which is the one that
// wins for x + eps.
template <typename Scalar>
Scalar max_of_segments_grad(std::span<const Segment> segments, Scalar x) {
  Scalar best = Scalar(segments[0].slope) * x + Scalar(segments[0].intercept);
  Scalar slope = Scalar(segments[0].slope);
  for (const auto& s : segments.subspan(1)) {
    const Scalar v = Scalar(s.slope) * x + Scalar(s.intercept);
    if (v > best || (v == best && Scalar(s.slope) > slope)) {
      best = v;
      slope = Scalar(s.slope);
    }
  }
  return slope;
}

}  // namespace detail

template <std::floating_point Scalar>
Scalar activate(ActivationKind kind, Scalar x) {
  using std::exp;
  using std::tanh;
  switch (kind) {
    case ActivationKind::Sigmoid:
      return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + exp(-x)) : exp(x) / (Scalar(1) + exp(x));
    case ActivationKind::Tanh: return tanh(x);
    case ActivationKind::Elu: return x > Scalar(0) ? x : std::expm1(x);
    case ActivationKind::Relu: return detail::max_of_segments<Scalar>(detail::kReluSegments, x);
    case ActivationKind::LeakyRelu:
      return detail::max_of_segments<Scalar>(detail::kLeakyReluSegments, x);
    case ActivationKind::BoundedRelu:
      return std::min(std::max(Scalar(0), x), Scalar(detail::kBoundedReluCap));
    case ActivationKind::Lelu: return detail::max_of_segments<Scalar>(detail::kLeluSegments, x);
    case ActivationKind::L3Elu: return detail::max_of_segments<Scalar>(detail::kL3EluSegments, x);
    case ActivationKind::LlElu: return detail::max_of_segments<Scalar>(detail::kLlEluSegments, x);
  }
  return x;
}

template <std::floating_point Scalar>
Scalar activate_grad(ActivationKind kind, Scalar x) {
  using std::exp;
  switch (kind) {
    case ActivationKind::Sigmoid: {
      const Scalar s = activate(kind, x);
      return s * (Scalar(1) - s);
    }
    case ActivationKind::Tanh: {
      const Scalar t = std::tanh(x);
      return Scalar(1) - t * t;
    }
    case ActivationKind::Elu: return x >= Scalar(0) ? Scalar(1) : exp(x);
    case ActivationKind::Relu:
      return detail::max_of_segments_grad<Scalar>(detail::kReluSegments, x);
    case ActivationKind::LeakyRelu:
      return detail::max_of_segments_grad<Scalar>(detail::kLeakyReluSegments, x);
    case ActivationKind::BoundedRelu:
      return (x >= Scalar(0) && x < Scalar(detail::kBoundedReluCap)) ? Scalar(1) : Scalar(0);
    case ActivationKind::Lelu:
      return detail::max_of_segments_grad<Scalar>(detail::kLeluSegments, x);
    case ActivationKind::L3Elu:
      return detail::max_of_segments_grad<Scalar>(detail::kL3EluSegments, x);
    case ActivationKind::LlElu:
      return detail::max_of_segments_grad<Scalar>(detail::kLlEluSegments, x);
  }
  return Scalar(1);
}

/// Points where the function is not differentiable. Empty for the smooth trio.
inline std::span<const double> kinks(ActivationKind kind) {
  static constexpr std::array<double, 1> zero = {0.0};
  static constexpr std::array<double, 1> minus_one = {-1.0};
  static constexpr std::array<double, 2> bounded = {0.0, detail::kBoundedReluCap};
  static constexpr std::array<double, 2> l3 = {
      (-1.0 - detail::kL3Intercept) / detail::kL3Slope,
      detail::kL3Intercept / (1.0 - detail::kL3Slope)};
  switch (kind) {
    case ActivationKind::Relu:
    case ActivationKind::LeakyRelu: return zero;
    case ActivationKind::BoundedRelu: return bounded;
    case ActivationKind::Lelu:
    case ActivationKind::LlElu: return minus_one;
    case ActivationKind::L3Elu: return l3;
    default: return {};
  }
}

inline double distance_to_kink(ActivationKind kind, double x) {
  double best = std::numeric_limits<double>::infinity();
  for (double k : kinks(kind)) best = std::min(best, std::abs(x - k));
  return best;
}

template <typename Derived>
auto activate(ActivationKind kind, const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([kind](Scalar x) { return activate(kind, x); });
}

template <typename Derived>
auto activate_grad(ActivationKind kind, const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([kind](Scalar x) { return activate_grad(kind, x); });
}

}  // namespace xorp

#endif  // XORP_ACTIVATIONS_HPP
