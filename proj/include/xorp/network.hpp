// Single-hidden-layer perceptron: (2p -> h) with an elementwise activation, then
// (h -> p) with softmax and cross-entropy.
#ifndef XORP_NETWORK_HPP
#define XORP_NETWORK_HPP

#include "xorp/activations.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xorp {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

enum class BiasInit { Gaussian, Zero };

template <typename Scalar>
struct MlpParams {
  Matrix<Scalar> w1;     // inputs x hidden
  RowVector<Scalar> b1;  // hidden
  Matrix<Scalar> w2;     // hidden x classes
  RowVector<Scalar> b2;  // classes

  static MlpParams zeros(Eigen::Index inputs, Eigen::Index hidden, Eigen::Index classes) {
    return {Matrix<Scalar>::Zero(inputs, hidden), RowVector<Scalar>::Zero(hidden),
            Matrix<Scalar>::Zero(hidden, classes), RowVector<Scalar>::Zero(classes)};
  }

  /// Same shapes, every entry zero.
  MlpParams zeros_like() const { return zeros(inputs(), hidden(), classes()); }

  Eigen::Index inputs() const { return w1.rows(); }
  Eigen::Index hidden() const { return w1.cols(); }
  Eigen::Index classes() const { return w2.cols(); }
  Eigen::Index size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  bool same_shape(const MlpParams& o) const {
    return w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() && b1.size() == o.b1.size() &&
           w2.rows() == o.w2.rows() && w2.cols() == o.w2.cols() && b2.size() == o.b2.size();
  }

  bool all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
  }
};

using MlpParamsd = MlpParams<double>;

/// Calls f(w1...), f(b1...), f(w2...), f(b2...) across any number of same-shaped parameter sets.
template <typename F, typename... Sets>
void for_each_tensor(F&& f, Sets&... sets) {
  f(sets.w1...);
  f(sets.b1...);
  f(sets.w2...);
  f(sets.b2...);
}

/// Sum over all tensors of the elementwise product.
template <typename Scalar>
Scalar dot(const MlpParams<Scalar>& a, const MlpParams<Scalar>& b) {
  return a.w1.cwiseProduct(b.w1).sum() + a.b1.cwiseProduct(b.b1).sum() +
         a.w2.cwiseProduct(b.w2).sum() + a.b2.cwiseProduct(b.b2).sum();
}

/// Gaussian init of every weight (and, unless disabled, every bias).
template <typename Scalar, typename Rng>
MlpParams<Scalar> init_params(int p, int hidden_width, Rng& rng, Scalar init_sigma = Scalar(1),
                              BiasInit bias_init = BiasInit::Gaussian) {
  if (p < 2) throw std::invalid_argument("init_params: p must be >= 2");
  if (hidden_width < 1) throw std::invalid_argument("init_params: hidden_width must be >= 1");
  if (!(init_sigma > Scalar(0))) throw std::invalid_argument("init_params: init_sigma must be > 0");

  std::normal_distribution<Scalar> normal(Scalar(0), init_sigma);
  auto params = MlpParams<Scalar>::zeros(2 * p, hidden_width, p);
  // Row-major fill keeps the draw order independent of storage order.
  auto fill = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  };
  fill(params.w1);
  if (bias_init == BiasInit::Gaussian) fill(params.b1);
  fill(params.w2);
  if (bias_init == BiasInit::Gaussian) fill(params.b2);
  return params;
}

template <typename Scalar>
struct ForwardCache {
  Matrix<Scalar> inputs;  // n x 2p
  Matrix<Scalar> z1;      // n x h
  Matrix<Scalar> a1;      // n x h
  Matrix<Scalar> z2;      // n x p, logits
  Matrix<Scalar> probs;   // n x p
};

/// Row-wise softmax with max subtraction.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> shifted = logits.colwise() - logits.rowwise().maxCoeff();
  Matrix<Scalar> e = shifted.array().exp().matrix();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> totals = e.rowwise().sum();
  return e.array().colwise() / totals.array();
}

template <typename Scalar, typename Derived>
ForwardCache<Scalar> forward(const MlpParams<Scalar>& params, ActivationKind kind,
                             const Eigen::MatrixBase<Derived>& inputs) {
  if (inputs.cols() != params.inputs())
    throw std::invalid_argument("forward: input width " + std::to_string(inputs.cols()) +
                                " does not match W1 rows " + std::to_string(params.inputs()));
  ForwardCache<Scalar> cache;
  cache.inputs = inputs;
  cache.z1.noalias() = cache.inputs * params.w1;
  cache.z1.rowwise() += params.b1;
  cache.a1 = activate(kind, cache.z1);
  cache.z2.noalias() = cache.a1 * params.w2;
  cache.z2.rowwise() += params.b2;
  cache.probs = softmax_rows(cache.z2);
  return cache;
}

/// Mean cross-entropy over the batch, computed from the logits via log-sum-exp.
template <typename Scalar>
Scalar loss(const ForwardCache<Scalar>& cache, std::span<const int> labels) {
  const auto n = cache.z2.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("loss: label count does not match batch size");
  Scalar total(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = cache.z2.row(i);
    const Scalar m = row.maxCoeff();
    const Scalar lse = m + std::log((row.array() - m).exp().sum());
    total += lse - row(labels[i]);
  }
  return total / Scalar(n);
}

/// Gradient of the mean cross-entropy with respect to every parameter.
template <typename Scalar>
MlpParams<Scalar> backward(const MlpParams<Scalar>& params, ActivationKind kind,
                           const ForwardCache<Scalar>& cache, std::span<const int> labels) {
  const auto n = cache.probs.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("backward: label count does not match batch size");

  Matrix<Scalar> delta2 = cache.probs;
  for (Eigen::Index i = 0; i < n; ++i) delta2(i, labels[i]) -= Scalar(1);
  delta2 /= Scalar(n);

  MlpParams<Scalar> grad;
  grad.w2.noalias() = cache.a1.transpose() * delta2;
  grad.b2 = delta2.colwise().sum();

  Matrix<Scalar> delta1 = delta2 * params.w2.transpose();
  delta1.array() *= activate_grad(kind, cache.z1).array();
  grad.w1.noalias() = cache.inputs.transpose() * delta1;
  grad.b1 = delta1.colwise().sum();
  return grad;
}

/// Index of the largest probability in each row; ties go to the lowest index.
template <typename Scalar>
std::vector<int> predict(const ForwardCache<Scalar>& cache) {
  std::vector<int> out(cache.probs.rows());
  for (Eigen::Index i = 0; i < cache.probs.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < cache.probs.cols(); ++j)
      if (cache.probs(i, j) > cache.probs(i, best)) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

template <typename Scalar>
double accuracy(const ForwardCache<Scalar>& cache, std::span<const int> labels) {
  if (labels.empty()) throw std::domain_error("accuracy: empty example set");
  const auto predicted = predict(cache);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

template <typename Scalar, typename Derived>
double accuracy(const MlpParams<Scalar>& params, ActivationKind kind,
                const Eigen::MatrixBase<Derived>& inputs, std::span<const int> labels) {
  if (labels.empty()) throw std::domain_error("accuracy: empty example set");
  return accuracy(forward(params, kind, inputs), labels);
}

}  // namespace xorp

#endif  // XORP_NETWORK_HPP
