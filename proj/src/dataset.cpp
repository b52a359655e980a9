#include "xorp/dataset.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

namespace xorp {

namespace {

void check_modulus(int p) {
  if (p < 2) throw std::invalid_argument("modulus p must be >= 2, got " + std::to_string(p));
}

void check_residue(int v, int p, const char* what) {
  check_modulus(p);
  if (v < 0 || v >= p)
    throw std::domain_error(std::string(what) + " = " + std::to_string(v) + " is outside [0, " +
                            std::to_string(p) + ")");
}

}  // namespace

bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

ProblemSpec make_problem(int p, double noise_sigma, int batch_size, NoiseMode noise_mode) {
  check_modulus(p);
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
  ProblemSpec spec;
  spec.p = p;
  spec.noise_sigma = noise_sigma;
  spec.batch_size = batch_size > 0 ? batch_size : 10 * p * p;
  spec.noise_mode = noise_mode;
  spec.composite = !is_prime(p);
  return spec;
}

int class_label(int a, int b, int p) {
  check_residue(a, p, "a");
  check_residue(b, p, "b");
  return ((a - b) % p + p) % p;
}

Eigen::VectorXd one_hot(int v, int p) {
  check_residue(v, p, "value");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
  out[v] = 1.0;
  return out;
}

Eigen::VectorXd encode_pair(int a, int b, int p) {
  Eigen::VectorXd out(2 * p);
  out << one_hot(a, p), one_hot(b, p);
  return out;
}

int continuous_class(double a, double b, int p) {
  check_modulus(p);
  if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
    throw std::domain_error("continuous_class expects a, b in [0, 1]");
  const auto band = static_cast<long>(std::floor(p * (a - b) + 0.5));
  return static_cast<int>(((band % p) + p) % p);
}

Batch sample_batch(const ProblemSpec& spec, Rng& rng) {
  const int p = spec.p;
  const int n = spec.batch_size;
  if (n < 1) throw std::invalid_argument("batch_size must be >= 1");

  std::uniform_int_distribution<int> residue(0, p - 1);
  Batch batch;
  batch.inputs = Eigen::MatrixXd::Zero(n, 2 * p);
  batch.labels.resize(n);
  batch.a.resize(n);
  batch.b.resize(n);
  for (int i = 0; i < n; ++i) {
    const int a = residue(rng);
    const int b = residue(rng);
    batch.a[i] = a;
    batch.b[i] = b;
    batch.labels[i] = class_label(a, b, p);
    batch.inputs(i, a) = 1.0;
    batch.inputs(i, p + b) = 1.0;
  }
  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    // Row-major draw order so the stream does not depend on Eigen's storage order.
    for (int i = 0; i < n; ++i) {
      if (spec.noise_mode == NoiseMode::Hot) {
        batch.inputs(i, batch.a[i]) += noise(rng);
        batch.inputs(i, p + batch.b[i]) += noise(rng);
      } else {
        for (int j = 0; j < 2 * p; ++j) batch.inputs(i, j) += noise(rng);
      }
    }
  }
  return batch;
}

Batch full_test_grid(int p) {
  check_modulus(p);
  const int n = p * p;
  Batch batch;
  batch.inputs = Eigen::MatrixXd::Zero(n, 2 * p);
  batch.labels.resize(n);
  batch.a.resize(n);
  batch.b.resize(n);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      const int i = a * p + b;
      batch.a[i] = a;
      batch.b[i] = b;
      batch.labels[i] = class_label(a, b, p);
      batch.inputs(i, a) = 1.0;
      batch.inputs(i, p + b) = 1.0;
    }
  }
  return batch;
}

void write_batch_csv(std::ostream& out, const Batch& batch) {
  const auto width = batch.inputs.cols();
  out << "a,b,label";
  for (Eigen::Index j = 0; j < width; ++j) out << ",x" << j;
  out << '\n';
  const auto old_precision = out.precision(9);
  for (Eigen::Index i = 0; i < batch.inputs.rows(); ++i) {
    out << batch.a[i] << ',' << batch.b[i] << ',' << batch.labels[i];
    for (Eigen::Index j = 0; j < width; ++j) out << ',' << batch.inputs(i, j);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace xorp
