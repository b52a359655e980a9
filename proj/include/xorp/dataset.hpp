// XOR_p problem family: labels, 1-hot encodings, noisy batches and the clean test grid.
#ifndef XORP_DATASET_HPP
#define XORP_DATASET_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace xorp {

using Rng = std::mt19937_64;

/// Which input components receive Gaussian noise: the two hot entries of each row, or all 2p.
enum class NoiseMode { Hot, All };

/// An XOR_p instance. Construct through make_problem() to get the invariants checked.
struct ProblemSpec {
  int p = 2;
  double noise_sigma = 0.1;
  int batch_size = 40;
  NoiseMode noise_mode = NoiseMode::Hot;
  bool composite = false;  // set when p is not prime
};

bool is_prime(int n);

/// Throws std::invalid_argument on p < 2, negative sigma or batch_size < 1.
/// batch_size <= 0 selects the default of 10 p^2.
ProblemSpec make_problem(int p, double noise_sigma = 0.1, int batch_size = 0,
                         NoiseMode noise_mode = NoiseMode::Hot);

/// (a - b) mod p, in [0, p).
int class_label(int a, int b, int p);

Eigen::VectorXd one_hot(int v, int p);

/// [one_hot(a) | one_hot(b)], length 2p.
Eigen::VectorXd encode_pair(int a, int b, int p);

/// Continuous variant on the unit square: floor(p (a - b) + 0.5) mod p.
int continuous_class(double a, double b, int p);

struct Batch {
  Eigen::MatrixXd inputs;    // n x 2p
  std::vector<int> labels;   // n
  std::vector<int> a, b;     // clean operands, kept for export
};

/// Uniform (a, b) pairs, labelled from the clean pair, then i.i.d. Gaussian noise on the
/// components selected by spec.noise_mode.
Batch sample_batch(const ProblemSpec& spec, Rng& rng);

/// All p^2 pairs, clean, in row-major (a, b) order.
Batch full_test_grid(int p);

/// CSV with header a,b,label,x0..x{2p-1}; 9 significant digits.
void write_batch_csv(std::ostream& out, const Batch& batch);

}  // namespace xorp

#endif  // XORP_DATASET_HPP
