#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "sparsedp/gabor.hpp"
#include "sparsedp/image.hpp"

namespace sparsedp {

/// Minimum-norm least-squares coefficients: argmin |G a - I|^2 with the
/// smallest |a| among all minimizers.
Eigen::VectorXd encode_least_squares(const Eigen::MatrixXd& dictionary,
                                     const Eigen::VectorXd& patch);

/// Caches the pseudo-inverse of a dictionary so many patches can be coded
/// with one matrix-vector product each.
class LeastSquaresEncoder {
 public:
  explicit LeastSquaresEncoder(const Eigen::MatrixXd& dictionary);

  Eigen::VectorXd encode(const Eigen::VectorXd& patch) const;
  int patch_pixels() const { return static_cast<int>(pinv_.cols()); }
  int atom_count() const { return static_cast<int>(pinv_.rows()); }
  const Eigen::MatrixXd& pseudo_inverse() const { return pinv_; }

 private:
  Eigen::MatrixXd pinv_;
};

struct L1Options {
  double lambda = 0.0;
  int max_iter = 20000;
  /// Stop once one step lowers the objective by less than this.
  double tol = 1e-20;
  /// A run counts as converged when the KKT residual is at most this.
  double kkt_tol = 1e-6;
};

struct L1Result {
  Eigen::VectorXd coeffs;          // a = a+ - a-
  Eigen::VectorXd split;           // y = (a+, a-)
  bool converged = false;
  int iterations = 0;
  /// Objective after each step, starting with the initial point y = 0. Later
  /// entries subtract the exact per-step decrease from the first.
  std::vector<double> objective_trace;
  /// max_i |min(y_i, (P y + q)_i)|
  double kkt_residual = 0.0;
  double objective = 0.0;
};

/// l1-regularized coding |G a - I|^2 + lambda |a|_1, solved as a bound
/// constrained QP over (a+, a-) >= 0 by projected gradient with step 1/L.
L1Result encode_l1(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& patch,
                   const L1Options& options = {});

/// KKT residual of the split QP at y (length 2m).
double l1_kkt_residual(const Eigen::MatrixXd& dictionary,
                       const Eigen::VectorXd& patch, double lambda,
                       const Eigen::VectorXd& split);

/// Tiles a square region into patch_side patches and concatenates the code
/// of each tile in row-major tile order.
Eigen::VectorXd encode_region(const LeastSquaresEncoder& encoder,
                              const Region& region, int patch_side);
Eigen::VectorXd encode_region(const GaborDictionary& dict, const Region& region);

/// Frequency-domain decorrelation with gain |f| exp(-(|f|/cutoff)^4).
/// The output has the frame's size, row-major, and zero mean.
std::vector<double> whiten_image(const Frame& frame, double cutoff = 0.4);
std::vector<double> whiten_grid(std::span<const double> values, int width,
                                int height, double cutoff = 0.4);

struct QuantizedCode {
  std::vector<int> levels;  // each in [-128, 127]
  double bin_width = 1.0;
};

inline constexpr int kQuantMin = -128;
inline constexpr int kQuantMax = 127;

/// Rounds value / bin_width to the nearest integer and clips to the 8-bit
/// signed range.
QuantizedCode quantize_uniform(std::span<const double> values,
                               double bin_width = 1.0);
int quantize_value(double value, double bin_width = 1.0);

/// Plug-in entropy of the empirical histogram, in bits.
double estimate_entropy(std::span<const int> values, int bin_count = 256);

/// log2 of the number of typical sequences of `count` symbols of entropy H.
double typical_count_exponent(double entropy_bits, double count);

}  // namespace sparsedp
