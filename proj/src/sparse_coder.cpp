#include "sparsedp/sparse_coder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace sparsedp {

namespace {

void check_dims(const Eigen::MatrixXd& G, const Eigen::VectorXd& patch) {
  if (G.rows() != patch.size())
    throw std::invalid_argument("dimension mismatch: dictionary has " +
                                std::to_string(G.rows()) + " rows, patch has " +
                                std::to_string(patch.size()) + " pixels");
}

}  // namespace

Eigen::VectorXd encode_least_squares(const Eigen::MatrixXd& dictionary,
                                     const Eigen::VectorXd& patch) {
  check_dims(dictionary, patch);
  return dictionary.completeOrthogonalDecomposition().solve(patch);
}

LeastSquaresEncoder::LeastSquaresEncoder(const Eigen::MatrixXd& dictionary)
    : pinv_(dictionary.completeOrthogonalDecomposition().pseudoInverse()) {}

Eigen::VectorXd LeastSquaresEncoder::encode(const Eigen::VectorXd& patch) const {
  if (patch.size() != pinv_.cols())
    throw std::invalid_argument("dimension mismatch: encoder expects " +
                                std::to_string(pinv_.cols()) + " pixels, got " +
                                std::to_string(patch.size()));
  return pinv_ * patch;
}

// --- l1 ----------------------------------------------------------------------

namespace {

// Largest eigenvalue of P = 2 [[H, -H], [-H, H]] by power iteration.
double split_lipschitz(const Eigen::MatrixXd& H) {
  const Eigen::Index m = H.rows();
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(2 * m);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  double estimate = 0.0;
  for (int it = 0; it < 50; ++it) {
    const double n = z.norm();
    if (n == 0.0) return 0.0;
    z /= n;
    const Eigen::VectorXd h = 2.0 * H * (z.head(m) - z.tail(m));
    Eigen::VectorXd pz(2 * m);
    pz << h, -h;
    estimate = z.dot(pz);
    z = pz;
  }
  return estimate;
}

struct SplitQp {
  const Eigen::MatrixXd& G;
  const Eigen::VectorXd& I;
  Eigen::MatrixXd H;   // G^T G
  Eigen::VectorXd c;   // G^T I
  double lambda;

  SplitQp(const Eigen::MatrixXd& g, const Eigen::VectorXd& i, double lam)
      : G(g), I(i), H(g.transpose() * g), c(g.transpose() * i), lambda(lam) {}

  Eigen::Index m() const { return H.rows(); }

  double objective(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd a = y.head(m()) - y.tail(m());
    return (G * a - I).squaredNorm() + lambda * y.sum();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd h = 2.0 * (H * (y.head(m()) - y.tail(m())) - c);
    Eigen::VectorXd g(2 * m());
    g << (h.array() + lambda).matrix(), (lambda - h.array()).matrix();
    return g;
  }

  // f(y) - f(y + d) for the quadratic, given the gradient at y.
  double decrease(const Eigen::VectorXd& grad, const Eigen::VectorXd& d) const {
    const Eigen::VectorXd da = d.head(m()) - d.tail(m());
    return -(grad.dot(d) + da.dot(H * da));
  }

  double kkt(const Eigen::VectorXd& y) const {
    return y.cwiseMin(gradient(y)).cwiseAbs().maxCoeff();
  }
};

}  // namespace

double l1_kkt_residual(const Eigen::MatrixXd& dictionary,
                       const Eigen::VectorXd& patch, double lambda,
                       const Eigen::VectorXd& split) {
  check_dims(dictionary, patch);
  if (split.size() != 2 * dictionary.cols())
    throw std::invalid_argument("split vector must have length 2m");
  return SplitQp(dictionary, patch, lambda).kkt(split);
}

L1Result encode_l1(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& patch,
                   const L1Options& options) {
  check_dims(dictionary, patch);
  if (!(options.lambda >= 0.0))
    throw std::invalid_argument("lambda must be nonnegative");
  if (options.max_iter < 0) throw std::invalid_argument("max_iter must be >= 0");

  const SplitQp qp(dictionary, patch, options.lambda);
  double lipschitz = split_lipschitz(qp.H);
  if (!(lipschitz > 0.0)) lipschitz = 1.0;

  L1Result result;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * qp.m());
  double f = qp.objective(y);
  result.objective_trace.push_back(f);

  int it = 0;
  while (it < options.max_iter) {
    const Eigen::VectorXd grad = qp.gradient(y);
    Eigen::VectorXd step = (y - grad / lipschitz).cwiseMax(0.0) - y;
    if (step.isZero(0.0)) break;  // fixed point
    // Decrease taken from the step itself: differencing two nearly equal
    // objective values loses everything below sqrt(eps) in the iterate.
    double decrease = qp.decrease(grad, step);
    while (decrease < 0.0 && lipschitz < 1e300) {
      // the power estimate approaches L from below; back off on overshoot
      lipschitz *= 2.0;
      step = (y - grad / lipschitz).cwiseMax(0.0) - y;
      decrease = qp.decrease(grad, step);
    }
    if (decrease < 0.0) break;
    ++it;
    y += step;
    f -= decrease;
    result.objective_trace.push_back(f);
    if (decrease < options.tol) break;
  }

  result.iterations = it;
  result.split = y;
  result.coeffs = y.head(qp.m()) - y.tail(qp.m());
  result.objective = qp.objective(y);
  result.kkt_residual = qp.kkt(y);
  result.converged = result.kkt_residual <= options.kkt_tol;
  return result;
}

// --- Regions -----------------------------------------------------------------

Eigen::VectorXd encode_region(const LeastSquaresEncoder& encoder,
                              const Region& region, int patch_side) {
  if (patch_side < 1 || region.side % patch_side != 0)
    throw std::invalid_argument("region side " + std::to_string(region.side) +
                                " is not divisible by patch side " +
                                std::to_string(patch_side));
  if (encoder.patch_pixels() != patch_side * patch_side)
    throw std::invalid_argument("encoder patch size does not match patch side");
  const auto tiles = tile_region(region, patch_side);
  const Eigen::Index m = encoder.atom_count();
  Eigen::VectorXd out(static_cast<Eigen::Index>(tiles.size()) * m);
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const Eigen::Map<const Eigen::VectorXd> patch(tiles[t].data(),
                                                  static_cast<Eigen::Index>(tiles[t].size()));
    out.segment(static_cast<Eigen::Index>(t) * m, m) = encoder.encode(patch);
  }
  return out;
}

Eigen::VectorXd encode_region(const GaborDictionary& dict, const Region& region) {
  return encode_region(LeastSquaresEncoder(dict.atoms), region, dict.patch_side);
}

// --- Whitening ---------------------------------------------------------------

std::vector<double> whiten_grid(std::span<const double> values, int width,
                                int height, double cutoff) {
  if (width < 1 || height < 1 ||
      values.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("whitening needs a nonempty width x height grid");
  if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be positive");
  const std::vector<double> input(values.begin(), values.end());
  return detail::filter_real_2d(input, width, height, [cutoff](double fx, double fy) {
    const double f = std::hypot(fx, fy);
    const double r = f / cutoff;
    return f * std::exp(-(r * r) * (r * r));
  });
}

std::vector<double> whiten_image(const Frame& frame, double cutoff) {
  return whiten_grid(frame.pixels(), frame.width(), frame.height(), cutoff);
}

// --- Quantization and entropy ------------------------------------------------

int quantize_value(double value, double bin_width) {
  if (!std::isfinite(value)) throw std::invalid_argument("cannot quantize non-finite value");
  const double level = std::round(value / bin_width);
  return static_cast<int>(std::clamp(level, static_cast<double>(kQuantMin),
                                     static_cast<double>(kQuantMax)));
}

QuantizedCode quantize_uniform(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
  QuantizedCode out;
  out.bin_width = bin_width;
  out.levels.reserve(values.size());
  for (double v : values) out.levels.push_back(quantize_value(v, bin_width));
  return out;
}

double estimate_entropy(std::span<const int> values, int bin_count) {
  if (values.empty()) throw std::invalid_argument("entropy of an empty sample");
  if (bin_count < 1) throw std::invalid_argument("bin count must be >= 1");
  std::map<int, std::size_t> counts;
  for (int v : values) ++counts[v];
  if (counts.size() > static_cast<std::size_t>(bin_count))
    throw std::invalid_argument("sample uses more distinct values than bins");
  const double n = static_cast<double>(values.size());
  double h = 0.0;
  for (const auto& [value, count] : counts) {
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  return std::max(0.0, h);
}

double typical_count_exponent(double entropy_bits, double count) {
  if (!(entropy_bits >= 0.0)) throw std::invalid_argument("entropy must be >= 0");
  if (!(count >= 0.0)) throw std::invalid_argument("count must be >= 0");
  return count * entropy_bits;
}

}  // namespace sparsedp
