#include "doctest.h"

#include <cmath>
#include <random>

#include "sparsedp/sparse_coder.hpp"

using namespace sparsedp;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

double l1_objective(const Eigen::MatrixXd& G, const Eigen::VectorXd& I, double lambda,
                    const Eigen::VectorXd& a) {
  return (G * a - I).squaredNorm() + lambda * a.lpNorm<1>();
}

// Cyclic coordinate descent with exact soft-threshold updates; an independent
// lasso solver for small problems.
Eigen::VectorXd coordinate_descent(const Eigen::MatrixXd& G, const Eigen::VectorXd& I,
                                   double lambda) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(G.cols());
  Eigen::VectorXd r = I;
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double change = 0;
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
      const double gg = G.col(j).squaredNorm();
      const double rho = G.col(j).dot(r) + gg * a[j];
      const double next = std::copysign(std::max(0.0, std::abs(2 * rho) - lambda), rho) / (2 * gg);
      r -= G.col(j) * (next - a[j]);
      change = std::max(change, std::abs(next - a[j]));
      a[j] = next;
    }
    if (change < 1e-15) break;
  }
  return a;
}

}  // namespace

TEST_CASE("least squares with the identity returns the patch") {
  const Eigen::VectorXd I = Eigen::VectorXd::LinSpaced(16, -1.0, 2.0);
  CHECK(encode_least_squares(Eigen::MatrixXd::Identity(16, 16), I).isApprox(I, 1e-14));
}

TEST_CASE("least squares with orthonormal columns is the projection") {
  const Eigen::MatrixXd Q = random_matrix(20, 8, 1).householderQr().householderQ() *
                            Eigen::MatrixXd::Identity(20, 8);
  const Eigen::VectorXd I = random_matrix(20, 1, 2);
  CHECK((encode_least_squares(Q, I) - Q.transpose() * I).norm() < 1e-12);
}

TEST_CASE("least squares beats random perturbations") {
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd G = random_matrix(30, 12, 10 + trial);
    const Eigen::VectorXd I = random_matrix(30, 1, 20 + trial);
    const Eigen::VectorXd a = encode_least_squares(G, I);
    const double best = (G * a - I).squaredNorm();
    std::mt19937_64 rng(trial);
    std::normal_distribution<double> n(0.0, 1e-3);
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd b = a;
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += n(rng);
      CHECK((G * b - I).squaredNorm() >= best);
    }
    // normal equations
    CHECK((G.transpose() * (G * a - I)).norm() < 1e-10);
  }
}

TEST_CASE("over-complete least squares is the minimum-norm solution") {
  const Eigen::MatrixXd G = random_matrix(10, 25, 3);
  const Eigen::VectorXd I = random_matrix(10, 1, 4);
  const Eigen::VectorXd a = encode_least_squares(G, I);
  const Eigen::VectorXd oracle = G.transpose() * (G * G.transpose()).ldlt().solve(I);
  CHECK((a - oracle).norm() < 1e-10);
  CHECK((G * a - I).norm() < 1e-10 * I.norm());

  const LeastSquaresEncoder enc(G);
  CHECK((enc.encode(I) - a).norm() < 1e-10);
  CHECK(enc.atom_count() == 25);
  CHECK(enc.patch_pixels() == 10);
}

TEST_CASE("Gabor codes reconstruct patches") {
  const GaborDictionary d = build_dictionary(CopulaModel{}, 10, 225, 1);
  const Eigen::VectorXd I = random_matrix(100, 1, 5);
  const Eigen::VectorXd a = encode_least_squares(d.atoms, I);
  CHECK((d.atoms * a - I).norm() < 1e-6 * I.norm());
}

TEST_CASE("dimension mismatches throw") {
  CHECK_THROWS(encode_least_squares(Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(5)));
  CHECK_THROWS(encode_l1(Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(5)));
  L1Options o;
  o.lambda = -1;
  CHECK_THROWS(encode_l1(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), o));
}

TEST_CASE("l1 with zero weight matches least squares") {
  const Eigen::MatrixXd G = random_matrix(15, 6, 7);
  const Eigen::VectorXd I = random_matrix(15, 1, 8);
  const L1Result r = encode_l1(G, I);
  const double ls = (G * encode_least_squares(G, I) - I).squaredNorm();
  CHECK(r.converged);
  CHECK(std::abs(r.objective - ls) < 1e-6);
}

TEST_CASE("l1 one-dimensional soft threshold") {
  const Eigen::MatrixXd G = Eigen::MatrixXd::Ones(1, 1);
  const Eigen::VectorXd I = Eigen::VectorXd::Ones(1);
  L1Options o;
  o.lambda = 1.0;
  const L1Result r = encode_l1(G, I, o);
  CHECK(std::abs(r.coeffs[0] - 0.5) < 1e-9);
  CHECK(r.converged);

  for (double lambda : {0.0, 0.3, 1.7, 2.5}) {
    o.lambda = lambda;
    const double g = 1.3, y = -0.8;
    const L1Result s = encode_l1(Eigen::MatrixXd::Constant(1, 1, g), Eigen::VectorXd::Constant(1, y), o);
    const double closed = std::copysign(std::max(0.0, std::abs(2 * g * y) - lambda), g * y) / (2 * g * g);
    CHECK(std::abs(s.coeffs[0] - closed) < 1e-9);
  }
}

TEST_CASE("large l1 weight gives the zero code") {
  const Eigen::MatrixXd G = random_matrix(12, 5, 9);
  const Eigen::VectorXd I = random_matrix(12, 1, 10);
  L1Options o;
  o.lambda = 2.0 * (G.transpose() * I).cwiseAbs().maxCoeff();
  const L1Result r = encode_l1(G, I, o);
  CHECK(r.coeffs.isZero(0.0));
  CHECK(l1_kkt_residual(G, I, o.lambda, Eigen::VectorXd::Zero(10)) <= 1e-12);
}

TEST_CASE("l1 matches coordinate descent and satisfies KKT") {
  for (int trial = 0; trial < 6; ++trial) {
    const Eigen::MatrixXd G = random_matrix(20, 8, 30 + trial);
    const Eigen::VectorXd I = random_matrix(20, 1, 40 + trial);
    L1Options o;
    o.lambda = 0.5 + trial;
    const L1Result r = encode_l1(G, I, o);
    REQUIRE(r.converged);
    CHECK(r.kkt_residual <= 1e-6);
    const Eigen::VectorXd oracle = coordinate_descent(G, I, o.lambda);
    CHECK(std::abs(r.objective - l1_objective(G, I, o.lambda, oracle)) < 1e-8);
    CHECK((r.coeffs - oracle).norm() < 1e-5);
    // y = (a+, a-) is complementary at the optimum
    const Eigen::Index m = G.cols();
    CHECK((r.split.head(m).cwiseProduct(r.split.tail(m))).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(r.split.minCoeff() >= 0.0);
  }
}

TEST_CASE("l1 objective trace never increases") {
  const GaborDictionary d = build_dictionary(CopulaModel{}, 6, 50, 2);
  const Eigen::VectorXd I = random_matrix(36, 1, 11);
  for (double lambda : {0.0, 0.05, 1.0}) {
    L1Options o;
    o.lambda = lambda;
    o.max_iter = 3000;
    const L1Result r = encode_l1(d.atoms, I, o);
    REQUIRE(r.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1]);
    CHECK(r.objective_trace.front() == doctest::Approx(I.squaredNorm()));
    CHECK(r.objective == doctest::Approx(l1_objective(d.atoms, I, lambda, r.coeffs)));
    // accumulated decreases agree with the directly evaluated objective
    CHECK(std::abs(r.objective_trace.back() - r.objective) <= 1e-10 * r.objective_trace.front());
  }
}

TEST_CASE("region codes concatenate tile codes") {
  const GaborDictionary d = build_dictionary(CopulaModel{}, 5, 25, 3);
  Frame f(20, 20);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (double& v : f.pixels()) v = u(rng);
  const Region r = extract_region(f, {5, 0}, 15);
  const Eigen::VectorXd code = encode_region(d, r);
  REQUIRE(code.size() == 9 * 25);
  const auto tiles = tile_region(r, 5);
  for (int t = 0; t < 9; ++t) {
    const Eigen::Map<const Eigen::VectorXd> patch(tiles[static_cast<std::size_t>(t)].data(), 25);
    CHECK((code.segment(t * 25, 25) - encode_least_squares(d.atoms, patch)).norm() < 1e-9);
  }
  CHECK_THROWS(encode_region(d, extract_region(f, {0, 0}, 12)));

  const Region single = extract_region(f, {0, 0}, 5);
  CHECK(encode_region(d, single).size() == 25);
}

TEST_CASE("whitening removes the mean and flattens constant images") {
  const auto z = whiten_image(Frame(16, 12, 0.7));
  REQUIRE(z.size() == 16u * 12u);
  for (double v : z) CHECK(std::abs(v) < 1e-12);

  const Frame f = generate_power_law_field(64, 64, 2.0, 4);
  const auto w = whiten_image(f);
  double mean = 0;
  for (double v : w) mean += v;
  CHECK(std::abs(mean / static_cast<double>(w.size())) < 1e-12);

  // whitening weakens neighbour correlation of 1/f^2 images
  Frame wf(64, 64);
  const double lo = *std::min_element(w.begin(), w.end());
  const double hi = *std::max_element(w.begin(), w.end());
  for (std::size_t i = 0; i < w.size(); ++i) wf.pixels()[i] = (w[i] - lo) / (hi - lo);
  const std::vector<Frame> raw{f}, white{wf};
  CHECK(std::abs(adjacent_pixel_correlation(white, 4000, 1)) <
        adjacent_pixel_correlation(raw, 4000, 1));

  CHECK_THROWS(whiten_grid(std::vector<double>(5), 2, 2));
  CHECK_THROWS(whiten_image(f, 0.0));
}

TEST_CASE("quantization") {
  CHECK(quantize_value(0.4) == 0);
  CHECK(quantize_value(-137.2) == -128);
  CHECK(quantize_value(140.8) == 127);
  CHECK(quantize_value(127.49) == 127);
  CHECK(quantize_value(-0.6) == -1);
  CHECK(quantize_value(2.6, 2.0) == 1);
  CHECK_THROWS(quantize_value(std::nan("")));
  const std::vector<double> v{0.4, -137.2, 3.5};
  const QuantizedCode q = quantize_uniform(v);
  CHECK(q.levels == std::vector<int>{0, -128, 4});
}

TEST_CASE("entropy estimates") {
  CHECK(estimate_entropy(std::vector<int>(50, 3)) == 0.0);
  std::vector<int> uniform;
  for (int rep = 0; rep < 4; ++rep)
    for (int v = kQuantMin; v <= kQuantMax; ++v) uniform.push_back(v);
  CHECK(estimate_entropy(uniform) == 8.0);
  std::vector<int> halves(10, 1);
  halves.resize(20, -1);
  CHECK(estimate_entropy(halves) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(estimate_entropy(std::vector<int>{}));
  CHECK_THROWS(estimate_entropy(std::vector<int>{1, 2, 3}, 2));

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(-20, 20);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> xs(200);
    for (int& x : xs) x = pick(rng);
    const double h = estimate_entropy(xs);
    CHECK(h >= 0.0);
    CHECK(h <= 8.0);
    CHECK(h <= std::log2(41.0) + 1e-12);
  }
}

TEST_CASE("typical sequence counts") {
  CHECK(typical_count_exponent(8.0, 1.0) == 8.0);
  CHECK(typical_count_exponent(2.5, 100.0) == 250.0);
  CHECK(typical_count_exponent(0.0, 100.0) == 0.0);
  // 2^250 is about 6^100 and about 10^77
  CHECK(typical_count_exponent(2.5, 100.0) / std::log2(6.0) == doctest::Approx(100.0).epsilon(0.04));
  CHECK(typical_count_exponent(2.5, 100.0) * std::log10(2.0) == doctest::Approx(75.3).epsilon(0.01));
}
