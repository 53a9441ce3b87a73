#include "sparsedp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "sparsedp/stats.hpp"

namespace sparsedp {

Eigen::MatrixXd build_design_matrix(const FeatureCode& code,
                                    const std::vector<Region>& regions) {
  if (regions.empty()) throw std::invalid_argument("design matrix needs at least one region");
  const int side = regions.front().side;
  Eigen::MatrixXd V(static_cast<Eigen::Index>(regions.size()), code.length());
  for (std::size_t s = 0; s < regions.size(); ++s) {
    if (regions[s].side != side)
      throw std::invalid_argument("mixed region sizes in design matrix (" +
                                  std::to_string(side) + " and " +
                                  std::to_string(regions[s].side) + ")");
    V.row(static_cast<Eigen::Index>(s)) = code.compute(regions[s]).transpose();
  }
  return V;
}

Eigen::VectorXd normalized_singular_values(const Eigen::MatrixXd& M,
                                           RankNormalization norm) {
  if (M.size() == 0) return {};
  Eigen::MatrixXd A = M;
  if (norm != RankNormalization::none) {
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
      const double n = A.col(c).norm();
      if (n > 0.0) A.col(c) /= n;
    }
  }
  Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXd>(A).singularValues();
  if (norm == RankNormalization::unit_columns_sqrt_n)
    s /= std::sqrt(static_cast<double>(A.rows()));
  return s;
}

int numeric_rank(const Eigen::MatrixXd& M, double cutoff, RankNormalization norm) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("rank cutoff must be positive");
  const Eigen::VectorXd s = normalized_singular_values(M, norm);
  return static_cast<int>((s.array() >= cutoff).count());
}

std::vector<CapacityPoint> capacity_curve(const DesignBuilder& build,
                                          const std::vector<int>& n_max_values,
                                          int p_limit, CapacitySearch search,
                                          double cutoff) {
  std::vector<CapacityPoint> curve;
  for (int n : n_max_values) {
    if (n < 1) throw std::invalid_argument("n_max must be >= 1");
    CapacityPoint pt{n, p_limit, true};
    auto reaches = [&](int p) { return numeric_rank(build(n, p), cutoff) >= n; };
    if (n <= p_limit) {
      if (search == CapacitySearch::monotone) {
        if (reaches(p_limit)) {
          int lo = n, hi = p_limit;  // answer in [lo, hi]
          while (lo < hi) {
            const int mid = lo + (hi - lo) / 2;
            if (reaches(mid)) hi = mid;
            else lo = mid + 1;
          }
          pt = {n, lo, false};
        }
      } else {
        for (int p = n; p <= p_limit; ++p) {
          if (reaches(p)) {
            pt = {n, p, false};
            break;
          }
        }
      }
    }
    curve.push_back(pt);
  }
  return curve;
}

double pairwise_correlation(const Eigen::MatrixXd& V, int i, int j) {
  if (i < 0 || j < 0 || i >= V.cols() || j >= V.cols())
    throw std::out_of_range("column index out of range");
  const Eigen::VectorXd a = V.col(i), b = V.col(j);
  const auto r = pearson({a.data(), static_cast<std::size_t>(a.size())},
                         {b.data(), static_cast<std::size_t>(b.size())});
  if (!r)
    throw std::domain_error("correlation undefined for columns " + std::to_string(i) +
                            " and " + std::to_string(j) + " (zero variance)");
  return *r;
}

double mean_abs_column_correlation(const Eigen::MatrixXd& V, int pairs,
                                   std::uint64_t seed) {
  if (V.cols() < 2) throw std::invalid_argument("need at least two columns");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, V.cols() - 1);
  double total = 0.0;
  int used = 0;
  const int max_draws = 100 * std::max(pairs, 1);
  for (int draw = 0; used < pairs && draw < max_draws; ++draw) {
    const Eigen::Index i = pick(rng), j = pick(rng);
    if (i == j) continue;
    const Eigen::VectorXd a = V.col(i), b = V.col(j);
    const auto r = pearson({a.data(), static_cast<std::size_t>(a.size())},
                           {b.data(), static_cast<std::size_t>(b.size())});
    if (!r) continue;
    total += std::abs(*r);
    ++used;
  }
  if (used == 0) throw std::domain_error("no column pair has defined correlation");
  return total / used;
}

double hessian_condition(const Eigen::MatrixXd& V) {
  if (V.size() == 0 || V.isZero(0.0)) throw std::invalid_argument("design matrix is zero");
  const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXd>(V).singularValues();
  const double tol = static_cast<double>(std::max(V.rows(), V.cols())) *
                     std::numeric_limits<double>::epsilon() * s[0];
  double smallest = s[0];
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > tol) smallest = s[i];
  // eigenvalues of 2 V^T V are 2 s^2; the factor cancels
  return (s[0] * s[0]) / (smallest * smallest);
}

TimeConstantFit fit_time_constant(const std::vector<std::pair<double, double>>& trace) {
  if (trace.size() < 3) throw std::invalid_argument("time-constant fit needs >= 3 points");
  const double n = static_cast<double>(trace.size());
  double mt = 0.0, ml = 0.0;
  for (const auto& [t, e] : trace) {
    if (!(e > 0.0) || !std::isfinite(e))
      throw std::invalid_argument("time-constant fit needs positive errors");
    mt += t;
    ml += std::log(e);
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (const auto& [t, e] : trace) {
    const double dt = t - mt, dl = std::log(e) - ml;
    stt += dt * dt;
    stl += dt * dl;
    sll += dl * dl;
  }
  TimeConstantFit fit;
  if (stt == 0.0) return fit;
  fit.slope = stl / stt;
  const double ss_res = std::max(0.0, sll - fit.slope * stl);
  fit.r_squared = sll > 0.0 ? 1.0 - ss_res / sll : 0.0;
  if (fit.slope < 0.0) {
    fit.delta = -1.0 / fit.slope;
    fit.valid = true;
  }
  return fit;
}

long long max_partitions(double q, double p_per_task, double overcompleteness) {
  if (!(q > 0.0) || !(p_per_task > 0.0) || !(overcompleteness > 0.0))
    throw std::invalid_argument("max_partitions needs positive inputs");
  const double ratio = q * overcompleteness / p_per_task;
  // absorb rounding in products that are mathematically whole
  return static_cast<long long>(std::floor(ratio * (1.0 + 1e-12)));
}

std::vector<int> square_shell_order(int side) {
  if (side < 1) throw std::invalid_argument("side must be >= 1");
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(side) * side);
  for (int s = 0; s < side; ++s) {
    for (int i = 0; i < s; ++i) order.push_back(s * side + i);  // new bottom row
    for (int j = 0; j <= s; ++j) order.push_back(j * side + s);  // new right column
  }
  return order;
}

}  // namespace sparsedp
