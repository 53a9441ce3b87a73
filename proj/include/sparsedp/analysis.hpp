#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sparsedp/image.hpp"
#include "sparsedp/neuro_dp.hpp"

namespace sparsedp {

/// One row per region, featurized identically.
Eigen::MatrixXd build_design_matrix(const FeatureCode& code,
                                    const std::vector<Region>& regions);

enum class RankNormalization {
  /// Columns scaled to unit l2 norm.
  unit_columns,
  /// Unit columns, then singular values divided by sqrt(n). The default: the
  /// 0.1 cutoff then does not depend on the sample count.
  unit_columns_sqrt_n,
  none,
};

/// Singular values after normalization, descending.
Eigen::VectorXd normalized_singular_values(
    const Eigen::MatrixXd& M, RankNormalization norm = RankNormalization::unit_columns_sqrt_n);

/// Number of normalized singular values >= cutoff. All-zero columns stay zero.
int numeric_rank(const Eigen::MatrixXd& M, double cutoff = 0.1,
                 RankNormalization norm = RankNormalization::unit_columns_sqrt_n);

/// Produces the n x p design matrix for the first n pool samples with p
/// features.
using DesignBuilder = std::function<Eigen::MatrixXd(int n, int p)>;

struct CapacityPoint {
  int n_max = 0;
  int p = 0;
  bool saturated = false;  // no p up to the limit reached rank n_max
};

enum class CapacitySearch {
  /// Rank never decreases as p grows (prefix columns); bisect.
  monotone,
  /// Scan p upward one step at a time.
  linear,
};

/// For each n_max, the smallest p (starting at n_max) whose design matrix
/// reaches numeric rank n_max, searching up to p_limit.
std::vector<CapacityPoint> capacity_curve(const DesignBuilder& build,
                                          const std::vector<int>& n_max_values,
                                          int p_limit, CapacitySearch search,
                                          double cutoff = 0.1);

/// Sample correlation of columns i and j. Throws on a zero-variance column.
double pairwise_correlation(const Eigen::MatrixXd& V, int i, int j);

/// Mean |corr| over `pairs` distinct column pairs drawn with `seed`.
/// Constant columns are skipped.
double mean_abs_column_correlation(const Eigen::MatrixXd& V, int pairs,
                                   std::uint64_t seed);

/// Ratio of largest to smallest nonzero eigenvalue of 2 V^T V. Eigenvalues
/// below max(n, p) * eps * largest count as zero.
double hessian_condition(const Eigen::MatrixXd& V);

struct TimeConstantFit {
  double delta = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  bool valid = false;  // false when the trace does not decay
};

/// Least-squares line through (t, ln e); delta = -1 / slope.
TimeConstantFit fit_time_constant(const std::vector<std::pair<double, double>>& trace);

/// floor(q * overcompleteness / p_per_task)
long long max_partitions(double q, double p_per_task, double overcompleteness = 1.0);

/// Pixel indices of a side x side patch ordered by growing square shells, so
/// the first s^2 entries form the top-left s x s block.
std::vector<int> square_shell_order(int side);

}  // namespace sparsedp
