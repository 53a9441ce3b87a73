#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

namespace sparsedp {

using Rng = std::mt19937_64;

struct GaborParams {
  double orientation = 0.0;  // radians, [0, pi)
  double phase = 0.0;        // radians, [0, 2 pi)
  double sigma_x = 1.0;      // envelope width along the rotated i axis
  double sigma_y = 1.0;      // envelope width along the rotated j axis
  double wavelength = 2.0;   // pixels per carrier cycle
  double x0 = 0.0;           // center column
  double y0 = 0.0;           // center row
  double amplitude = 1.0;
};

/// Gaussian copula with Pareto marginals for (sigma_x, sigma_y, wavelength).
/// Widths share one standard normal z; the wavelength latent is
/// rho z + sqrt(1 - rho^2) e with independent e, so every marginal stays
/// Pareto and rho is the latent correlation.
struct CopulaModel {
  double rho = 0.9;
  std::array<double, 3> alpha{2.0, 2.0, 2.0};
  std::array<double, 3> beta{1.0, 1.0, 2.0};

  /// Throws std::invalid_argument on nonpositive shape or scale.
  void validate() const;
};

struct SpatialParams {
  double sigma_x;
  double sigma_y;
  double wavelength;
};

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse Pareto CDF beta / (1 - x)^(1/alpha). Requires 0 <= x < 1.
double pareto_icdf(double x, double alpha, double beta);

/// Deterministic part of the copula map for latent draws z and e.
SpatialParams spatial_params_from_latent(const CopulaModel& model, double z,
                                         double e = 0.0);

/// Draws z then e from N(0,1) and maps them through the copula.
SpatialParams sample_spatial_params(const CopulaModel& model, Rng& rng);

/// Draws the spatial triple, then orientation, phase, and center uniformly.
GaborParams sample_gabor(const CopulaModel& model, int patch_side, Rng& rng);

/// Real 2D Gabor atom on a patch_side x patch_side grid, flattened row-major
/// (row j, column i at index j * patch_side + i).
Eigen::VectorXd render_gabor(const GaborParams& params, int patch_side);

struct GaborDictionary {
  int patch_side = 0;
  Eigen::MatrixXd atoms;  // d x m, one rendered atom per column
  std::vector<GaborParams> params;
  std::uint64_t seed = 0;
  CopulaModel model;
  bool normalized = false;

  int pixel_count() const { return static_cast<int>(atoms.rows()); }
  int atom_count() const { return static_cast<int>(atoms.cols()); }
};

/// Generator for atom j of a dictionary built from `seed`. Each atom has its
/// own stream, so the first p atoms do not depend on how many follow.
Rng atom_rng(std::uint64_t seed, std::size_t atom_index);

/// m atoms sampled independently. With `normalize`, every column is scaled
/// to unit l2 norm.
GaborDictionary build_dictionary(const CopulaModel& model, int patch_side,
                                 int atom_count, std::uint64_t seed,
                                 bool normalize = false);

void save_dictionary(const GaborDictionary& dict,
                     const std::filesystem::path& path);
GaborDictionary load_dictionary(const std::filesystem::path& path);

}  // namespace sparsedp
