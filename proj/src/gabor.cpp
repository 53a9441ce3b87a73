#include "sparsedp/gabor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sparsedp/image.hpp"

namespace sparsedp {

void CopulaModel::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i]))
      throw std::invalid_argument("copula alpha" + std::to_string(i + 1) +
                                  " must be positive");
    if (!(beta[i] > 0.0) || !std::isfinite(beta[i]))
      throw std::invalid_argument("copula beta" + std::to_string(i + 1) +
                                  " must be positive");
  }
  if (!(rho >= -1.0 && rho <= 1.0))
    throw std::invalid_argument("copula rho must lie in [-1, 1]");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double pareto_icdf(double x, double alpha, double beta) {
  if (!(x >= 0.0) || x >= 1.0)
    throw std::domain_error("pareto_icdf requires 0 <= x < 1, got " +
                            std::to_string(x));
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::domain_error("pareto_icdf requires positive alpha and beta");
  return beta / std::pow(1.0 - x, 1.0 / alpha);
}

namespace {

// NCDF saturates to exactly 1 beyond z ~ 8.3; keep the quantile finite.
double open_unit(double u) {
  constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return u < kBelowOne ? u : kBelowOne;
}

}  // namespace

SpatialParams spatial_params_from_latent(const CopulaModel& model, double z,
                                         double e) {
  const double lam = model.rho * z + std::sqrt(std::max(0.0, 1.0 - model.rho * model.rho)) * e;
  const std::array<double, 3> latent{z, z, lam};
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i)
    out[i] = pareto_icdf(open_unit(normal_cdf(latent[i])), model.alpha[i],
                         model.beta[i]);
  return {out[0], out[1], out[2]};
}

SpatialParams sample_spatial_params(const CopulaModel& model, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double z = normal(rng);
  const double e = normal(rng);
  return spatial_params_from_latent(model, z, e);
}

GaborParams sample_gabor(const CopulaModel& model, int patch_side, Rng& rng) {
  if (patch_side < 1) throw std::invalid_argument("patch side must be >= 1");
  const SpatialParams spatial = sample_spatial_params(model, rng);
  std::uniform_real_distribution<double> orientation(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> center(0.0, patch_side);
  GaborParams p;
  p.sigma_x = spatial.sigma_x;
  p.sigma_y = spatial.sigma_y;
  p.wavelength = spatial.wavelength;
  p.orientation = orientation(rng);
  p.phase = phase(rng);
  p.x0 = center(rng);
  p.y0 = center(rng);
  p.amplitude = 1.0;
  return p;
}

Eigen::VectorXd render_gabor(const GaborParams& p, int patch_side) {
  Eigen::VectorXd atom(static_cast<Eigen::Index>(patch_side) * patch_side);
  const double c = std::cos(p.orientation), s = std::sin(p.orientation);
  const double k = 2.0 * std::numbers::pi / p.wavelength;
  for (int j = 0; j < patch_side; ++j) {
    for (int i = 0; i < patch_side; ++i) {
      const double di = i - p.x0, dj = j - p.y0;
      const double ri = c * di - s * dj;
      const double rj = s * di + c * dj;
      const double envelope = std::exp(
          -0.5 * (ri * ri / (p.sigma_x * p.sigma_x) + rj * rj / (p.sigma_y * p.sigma_y)));
      atom[j * patch_side + i] = p.amplitude * envelope * std::cos(k * rj + p.phase);
    }
  }
  return atom;
}

Rng atom_rng(std::uint64_t seed, std::size_t atom_index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (atom_index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return Rng(z);
}

GaborDictionary build_dictionary(const CopulaModel& model, int patch_side,
                                 int atom_count, std::uint64_t seed,
                                 bool normalize) {
  model.validate();
  if (patch_side < 1) throw std::invalid_argument("patch side must be >= 1");
  if (atom_count < 1) throw std::invalid_argument("atom count must be >= 1");

  GaborDictionary dict;
  dict.patch_side = patch_side;
  dict.seed = seed;
  dict.model = model;
  dict.normalized = normalize;
  dict.atoms.resize(static_cast<Eigen::Index>(patch_side) * patch_side, atom_count);
  dict.params.reserve(atom_count);
  for (int j = 0; j < atom_count; ++j) {
    Rng rng = atom_rng(seed, static_cast<std::size_t>(j));
    dict.params.push_back(sample_gabor(model, patch_side, rng));
    dict.atoms.col(j) = render_gabor(dict.params.back(), patch_side);
    if (normalize) {
      const double norm = dict.atoms.col(j).norm();
      if (norm > 0.0) dict.atoms.col(j) /= norm;
    }
  }
  return dict;
}

// --- Serialization -----------------------------------------------------------

namespace {
constexpr const char* kDictMagic = "sparsedp-dictionary";
}

void save_dictionary(const GaborDictionary& dict,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  out << kDictMagic << " 1\n";
  out << "patch_side " << dict.patch_side << '\n';
  out << "atoms " << dict.atom_count() << '\n';
  out << "seed " << dict.seed << '\n';
  out << "normalized " << (dict.normalized ? 1 : 0) << '\n';
  out << "rho " << dict.model.rho << '\n';
  out << "alpha " << dict.model.alpha[0] << ' ' << dict.model.alpha[1] << ' '
      << dict.model.alpha[2] << '\n';
  out << "beta " << dict.model.beta[0] << ' ' << dict.model.beta[1] << ' '
      << dict.model.beta[2] << '\n';
  out << "params\n";
  for (const auto& p : dict.params)
    out << p.orientation << ' ' << p.phase << ' ' << p.sigma_x << ' ' << p.sigma_y
        << ' ' << p.wavelength << ' ' << p.x0 << ' ' << p.y0 << ' ' << p.amplitude
        << '\n';
  out << "matrix\n";
  for (Eigen::Index r = 0; r < dict.atoms.rows(); ++r) {
    for (Eigen::Index c = 0; c < dict.atoms.cols(); ++c)
      out << (c ? " " : "") << dict.atoms(r, c);
    out << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

GaborDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  auto fail = [&](const std::string& what) -> void {
    throw ParseError(path.string() + ": " + what);
  };
  auto expect = [&](const char* key) {
    std::string word;
    if (!(in >> word) || word != key) fail(std::string("expected '") + key + "'");
  };

  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kDictMagic || version != 1)
    fail("not a dictionary file");

  GaborDictionary dict;
  int atoms = 0, normalized = 0;
  expect("patch_side");
  in >> dict.patch_side;
  expect("atoms");
  in >> atoms;
  expect("seed");
  in >> dict.seed;
  expect("normalized");
  in >> normalized;
  expect("rho");
  in >> dict.model.rho;
  expect("alpha");
  in >> dict.model.alpha[0] >> dict.model.alpha[1] >> dict.model.alpha[2];
  expect("beta");
  in >> dict.model.beta[0] >> dict.model.beta[1] >> dict.model.beta[2];
  if (!in || dict.patch_side < 1 || atoms < 1) fail("bad header");
  dict.normalized = normalized != 0;

  expect("params");
  dict.params.resize(atoms);
  for (auto& p : dict.params)
    in >> p.orientation >> p.phase >> p.sigma_x >> p.sigma_y >> p.wavelength >>
        p.x0 >> p.y0 >> p.amplitude;
  expect("matrix");
  const Eigen::Index d = static_cast<Eigen::Index>(dict.patch_side) * dict.patch_side;
  dict.atoms.resize(d, atoms);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < atoms; ++c) in >> dict.atoms(r, c);
  if (!in) fail("truncated body");
  if (!dict.atoms.allFinite()) fail("non-finite matrix entry");
  return dict;
}

}  // namespace sparsedp
