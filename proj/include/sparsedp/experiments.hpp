#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sparsedp/analysis.hpp"
#include "sparsedp/config.hpp"
#include "sparsedp/neuro_dp.hpp"
#include "sparsedp/tracking.hpp"

namespace sparsedp {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::uint64_t dictionary_seed = 1;
  CopulaModel model;

  // Tracking tasks
  int tasks = 4;
  int frame_size = 96;
  int frames = 5;
  int region_side = 20;
  double target_speed = 20.0;
  double spectral_exponent = 2.0;

  // Codes
  int patch_side = 10;
  double overcompleteness = 2.25;
  std::vector<FeatureKind> features{FeatureKind::raw_pixels, FeatureKind::whitened,
                                    FeatureKind::sparse_complete,
                                    FeatureKind::sparse_overcomplete};

  TrainConfig train;
  std::vector<int> partitions{1, 4, 8, 16, 32};

  // Capacity and decorrelation
  int patches = 1000;
  int pool_images = 20;
  int pool_image_size = 128;
  int pixel_patch_side = 40;  // largest raw-pixel patch for capacity curves
  std::vector<int> rank_sizes{25, 50, 100};
  std::vector<int> capacity_n{5, 10, 20, 30, 40, 50};
  int correlation_pairs = 100;

  // Learning speed
  int speed_epochs = 5000;

  std::filesystem::path out = ".";

  FeatureSpec feature_spec(FeatureKind kind) const;
};

/// Defaults overridden by recognized keys of `config`.
ExperimentConfig experiment_config_from(const Config& config);

/// Task t of the configured set: a synthetic sequence with its own seed and
/// the first target, clamped so the region fits, as the initial state.
TrackingTask make_synthetic_task(const ExperimentConfig& cfg, int index);
std::vector<TrackingTask> make_tasks(const ExperimentConfig& cfg);

/// Writes frame_<k>.pgm, targets.txt, and task.txt into `dir`. Returns the
/// task file path. task.txt holds key=value lines: frames (comma-separated,
/// relative to the task file), targets, region_side, start (x,y).
std::filesystem::path save_task(const TrackingTask& task, const std::filesystem::path& dir);
TrackingTask load_task(const std::filesystem::path& task_file);

/// Square patches of `side` drawn uniformly from seeded power-law images.
std::vector<Region> sample_patch_pool(const ExperimentConfig& cfg, int side);

// --- capacity ----------------------------------------------------------------

struct RankRow {
  std::string kind;
  int n = 0;
  int p = 0;
  int rank = 0;               // unit columns, singular values / sqrt(n)
  int rank_unit_columns = 0;  // same cutoff without the sqrt(n) factor
};

struct CapacityResult {
  double adjacent_pixel_correlation = 0.0;   // mean |corr| of adjacent pixels
  double complete_coefficient_correlation = 0.0;
  double overcomplete_coefficient_correlation = 0.0;
  std::vector<RankRow> ranks;
  std::vector<std::pair<std::string, CapacityPoint>> curve;
  std::vector<std::tuple<std::string, int, int, double>> correlations;
};

/// Design matrix of n pool patches with p features of the given kind:
/// "pixels" takes the first p pixels in square-shell order, "sparse" codes
/// the top-left patch with the first p dictionary atoms.
Eigen::MatrixXd capacity_design(const std::vector<Region>& pool, const GaborDictionary& dict,
                                const std::string& kind, int n, int p);

CapacityResult run_capacity(const ExperimentConfig& cfg);

// --- speed -------------------------------------------------------------------

struct SpeedRow {
  FeatureKind kind;
  TimeConstantFit fit;
  double hessian_condition = 0.0;  // median over tasks
  std::vector<std::pair<double, double>> trace;  // (epoch, normalized error)
};

/// Trains the last stage of every task from zero weights and fits a decay
/// time constant to the pooled normalized error traces.
std::vector<SpeedRow> run_speed(const ExperimentConfig& cfg,
                                const std::vector<FeatureKind>& kinds);

// --- seqlearn ----------------------------------------------------------------

struct SeqLearnRow {
  FeatureKind kind;
  int partitions = 1;
  int task = 0;
  int partition = 0;
  TaskEvaluation eval;
};

std::vector<SeqLearnRow> run_seqlearn(const ExperimentConfig& cfg);

// --- entropy -----------------------------------------------------------------

struct EntropyRow {
  std::string representation;
  double entropy_bits = 0.0;
  double typical_exponent = 0.0;  // per 100 elements
  std::size_t samples = 0;
  std::vector<std::pair<int, std::size_t>> histogram;
};

/// Pixels as 8-bit levels; Gabor coefficients of [0,1] images quantized to
/// unit bins.
std::vector<EntropyRow> run_entropy(const ExperimentConfig& cfg);

// --- appendix1d --------------------------------------------------------------

std::vector<std::string> run_appendix1d();

// --- driver ------------------------------------------------------------------

/// Runs one named experiment and writes its CSV files into cfg.out. Files
/// already written are removed if a later step fails.
std::vector<std::filesystem::path> run_experiment(const std::string& name,
                                                  const ExperimentConfig& cfg);

}  // namespace sparsedp
