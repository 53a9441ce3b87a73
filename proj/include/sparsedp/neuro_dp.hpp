#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sparsedp/gabor.hpp"
#include "sparsedp/image.hpp"
#include "sparsedp/sparse_coder.hpp"
#include "sparsedp/tracking.hpp"

namespace sparsedp {

enum class FeatureKind { raw_pixels, whitened, sparse_complete, sparse_overcomplete };

/// CLI names: pixels, whitened, sparse, sparse2.25.
std::string_view feature_name(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view name);
inline bool is_sparse(FeatureKind k) {
  return k == FeatureKind::sparse_complete || k == FeatureKind::sparse_overcomplete;
}

/// Everything needed to rebuild a feature code, including its dictionary.
struct FeatureSpec {
  FeatureKind kind = FeatureKind::raw_pixels;
  int region_side = 10;
  int patch_side = 10;
  double overcompleteness = 2.25;
  std::uint64_t dictionary_seed = 1;
  CopulaModel model;
  bool normalize_atoms = false;
  double whiten_cutoff = 0.4;

  /// Atoms per patch: d for the complete code, round(factor * d) otherwise.
  int atom_count() const;
  /// Feature length p.
  int length() const;
};

class FeatureCode {
 public:
  /// Sparse kinds require a dictionary whose patch side matches the FeatureSpec.
  FeatureCode(FeatureSpec spec, std::optional<GaborDictionary> dictionary);

  const FeatureSpec& spec() const { return spec_; }
  FeatureKind kind() const { return spec_.kind; }
  int length() const { return length_; }
  const GaborDictionary* dictionary() const { return dict_.get(); }

  Eigen::VectorXd compute(const Region& region) const;

 private:
  FeatureSpec spec_;
  int length_ = 0;
  std::shared_ptr<const GaborDictionary> dict_;
  std::shared_ptr<const LeastSquaresEncoder> encoder_;
};

/// Builds the dictionary (for sparse kinds) from the FeatureSpec seed and model.
FeatureCode make_feature_code(const FeatureSpec& spec);

/// Equal contiguous index blocks; block i is [floor(i p / P), floor((i+1) p / P)).
struct PartitionLayout {
  int count = 1;
  int length = 0;

  struct Range {
    int begin;
    int end;
    int size() const { return end - begin; }
  };
  Range range(int partition) const;
};

/// Full code of the region; with a partition, entries outside its block are
/// zero.
Eigen::VectorXd featurize(const FeatureCode& code, const Region& region,
                          std::optional<int> partition = std::nullopt,
                          const PartitionLayout& layout = {});

/// Memoized full features of one task's regions, keyed by (stage, state).
class FeatureCache {
 public:
  FeatureCache(const TrackingTask& task, const FeatureCode& code);
  const Eigen::VectorXd& get(int k, Point x);
  const FeatureCode& code() const { return *code_; }

 private:
  const TrackingTask* task_;
  const FeatureCode* code_;
  std::vector<std::unordered_map<Point, Eigen::VectorXd, PointHash>> stages_;
};

struct LinearApproximator {
  FeatureSpec feature;
  int length = 0;
  int partitions = 1;  // 1 means a single shared block
  std::vector<Eigen::VectorXd> weights;  // one per stage, index 0 is stage 1
  /// Initial target location -> partition, filled by sequential training.
  std::map<Point, int> assignments;

  int horizon() const { return static_cast<int>(weights.size()); }
  PartitionLayout layout() const { return {partitions, length}; }
  /// r_k^T v with v restricted to the partition's block.
  double value(int k, const Eigen::VectorXd& features, int partition = 0) const;
};

LinearApproximator make_approximator(const FeatureSpec& feature, int horizon,
                                     int partitions = 1);

struct TrainConfig {
  /// Fixed learning rate; 0 selects eta_scale / max_s |v_s|^2 per stage.
  double eta = 0.0;
  double eta_scale = 0.5;
  int max_epochs = 100000;
  /// Stop once the mean squared fit error drops below this.
  double tol = 1e-8;
  /// Subsample each stage to at most this many states (0 keeps all).
  int max_samples = 0;
  double divergence_factor = 1e6;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StageFit {
  double eta = 0.0;
  int epochs = 0;
  double initial_mse = 0.0;
  double final_mse = 0.0;
  bool converged = false;
  std::vector<double> trace;  // mean squared error after each epoch
};

/// r <- r - eta (v^T r - beta) v
void sgd_update(Eigen::Ref<Eigen::VectorXd> weights,
                const Eigen::Ref<const Eigen::VectorXd>& features, double target,
                double eta);

/// Incremental gradient fit of r to targets over rows of `samples` (n x p),
/// cycling rows in order. Only entries inside `block` are read or written.
StageFit train_stage(Eigen::VectorXd& weights, const Eigen::MatrixXd& samples,
                     const Eigen::VectorXd& targets, const TrainConfig& config,
                     std::optional<PartitionLayout::Range> block = std::nullopt);

/// |x - w_k|^2 + min over in-bounds moves of the approximate cost-to-go at
/// stage k + 1 (zero after the last stage).
double bellman_target(const TrackingTask& task, int k, Point x,
                      const LinearApproximator& approx, FeatureCache& cache,
                      int partition = 0);

/// Deterministic subsample used for training at one stage.
std::vector<Point> training_states(const std::vector<Point>& stage_states,
                                   int max_samples);

/// Fits stages N..1 in turn. Weights in `approx` are the starting point.
std::vector<StageFit> incremental_value_iteration(const TrackingTask& task,
                                                  FeatureCache& cache,
                                                  const TrainConfig& config,
                                                  LinearApproximator& approx,
                                                  int partition = 0);

/// Greedy with respect to the approximate cost-to-go.
Trajectory rollout_approximator(const TrackingTask& task,
                                const LinearApproximator& approx,
                                FeatureCache& cache, int partition = 0);

struct TaskEvaluation {
  double neuro_cost = 0.0;
  double greedy_cost = 0.0;
  double dp_cost = 0.0;
  double cost_ratio = 0.0;     // neuro / greedy
  double dp_cost_ratio = 0.0;  // exact DP / greedy
  /// Rollout states that were not training samples (nonzero only when
  /// training subsampled).
  int unsampled_visits = 0;
};

TaskEvaluation evaluate_task(const TrackingTask& task, const LinearApproximator& approx,
                             FeatureCache& cache, int partition = 0,
                             int max_samples = 0);

/// Hash of the first target location modulo P.
int partition_key(const TrackingTask& task, int partitions);

enum class PartitionPolicy {
  /// Colliding keys of distinct tasks move to the next free block.
  probe,
  /// Colliding tasks share a block.
  share,
};

struct SequentialOptions {
  int partitions = 1;  // 1 trains every task on the whole representation
  PartitionPolicy policy = PartitionPolicy::probe;
  /// Called after each task with the weights before and after it.
  std::function<void(int task, const LinearApproximator& before,
                     const LinearApproximator& after)>
      observer;
};

struct SequentialResult {
  LinearApproximator approx;
  std::vector<int> partition_of_task;
  std::vector<std::vector<StageFit>> fits;
  std::vector<TaskEvaluation> evaluations;  // after all tasks are trained
};

SequentialResult sequential_train(const std::vector<TrackingTask>& tasks,
                                  const FeatureCode& code, const TrainConfig& config,
                                  const SequentialOptions& options);

/// Partition for a task under a trained approximator: its recorded
/// assignment, else partition_key.
int partition_for(const LinearApproximator& approx, const TrackingTask& task);

void save_approximator(const LinearApproximator& approx,
                       const std::filesystem::path& path);
LinearApproximator load_approximator(const std::filesystem::path& path);

}  // namespace sparsedp
