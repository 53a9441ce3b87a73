#include "sparsedp/neuro_dp.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>

namespace sparsedp {

std::string_view feature_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::raw_pixels: return "pixels";
    case FeatureKind::whitened: return "whitened";
    case FeatureKind::sparse_complete: return "sparse";
    case FeatureKind::sparse_overcomplete: return "sparse2.25";
  }
  return "unknown";
}

FeatureKind parse_feature_kind(std::string_view name) {
  for (FeatureKind k : {FeatureKind::raw_pixels, FeatureKind::whitened,
                        FeatureKind::sparse_complete, FeatureKind::sparse_overcomplete})
    if (feature_name(k) == name) return k;
  throw std::invalid_argument("unknown feature kind '" + std::string(name) +
                              "' (expected pixels, whitened, sparse, sparse2.25)");
}

int FeatureSpec::atom_count() const {
  const int d = patch_side * patch_side;
  if (kind == FeatureKind::sparse_overcomplete)
    return static_cast<int>(std::lround(overcompleteness * d));
  return d;
}

int FeatureSpec::length() const {
  if (region_side < 1) throw std::invalid_argument("region side must be >= 1");
  if (!is_sparse(kind)) return region_side * region_side;
  if (patch_side < 1 || region_side % patch_side != 0)
    throw std::invalid_argument("region side " + std::to_string(region_side) +
                                " is not divisible by patch side " +
                                std::to_string(patch_side));
  const int tiles = (region_side / patch_side) * (region_side / patch_side);
  return tiles * atom_count();
}

FeatureCode::FeatureCode(FeatureSpec spec, std::optional<GaborDictionary> dictionary)
    : spec_(std::move(spec)), length_(spec_.length()) {
  if (!is_sparse(spec_.kind)) return;
  if (!dictionary)
    throw std::invalid_argument(std::string(feature_name(spec_.kind)) +
                                " features need a dictionary");
  if (dictionary->patch_side != spec_.patch_side ||
      dictionary->atom_count() != spec_.atom_count())
    throw std::invalid_argument("dictionary shape does not match the feature spec");
  dict_ = std::make_shared<const GaborDictionary>(std::move(*dictionary));
  encoder_ = std::make_shared<const LeastSquaresEncoder>(dict_->atoms);
}

Eigen::VectorXd FeatureCode::compute(const Region& region) const {
  if (region.side != spec_.region_side)
    throw std::invalid_argument("region side " + std::to_string(region.side) +
                                " does not match feature region side " +
                                std::to_string(spec_.region_side));
  switch (spec_.kind) {
    case FeatureKind::raw_pixels:
      return Eigen::Map<const Eigen::VectorXd>(region.data.data(),
                                               static_cast<Eigen::Index>(region.data.size()));
    case FeatureKind::whitened: {
      const auto w = whiten_grid(region.data, region.side, region.side, spec_.whiten_cutoff);
      return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    }
    case FeatureKind::sparse_complete:
    case FeatureKind::sparse_overcomplete:
      return encode_region(*encoder_, region, spec_.patch_side);
  }
  throw std::logic_error("unhandled feature kind");
}

FeatureCode make_feature_code(const FeatureSpec& spec) {
  if (!is_sparse(spec.kind)) return FeatureCode(spec, std::nullopt);
  return FeatureCode(spec, build_dictionary(spec.model, spec.patch_side, spec.atom_count(),
                                            spec.dictionary_seed, spec.normalize_atoms));
}

PartitionLayout::Range PartitionLayout::range(int partition) const {
  if (count < 1) throw std::invalid_argument("partition count must be >= 1");
  if (partition < 0 || partition >= count)
    throw std::out_of_range("partition " + std::to_string(partition) +
                            " outside [0, " + std::to_string(count) + ")");
  const auto p = static_cast<long long>(length);
  return {static_cast<int>(partition * p / count),
          static_cast<int>((partition + 1) * p / count)};
}

Eigen::VectorXd featurize(const FeatureCode& code, const Region& region,
                          std::optional<int> partition, const PartitionLayout& layout) {
  Eigen::VectorXd v = code.compute(region);
  if (!partition) return v;
  PartitionLayout l = layout;
  l.length = static_cast<int>(v.size());
  const auto r = l.range(*partition);
  v.head(r.begin).setZero();
  v.tail(v.size() - r.end).setZero();
  return v;
}

FeatureCache::FeatureCache(const TrackingTask& task, const FeatureCode& code)
    : task_(&task), code_(&code), stages_(static_cast<std::size_t>(task.horizon())) {}

const Eigen::VectorXd& FeatureCache::get(int k, Point x) {
  auto& stage = stages_.at(static_cast<std::size_t>(k - 1));
  auto it = stage.find(x);
  if (it == stage.end()) {
    const Region region = extract_region(task_->seq, k, x, task_->region_side);
    it = stage.emplace(x, code_->compute(region)).first;
  }
  return it->second;
}

double LinearApproximator::value(int k, const Eigen::VectorXd& features,
                                 int partition) const {
  const auto r = layout().range(partition);
  return weights.at(static_cast<std::size_t>(k - 1))
      .segment(r.begin, r.size())
      .dot(features.segment(r.begin, r.size()));
}

LinearApproximator make_approximator(const FeatureSpec& feature, int horizon,
                                     int partitions) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (partitions < 1) throw std::invalid_argument("partition count must be >= 1");
  LinearApproximator a;
  a.feature = feature;
  a.length = feature.length();
  if (partitions > a.length)
    throw std::invalid_argument("more partitions than features");
  a.partitions = partitions;
  a.weights.assign(static_cast<std::size_t>(horizon), Eigen::VectorXd::Zero(a.length));
  return a;
}

// --- Training ----------------------------------------------------------------

void sgd_update(Eigen::Ref<Eigen::VectorXd> weights,
                const Eigen::Ref<const Eigen::VectorXd>& features, double target,
                double eta) {
  if (weights.size() != features.size())
    throw std::invalid_argument("weight and feature lengths differ");
  const double residual = features.dot(weights) - target;
  weights -= (eta * residual) * features;
}

StageFit train_stage(Eigen::VectorXd& weights, const Eigen::MatrixXd& samples,
                     const Eigen::VectorXd& targets, const TrainConfig& config,
                     std::optional<PartitionLayout::Range> block) {
  const Eigen::Index n = samples.rows();
  if (n == 0) throw std::invalid_argument("train_stage needs at least one sample");
  if (targets.size() != n) throw std::invalid_argument("one target per sample required");
  if (samples.cols() != weights.size())
    throw std::invalid_argument("sample width differs from weight length");
  const PartitionLayout::Range r =
      block.value_or(PartitionLayout::Range{0, static_cast<int>(weights.size())});

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor V = samples.middleCols(r.begin, r.size());
  Eigen::VectorXd w = weights.segment(r.begin, r.size());

  StageFit fit;
  if (config.eta > 0.0) {
    fit.eta = config.eta;
  } else {
    const double max_sq = V.rowwise().squaredNorm().maxCoeff();
    fit.eta = max_sq > 0.0 ? config.eta_scale / max_sq : config.eta_scale;
  }

  auto mse = [&] { return (V * w - targets).squaredNorm() / static_cast<double>(n); };
  fit.initial_mse = mse();
  fit.final_mse = fit.initial_mse;
  fit.converged = fit.initial_mse < config.tol;

  for (int epoch = 1; !fit.converged && epoch <= config.max_epochs; ++epoch) {
    for (Eigen::Index s = 0; s < n; ++s) {
      const double residual = V.row(s).dot(w) - targets[s];
      w.noalias() -= (fit.eta * residual) * V.row(s).transpose();
    }
    fit.final_mse = mse();
    fit.trace.push_back(fit.final_mse);
    fit.epochs = epoch;
    if (!std::isfinite(fit.final_mse) ||
        (fit.initial_mse > 0.0 &&
         fit.final_mse > config.divergence_factor * fit.initial_mse)) {
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch << " (mse " << fit.final_mse
          << ", initial " << fit.initial_mse << ", eta " << fit.eta
          << "); try a smaller learning rate";
      throw TrainingDiverged(msg.str());
    }
    fit.converged = fit.final_mse < config.tol;
  }
  weights.segment(r.begin, r.size()) = w;
  return fit;
}

double bellman_target(const TrackingTask& task, int k, Point x,
                      const LinearApproximator& approx, FeatureCache& cache,
                      int partition) {
  const double stage = squared_distance(x, task.target(k));
  if (k == task.horizon()) return stage;
  double best = std::numeric_limits<double>::infinity();
  for (Point u : control_set(task.region_side)) {
    const Point y = step(x, u);
    if (!task.fits(y)) continue;
    best = std::min(best, approx.value(k + 1, cache.get(k + 1, y), partition));
  }
  return stage + best;
}

std::vector<Point> training_states(const std::vector<Point>& stage_states,
                                   int max_samples) {
  const std::size_t n = stage_states.size();
  if (max_samples <= 0 || n <= static_cast<std::size_t>(max_samples)) return stage_states;
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(max_samples));
  for (std::size_t i = 0; i < static_cast<std::size_t>(max_samples); ++i)
    out.push_back(stage_states[i * n / static_cast<std::size_t>(max_samples)]);
  return out;
}

std::vector<StageFit> incremental_value_iteration(const TrackingTask& task,
                                                  FeatureCache& cache,
                                                  const TrainConfig& config,
                                                  LinearApproximator& approx,
                                                  int partition) {
  task.validate();
  if (approx.horizon() != task.horizon())
    throw std::invalid_argument("approximator horizon differs from task horizon");
  if (approx.length != cache.code().length())
    throw std::invalid_argument("approximator length differs from feature length");
  const auto block = approx.layout().range(partition);
  const StageStates reach = enumerate_states(task);
  const int N = task.horizon();

  std::vector<StageFit> fits(static_cast<std::size_t>(N));
  for (int k = N; k >= 1; --k) {
    const auto states =
        training_states(reach.stages[static_cast<std::size_t>(k - 1)], config.max_samples);
    const auto n = static_cast<Eigen::Index>(states.size());
    Eigen::MatrixXd V(n, approx.length);
    Eigen::VectorXd beta(n);
    for (Eigen::Index s = 0; s < n; ++s) {
      const Point x = states[static_cast<std::size_t>(s)];
      V.row(s) = cache.get(k, x).transpose();
      beta[s] = bellman_target(task, k, x, approx, cache, partition);
    }
    try {
      fits[static_cast<std::size_t>(k - 1)] =
          train_stage(approx.weights[static_cast<std::size_t>(k - 1)], V, beta, config, block);
    } catch (const TrainingDiverged& e) {
      throw TrainingDiverged("stage " + std::to_string(k) + ": " + e.what());
    }
  }
  return fits;
}

Trajectory rollout_approximator(const TrackingTask& task,
                                const LinearApproximator& approx,
                                FeatureCache& cache, int partition) {
  const auto controls = control_set(task.region_side);
  return run_policy(task, [&](int k, Point x) {
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    for (int c = 0; c < kControlCount; ++c) {
      const Point y = step(x, controls[static_cast<std::size_t>(c)]);
      if (!task.fits(y)) continue;
      const double v = approx.value(k + 1, cache.get(k + 1, y), partition);
      if (best < 0 || v < best_value) {
        best_value = v;
        best = c;
      }
    }
    return best;
  });
}

TaskEvaluation evaluate_task(const TrackingTask& task, const LinearApproximator& approx,
                             FeatureCache& cache, int partition, int max_samples) {
  TaskEvaluation e;
  const Trajectory neuro = rollout_approximator(task, approx, cache, partition);
  e.neuro_cost = neuro.total_cost;
  e.greedy_cost = solve_greedy(task).total_cost;
  e.dp_cost = solve_exact_dp(task).optimal_cost();
  e.cost_ratio = cost_ratio(e.neuro_cost, e.greedy_cost);
  e.dp_cost_ratio = cost_ratio(e.dp_cost, e.greedy_cost);
  if (max_samples > 0) {
    const StageStates reach = enumerate_states(task);
    for (std::size_t k = 0; k < neuro.states.size(); ++k) {
      const auto sampled = training_states(reach.stages[k], max_samples);
      const std::unordered_set<Point, PointHash> set(sampled.begin(), sampled.end());
      if (!set.contains(neuro.states[k])) ++e.unsampled_visits;
    }
  }
  return e;
}

int partition_key(const TrackingTask& task, int partitions) {
  if (partitions < 1) throw std::invalid_argument("partition count must be >= 1");
  const Point w = task.target(1);
  std::uint64_t z = (std::uint64_t{static_cast<std::uint32_t>(w.x)} << 32) |
                    static_cast<std::uint32_t>(w.y);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<int>(z % static_cast<std::uint64_t>(partitions));
}

int partition_for(const LinearApproximator& approx, const TrackingTask& task) {
  const auto it = approx.assignments.find(task.target(1));
  if (it != approx.assignments.end()) return it->second;
  return partition_key(task, approx.partitions);
}

SequentialResult sequential_train(const std::vector<TrackingTask>& tasks,
                                  const FeatureCode& code, const TrainConfig& config,
                                  const SequentialOptions& options) {
  if (tasks.empty()) throw std::invalid_argument("no tasks to train");
  const int P = options.partitions;
  const int T = static_cast<int>(tasks.size());
  if (P < 1) throw std::invalid_argument("partition count must be >= 1");
  if (P > 1 && P < T)
    throw std::invalid_argument("partitioned training needs at least as many partitions (" +
                                std::to_string(P) + ") as tasks (" + std::to_string(T) + ")");
  const int N = tasks.front().horizon();
  for (const auto& t : tasks)
    if (t.horizon() != N) throw std::invalid_argument("tasks must share one horizon");

  SequentialResult out;
  out.approx = make_approximator(code.spec(), N, P);

  // Block owner, identified by the owning task's first target.
  std::map<int, Point> owner;
  for (const auto& task : tasks) {
    const Point key_point = task.target(1);
    int slot = partition_key(task, P);
    if (options.policy == PartitionPolicy::probe) {
      for (int probes = 0; probes < P; ++probes) {
        const auto it = owner.find(slot);
        if (it == owner.end() || it->second == key_point) break;
        slot = (slot + 1) % P;
      }
    }
    owner.emplace(slot, key_point);
    out.approx.assignments[key_point] = slot;
    out.partition_of_task.push_back(slot);
  }

  std::vector<std::unique_ptr<FeatureCache>> caches;
  for (const auto& task : tasks) caches.push_back(std::make_unique<FeatureCache>(task, code));

  for (int t = 0; t < T; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    std::optional<LinearApproximator> before;
    if (options.observer) before = out.approx;
    out.fits.push_back(incremental_value_iteration(tasks[tt], *caches[tt], config, out.approx,
                                                   out.partition_of_task[tt]));
    if (options.observer) options.observer(t, *before, out.approx);
  }
  for (int t = 0; t < T; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    out.evaluations.push_back(evaluate_task(tasks[tt], out.approx, *caches[tt],
                                            out.partition_of_task[tt], config.max_samples));
  }
  return out;
}

// --- Serialization -----------------------------------------------------------

namespace {
constexpr const char* kApproxMagic = "sparsedp-approximator";
}

void save_approximator(const LinearApproximator& approx,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const FeatureSpec& f = approx.feature;
  out << std::setprecision(17);
  out << kApproxMagic << " 1\n";
  out << "feature " << feature_name(f.kind) << '\n';
  out << "region_side " << f.region_side << '\n';
  out << "patch_side " << f.patch_side << '\n';
  out << "overcompleteness " << f.overcompleteness << '\n';
  out << "dictionary_seed " << f.dictionary_seed << '\n';
  out << "normalize_atoms " << (f.normalize_atoms ? 1 : 0) << '\n';
  out << "whiten_cutoff " << f.whiten_cutoff << '\n';
  out << "rho " << f.model.rho << '\n';
  out << "alpha " << f.model.alpha[0] << ' ' << f.model.alpha[1] << ' ' << f.model.alpha[2] << '\n';
  out << "beta " << f.model.beta[0] << ' ' << f.model.beta[1] << ' ' << f.model.beta[2] << '\n';
  out << "length " << approx.length << '\n';
  out << "partitions " << approx.partitions << '\n';
  out << "stages " << approx.horizon() << '\n';
  out << "assignments " << approx.assignments.size() << '\n';
  for (const auto& [pt, slot] : approx.assignments)
    out << pt.x << ' ' << pt.y << ' ' << slot << '\n';
  out << "weights\n";
  for (const auto& w : approx.weights) {
    for (Eigen::Index i = 0; i < w.size(); ++i) out << (i ? " " : "") << w[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

LinearApproximator load_approximator(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  auto fail = [&](const std::string& what) {
    throw ParseError(path.string() + ": " + what);
  };
  auto expect = [&](const char* key) {
    std::string word;
    if (!(in >> word) || word != key) fail(std::string("expected '") + key + "'");
  };

  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kApproxMagic || version != 1)
    fail("not an approximator file");

  FeatureSpec f;
  std::string kind;
  int normalize = 0, length = 0, partitions = 0, stages = 0;
  std::size_t assignments = 0;
  expect("feature");
  in >> kind;
  try {
    f.kind = parse_feature_kind(kind);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  expect("region_side");
  in >> f.region_side;
  expect("patch_side");
  in >> f.patch_side;
  expect("overcompleteness");
  in >> f.overcompleteness;
  expect("dictionary_seed");
  in >> f.dictionary_seed;
  expect("normalize_atoms");
  in >> normalize;
  f.normalize_atoms = normalize != 0;
  expect("whiten_cutoff");
  in >> f.whiten_cutoff;
  expect("rho");
  in >> f.model.rho;
  expect("alpha");
  in >> f.model.alpha[0] >> f.model.alpha[1] >> f.model.alpha[2];
  expect("beta");
  in >> f.model.beta[0] >> f.model.beta[1] >> f.model.beta[2];
  expect("length");
  in >> length;
  expect("partitions");
  in >> partitions;
  expect("stages");
  in >> stages;
  expect("assignments");
  in >> assignments;
  if (!in) fail("bad header");

  LinearApproximator a;
  try {
    a = make_approximator(f, stages, partitions);
  } catch (const std::exception& e) {
    fail(e.what());
  }
  if (a.length != length) fail("length does not match the feature spec");
  for (std::size_t i = 0; i < assignments; ++i) {
    Point pt;
    int slot = 0;
    in >> pt.x >> pt.y >> slot;
    if (!in || slot < 0 || slot >= partitions) fail("bad assignment line");
    a.assignments[pt] = slot;
  }
  expect("weights");
  for (auto& w : a.weights)
    for (Eigen::Index i = 0; i < w.size(); ++i) in >> w[i];
  if (!in) fail("truncated weights");
  for (const auto& w : a.weights)
    if (!w.allFinite()) fail("non-finite weight");
  return a;
}

}  // namespace sparsedp
