#include "sparsedp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sparsedp/sparse_coder.hpp"

namespace sparsedp {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + stream + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(15) << v;
  return s.str();
}

std::vector<FeatureKind> parse_kinds(const std::string& list) {
  std::vector<FeatureKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_feature_kind(item));
  if (out.empty()) throw std::invalid_argument("empty feature list");
  return out;
}

}  // namespace

FeatureSpec ExperimentConfig::feature_spec(FeatureKind kind) const {
  FeatureSpec f;
  f.kind = kind;
  f.region_side = region_side;
  f.patch_side = patch_side;
  f.overcompleteness = overcompleteness;
  f.dictionary_seed = dictionary_seed;
  f.model = model;
  return f;
}

ExperimentConfig experiment_config_from(const Config& c) {
  ExperimentConfig e;
  e.seed = static_cast<std::uint64_t>(c.get_int("seed", static_cast<long long>(e.seed)));
  e.dictionary_seed = static_cast<std::uint64_t>(
      c.get_int("dictionary_seed", static_cast<long long>(e.dictionary_seed)));
  e.model = copula_from_config(c, e.model);
  e.tasks = static_cast<int>(c.get_int("tasks", e.tasks));
  e.frame_size = static_cast<int>(c.get_int("frame_size", e.frame_size));
  e.frames = static_cast<int>(c.get_int("frames", e.frames));
  e.region_side = static_cast<int>(c.get_int("region_side", e.region_side));
  e.target_speed = c.get_double("target_speed", e.target_speed);
  e.spectral_exponent = c.get_double("spectral_exponent", e.spectral_exponent);
  e.patch_side = static_cast<int>(c.get_int("patch_side", e.patch_side));
  e.overcompleteness = c.get_double("overcompleteness", e.overcompleteness);
  if (c.has("features")) e.features = parse_kinds(c.get_string("features", ""));
  e.train.eta = c.get_double("eta", e.train.eta);
  e.train.eta_scale = c.get_double("eta_scale", e.train.eta_scale);
  e.train.max_epochs = static_cast<int>(c.get_int("max_epochs", e.train.max_epochs));
  e.train.tol = c.get_double("tol", e.train.tol);
  e.train.max_samples = static_cast<int>(c.get_int("max_samples", e.train.max_samples));
  e.partitions = c.get_int_list("partitions", e.partitions);
  e.patches = static_cast<int>(c.get_int("patches", e.patches));
  e.pool_images = static_cast<int>(c.get_int("pool_images", e.pool_images));
  e.pool_image_size = static_cast<int>(c.get_int("pool_image_size", e.pool_image_size));
  e.pixel_patch_side = static_cast<int>(c.get_int("pixel_patch_side", e.pixel_patch_side));
  e.rank_sizes = c.get_int_list("rank_sizes", e.rank_sizes);
  e.capacity_n = c.get_int_list("capacity_n", e.capacity_n);
  e.correlation_pairs = static_cast<int>(c.get_int("correlation_pairs", e.correlation_pairs));
  e.speed_epochs = static_cast<int>(c.get_int("speed_epochs", e.speed_epochs));
  e.out = c.get_string("out", e.out.string());

  if (e.tasks < 1) throw std::invalid_argument("tasks must be >= 1");
  if (e.frames < 1) throw std::invalid_argument("frames must be >= 1");
  if (e.region_side < 1 || e.region_side > e.frame_size)
    throw std::invalid_argument("region side must lie in [1, frame_size]");
  if (e.patch_side < 1 || e.region_side % e.patch_side != 0)
    throw std::invalid_argument("region side must be divisible by patch side");
  if (e.pixel_patch_side < e.patch_side || e.pixel_patch_side > e.pool_image_size)
    throw std::invalid_argument("pixel_patch_side must lie in [patch_side, pool_image_size]");
  return e;
}

TrackingTask make_synthetic_task(const ExperimentConfig& cfg, int index) {
  SyntheticOptions o;
  o.width = o.height = cfg.frame_size;
  o.frames = cfg.frames;
  o.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(index));
  o.spectral_exponent = cfg.spectral_exponent;
  o.target_speed = cfg.target_speed;
  TrackingTask t;
  t.seq = generate_synthetic_sequence(o);
  t.region_side = cfg.region_side;
  // Targets are region origins; keep them where a region fits.
  const int hi = cfg.frame_size - cfg.region_side;
  for (Point& w : t.seq.targets) w = {std::clamp(w.x, 0, hi), std::clamp(w.y, 0, hi)};
  t.start = t.seq.targets.front();
  t.validate();
  return t;
}

std::vector<TrackingTask> make_tasks(const ExperimentConfig& cfg) {
  std::vector<TrackingTask> tasks;
  for (int i = 0; i < cfg.tasks; ++i) tasks.push_back(make_synthetic_task(cfg, i));
  return tasks;
}

std::filesystem::path save_task(const TrackingTask& task, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string frames;
  for (int k = 1; k <= task.horizon(); ++k) {
    const std::string name = "frame_" + std::to_string(k) + ".pgm";
    write_pgm(task.seq.frames[static_cast<std::size_t>(k - 1)], dir / name);
    frames += (k > 1 ? "," : "") + name;
  }
  write_targets(task.seq.targets, dir / "targets.txt");
  const auto path = dir / "task.txt";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "frames=" << frames << '\n'
      << "targets=targets.txt\n"
      << "region_side=" << task.region_side << '\n'
      << "start=" << task.start.x << ',' << task.start.y << '\n';
  if (!out) throw std::runtime_error("short write to " + path.string());
  return path;
}

TrackingTask load_task(const std::filesystem::path& task_file) {
  const Config c = Config::from_file(task_file);
  const auto base = task_file.parent_path();
  for (const char* key : {"frames", "targets", "region_side", "start"})
    if (!c.has(key))
      throw ParseError(task_file.string() + ": missing key '" + key + "'");
  std::vector<std::filesystem::path> paths;
  std::stringstream ss(c.get_string("frames", ""));
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) paths.push_back(base / item);
  TrackingTask t;
  t.seq = load_pgm_sequence(paths, base / c.get_string("targets", ""));
  t.region_side = static_cast<int>(c.get_int("region_side", 0));
  const auto start = c.get_int_list("start", {});
  if (start.size() != 2) throw ParseError(task_file.string() + ": start must be x,y");
  t.start = {start[0], start[1]};
  t.validate();
  return t;
}

std::vector<Region> sample_patch_pool(const ExperimentConfig& cfg, int side) {
  if (cfg.pool_images < 1) throw std::invalid_argument("pool needs at least one image");
  std::vector<Frame> images;
  for (int i = 0; i < cfg.pool_images; ++i)
    images.push_back(generate_power_law_field(cfg.pool_image_size, cfg.pool_image_size,
                                              cfg.spectral_exponent,
                                              mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(i))));
  std::mt19937_64 rng(mix_seed(cfg.seed, 999));
  std::uniform_int_distribution<int> pick_image(0, cfg.pool_images - 1);
  std::uniform_int_distribution<int> pick_pos(0, cfg.pool_image_size - side);
  std::vector<Region> pool;
  pool.reserve(static_cast<std::size_t>(cfg.patches));
  for (int s = 0; s < cfg.patches; ++s) {
    const Frame& img = images[static_cast<std::size_t>(pick_image(rng))];
    const int x = pick_pos(rng);
    const int y = pick_pos(rng);
    pool.push_back(extract_region(img, {x, y}, side));
  }
  return pool;
}

// --- capacity ----------------------------------------------------------------

namespace {

Eigen::VectorXd top_left_patch(const Region& r, int side) {
  Eigen::VectorXd v(side * side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      v[y * side + x] = r.data[static_cast<std::size_t>(y) * r.side + x];
  return v;
}

}  // namespace

Eigen::MatrixXd capacity_design(const std::vector<Region>& pool, const GaborDictionary& dict,
                                const std::string& kind, int n, int p) {
  if (n < 1 || n > static_cast<int>(pool.size()))
    throw std::invalid_argument("capacity design: n outside the pool");
  Eigen::MatrixXd V(n, p);
  if (kind == "pixels") {
    const int side = pool.front().side;
    if (p > side * side) throw std::invalid_argument("capacity design: p exceeds patch pixels");
    const auto order = square_shell_order(side);
    for (int s = 0; s < n; ++s)
      for (int j = 0; j < p; ++j)
        V(s, j) = pool[static_cast<std::size_t>(s)].data[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
    return V;
  }
  if (kind == "sparse") {
    if (p > dict.atom_count()) throw std::invalid_argument("capacity design: p exceeds atoms");
    const LeastSquaresEncoder enc(dict.atoms.leftCols(p));
    for (int s = 0; s < n; ++s)
      V.row(s) = enc.encode(top_left_patch(pool[static_cast<std::size_t>(s)], dict.patch_side)).transpose();
    return V;
  }
  throw std::invalid_argument("capacity design: unknown kind " + kind);
}

CapacityResult run_capacity(const ExperimentConfig& cfg) {
  const int d = cfg.patch_side * cfg.patch_side;
  const int m_over = static_cast<int>(std::lround(cfg.overcompleteness * d));
  const auto pool = sample_patch_pool(cfg, cfg.pixel_patch_side);
  const GaborDictionary dict =
      build_dictionary(cfg.model, cfg.patch_side, m_over, cfg.dictionary_seed);
  const int n_all = static_cast<int>(pool.size());

  CapacityResult r;
  {
    // first d shell pixels form the top-left patch
    const Eigen::MatrixXd P = capacity_design(pool, dict, "pixels", n_all, d);
    const auto order = square_shell_order(cfg.pixel_patch_side);
    std::map<int, int> column_of;  // pixel index in pool patch -> column
    for (int j = 0; j < d; ++j) column_of[order[static_cast<std::size_t>(j)]] = j;
    double total = 0.0;
    int pairs = 0;
    for (int y = 0; y < cfg.patch_side; ++y)
      for (int x = 0; x + 1 < cfg.patch_side; ++x) {
        const int a = column_of.at(y * cfg.pixel_patch_side + x);
        const int b = column_of.at(y * cfg.pixel_patch_side + x + 1);
        const double c = pairwise_correlation(P, a, b);
        r.correlations.emplace_back("pixels", y * cfg.patch_side + x, y * cfg.patch_side + x + 1, c);
        total += std::abs(c);
        ++pairs;
      }
    r.adjacent_pixel_correlation = total / pairs;
  }
  const Eigen::MatrixXd C = capacity_design(pool, dict, "sparse", n_all, d);
  const Eigen::MatrixXd O = capacity_design(pool, dict, "sparse", n_all, m_over);
  r.complete_coefficient_correlation =
      mean_abs_column_correlation(C, cfg.correlation_pairs, mix_seed(cfg.seed, 7));
  r.overcomplete_coefficient_correlation =
      mean_abs_column_correlation(O, cfg.correlation_pairs, mix_seed(cfg.seed, 7));

  auto rank_row = [&](std::string kind, const std::string& design, int n, int p) {
    const Eigen::MatrixXd V = capacity_design(pool, dict, design, n, p);
    return RankRow{std::move(kind), n, p, numeric_rank(V),
                   numeric_rank(V, 0.1, RankNormalization::unit_columns)};
  };
  for (int p : cfg.rank_sizes) {
    if (p > n_all) continue;
    if (p <= dict.atom_count()) r.ranks.push_back(rank_row("sparse", "sparse", p, p));
    if (p <= cfg.pixel_patch_side * cfg.pixel_patch_side)
      r.ranks.push_back(rank_row("pixels", "pixels", p, p));
  }
  if (m_over <= n_all) {
    r.ranks.push_back(rank_row("sparse", "sparse", m_over, d));
    r.ranks.push_back(rank_row("sparse2.25", "sparse", m_over, m_over));
  }

  auto sparse_build = [&](int n, int p) { return capacity_design(pool, dict, "sparse", n, p); };
  auto pixel_build = [&](int n, int p) { return capacity_design(pool, dict, "pixels", n, p); };
  std::vector<int> ns;
  for (int n : cfg.capacity_n)
    if (n <= n_all) ns.push_back(n);
  for (const auto& pt : capacity_curve(sparse_build, ns, m_over, CapacitySearch::linear))
    r.curve.emplace_back("sparse", pt);
  for (const auto& pt : capacity_curve(pixel_build, ns,
                                       cfg.pixel_patch_side * cfg.pixel_patch_side,
                                       CapacitySearch::monotone))
    r.curve.emplace_back("pixels", pt);
  return r;
}

// --- speed -------------------------------------------------------------------

std::vector<SpeedRow> run_speed(const ExperimentConfig& cfg,
                                const std::vector<FeatureKind>& kinds) {
  const auto tasks = make_tasks(cfg);
  TrainConfig train = cfg.train;
  train.max_epochs = cfg.speed_epochs;

  std::vector<SpeedRow> rows;
  for (FeatureKind kind : kinds) {
    const FeatureCode code = make_feature_code(cfg.feature_spec(kind));
    SpeedRow row{kind, {}, 0.0, {}};
    std::vector<double> conditions;
    for (const auto& task : tasks) {
      FeatureCache cache(task, code);
      const int N = task.horizon();
      const auto states = enumerate_states(task).stages[static_cast<std::size_t>(N - 1)];
      Eigen::MatrixXd V(static_cast<Eigen::Index>(states.size()), code.length());
      Eigen::VectorXd beta(V.rows());
      for (Eigen::Index s = 0; s < V.rows(); ++s) {
        const Point x = states[static_cast<std::size_t>(s)];
        V.row(s) = cache.get(N, x).transpose();
        beta[s] = squared_distance(x, task.target(N));
      }
      conditions.push_back(hessian_condition(V));
      Eigen::VectorXd w = Eigen::VectorXd::Zero(code.length());
      const StageFit fit = train_stage(w, V, beta, train);
      if (fit.initial_mse <= 0.0) continue;
      for (std::size_t t = 0; t < fit.trace.size(); ++t)
        if (fit.trace[t] > 0.0)
          row.trace.emplace_back(static_cast<double>(t + 1), fit.trace[t] / fit.initial_mse);
    }
    std::sort(conditions.begin(), conditions.end());
    row.hessian_condition = conditions[conditions.size() / 2];
    if (row.trace.size() >= 3) row.fit = fit_time_constant(row.trace);
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- seqlearn ----------------------------------------------------------------

std::vector<SeqLearnRow> run_seqlearn(const ExperimentConfig& cfg) {
  const auto tasks = make_tasks(cfg);
  std::vector<SeqLearnRow> rows;
  for (FeatureKind kind : cfg.features) {
    const FeatureCode code = make_feature_code(cfg.feature_spec(kind));
    for (int P : cfg.partitions) {
      if (P > 1 && P < cfg.tasks) continue;
      if (P > code.length()) continue;
      SequentialOptions opts;
      opts.partitions = P;
      const SequentialResult res = sequential_train(tasks, code, cfg.train, opts);
      for (std::size_t t = 0; t < tasks.size(); ++t)
        rows.push_back({kind, P, static_cast<int>(t), res.partition_of_task[t], res.evaluations[t]});
    }
  }
  return rows;
}

// --- entropy -----------------------------------------------------------------

std::vector<EntropyRow> run_entropy(const ExperimentConfig& cfg) {
  const auto tasks = make_tasks(cfg);
  const int d = cfg.patch_side * cfg.patch_side;

  std::vector<int> pixels;
  std::vector<double> complete, over;
  const GaborDictionary dict_c = build_dictionary(cfg.model, cfg.patch_side, d, cfg.dictionary_seed);
  const GaborDictionary dict_o = build_dictionary(
      cfg.model, cfg.patch_side, static_cast<int>(std::lround(cfg.overcompleteness * d)),
      cfg.dictionary_seed);
  const LeastSquaresEncoder enc_c(dict_c.atoms), enc_o(dict_o.atoms);

  for (const auto& task : tasks) {
    for (const Frame& f : task.seq.frames) {
      for (double v : f.pixels()) pixels.push_back(quantize_value(255.0 * v - 128.0));
      for (int y = 0; y + cfg.patch_side <= f.height(); y += cfg.patch_side)
        for (int x = 0; x + cfg.patch_side <= f.width(); x += cfg.patch_side) {
          const Region r = extract_region(f, {x, y}, cfg.patch_side);
          const Eigen::Map<const Eigen::VectorXd> patch(r.data.data(), d);
          const Eigen::VectorXd a = enc_c.encode(patch), b = enc_o.encode(patch);
          complete.insert(complete.end(), a.data(), a.data() + a.size());
          over.insert(over.end(), b.data(), b.data() + b.size());
        }
    }
  }

  auto row = [](std::string name, const std::vector<int>& levels) {
    EntropyRow r;
    r.representation = std::move(name);
    r.entropy_bits = estimate_entropy(levels);
    r.typical_exponent = typical_count_exponent(r.entropy_bits, 100);
    r.samples = levels.size();
    std::map<int, std::size_t> hist;
    for (int v : levels) ++hist[v];
    r.histogram.assign(hist.begin(), hist.end());
    return r;
  };
  return {row("pixels", pixels), row("sparse", quantize_uniform(complete).levels),
          row("sparse2.25", quantize_uniform(over).levels)};
}

// --- appendix1d --------------------------------------------------------------

std::vector<std::string> run_appendix1d() {
  std::vector<std::string> rows;
  const std::vector<int> w{0, 0, 2, 3};
  const OneDResult dp = solve_1d_deterministic(w);
  const OneDResult greedy = solve_1d_deterministic_greedy(w);
  rows.push_back("deterministic,dp_cost=" + num(dp.cost) + ",greedy_cost=" + num(greedy.cost));
  for (int N = 3; N <= 10; ++N) {
    std::vector<int> targets{0, 0};
    for (int k = 2; k < N; ++k) targets.push_back(k);
    const double a = solve_1d_deterministic(targets).cost;
    const double b = solve_1d_deterministic_greedy(targets).cost;
    rows.push_back("deterministic_horizon,N=" + std::to_string(N) + ",dp_cost=" + num(a) +
                   ",greedy_cost=" + num(b) + ",excess=" + num(b - a));
  }
  for (double p1 : {0.6, 0.7, 0.8, 0.9})
    for (double p2 : {0.6, 0.7, 0.8, 0.9}) {
      const StochasticResult s = solve_1d_stochastic(p1, p2);
      rows.push_back("stochastic,p1=" + num(p1) + ",p2=" + num(p2) + ",dp_cost=" +
                     num(s.dp_cost) + ",greedy_cost=" + num(s.greedy_cost) +
                     ",u0=" + std::to_string(s.first_control));
    }
  return rows;
}

// --- driver ------------------------------------------------------------------

namespace {

/// Removes every registered file unless committed.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : files_) std::filesystem::remove(p, ec);
  }

  std::ofstream open(const std::string& name) {
    const auto path = dir_ / name;
    files_.push_back(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(15);
    return out;
  }
  std::vector<std::filesystem::path> commit() {
    committed_ = true;
    return files_;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  bool committed_ = false;
};

void finish(std::ofstream& out, const std::string& name) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + name);
}

}  // namespace

std::vector<std::filesystem::path> run_experiment(const std::string& name,
                                                  const ExperimentConfig& cfg) {
  static const std::vector<std::string> known{"capacity", "speed", "seqlearn", "entropy",
                                              "appendix1d"};
  if (std::find(known.begin(), known.end(), name) == known.end())
    throw std::invalid_argument("unknown experiment '" + name +
                                "' (expected capacity, speed, seqlearn, entropy, appendix1d)");
  std::filesystem::create_directories(cfg.out);
  OutputSet files(cfg.out);

  if (name == "capacity") {
    const CapacityResult r = run_capacity(cfg);
    auto curve = files.open("capacity.csv");
    curve << "n_max,p,kind,saturated\n";
    for (const auto& [kind, pt] : r.curve)
      curve << pt.n_max << ',' << pt.p << ',' << kind << ',' << (pt.saturated ? 1 : 0) << '\n';
    finish(curve, "capacity.csv");
    auto ranks = files.open("ranks.csv");
    ranks << "kind,n,p,rank,rank_unit_columns\n";
    for (const auto& row : r.ranks)
      ranks << row.kind << ',' << row.n << ',' << row.p << ',' << row.rank << ','
            << row.rank_unit_columns << '\n';
    finish(ranks, "ranks.csv");
    auto corr = files.open("correlations.csv");
    corr << "i,j,corr,kind\n";
    for (const auto& [kind, i, j, c] : r.correlations)
      corr << i << ',' << j << ',' << c << ',' << kind << '\n';
    finish(corr, "correlations.csv");
    auto summary = files.open("correlation_summary.csv");
    summary << "kind,mean_abs_corr\n"
            << "pixels_adjacent," << r.adjacent_pixel_correlation << '\n'
            << "sparse," << r.complete_coefficient_correlation << '\n'
            << "sparse2.25," << r.overcomplete_coefficient_correlation << '\n';
    finish(summary, "correlation_summary.csv");
  } else if (name == "speed") {
    const auto rows = run_speed(cfg, cfg.features);
    auto conv = files.open("convergence.csv");
    conv << "iter,error,kind\n";
    for (const auto& row : rows)
      for (const auto& [t, e] : row.trace) conv << t << ',' << e << ',' << feature_name(row.kind) << '\n';
    finish(conv, "convergence.csv");
    auto tc = files.open("time_constants.csv");
    tc << "kind,delta,r_squared,valid,hessian_condition\n";
    for (const auto& row : rows)
      tc << feature_name(row.kind) << ',' << row.fit.delta << ',' << row.fit.r_squared << ','
         << (row.fit.valid ? 1 : 0) << ',' << row.hessian_condition << '\n';
    finish(tc, "time_constants.csv");
  } else if (name == "seqlearn") {
    const auto rows = run_seqlearn(cfg);
    auto out = files.open("seqlearn.csv");
    out << "feature,partitions,task,partition,cost_ratio,dp_cost_ratio,neuro_cost,greedy_cost,dp_cost\n";
    for (const auto& r : rows)
      out << feature_name(r.kind) << ',' << r.partitions << ',' << r.task + 1 << ','
          << r.partition << ',' << r.eval.cost_ratio << ',' << r.eval.dp_cost_ratio << ','
          << r.eval.neuro_cost << ',' << r.eval.greedy_cost << ',' << r.eval.dp_cost << '\n';
    finish(out, "seqlearn.csv");
  } else if (name == "entropy") {
    const auto rows = run_entropy(cfg);
    auto ent = files.open("entropy.csv");
    ent << "representation,entropy_bits,typical_exponent_per_100,samples\n";
    for (const auto& r : rows)
      ent << r.representation << ',' << r.entropy_bits << ',' << r.typical_exponent << ','
          << r.samples << '\n';
    finish(ent, "entropy.csv");
    auto hist = files.open("histogram.csv");
    hist << "representation,level,count\n";
    for (const auto& r : rows)
      for (const auto& [level, count] : r.histogram)
        hist << r.representation << ',' << level << ',' << count << '\n';
    finish(hist, "histogram.csv");
  } else {
    auto out = files.open("appendix1d.csv");
    for (const auto& line : run_appendix1d()) out << line << '\n';
    finish(out, "appendix1d.csv");
  }
  return files.commit();
}

}  // namespace sparsedp
