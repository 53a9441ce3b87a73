#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sparsedp/experiments.hpp"
#include "sparsedp/sparse_coder.hpp"

namespace fs = std::filesystem;
using namespace sparsedp;

namespace {

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out;
};

// defaults < config file < flags
Config resolve_config(const GlobalFlags& g) {
  Config c;
  if (!g.config_path.empty()) c = Config::from_file(g.config_path);
  if (g.seed) c.set("seed", std::to_string(*g.seed));
  if (!g.out.empty()) c.set("out", g.out);
  return c;
}

// Paths created by a command; removed again unless commit() is reached.
class OutputGuard {
 public:
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    for (auto it = paths_.rbegin(); it != paths_.rend(); ++it) fs::remove_all(*it, ec);
  }
  void track(const fs::path& p) {
    if (!fs::exists(p)) paths_.push_back(p);
  }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> paths_;
  bool committed_ = false;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// CSV either to a file (guarded) or to stdout.
class CsvSink {
 public:
  CsvSink(const std::string& path, OutputGuard& guard) {
    if (path.empty() || path == "-") return;
    guard.track(path);
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot write " + path);
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void close() {
    if (!file_.is_open()) return;
    file_.close();
    if (!file_) throw std::runtime_error("write failed");
  }

 private:
  std::ofstream file_;
};

int cmd_gen_data(const Config& c, int tasks_flag) {
  Config merged = c;
  if (tasks_flag >= 0) merged.set("tasks", std::to_string(tasks_flag));
  if (merged.get_int("tasks", 1) < 1) throw std::invalid_argument("need at least one task");
  const ExperimentConfig cfg = experiment_config_from(merged);
  OutputGuard guard;
  if (!fs::exists(cfg.out)) {
    guard.track(cfg.out);
    fs::create_directories(cfg.out);
  }
  for (int i = 0; i < cfg.tasks; ++i) {
    const fs::path dir = cfg.out / ("task_" + std::to_string(i + 1));
    guard.track(dir);
    const auto file = save_task(make_synthetic_task(cfg, i), dir);
    std::cout << file.string() << '\n';
  }
  guard.commit();
  return 0;
}

int cmd_dict(const Config& c, int atoms, int patch_side, bool normalize) {
  const ExperimentConfig cfg = experiment_config_from(c);
  const int side = patch_side > 0 ? patch_side : cfg.patch_side;
  const int m = atoms > 0 ? atoms : side * side;
  const std::string out = c.get_string("out", "");
  if (out.empty() || fs::is_directory(out))
    throw std::invalid_argument("dict needs --out FILE");
  OutputGuard guard;
  guard.track(out);
  save_dictionary(build_dictionary(cfg.model, side, m, cfg.dictionary_seed, normalize), out);
  guard.commit();
  return 0;
}

int cmd_encode(const Config& c, const std::string& dict_path, const std::string& input,
               double lambda) {
  const GaborDictionary dict = load_dictionary(dict_path);
  const Frame frame = read_pgm(input);
  const int d = dict.patch_side;
  if (frame.width() < d || frame.height() < d)
    throw std::invalid_argument("image smaller than one patch");
  const LeastSquaresEncoder encoder(dict.atoms);
  L1Options opts;
  opts.lambda = lambda;
  opts.max_iter = static_cast<int>(c.get_int("l1_max_iter", opts.max_iter));

  OutputGuard guard;
  CsvSink sink(c.get_string("out", ""), guard);
  auto& os = sink.out();
  os << "patch,x,y";
  for (Eigen::Index j = 0; j < dict.atoms.cols(); ++j) os << ",c" << j;
  os << '\n';
  int index = 0;
  for (int y = 0; y + d <= frame.height(); y += d) {
    for (int x = 0; x + d <= frame.width(); x += d) {
      const Region r = extract_region(frame, {x, y}, d);
      const Eigen::Map<const Eigen::VectorXd> patch(r.data.data(),
                                                    static_cast<Eigen::Index>(r.data.size()));
      Eigen::VectorXd coeffs;
      if (lambda > 0.0) {
        const L1Result res = encode_l1(dict.atoms, patch, opts);
        if (!res.converged)
          std::cerr << "warning: patch " << index << " stopped with KKT residual "
                    << res.kkt_residual << '\n';
        coeffs = res.coeffs;
      } else {
        coeffs = encoder.encode(patch);
      }
      os << index++ << ',' << x << ',' << y;
      for (Eigen::Index j = 0; j < coeffs.size(); ++j) os << ',' << fmt(coeffs[j]);
      os << '\n';
    }
  }
  sink.close();
  guard.commit();
  return 0;
}

int cmd_track(const Config& c, const std::string& task_path, bool greedy,
              const std::string& table_path) {
  const TrackingTask task = load_task(task_path);
  OutputGuard guard;
  const int N = task.horizon();

  std::optional<CostToGoTable> table;
  if (!greedy || !table_path.empty()) table = solve_exact_dp(task);
  const Trajectory traj = greedy ? solve_greedy(task) : rollout(task, *table);

  if (!table_path.empty()) {
    CsvSink tsink(table_path, guard);
    auto& os = tsink.out();
    os << "k,x,y,J,u\n";
    for (int k = 1; k <= N; ++k) {
      const StageTable& st = table->stage(k);
      for (std::size_t i = 0; i < st.states.size(); ++i)
        os << k << ',' << st.states[i].x << ',' << st.states[i].y << ','
           << fmt(st.cost_to_go[i]) << ',' << control_name(st.control[i]) << '\n';
    }
    tsink.close();
  }

  CsvSink sink(c.get_string("out", ""), guard);
  auto& os = sink.out();
  os << "k,x,y,J,u\n";
  double remaining = traj.total_cost;
  for (int k = 1; k <= N; ++k) {
    const Point x = traj.states[static_cast<std::size_t>(k - 1)];
    const int u = k < N ? traj.controls[static_cast<std::size_t>(k - 1)] : -1;
    os << k << ',' << x.x << ',' << x.y << ',' << fmt(remaining) << ',' << control_name(u)
       << '\n';
    remaining -= traj.stage_costs[static_cast<std::size_t>(k - 1)];
  }
  sink.close();
  std::cerr << (greedy ? "greedy" : "dp") << "_cost=" << fmt(traj.total_cost) << '\n';
  guard.commit();
  return 0;
}

int cmd_train(const Config& c, const std::vector<std::string>& task_paths,
              const std::string& feature, int partitions_flag, const std::string& policy) {
  if (task_paths.empty()) throw std::invalid_argument("train needs --tasks");
  std::vector<TrackingTask> tasks;
  for (const auto& p : task_paths) tasks.push_back(load_task(p));
  Config merged = c;
  merged.set("region_side", std::to_string(tasks.front().region_side));
  merged.set("frame_size", std::to_string(std::max(tasks.front().width(), tasks.front().height())));
  const ExperimentConfig cfg = experiment_config_from(merged);
  for (const auto& t : tasks)
    if (t.region_side != tasks.front().region_side)
      throw std::invalid_argument("all tasks must share one region size");

  const FeatureCode code = make_feature_code(cfg.feature_spec(parse_feature_kind(feature)));
  SequentialOptions opts;
  opts.partitions = partitions_flag > 0 ? partitions_flag
                                        : static_cast<int>(c.get_int("train_partitions", 1));
  if (policy == "share") opts.policy = PartitionPolicy::share;
  else if (policy != "probe") throw std::invalid_argument("unknown policy '" + policy + "'");

  const std::string out = c.get_string("out", "");
  if (out.empty() || fs::is_directory(out))
    throw std::invalid_argument("train needs --out FILE for the approximator");
  const SequentialResult res = sequential_train(tasks, code, cfg.train, opts);

  OutputGuard guard;
  guard.track(out);
  save_approximator(res.approx, out);
  std::cout << "task,partition,neuro_cost,greedy_cost,dp_cost,cost_ratio,dp_cost_ratio\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& e = res.evaluations[i];
    std::cout << task_paths[i] << ',' << res.partition_of_task[i] << ',' << fmt(e.neuro_cost)
              << ',' << fmt(e.greedy_cost) << ',' << fmt(e.dp_cost) << ','
              << fmt(e.cost_ratio) << ',' << fmt(e.dp_cost_ratio) << '\n';
  }
  guard.commit();
  return 0;
}

int cmd_eval(const std::string& approx_path, const std::string& task_path) {
  const LinearApproximator approx = load_approximator(approx_path);
  const TrackingTask task = load_task(task_path);
  if (task.region_side != approx.feature.region_side)
    throw std::invalid_argument("task region size does not match the approximator");
  if (task.horizon() != approx.horizon())
    throw std::invalid_argument("task horizon does not match the approximator");
  const FeatureCode code = make_feature_code(approx.feature);
  FeatureCache cache(task, code);
  const int partition = partition_for(approx, task);
  const TaskEvaluation e = evaluate_task(task, approx, cache, partition);
  std::cout << "partition,neuro_cost,greedy_cost,dp_cost,cost_ratio,dp_cost_ratio\n"
            << partition << ',' << fmt(e.neuro_cost) << ',' << fmt(e.greedy_cost) << ','
            << fmt(e.dp_cost) << ',' << fmt(e.cost_ratio) << ',' << fmt(e.dp_cost_ratio)
            << '\n';
  return 0;
}

int cmd_experiment(const Config& c, const std::string& name) {
  const ExperimentConfig cfg = experiment_config_from(c);
  fs::create_directories(cfg.out);
  for (const auto& p : run_experiment(name, cfg)) std::cout << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-code features for approximate dynamic programming"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--seed", g.seed, "Random seed")->check(CLI::NonNegativeNumber);
  app.add_option("--config", g.config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output file or directory");

  auto* gen = app.add_subcommand("gen-data", "Write synthetic tracking tasks");
  int tasks = -1;
  gen->add_option("--tasks", tasks, "Number of tasks");

  auto* dict = app.add_subcommand("dict", "Build a Gabor dictionary");
  int atoms = 0, patch_side = 0;
  bool normalize = false;
  dict->add_option("--atoms", atoms, "Atom count (default: patch_side^2)")->check(CLI::PositiveNumber);
  dict->add_option("--patch-side", patch_side, "Patch side in pixels")->check(CLI::PositiveNumber);
  dict->add_flag("--normalize", normalize, "Scale atoms to unit norm");

  auto* enc = app.add_subcommand("encode", "Encode image patches");
  std::string dict_path, input;
  double lambda = 0.0;
  enc->add_option("--dict", dict_path)->required()->check(CLI::ExistingFile);
  enc->add_option("--input", input, "PGM image")->required()->check(CLI::ExistingFile);
  enc->add_option("--lambda", lambda, "l1 weight; 0 gives least squares")
      ->check(CLI::NonNegativeNumber);

  auto* track = app.add_subcommand("track", "Tracking problems");
  track->require_subcommand(1);
  auto* solve = track->add_subcommand("solve", "Solve one task exactly or greedily");
  std::string task_path, table_path;
  bool greedy = false;
  solve->add_option("--task", task_path)->required()->check(CLI::ExistingFile);
  solve->add_flag("--greedy", greedy, "Use the one-step greedy policy");
  solve->add_option("--table", table_path, "Also write the full cost-to-go table");

  auto* train = app.add_subcommand("train", "Train a value approximator over tasks in order");
  std::vector<std::string> task_list;
  std::string feature = "pixels", policy = "probe";
  int partitions = 0;
  train->add_option("--tasks", task_list, "Task files, in training order")
      ->required()
      ->delimiter(',')
      ->check(CLI::ExistingFile);
  train->add_option("--feature", feature)
      ->check(CLI::IsMember({"pixels", "whitened", "sparse", "sparse2.25"}));
  train->add_option("--partitions", partitions, "Weight partitions (1 = shared)");
  train->add_option("--policy", policy, "Collision policy")->check(CLI::IsMember({"probe", "share"}));

  auto* eval = app.add_subcommand("eval", "Evaluate a trained approximator on a task");
  std::string approx_path;
  eval->add_option("--approx", approx_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--task", task_path)->required()->check(CLI::ExistingFile);

  auto* exp = app.add_subcommand("experiment", "Run one experiment and write CSVs");
  std::string name;
  exp->add_option("name", name)
      ->required()
      ->check(CLI::IsMember({"capacity", "speed", "seqlearn", "entropy", "appendix1d"}));

  for (auto* sub : {gen, dict, enc, solve, train, eval, exp}) sub->fallthrough();
  track->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const Config c = resolve_config(g);
    if (*gen) return cmd_gen_data(c, tasks);
    if (*dict) return cmd_dict(c, atoms, patch_side, normalize);
    if (*enc) return cmd_encode(c, dict_path, input, lambda);
    if (*solve) return cmd_track(c, task_path, greedy, table_path);
    if (*train) return cmd_train(c, task_list, feature, partitions, policy);
    if (*eval) return cmd_eval(approx_path, task_path);
    if (*exp) return cmd_experiment(c, name);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
