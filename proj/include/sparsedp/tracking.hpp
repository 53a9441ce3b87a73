#pragma once

#include <array>
#include <functional>
#include <map>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sparsedp/image.hpp"

namespace sparsedp {

inline constexpr int kControlCount = 5;

/// Moves in tie-break order: left, right, down, up, stay. `a` is the region
/// side, so every move shifts by a whole region.
std::array<Point, kControlCount> control_set(int a);
std::string_view control_name(int index);  // "none" for -1

inline Point step(Point x, Point u) { return x + u; }

/// Region tracking task. States are top-left corners of a x a regions; the
/// horizon is the number of frames.
struct TrackingTask {
  ImageSequence seq;
  int region_side = 1;
  Point start;

  int horizon() const { return static_cast<int>(seq.length()); }
  int width() const { return seq.width(); }
  int height() const { return seq.height(); }
  /// Target of 1-based stage k.
  Point target(int k) const { return seq.targets.at(static_cast<std::size_t>(k - 1)); }
  bool fits(Point x) const { return region_fits(x, region_side, width(), height()); }

  void validate() const;
};

/// Reachable states per stage (index 0 holds stage 1).
struct StageStates {
  std::vector<std::vector<Point>> stages;

  std::size_t total() const;
};

/// Breadth-first expansion in control order, keeping states whose region
/// fits in a width x height frame.
StageStates enumerate_states(Point start, int region_side, int width, int height,
                             int horizon);
StageStates enumerate_states(const TrackingTask& task);

struct StageTable {
  std::vector<Point> states;
  std::vector<double> cost_to_go;
  std::vector<int> control;  // index into control_set; -1 at the last stage
  std::unordered_map<Point, std::size_t, PointHash> index;

  double at(Point x) const { return cost_to_go.at(index.at(x)); }
  bool has(Point x) const { return index.contains(x); }
};

struct CostToGoTable {
  std::vector<StageTable> stages;  // index 0 holds stage 1

  const StageTable& stage(int k) const { return stages.at(static_cast<std::size_t>(k - 1)); }
  double optimal_cost() const { return stages.front().cost_to_go.front(); }
};

/// Backward recursion J_k(x) = |x - w_k|^2 + min_u J_{k+1}(x + u) over
/// in-bounds moves, J_{N+1} = 0, ties resolved by control order.
CostToGoTable solve_exact_dp(const TrackingTask& task);

struct Trajectory {
  std::vector<Point> states;        // x_1 .. x_N
  std::vector<int> controls;        // u_1 .. u_{N-1}
  std::vector<double> stage_costs;  // |x_k - w_k|^2
  double total_cost = 0.0;
};

/// Chooses a control index at stage k from state x. Must return an in-bounds
/// move.
using Policy = std::function<int(int k, Point x)>;

Trajectory run_policy(const TrackingTask& task, const Policy& policy);

/// Picks the in-bounds move minimizing the next stage cost only.
Trajectory solve_greedy(const TrackingTask& task);

/// Forward pass using the table's argmin controls.
Trajectory rollout(const TrackingTask& task, const CostToGoTable& table);

/// Neuro cost over greedy cost. Zero greedy cost gives 1 when the other cost
/// is also zero, +inf otherwise.
double cost_ratio(double cost, double greedy_cost);

// --- One-dimensional problems -----------------------------------------------

/// Target distribution per stage for the 1-D chain with controls {0, +1}
/// and absolute-value stage cost.
using TargetLaw = std::map<int, double>;

struct OneDResult {
  double cost = 0.0;  // expected total cost
  std::vector<int> controls;
  std::vector<int> states;
};

/// Exact backward recursion over states [0, max target + N]. Target noise
/// does not move the state, so the control sequence is open-loop.
OneDResult solve_1d(const std::vector<TargetLaw>& targets, int start = 0);
/// Stage-by-stage minimization of the expected next cost.
OneDResult solve_1d_greedy(const std::vector<TargetLaw>& targets, int start = 0);

OneDResult solve_1d_deterministic(const std::vector<int>& targets, int start = 0);
OneDResult solve_1d_deterministic_greedy(const std::vector<int>& targets,
                                         int start = 0);

struct StochasticResult {
  double dp_cost = 0.0;
  int first_control = 0;
  double greedy_cost = 0.0;
};

/// Three-stage problem with w_0 = 0, w_1 in {0 (p1), 1}, w_2 in {2 (p2), 1}.
StochasticResult solve_1d_stochastic(double p1, double p2);

}  // namespace sparsedp
