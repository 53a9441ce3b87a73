#include "sparsedp/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace sparsedp {

std::array<Point, kControlCount> control_set(int a) {
  return {Point{-a, 0}, Point{a, 0}, Point{0, a}, Point{0, -a}, Point{0, 0}};
}

std::string_view control_name(int index) {
  static constexpr std::array<std::string_view, kControlCount> names{
      "left", "right", "down", "up", "stay"};
  if (index < 0 || index >= kControlCount) return "none";
  return names[static_cast<std::size_t>(index)];
}

void TrackingTask::validate() const {
  seq.validate();
  if (region_side < 1) throw ValidationError("region side must be >= 1");
  if (!fits(start))
    throw ValidationError("initial state (" + std::to_string(start.x) + "," +
                          std::to_string(start.y) + ") does not fit in the frame");
}

std::size_t StageStates::total() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.size();
  return n;
}

StageStates enumerate_states(Point start, int region_side, int width, int height,
                             int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!region_fits(start, region_side, width, height))
    throw ValidationError("initial state does not fit in the frame");
  const auto controls = control_set(region_side);
  StageStates out;
  out.stages.push_back({start});
  for (int k = 1; k < horizon; ++k) {
    std::vector<Point> next;
    std::unordered_set<Point, PointHash> seen;
    for (Point x : out.stages.back()) {
      for (Point u : controls) {
        const Point y = step(x, u);
        if (region_fits(y, region_side, width, height) && seen.insert(y).second)
          next.push_back(y);
      }
    }
    out.stages.push_back(std::move(next));
  }
  return out;
}

StageStates enumerate_states(const TrackingTask& task) {
  return enumerate_states(task.start, task.region_side, task.width(), task.height(),
                          task.horizon());
}

CostToGoTable solve_exact_dp(const TrackingTask& task) {
  task.validate();
  const StageStates reach = enumerate_states(task);
  const auto controls = control_set(task.region_side);
  const int N = task.horizon();

  CostToGoTable table;
  table.stages.resize(static_cast<std::size_t>(N));
  for (int k = N; k >= 1; --k) {
    StageTable& st = table.stages[static_cast<std::size_t>(k - 1)];
    st.states = reach.stages[static_cast<std::size_t>(k - 1)];
    st.cost_to_go.resize(st.states.size());
    st.control.assign(st.states.size(), -1);
    const Point w = task.target(k);
    for (std::size_t s = 0; s < st.states.size(); ++s) {
      const Point x = st.states[s];
      st.index.emplace(x, s);
      double future = 0.0;
      if (k < N) {
        const StageTable& next = table.stages[static_cast<std::size_t>(k)];
        future = std::numeric_limits<double>::infinity();
        for (int c = 0; c < kControlCount; ++c) {
          const Point y = step(x, controls[static_cast<std::size_t>(c)]);
          if (!task.fits(y)) continue;
          const double j = next.at(y);
          if (j < future) {
            future = j;
            st.control[s] = c;
          }
        }
      }
      st.cost_to_go[s] = squared_distance(x, w) + future;
    }
  }
  return table;
}

Trajectory run_policy(const TrackingTask& task, const Policy& policy) {
  const auto controls = control_set(task.region_side);
  const int N = task.horizon();
  Trajectory t;
  Point x = task.start;
  for (int k = 1; k <= N; ++k) {
    t.states.push_back(x);
    const double c = squared_distance(x, task.target(k));
    t.stage_costs.push_back(c);
    t.total_cost += c;
    if (k == N) break;
    const int u = policy(k, x);
    if (u < 0 || u >= kControlCount)
      throw std::logic_error("policy returned an invalid control");
    const Point y = step(x, controls[static_cast<std::size_t>(u)]);
    if (!task.fits(y)) throw std::logic_error("policy left the frame");
    t.controls.push_back(u);
    x = y;
  }
  return t;
}

Trajectory solve_greedy(const TrackingTask& task) {
  task.validate();
  const auto controls = control_set(task.region_side);
  return run_policy(task, [&](int k, Point x) {
    const Point w = task.target(k + 1);
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int c = 0; c < kControlCount; ++c) {
      const Point y = step(x, controls[static_cast<std::size_t>(c)]);
      if (!task.fits(y)) continue;
      const double cost = squared_distance(y, w);
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    return best;
  });
}

Trajectory rollout(const TrackingTask& task, const CostToGoTable& table) {
  return run_policy(task, [&](int k, Point x) {
    const StageTable& st = table.stage(k);
    return st.control.at(st.index.at(x));
  });
}

double cost_ratio(double cost, double greedy_cost) {
  if (greedy_cost == 0.0)
    return cost == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return cost / greedy_cost;
}

// --- 1-D ---------------------------------------------------------------------

namespace {

double expected_distance(const TargetLaw& law, int x) {
  double e = 0.0;
  for (const auto& [w, p] : law) e += p * std::abs(x - w);
  return e;
}

void check_laws(const std::vector<TargetLaw>& targets, int start) {
  if (targets.empty()) throw std::invalid_argument("1-D problem needs N >= 1");
  if (start < 0) throw std::invalid_argument("1-D states are nonnegative");
  for (const auto& law : targets) {
    if (law.empty()) throw std::invalid_argument("empty target distribution");
    double total = 0.0;
    for (const auto& [w, p] : law) {
      if (w < 0 || p < 0.0) throw std::invalid_argument("bad target distribution");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("target probabilities must sum to 1");
  }
}

}  // namespace

OneDResult solve_1d(const std::vector<TargetLaw>& targets, int start) {
  check_laws(targets, start);
  const int N = static_cast<int>(targets.size());
  int max_w = start;
  for (const auto& law : targets) max_w = std::max(max_w, law.rbegin()->first);
  const int top = max_w + N;

  // J[k][x] for k = 0..N-1; J_N = 0.
  std::vector<std::vector<double>> J(static_cast<std::size_t>(N),
                                     std::vector<double>(static_cast<std::size_t>(top + 1)));
  std::vector<std::vector<int>> U(J.size(), std::vector<int>(static_cast<std::size_t>(top + 1), 0));
  for (int k = N - 1; k >= 0; --k) {
    const auto kk = static_cast<std::size_t>(k);
    for (int x = 0; x <= top; ++x) {
      const auto xx = static_cast<std::size_t>(x);
      double future = 0.0;
      if (k < N - 1) {
        const auto& next = J[kk + 1];
        future = next[xx];
        if (x < top && next[xx + 1] < future) {
          future = next[xx + 1];
          U[kk][xx] = 1;
        }
      }
      J[kk][xx] = expected_distance(targets[kk], x) + future;
    }
  }

  OneDResult r;
  r.cost = J[0][static_cast<std::size_t>(start)];
  int x = start;
  r.states.push_back(x);
  for (int k = 0; k + 1 < N; ++k) {
    const int u = U[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)];
    r.controls.push_back(u);
    x += u;
    r.states.push_back(x);
  }
  return r;
}

OneDResult solve_1d_greedy(const std::vector<TargetLaw>& targets, int start) {
  check_laws(targets, start);
  OneDResult r;
  int x = start;
  r.states.push_back(x);
  r.cost = expected_distance(targets[0], x);
  for (std::size_t k = 1; k < targets.size(); ++k) {
    const int u = expected_distance(targets[k], x + 1) < expected_distance(targets[k], x) ? 1 : 0;
    x += u;
    r.controls.push_back(u);
    r.states.push_back(x);
    r.cost += expected_distance(targets[k], x);
  }
  return r;
}

namespace {

std::vector<TargetLaw> point_masses(const std::vector<int>& targets) {
  std::vector<TargetLaw> laws;
  laws.reserve(targets.size());
  for (int w : targets) laws.push_back(TargetLaw{{w, 1.0}});
  return laws;
}

}  // namespace

OneDResult solve_1d_deterministic(const std::vector<int>& targets, int start) {
  return solve_1d(point_masses(targets), start);
}

OneDResult solve_1d_deterministic_greedy(const std::vector<int>& targets, int start) {
  return solve_1d_greedy(point_masses(targets), start);
}

StochasticResult solve_1d_stochastic(double p1, double p2) {
  for (double p : {p1, p2})
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("probabilities must lie in (0, 1]");
  const std::vector<TargetLaw> laws{
      TargetLaw{{0, 1.0}},
      TargetLaw{{0, p1}, {1, 1.0 - p1}},
      TargetLaw{{1, 1.0 - p2}, {2, p2}},
  };
  const OneDResult dp = solve_1d(laws, 0);
  const OneDResult greedy = solve_1d_greedy(laws, 0);
  return {dp.cost, dp.controls.front(), greedy.cost};
}

}  // namespace sparsedp
