#include "doctest.h"

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>

#include "sparsedp/tracking.hpp"

using namespace sparsedp;

namespace {

TrackingTask flat_task(int width, int height, int side, std::vector<Point> targets, Point start) {
  TrackingTask t;
  for (std::size_t k = 0; k < targets.size(); ++k) t.seq.frames.emplace_back(width, height, 0.5);
  t.seq.targets = std::move(targets);
  t.region_side = side;
  t.start = start;
  t.validate();
  return t;
}

TrackingTask random_task(std::mt19937_64& rng, int horizon) {
  std::uniform_int_distribution<int> side_d(2, 5);
  const int side = side_d(rng);
  std::uniform_int_distribution<int> size_d(3 * side, 7 * side);
  const int w = size_d(rng), h = size_d(rng);
  std::uniform_int_distribution<int> xs(0, w - side), ys(0, h - side);
  std::vector<Point> targets;
  for (int k = 0; k < horizon; ++k) targets.push_back({xs(rng), ys(rng)});
  return flat_task(w, h, side, targets, {xs(rng), ys(rng)});
}

// Minimum over every control sequence, skipping sequences that leave the frame.
double brute_force(const TrackingTask& t) {
  const auto controls = control_set(t.region_side);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, Point, double)> go = [&](int k, Point x, double acc) {
    acc += squared_distance(x, t.target(k));
    if (k == t.horizon()) {
      best = std::min(best, acc);
      return;
    }
    for (const Point& u : controls) {
      const Point y = step(x, u);
      if (t.fits(y)) go(k + 1, y, acc);
    }
  };
  go(1, t.start, 0.0);
  return best;
}

}  // namespace

TEST_CASE("state transitions") {
  CHECK(step({3, 4}, {10, 0}) == Point{13, 4});
  const Point x{7, 2};
  CHECK(step(x, {0, 0}) == x);
  CHECK(step({0, 0}, {-10, 0}) == Point{-10, 0});
  const auto c = control_set(10);
  CHECK(c[0] == Point{-10, 0});
  CHECK(c[1] == Point{10, 0});
  CHECK(c[2] == Point{0, 10});
  CHECK(c[3] == Point{0, -10});
  CHECK(c[4] == Point{0, 0});
  CHECK(control_name(4) == "stay");
  CHECK(control_name(-1) == "none");
}

TEST_CASE("stage state counts on an unbounded lattice") {
  const StageStates s = enumerate_states({500, 500}, 1, 1001, 1001, 5);
  const std::vector<std::size_t> expected{1, 5, 13, 25, 41};
  for (int k = 0; k < 5; ++k) {
    CHECK(s.stages[static_cast<std::size_t>(k)].size() == expected[static_cast<std::size_t>(k)]);
    CHECK(s.stages[static_cast<std::size_t>(k)].size() == static_cast<std::size_t>(2 * k * (k + 1) + 1));
  }
}

TEST_CASE("a corner start leaves three states at stage two") {
  const StageStates s = enumerate_states({0, 0}, 10, 50, 50, 2);
  CHECK(s.stages[1].size() == 3);
  const std::set<Point> got(s.stages[1].begin(), s.stages[1].end());
  CHECK(got == std::set<Point>{{0, 0}, {10, 0}, {0, 10}});
}

TEST_CASE("state graph is sound and complete") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const TrackingTask t = random_task(rng, 5);
    const StageStates s = enumerate_states(t);
    for (int k = 1; k < t.horizon(); ++k) {
      const auto& here = s.stages[static_cast<std::size_t>(k - 1)];
      const auto& next = s.stages[static_cast<std::size_t>(k)];
      const std::set<Point> next_set(next.begin(), next.end());
      CHECK(next_set.size() == next.size());
      std::set<Point> successors;
      for (const Point& x : here)
        for (const Point& u : control_set(t.region_side))
          if (t.fits(step(x, u))) successors.insert(step(x, u));
      CHECK(successors == next_set);
    }
  }
}

TEST_CASE("single-stage cost is the terminal distance") {
  const TrackingTask t = flat_task(20, 20, 4, {{3, 9}}, {1, 2});
  const CostToGoTable table = solve_exact_dp(t);
  CHECK(table.optimal_cost() == 4.0 + 49.0);
  CHECK(table.stage(1).control[0] == -1);
}

TEST_CASE("exact DP matches brute force and its own rollout") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int horizon = 1 + trial % 6;
    const TrackingTask t = random_task(rng, horizon);
    const CostToGoTable table = solve_exact_dp(t);
    CHECK(table.optimal_cost() == brute_force(t));
    const Trajectory traj = rollout(t, table);
    CHECK(traj.total_cost == table.optimal_cost());
    CHECK(traj.states.size() == static_cast<std::size_t>(horizon));
    CHECK(traj.controls.size() == static_cast<std::size_t>(horizon - 1));
    CHECK(solve_greedy(t).total_cost >= table.optimal_cost());
  }
}

TEST_CASE("Bellman consistency at every state") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const TrackingTask t = random_task(rng, 5);
    const CostToGoTable table = solve_exact_dp(t);
    for (int k = 1; k <= t.horizon(); ++k) {
      const StageTable& st = table.stage(k);
      for (std::size_t i = 0; i < st.states.size(); ++i) {
        const Point x = st.states[i];
        double tail = 0.0;
        int arg = -1;
        if (k < t.horizon()) {
          tail = std::numeric_limits<double>::infinity();
          const auto controls = control_set(t.region_side);
          for (int c = 0; c < kControlCount; ++c) {
            const Point y = step(x, controls[static_cast<std::size_t>(c)]);
            if (!t.fits(y)) continue;
            const double v = table.stage(k + 1).at(y);
            if (v < tail) {
              tail = v;
              arg = c;
            }
          }
        }
        CHECK(st.cost_to_go[i] == squared_distance(x, t.target(k)) + tail);
        CHECK(st.control[i] == arg);
      }
    }
  }
}

TEST_CASE("stationary target at the start") {
  const TrackingTask t = flat_task(30, 30, 5, {{10, 10}, {10, 10}, {10, 10}, {10, 10}}, {10, 10});
  const Trajectory g = solve_greedy(t);
  CHECK(g.total_cost == 0.0);
  for (int u : g.controls) CHECK(u == 4);
  const Trajectory d = rollout(t, solve_exact_dp(t));
  CHECK(d.total_cost == 0.0);
  for (const Point& x : d.states) CHECK(x == Point{10, 10});
}

TEST_CASE("greedy ties go to the first control") {
  // from (10,10) with step 2, left, up, and stay are all at distance 2 of (9,9)
  const TrackingTask t = flat_task(30, 30, 2, {{10, 10}, {9, 9}}, {10, 10});
  CHECK(solve_greedy(t).controls[0] == 0);
  // down and stay tie for a target halfway between them
  const TrackingTask v = flat_task(30, 30, 4, {{10, 10}, {10, 12}}, {10, 10});
  CHECK(solve_greedy(v).controls[0] == 2);
  const TrackingTask u = flat_task(30, 30, 5, {{10, 10}, {10, 10}}, {10, 10});
  CHECK(solve_greedy(u).controls[0] == 4);
  // the exact solver breaks ties the same way
  CHECK(solve_exact_dp(t).stage(1).control[0] == 0);
}

TEST_CASE("out-of-frame moves are excluded") {
  const TrackingTask t = flat_task(10, 10, 5, {{0, 0}, {0, 0}}, {0, 0});
  // the only in-bounds states from the corner: stay, right, down
  CHECK(enumerate_states(t).stages[1].size() == 3);
  TrackingTask bad = t;
  bad.start = {6, 0};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("cost ratio edge cases") {
  CHECK(cost_ratio(2.0, 4.0) == 0.5);
  CHECK(cost_ratio(0.0, 0.0) == 1.0);
  CHECK(std::isinf(cost_ratio(1.0, 0.0)));
}

TEST_CASE("one-dimensional deterministic problem") {
  const OneDResult dp = solve_1d_deterministic({0, 0, 2, 3});
  CHECK(dp.cost == 1.0);
  CHECK(dp.controls == std::vector<int>{1, 1, 1});
  CHECK(dp.states == std::vector<int>{0, 1, 2, 3});
  const OneDResult g = solve_1d_deterministic_greedy({0, 0, 2, 3});
  CHECK(g.cost == 2.0);
  CHECK(g.controls == std::vector<int>{0, 1, 1});

  const OneDResult dp3 = solve_1d_deterministic({0, 0, 2});
  const OneDResult g3 = solve_1d_deterministic_greedy({0, 0, 2});
  CHECK(dp3.cost == g3.cost);

  for (int N = 4; N <= 12; ++N) {
    std::vector<int> w{0, 0};
    for (int k = 2; k < N; ++k) w.push_back(k);
    const double excess = solve_1d_deterministic_greedy(w).cost - solve_1d_deterministic(w).cost;
    CHECK(excess == N - 3);
  }
}

TEST_CASE("one-dimensional general laws reduce to the deterministic case") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> d(0, 6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> w(5);
    std::vector<TargetLaw> laws;
    for (int& v : w) {
      v = d(rng);
      laws.push_back({{v, 1.0}});
    }
    CHECK(solve_1d(laws).cost == solve_1d_deterministic(w).cost);
    CHECK(solve_1d_greedy(laws).cost == solve_1d_deterministic_greedy(w).cost);
  }
}

TEST_CASE("one-dimensional stochastic problem") {
  const StochasticResult a = solve_1d_stochastic(0.6, 0.8);
  CHECK(a.dp_cost == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(a.first_control == 1);
  const StochasticResult b = solve_1d_stochastic(0.8, 0.6);
  CHECK(b.dp_cost == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(b.first_control == 0);
  CHECK(b.greedy_cost == doctest::Approx(b.dp_cost).epsilon(1e-12));

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> p(0.5, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double p1 = 1.0 - p(rng) + 0.5, p2 = 1.0 - p(rng) + 0.5;  // in (0.5, 1]
    const StochasticResult r = solve_1d_stochastic(p1, p2);
    CHECK(std::abs(r.dp_cost - (1.0 - std::abs(p2 - p1))) < 1e-12);
    CHECK(std::abs(r.greedy_cost - (1.0 - (p1 - p2))) < 1e-12);
    if (p2 > p1) CHECK(std::abs(r.greedy_cost - r.dp_cost - 2 * (p2 - p1)) < 1e-12);
  }
  CHECK_THROWS(solve_1d_stochastic(0.0, 0.5));
  CHECK_THROWS(solve_1d_stochastic(0.5, 1.5));
}
