#include <gtest/gtest.h>

#include <cmath>

#include "dosp/errors.hpp"
#include "dosp/oracle.hpp"
#include "dosp/scenarios.hpp"
#include "test_problems.hpp"

using namespace dosp;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// min x^2 on [-1, 1] subject to 0.5 - x <= 0.
ProblemSpec active_constraint() {
  auto env = std::make_shared<LambdaEnvironment>(
      1, 1, std::vector<std::size_t>{1},
      [](std::size_t, double, const Vec& x) { return x[0] * x[0]; },
      [](std::size_t, double, const Vec& x) { return Vec(2.0 * x); },
      [](std::size_t, double, const Vec& x) { return v1(0.5 - x[0]); },
      [](std::size_t, double, const Vec&, std::size_t) { return v1(-1.0); });
  ProblemSpec p;
  p.env = env;
  p.action_set = ActionSet::symmetric_box(1, 1.0);
  p.horizon = 1.0;
  p.sample_step = 0.1;
  p.constants.lipschitz_cost = 2.0;
  p.feasible_witness = v1(0.8);
  return p;
}

// min ||x||_1 subject to logistic losses <= delta on two separable samples.
ProblemSpec logistic_2d(double delta) {
  struct Sample {
    double y;
    Vec z;
  };
  auto data = std::make_shared<std::vector<Sample>>(
      std::vector<Sample>{{1.0, v2(1.0, 0.4)}, {-1.0, v2(-0.3, -1.0)}});
  auto env = std::make_shared<LambdaEnvironment>(
      1, 2, std::vector<std::size_t>{2},
      [](std::size_t, double, const Vec& x) { return x.lpNorm<1>(); },
      [](std::size_t, double, const Vec& x) { return l1_subgradient(x); },
      [data, delta](std::size_t, double, const Vec& x) {
        Vec out(2);
        for (int k = 0; k < 2; ++k) out[k] = logistic_loss((*data)[k].y, (*data)[k].z, x) - delta;
        return out;
      },
      [data](std::size_t, double, const Vec& x, std::size_t k) {
        return logistic_loss_gradient((*data)[k].y, (*data)[k].z, x);
      });
  ProblemSpec p;
  p.env = env;
  p.action_set = ActionSet::symmetric_box(2, 5.0);
  p.horizon = 1.0;
  p.sample_step = 0.5;
  p.constants.lipschitz_cost = std::sqrt(2.0);
  p.feasible_witness = v2(5.0, 5.0);
  return p;
}

}  // namespace

TEST(Oracle, ActiveConstraintExample) {
  auto r = grid_oracle(active_constraint(), 201);
  EXPECT_NEAR(r.xstar[0], 0.5, 1e-12);
  EXPECT_EQ(r.method, "grid");
  EXPECT_EQ(r.resolution, 201u);
  EXPECT_TRUE(r.feasible);
  EXPECT_LE(r.worst_violation, 1e-12);
  EXPECT_NEAR(r.objective_integral, 0.25 * 1.0, 1e-10);
}

TEST(Oracle, InteriorOptimumExample) {
  auto p = fixtures::static_quadratic({v2(0.3, 0.3)}, 1.0, 1.0, 0.1);
  auto r = grid_oracle(p, 201);
  EXPECT_NEAR(r.xstar[0], 0.3, 1e-12);
  EXPECT_NEAR(r.xstar[1], 0.3, 1e-12);
  EXPECT_EQ(r.worst_violation, -std::numeric_limits<double>::infinity());
}

TEST(Oracle, LogisticGridAgreesAcrossResolutions) {
  auto p = logistic_2d(0.1);
  auto coarse = grid_oracle(p, 101);
  auto fine = grid_oracle(p, 201);
  const double cell = 10.0 / 100.0;
  EXPECT_LE((coarse.xstar - fine.xstar).lpNorm<Eigen::Infinity>(), cell + 1e-12);
  EXPECT_LE(fine.objective_integral, coarse.objective_integral + 1e-12);
  EXPECT_TRUE(fine.feasible);
}

TEST(Oracle, SubgradientMatchesGrid) {
  auto p = fixtures::static_quadratic({v2(0.9, -0.2), v2(0.1, 0.6)}, 1.0, 1.0, 0.1);
  auto g = grid_oracle(p, 201);
  auto s = subgradient_oracle(p, 4000);
  EXPECT_EQ(s.method, "subgradient");
  EXPECT_LE((g.xstar - s.xstar).norm(), 1e-2);
  EXPECT_LE(std::abs(g.objective_integral - s.objective_integral),
            0.01 * std::abs(g.objective_integral));

  auto q = active_constraint();
  auto gq = grid_oracle(q, 201);
  auto sq = subgradient_oracle(q, 4000);
  EXPECT_LE((gq.xstar - sq.xstar).norm(), 1e-2);
  EXPECT_TRUE(sq.feasible);
}

TEST(Oracle, FeasibilityOnlyProblemReachesTheFeasibleSet) {
  // Zero cost, three half-planes around the witness (0.5, 0.5).
  auto env = std::make_shared<LambdaEnvironment>(
      1, 2, std::vector<std::size_t>{3},
      [](std::size_t, double, const Vec&) { return 0.0; },
      [](std::size_t, double, const Vec&) { return Vec::Zero(2).eval(); },
      [](std::size_t, double, const Vec& x) {
        Vec c(3);
        c << 0.2 - x[0], 0.2 - x[1], x[0] + x[1] - 1.5;
        return c;
      },
      [](std::size_t, double, const Vec&, std::size_t k) {
        return k == 0 ? v2(-1, 0) : k == 1 ? v2(0, -1) : v2(1, 1);
      });
  ProblemSpec p;
  p.env = env;
  p.action_set = ActionSet::symmetric_box(2, 2.0);
  p.horizon = 1.0;
  p.sample_step = 0.1;
  p.feasible_witness = v2(0.5, 0.5);
  auto r = subgradient_oracle(p, 500);
  EXPECT_LE(r.worst_violation, 1e-3);
}

TEST(Oracle, ZeroIterationsReturnsProjectedStart) {
  Vec lo = v2(0.5, -2), hi = v2(2, -1);
  auto p = fixtures::static_quadratic({v2(0, 0)}, 1.0, 1.0, 0.1);
  p.action_set = ActionSet::box(lo, hi);
  auto r = subgradient_oracle(p, 0);
  EXPECT_EQ(r.xstar, v2(0.5, -1));
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_NEAR(r.objective_integral, sampled_objective(p, r.xstar), 1e-15);
}

TEST(Oracle, RefinementDoesNotWorsenBeyondCellSlack) {
  auto p = fixtures::static_quadratic({v2(0.123, -0.456), v2(-0.3, 0.71)}, 1.0, 1.0, 0.1);
  p.constants.lipschitz_cost = 2.0 * (std::sqrt(2.0) + 1.0);
  for (std::size_t r : {11u, 21u, 41u}) {
    const double cell = std::sqrt(2.0) * 2.0 / static_cast<double>(r - 1);
    const double slack = p.constants.lipschitz_cost * cell * p.horizon;
    EXPECT_LE(grid_oracle(p, 2 * r).objective_integral,
              grid_oracle(p, r).objective_integral + slack);
  }
}

TEST(Oracle, RepeatedCallsAreIdentical) {
  auto p = logistic_2d(0.1);
  auto a = grid_oracle(p, 61), b = grid_oracle(p, 61);
  EXPECT_EQ(a.xstar, b.xstar);
  EXPECT_EQ(a.objective_integral, b.objective_integral);
  auto c = subgradient_oracle(p, 300), d = subgradient_oracle(p, 300);
  EXPECT_EQ(c.xstar, d.xstar);
  EXPECT_EQ(c.penalty_weight, d.penalty_weight);
}

TEST(Oracle, TiesGoToTheLexicographicallySmallestPoint) {
  auto p = fixtures::frozen(
      1, 2, 0, [](std::size_t, double, const Vec&) { return 1.0; },
      [](std::size_t, double, const Vec&) { return Vec(); }, 1.0, 1.0, 0.1);
  EXPECT_EQ(grid_oracle(p, 5).xstar, v2(-1, -1));
}

TEST(Oracle, Errors) {
  auto env = std::make_shared<LambdaEnvironment>(
      1, 1, std::vector<std::size_t>{1},
      [](std::size_t, double, const Vec&) { return 0.0; },
      [](std::size_t, double, const Vec&) { return v1(0.0); },
      [](std::size_t, double, const Vec& x) { return v1(2.0 - x[0]); },
      [](std::size_t, double, const Vec&, std::size_t) { return v1(-1.0); });
  ProblemSpec infeasible;
  infeasible.env = env;
  infeasible.action_set = ActionSet::symmetric_box(1, 1.0);
  infeasible.horizon = 1.0;
  infeasible.sample_step = 0.5;
  EXPECT_THROW(grid_oracle(infeasible, 11), NoFeasiblePoint);
  auto s = subgradient_oracle(infeasible, 50);
  EXPECT_FALSE(s.feasible);
  EXPECT_NEAR(s.worst_violation, 1.0, 1e-9);

  Vec four = Vec::Zero(4);
  EXPECT_THROW(grid_oracle(fixtures::static_quadratic({four}, 1.0, 1.0, 0.5), 3), InvalidArgument);
  auto ball = fixtures::static_quadratic({v2(0, 0)}, 1.0, 1.0, 0.5);
  ball.action_set = ActionSet::ball(v2(0, 0), 1.0);
  EXPECT_THROW(grid_oracle(ball, 11), InvalidArgument);
  EXPECT_NO_THROW(subgradient_oracle(ball, 10));
  EXPECT_THROW(grid_oracle(active_constraint(), 1), InvalidArgument);
}

TEST(Oracle, BuiltinScenariosYieldFeasibleBenchmarks) {
  QuadraticTrackingParams q;
  q.common.horizon = 5.0;
  q.common.step = 0.05;
  q.constraints_per_agent = 2;
  q.drift = 0.2;
  auto tr = make_scenario("quadratic_tracking", q, 3).problem;
  auto r = grid_oracle(tr, 81);
  EXPECT_LE(r.worst_violation, kOracleFeasibilityTol);

  LinearFeasibilityParams l;
  l.common.horizon = 5.0;
  l.common.step = 0.05;
  l.rotation_rate = 0.5;
  l.constraints_per_agent = 2;
  auto lf = make_scenario("linear_feasibility", l, 3).problem;
  EXPECT_LE(grid_oracle(lf, 81).worst_violation, kOracleFeasibilityTol);
  EXPECT_LE(subgradient_oracle(lf, 400).worst_violation, 1e-3);
}
