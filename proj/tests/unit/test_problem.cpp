#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dosp/errors.hpp"
#include "dosp/feature_stream.hpp"
#include "dosp/problem.hpp"
#include "dosp/rng.hpp"
#include "dosp/scenarios.hpp"

using namespace dosp;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

ClassifierParams small_classifier(std::size_t agents, Eigen::Index dim) {
  ClassifierParams c;
  c.common.agents = agents;
  c.common.dim = dim;
  c.common.horizon = 4.0;
  c.common.step = 0.1;
  c.common.box_half_width = 10.0;
  c.holdout_size = 50;
  return c;
}

std::vector<Scenario> builtins() {
  std::vector<Scenario> out;
  QuadraticTrackingParams q;
  q.common.horizon = 5.0;
  q.common.step = 0.05;
  q.constraints_per_agent = 2;
  q.drift = 0.2;
  out.push_back(make_scenario("quadratic_tracking", q, 3));
  LinearFeasibilityParams l;
  l.common.horizon = 5.0;
  l.common.step = 0.05;
  l.rotation_rate = 0.7;
  l.constraints_per_agent = 2;
  out.push_back(make_scenario("linear_feasibility", l, 3));
  auto c = small_classifier(3, 4);
  out.push_back(make_scenario("sparse_classifier_synthetic", c, 3));
  c.regularized = true;
  out.push_back(make_scenario("sparse_classifier_synthetic", c, 3));
  return out;
}

Vec uniform_in(const ActionSet& X, Rng& rng) {
  Vec x(X.dim());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    x[k] = std::uniform_real_distribution<double>(X.lower()[k], X.upper()[k])(rng);
  }
  return x;
}

}  // namespace

TEST(ActionSet, ProjectionExamples) {
  auto ball = ActionSet::ball(Vec::Zero(2), 1.0);
  EXPECT_TRUE(ball.project(v2(2, 0)).isApprox(v2(1, 0)));
  auto box = ActionSet::symmetric_box(2, 1.0);
  EXPECT_EQ(box.project(v2(0.5, -3)), v2(0.5, -1));
  EXPECT_EQ(box.project(v2(0.2, 0.3)), v2(0.2, 0.3));
  EXPECT_EQ(ball.project(v2(0.2, 0.3)), v2(0.2, 0.3));
}

TEST(ActionSet, ProjectionIsIdempotentAndNearest) {
  Rng rng(11);
  std::normal_distribution<double> g(0.0, 3.0);
  auto box = ActionSet::box(v2(-1, 0), v2(2, 0.5));
  auto ball = ActionSet::ball(v2(1, -1), 1.5);
  for (int it = 0; it < 200; ++it) {
    Vec y = v2(g(rng), g(rng));
    for (const auto* X : {&box, &ball}) {
      Vec p = X->project(y);
      EXPECT_TRUE(X->contains(p, 1e-12));
      EXPECT_EQ(X->project(p), p);
      // No sampled member of the set is closer.
      for (int k = 0; k < 20; ++k) {
        Vec q = X->project(v2(g(rng), g(rng)));
        EXPECT_LE((y - p).norm(), (y - q).norm() + 1e-12);
      }
    }
  }
}

TEST(ActionSet, RejectsEmptySets) {
  EXPECT_THROW(ActionSet::box(v2(1, 0), v2(0, 1)), InvalidArgument);
  EXPECT_THROW(ActionSet::ball(Vec::Zero(2), 0.0), InvalidArgument);
}

TEST(Logistic, Examples) {
  const double ln2 = 0.693147180559945309417232121458;
  EXPECT_NEAR(logistic_loss(1.0, v2(1, 0), Vec::Zero(2)), ln2, 1e-15);
  EXPECT_NEAR(logistic_loss(-1.0, v2(1, 0), Vec::Zero(2)), ln2, 1e-15);
  // log(1 + e^-10), 30-digit reference.
  EXPECT_NEAR(logistic_loss(1.0, v2(1, 0), v2(10, 0)), 4.5398899216864646769487829402e-5,
              1e-19);
  EXPECT_DOUBLE_EQ(logistic_loss(1.0, v2(1, 0), v2(-1000, 0)), 1000.0);
  EXPECT_EQ(logistic_loss(1.0, v2(1, 0), v2(1000, 0)), 0.0);
  EXPECT_THROW(logistic_loss(1.0, v2(1, 0), Vec::Zero(3)), DimensionMismatch);
}

TEST(Logistic, GradientAtZeroMarginAndFiniteDifferences) {
  EXPECT_TRUE(logistic_loss_gradient(1.0, v2(1, 0), Vec::Zero(2)).isApprox(v2(-0.5, 0)));
  Rng rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int it = 0; it < 50; ++it) {
    Vec z = v2(g(rng), g(rng)), x = v2(g(rng), g(rng));
    const double y = it % 2 ? 1.0 : -1.0;
    Vec fd(2);
    for (int k = 0; k < 2; ++k) {
      Vec e = Vec::Zero(2);
      e[k] = 1e-6;
      fd[k] = (logistic_loss(y, z, x + e) - logistic_loss(y, z, x - e)) / 2e-6;
    }
    EXPECT_LE((fd - logistic_loss_gradient(y, z, x)).norm(), 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST(L1, SubgradientSignWithZeroAtKinks) {
  EXPECT_EQ(l1_subgradient(v2(2, -3)), v2(1, -1));
  EXPECT_EQ(l1_subgradient(v2(0, -3)), v2(0, -1));
}

TEST(Problem, CostExamples) {
  auto c = small_classifier(1, 2);
  auto s = make_scenario("sparse_classifier_synthetic", c, 1);
  EXPECT_DOUBLE_EQ(eval_cost(s.problem, 0, 0.0, v2(1, -2)), 3.0);
  EXPECT_DOUBLE_EQ(eval_cost(s.problem, 0, 0.0, Vec::Zero(2)), 0.0);
  EXPECT_EQ(cost_subgradient(s.problem, 0, 0.0, v2(2, -3)), v2(1, -1));

  auto c3 = small_classifier(4, 2);
  auto s3 = make_scenario("sparse_classifier_synthetic", c3, 1);
  EXPECT_EQ(cost_subgradient(s3.problem, 0, 0.0, v2(2, -3)), v2(0.25, -0.25));

  QuadraticTrackingParams q;
  q.common.agents = 1;
  q.center = 0.0;
  q.spread = 0.0;
  q.amplitude = 0.0;
  auto qs = make_scenario("quadratic_tracking", q, 1);
  EXPECT_DOUBLE_EQ(eval_cost(qs.problem, 0, 1.0, v2(2, 0)), 2.0);
}

TEST(Problem, ConstraintExamples) {
  auto s = make_scenario("sparse_classifier_synthetic", small_classifier(2, 3), 1);
  // ln 2 - 0.001, 30-digit reference.
  EXPECT_NEAR(eval_constraints(s.problem, 1, 0.3, Vec::Zero(3))[0],
              0.692147180559945309417232121458, 1e-15);

  LinearFeasibilityParams l;
  l.common.agents = 1;
  auto ls = make_scenario("linear_feasibility", l, 1);
  EXPECT_NEAR(eval_constraints(ls.problem, 0, 0.0, v2(1, 0.3))[0], 0.0, 1e-15);
}

TEST(Problem, EvaluatorPreconditions) {
  QuadraticTrackingParams q;
  q.common.horizon = 2.0;
  auto s = make_scenario("quadratic_tracking", q, 1);
  EXPECT_THROW(eval_cost(s.problem, 0, 2.5, Vec::Zero(2)), HorizonExceeded);
  EXPECT_THROW(eval_cost(s.problem, 0, -0.1, Vec::Zero(2)), HorizonExceeded);
  EXPECT_THROW(eval_cost(s.problem, 9, 0.0, Vec::Zero(2)), OutOfRange);
  EXPECT_THROW(eval_constraints(s.problem, 0, 0.0, Vec::Zero(3)), DimensionMismatch);
  EXPECT_THROW(constraint_subgradient(s.problem, 0, 0.0, Vec::Zero(2), 5), OutOfRange);
}

TEST(Problem, WitnessIsStrictlyFeasibleForBuiltins) {
  for (const auto& s : builtins()) {
    auto w = check_witness(s.problem);
    ASSERT_TRUE(w.present) << s.problem.name;
    if (s.problem.total_constraints() > 0) {
      EXPECT_TRUE(w.strictly_feasible) << s.problem.name;
    }
  }
}

TEST(Problem, ConvexityAndSubgradientInequalities) {
  Rng rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& s : builtins()) {
    const auto& p = s.problem;
    for (int it = 0; it < 100; ++it) {
      Vec x = uniform_in(p.action_set, rng), y = uniform_in(p.action_set, rng);
      const double th = u(rng);
      const double t = u(rng) * p.horizon;
      const Vec m = th * x + (1 - th) * y;
      for (std::size_t i = 0; i < p.agent_count(); ++i) {
        EXPECT_LE(eval_cost(p, i, t, m),
                  th * eval_cost(p, i, t, x) + (1 - th) * eval_cost(p, i, t, y) + 1e-9);
        EXPECT_GE(eval_cost(p, i, t, y),
                  eval_cost(p, i, t, x) + cost_subgradient(p, i, t, x).dot(y - x) - 1e-9);
        const std::size_t mi = p.constraint_count(i);
        for (std::size_t k = 0; k < mi; ++k) {
          const auto K = static_cast<Eigen::Index>(k);
          EXPECT_LE(eval_constraints(p, i, t, m)[K],
                    th * eval_constraints(p, i, t, x)[K] +
                        (1 - th) * eval_constraints(p, i, t, y)[K] + 1e-9);
          EXPECT_GE(eval_constraints(p, i, t, y)[K],
                    eval_constraints(p, i, t, x)[K] +
                        constraint_subgradient(p, i, t, x, k).dot(y - x) - 1e-9);
        }
      }
    }
  }
}

TEST(Problem, SubgradientsMatchFiniteDifferencesAtSmoothPoints) {
  Rng rng(8);
  for (const auto& s : builtins()) {
    const auto& p = s.problem;
    for (int it = 0; it < 30; ++it) {
      const Vec x = uniform_in(p.action_set, rng);
      const double t = 0.37 * p.horizon;
      for (std::size_t i = 0; i < p.agent_count(); ++i) {
        auto check = [&](auto f, const Vec& g) {
          Vec fd(x.size());
          for (Eigen::Index k = 0; k < x.size(); ++k) {
            Vec e = Vec::Zero(x.size());
            e[k] = 1e-6;
            fd[k] = (f(x + e) - f(x - e)) / 2e-6;
          }
          EXPECT_LE((fd - g).norm(), 1e-5 * std::max(1.0, g.norm())) << p.name;
        };
        check([&](const Vec& z) { return eval_cost(p, i, t, z); },
              cost_subgradient(p, i, t, x));
        for (std::size_t k = 0; k < p.constraint_count(i); ++k) {
          check([&](const Vec& z) { return eval_constraints(p, i, t, z)[static_cast<Eigen::Index>(k)]; },
                constraint_subgradient(p, i, t, x, k));
        }
      }
    }
  }
}

TEST(Problem, LipschitzAudit) {
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& s : builtins()) {
    const auto& p = s.problem;
    for (int it = 0; it < 200; ++it) {
      Vec x = uniform_in(p.action_set, rng), y = uniform_in(p.action_set, rng);
      const double d = (x - y).norm();
      const double t = u(rng) * p.horizon;
      for (std::size_t i = 0; i < p.agent_count(); ++i) {
        EXPECT_LE(std::abs(eval_cost(p, i, t, x) - eval_cost(p, i, t, y)),
                  p.constants.lipschitz_cost * d + 1e-9)
            << p.name;
        if (p.constraint_count(i) > 0) {
          EXPECT_LE((eval_constraints(p, i, t, x) - eval_constraints(p, i, t, y))
                        .cwiseAbs()
                        .maxCoeff(),
                    p.constants.lipschitz_constraint * d + 1e-9)
              << p.name;
        }
      }
    }
  }
}

TEST(Scenarios, ReferenceParameterSet) {
  ClassifierParams c;
  c.common.agents = 20;
  c.common.dim = 16;
  c.common.gamma = 10.0;
  c.common.horizon = 2.0;
  c.common.step = 0.02;
  c.common.box_half_width = 5.0;
  c.arena_half_width = 15.0;
  c.walk_period = 1.0;
  c.delta = 0.001;
  auto s = make_scenario("sparse_classifier_synthetic", c, 1);
  EXPECT_EQ(s.problem.agent_count(), 20u);
  EXPECT_EQ(s.problem.action_dim(), 16);
  EXPECT_EQ(s.problem.gamma, 10.0);
  EXPECT_EQ(s.problem.sample_step, 0.02);
  EXPECT_EQ(s.features->samples_per_agent(), 101u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(s.problem.constraint_count(i), 1u);
    for (std::size_t k = 0; k < 101; ++k) {
      const auto& smp = s.features->sample(i, k);
      auto [px, py] = s.positions[i][k];
      EXPECT_LE(std::abs(px), 15.0);
      EXPECT_LE(std::abs(py), 15.0);
      EXPECT_EQ(smp.y, terrain_label(px, py, 5.0, true));
    }
  }
  // Positions only change at multiples of the walk period.
  EXPECT_EQ(s.positions[0][10], s.positions[0][49]);
}

TEST(Scenarios, TerrainLabels) {
  EXPECT_EQ(terrain_label(0.0, 10.0, 5.0, true), -1.0);
  EXPECT_EQ(terrain_label(10.0, 2.0, 5.0, true), -1.0);
  EXPECT_EQ(terrain_label(10.0, 2.0, 5.0, false), 1.0);
  EXPECT_EQ(terrain_label(10.0, 10.0, 5.0, true), 1.0);
}

TEST(Scenarios, SingleAgentQuadraticHasNoProximityMultipliers) {
  QuadraticTrackingParams q;
  q.common.agents = 1;
  auto s = make_scenario("quadratic_tracking", q, 1);
  EXPECT_EQ(s.problem.agent_count(), 1u);
}

TEST(Scenarios, SameSeedSameStream) {
  auto a = make_scenario("sparse_classifier_synthetic", small_classifier(3, 4), 9);
  auto b = make_scenario("sparse_classifier_synthetic", small_classifier(3, 4), 9);
  std::ostringstream sa, sb;
  a.features->write_csv(sa);
  b.features->write_csv(sb);
  EXPECT_EQ(sa.str(), sb.str());
  auto c = make_scenario("sparse_classifier_synthetic", small_classifier(3, 4), 10);
  std::ostringstream sc;
  c.features->write_csv(sc);
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Scenarios, SubstreamsAreIndependent) {
  // Changing the holdout size leaves the training stream untouched.
  auto p = small_classifier(3, 4);
  auto a = make_scenario("sparse_classifier_synthetic", p, 9);
  p.holdout_size = 7;
  auto b = make_scenario("sparse_classifier_synthetic", p, 9);
  std::ostringstream sa, sb;
  a.features->write_csv(sa);
  b.features->write_csv(sb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(derive_seed(1, "walks"), derive_seed(1, "features"));
}

TEST(Scenarios, Errors) {
  EXPECT_THROW(make_scenario("nope", QuadraticTrackingParams{}, 1), ScenarioError);
  EXPECT_THROW(make_scenario("quadratic_tracking", LinearFeasibilityParams{}, 1),
               ScenarioError);
  QuadraticTrackingParams q;
  q.common.agents = 0;
  EXPECT_THROW(make_scenario("quadratic_tracking", q, 1), ScenarioError);
  ClassifierParams c;
  EXPECT_THROW(make_scenario("sparse_classifier_csv", c, 1), ScenarioError);
}

TEST(Scenarios, ClassificationErrorCountsZeroScores) {
  std::vector<LabeledSample> s{{v2(1, 0), 1.0}, {v2(-1, 0), -1.0}, {v2(0, 1), 1.0}};
  EXPECT_DOUBLE_EQ(classification_error(v2(1, 0), s), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(classification_error(v2(1, 1), s), 0.0);
}

TEST(FeatureCsv, RoundTrip) {
  auto s = make_scenario("sparse_classifier_synthetic", small_classifier(2, 3), 4);
  std::ostringstream os;
  s.features->write_csv(os);
  std::istringstream is(os.str());
  auto rows = read_feature_csv(is, "mem");
  auto back = stream_from_rows(rows, 2, 0.1, 4.0);
  ASSERT_EQ(back.samples_per_agent(), s.features->samples_per_agent());
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < back.samples_per_agent(); ++k) {
      EXPECT_EQ(back.sample(i, k).z, s.features->sample(i, k).z);
      EXPECT_EQ(back.sample(i, k).y, s.features->sample(i, k).y);
    }
  }
}

TEST(FeatureCsv, SampleAndHoldAndBom) {
  std::istringstream is("\xEF\xBB\xBFt,agent,label,z_0\n0,0,1,0.5\n0.25,0,-1,2\n");
  auto rows = read_feature_csv(is, "mem");
  auto st = stream_from_rows(rows, 1, 0.1, 0.5);
  EXPECT_EQ(st.sample(0, 2).z, v1(0.5));
  EXPECT_EQ(st.sample(0, 3).z, v1(2.0));
  EXPECT_EQ(st.sample(0, 3).y, -1.0);
  EXPECT_EQ(st.at(0, 0.29).y, 1.0);
  EXPECT_EQ(st.at(0, 0.31).y, -1.0);
}

TEST(FeatureCsv, SchemaErrorsNameTheLine) {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    std::istringstream is(text);
    try {
      read_feature_csv(is, "feat.csv");
      FAIL() << "no error for " << text;
    } catch (const CsvSchemaError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error("time,agent,label,z_0\n", "feat.csv:1");
  expect_error("t,agent,label,z_0\n0,0,2,1\n", "feat.csv:2");
  expect_error("t,agent,label,z_0\n0,0,1,abc\n", "feat.csv:2");
  expect_error("t,agent,label,z_0\n0,0,1,1\n0,0,1\n", "feat.csv:3");
  std::istringstream late("t,agent,label,z_0\n0.5,0,1,1\n");
  auto rows = read_feature_csv(late, "late");
  EXPECT_THROW(stream_from_rows(rows, 1, 0.1, 1.0), CsvSchemaError);
}
