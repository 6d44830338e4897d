#include <gtest/gtest.h>

#include <cmath>

#include "causegen/ci_engine.hpp"
#include "support.hpp"

using namespace causegen;

namespace {

// Y additive in X and the hidden V1 so that the Wald ratio equals the ATE.
BernoulliCbn random_iv_cbn(Rng& rng) {
  const GraphSpec& g = graph_spec(GraphId::Iv);
  const double a = 0.1 + 0.2 * rng.uniform01();
  const double b = (rng.uniform01() - 0.5) * 0.3;
  const double c = (rng.uniform01() - 0.5) * 0.3;
  // Parents of X: V1 (bit 0), V2 (bit 1); monotone in V2.
  const double lo0 = 0.1 + 0.3 * rng.uniform01();
  const double lo1 = 0.1 + 0.3 * rng.uniform01();
  std::vector<std::vector<double>> cpds(4);
  cpds[g.node("V1")] = {0.2 + 0.6 * rng.uniform01()};
  cpds[g.node("V2")] = {0.2 + 0.6 * rng.uniform01()};
  cpds[g.node("X")] = {lo0, lo1, lo0 + 0.4, lo1 + 0.3};
  // Parents of Y: V1 (bit 0), X (bit 1).
  const double base = a + 0.3;
  cpds[g.node("Y")] = {base, base + c, base + b, base + b + c};
  return BernoulliCbn(g.dag, std::move(cpds));
}

BernoulliCbn random_model(Rng& rng, const GraphSpec& g) {
  if (g.id == GraphId::Iv) return random_iv_cbn(rng);
  return testsupport::random_cbn(rng, g.dag);
}

}  // namespace

TEST(GraphBank, TenGraphsWithRoles) {
  EXPECT_EQ(graph_bank().size(), 10U);
  double nodes = 0.0;
  double edges = 0.0;
  for (const GraphSpec& g : graph_bank()) {
    EXPECT_EQ(g.dag.name(g.x), "X");
    EXPECT_EQ(g.dag.name(g.y), "Y");
    EXPECT_EQ(graph_from_string(g.name), g.id);
    nodes += g.dag.size();
    edges += static_cast<double>(g.dag.edges().size());
  }
  EXPECT_DOUBLE_EQ(nodes / 10, 3.5);
  EXPECT_DOUBLE_EQ(edges / 10, 3.3);
}

TEST(Coverage, MatchesTable) {
  EXPECT_TRUE(covers(GraphId::Collision, QueryKind::ColliderBias));
  EXPECT_FALSE(covers(GraphId::Chain, QueryKind::ColliderBias));
  EXPECT_FALSE(covers(GraphId::Collision, QueryKind::Ate));
  EXPECT_FALSE(covers(GraphId::Iv, QueryKind::Att));
  EXPECT_TRUE(covers(GraphId::Iv, QueryKind::Nde));
  EXPECT_FALSE(covers(GraphId::Chain, QueryKind::Nde));
  EXPECT_TRUE(covers(GraphId::Chain, QueryKind::Nie));
  EXPECT_FALSE(covers(GraphId::Confounding, QueryKind::Nie));
  int nde = 0;
  int nie = 0;
  for (GraphId g : kAllGraphs) {
    nde += covers(g, QueryKind::Nde);
    nie += covers(g, QueryKind::Nie);
  }
  EXPECT_EQ(nde, 5);
  EXPECT_EQ(nie, 5);
  EXPECT_THROW(derive_estimand(graph_spec(GraphId::Collision), {QueryKind::Ate}),
               std::invalid_argument);
}

TEST(Backdoor, TextbookCases) {
  Dag confounding(3, {{0, 1}, {0, 2}, {1, 2}});  // Z, X, Y
  EXPECT_TRUE(check_backdoor_set(confounding, 1, 2, make_set({0})));
  EXPECT_FALSE(check_backdoor_set(confounding, 1, 2, 0));
  Dag mediation(3, {{0, 1}, {0, 2}, {1, 2}});  // X, M, Y
  EXPECT_TRUE(check_backdoor_set(mediation, 0, 2, 0));
  EXPECT_FALSE(check_backdoor_set(mediation, 0, 2, make_set({1})));
  Dag collision(3, {{0, 2}, {1, 2}});  // X, Y, Z
  EXPECT_TRUE(check_backdoor_set(collision, 0, 1, 0));
  EXPECT_THROW(check_backdoor_set(collision, 0, 0, 0), std::invalid_argument);
}

TEST(Backdoor, EachGraphHasExactlyOneValidPhrasing) {
  for (const GraphSpec& g : graph_bank()) {
    if (!covers(g.id, QueryKind::BackdoorAdjustmentSet)) continue;
    const bool pos = check_backdoor_set(g.dag, g.x, g.y, backdoor_candidate(g.id));
    const bool neg = check_backdoor_set(g.dag, g.x, g.y, 0);
    EXPECT_NE(pos, neg) << g.name;
  }
}

TEST(Estimand, ConfoundingAteIsBackdoorAdjustment) {
  const GraphSpec& g = graph_spec(GraphId::Confounding);
  const auto est = derive_estimand(g, {QueryKind::Ate});
  EXPECT_EQ(to_string(est, g.dag.names()),
            "\\sum_{v1} P(V1=v1) * [P(Y=1|V1=v1,X=1) - P(Y=1|V1=v1,X=0)]");
  std::vector<std::string> text;
  for (const auto& t : required_data(est)) text.push_back(to_string(t, g.dag.names()));
  EXPECT_EQ(text, (std::vector<std::string>{"P(V1=1)", "P(Y=1|V1=0,X=1)",
                                            "P(Y=1|V1=0,X=0)", "P(Y=1|V1=1,X=1)",
                                            "P(Y=1|V1=1,X=0)"}));
}

TEST(Estimand, UsesOnlyObservedTerms) {
  for (const GraphSpec& g : graph_bank()) {
    for (QueryKind k : kAllQueries) {
      if (!covers(g.id, k)) continue;
      for (const DataTerm& t : required_data(derive_estimand(g, {k}))) {
        EXPECT_FALSE(contains(g.unobserved, t.node)) << g.name;
        EXPECT_EQ(t.given.mask & g.unobserved, 0U) << g.name;
      }
    }
  }
}

TEST(Estimand, FrontdoorDataListsMediatorAndOutcomeTerms) {
  const GraphSpec& g = graph_spec(GraphId::Frontdoor);
  const auto data = required_data(derive_estimand(g, {QueryKind::Ate}));
  std::vector<std::string> text;
  for (const auto& t : data) text.push_back(to_string(t, g.dag.names()));
  EXPECT_EQ(text, (std::vector<std::string>{"P(V3=1|X=1)", "P(V3=1|X=0)",
                                            "P(X=1)", "P(Y=1|X=0,V3=0)",
                                            "P(Y=1|X=1,V3=0)",
                                            "P(Y=1|X=0,V3=1)",
                                            "P(Y=1|X=1,V3=1)"}));
}

TEST(Estimand, OracleEquivalenceOnAllCoveredPairs) {
  Rng rng(21);
  for (const GraphSpec& g : graph_bank()) {
    for (QueryKind k : kAllQueries) {
      if (!covers(g.id, k)) continue;
      for (int t = 0; t < 100; ++t) {
        const auto cbn = random_model(rng, g);
        for (Polarity pol : {Polarity::Positive, Polarity::Negative}) {
          const Query q{k, pol, static_cast<int>(t % 2)};
          const auto est = derive_estimand(g, q);
          EXPECT_NEAR(evaluate(est, cbn), direct_value(g, q, cbn), 1e-10)
              << g.name << " " << to_string(k);
        }
      }
    }
  }
}

TEST(Estimand, RequiredDataIsSufficient) {
  Rng rng(22);
  for (const GraphSpec& g : graph_bank()) {
    for (QueryKind k : kAllQueries) {
      if (!covers(g.id, k)) continue;
      const auto cbn = random_model(rng, g);
      const auto est = derive_estimand(g, {k});
      DataTable table;
      for (const DataTerm& t : required_data(est)) {
        table.set(t, cbn.query_prob({{t.node, 1}}, t.given));
      }
      EXPECT_DOUBLE_EQ(evaluate(est, table), evaluate(est, cbn));
    }
  }
}

TEST(Estimand, DeterministicChainAteIsOne) {
  const GraphSpec& g = graph_spec(GraphId::Chain);
  BernoulliCbn cbn(g.dag, {{0.5}, {0.0, 1.0}, {0.0, 1.0}});
  EXPECT_DOUBLE_EQ(evaluate(derive_estimand(g, {QueryKind::Ate}), cbn), 1.0);
}

TEST(Estimand, WaldDivisionByZeroSignalsResample) {
  const GraphSpec& g = graph_spec(GraphId::Iv);
  std::vector<std::vector<double>> cpds(4);
  cpds[g.node("V1")] = {0.5};
  cpds[g.node("V2")] = {0.5};
  cpds[g.node("X")] = {0.3, 0.6, 0.3, 0.6};  // ignores V2
  cpds[g.node("Y")] = {0.2, 0.4, 0.5, 0.7};
  BernoulliCbn cbn(g.dag, std::move(cpds));
  EXPECT_THROW(evaluate(derive_estimand(g, {QueryKind::Ate}), cbn),
               DegenerateEstimand);
}

TEST(Estimand, RenderNumericExpandsSums) {
  const GraphSpec& g = graph_spec(GraphId::Confounding);
  BernoulliCbn cbn(g.dag, {{0.3}, {0.2, 0.6}, {0.1, 0.5, 0.4, 0.9}});
  const auto text =
      render_numeric(derive_estimand(g, {QueryKind::Ate}),
                     [&](const DataTerm& t) {
                       return cbn.query_prob({{t.node, 1}}, t.given);
                     });
  EXPECT_EQ(text, "0.70 * [0.40 - 0.10] + 0.30 * [0.90 - 0.50]");
}

TEST(ColliderBias, AlwaysZeroAndNo) {
  Rng rng(23);
  const GraphSpec& g = graph_spec(GraphId::Collision);
  for (int t = 0; t < 50; ++t) {
    const auto cbn = testsupport::random_cbn(rng, g.dag);
    const Query q{QueryKind::ColliderBias, Polarity::Positive, t % 2};
    EXPECT_EQ(direct_value(g, q, cbn), 0.0);
    EXPECT_EQ(evaluate(derive_estimand(g, q), cbn), 0.0);
    EXPECT_EQ(answer(q, 0.0), Answer::No);
  }
}

TEST(ExplainingAway, OrAndAnd) {
  const GraphSpec& g = graph_spec(GraphId::Collision);
  // V3 parents: X (bit 0), Y (bit 1).
  BernoulliCbn or_net(g.dag, {{0.5}, {0.5}, {0.0, 1.0, 1.0, 1.0}});
  EXPECT_LT(explaining_away_delta(or_net, 1), 0.0);
  EXPECT_NEAR(explaining_away_delta(or_net, 1), 0.5 - 2.0 / 3.0, 1e-12);
  BernoulliCbn and_net(g.dag, {{0.5}, {0.5}, {0.0, 0.0, 0.0, 1.0}});
  EXPECT_NEAR(explaining_away_delta(and_net, 1), 0.0, 1e-12);
  BernoulliCbn flat(g.dag, {{0.5}, {0.5}, {0.3, 0.3, 0.7, 0.7}});
  EXPECT_NEAR(explaining_away_delta(flat, 1), 0.0, 1e-12);
  EXPECT_THROW(explaining_away_delta(BernoulliCbn(Dag(3), {{0.5}, {0.5}, {0.5}}), 1),
               std::invalid_argument);
}

TEST(Mediation, TelescopingIdentity) {
  Rng rng(24);
  const GraphSpec& g = graph_spec(GraphId::Mediation);
  for (int t = 0; t < 200; ++t) {
    const auto cbn = testsupport::random_cbn(rng, g.dag);
    const auto scm = ResponseFunctionScm::independent(cbn);
    const double ate = direct_value(g, {QueryKind::Ate}, cbn);
    EXPECT_NEAR(ate, nde(g, scm) + nie_treated(g, scm), 1e-12);
  }
}

TEST(Mediation, NdeEstimandText) {
  const GraphSpec& g = graph_spec(GraphId::Mediation);
  EXPECT_EQ(to_string(derive_estimand(g, {QueryKind::Nde}), g.dag.names()),
            "\\sum_{v2} P(V2=v2|X=0) * [P(Y=1|X=1,V2=v2) - P(Y=1|X=0,V2=v2)]");
}

TEST(Rung3, ValuesAreScmInvariantOnCoveredGraphs) {
  Rng rng(25);
  for (const GraphSpec& g : graph_bank()) {
    for (QueryKind k : {QueryKind::CounterfactualProb, QueryKind::Att,
                        QueryKind::Nde, QueryKind::Nie}) {
      if (!covers(g.id, k)) continue;
      const auto cbn = random_model(rng, g);
      EXPECT_TRUE(scm_invariant(cbn, [&](const ResponseFunctionScm& scm) {
        return direct_value(g, {k}, cbn, scm);
      })) << g.name << " " << to_string(k);
    }
  }
}

TEST(Answer, Polarity) {
  EXPECT_EQ(answer({QueryKind::Ate}, 0.13), Answer::Yes);
  EXPECT_EQ(answer({QueryKind::Ate, Polarity::Negative}, 0.13), Answer::No);
  EXPECT_EQ(answer({QueryKind::Ate, Polarity::Negative}, -0.13), Answer::Yes);
  EXPECT_EQ(answer({QueryKind::MarginalProb}, 0.7), Answer::Yes);
  EXPECT_EQ(answer({QueryKind::CounterfactualProb, Polarity::Negative}, 0.3),
            Answer::Yes);
  EXPECT_EQ(answer({QueryKind::BackdoorAdjustmentSet}, 1.0), Answer::Yes);
  EXPECT_THROW(answer({QueryKind::MarginalProb}, 0.5), AmbiguousAnswer);
  EXPECT_THROW(answer({QueryKind::Nie}, 0.004), AmbiguousAnswer);
  EXPECT_THROW(answer({QueryKind::Ate}, std::nan("")), std::invalid_argument);
}

TEST(Answer, InvariantToPositiveRescaling) {
  Rng rng(26);
  for (QueryKind k : {QueryKind::Ate, QueryKind::Att, QueryKind::Nde,
                      QueryKind::Nie, QueryKind::ConditionalProb}) {
    for (int t = 0; t < 50; ++t) {
      const double v = (rng.uniform01() - 0.5) * 0.8;
      if (std::abs(v) < 0.01) continue;
      EXPECT_EQ(answer({k}, v), answer({k}, v * 1.7));
    }
  }
}
