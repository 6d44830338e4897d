#include <gtest/gtest.h>

#include <map>
#include <set>

#include "causegen/corr2cause.hpp"

using namespace causegen;

TEST(Corr2Cause, HypothesisOrderAndCount) {
  const auto h = hypotheses_for(4);
  ASSERT_EQ(h.size(), 36U);
  EXPECT_EQ(h[0].rel, RelationKind::IsParent);
  EXPECT_EQ(h[0].i, 0);
  EXPECT_EQ(h[0].j, 1);
  EXPECT_EQ(h[5].i, 2);
  EXPECT_EQ(h[5].j, 3);
  EXPECT_EQ(h[6].rel, RelationKind::IsAncestor);
  for (const auto& x : h) EXPECT_LT(x.i, x.j);
}

TEST(Corr2Cause, JoinNames) {
  std::vector<std::string> two{"A", "B"};
  std::vector<std::string> three{"A", "B", "C"};
  EXPECT_EQ(join_names(two), "A and B");
  EXPECT_EQ(join_names(three), "A, B and C");
}

TEST(Corr2Cause, PremiseForCollider) {
  Dag g(3, {{0, 2}, {1, 2}});
  const auto names = default_names(3);
  EXPECT_EQ(verbalize_premise(independence_structure(g), names),
            "Suppose there is a closed system of 3 variables, A, B and C. All "
            "the statistical relations among these 3 variables are as "
            "follows: A is independent of B. A correlates with C. B "
            "correlates with C.");
}

TEST(Corr2Cause, PremiseForChainUsesWitness) {
  Dag g(3, {{0, 1}, {1, 2}});
  const auto text = verbalize_premise(independence_structure(g),
                                      default_names(3));
  EXPECT_NE(text.find("A is independent of C given B."), std::string::npos);
}

TEST(Corr2Cause, HypothesisTemplates) {
  const auto names = default_names(2);
  EXPECT_EQ(verbalize_hypothesis({RelationKind::IsParent, 0, 1}, names),
            "A directly causes B.");
  EXPECT_EQ(verbalize_hypothesis({RelationKind::IsDescendant, 0, 1}, names),
            "B is a cause for A, but not a direct one.");
  EXPECT_EQ(verbalize_hypothesis({RelationKind::HasConfounder, 0, 1,
                                  TemplateVariant::Paraphrased},
                                 names),
            "Some variable(s) cause(s) both A and B.");
  EXPECT_THROW(verbalize_hypothesis({RelationKind::IsParent, 0, 2}, names),
               std::out_of_range);
}

TEST(Corr2Cause, LabelsMatchBruteForceOverLabeledDags) {
  // Oracle: a hypothesis is valid iff it holds in every labeled DAG sharing
  // the premise's independence structure.
  const int n = 4;
  std::map<std::vector<std::uint64_t>, std::vector<Dag>> groups;
  for (const Dag& g : enumerate_labeled_dags(n)) {
    groups[independence_structure(g).encoding()].push_back(g);
  }
  for (const auto& [key, group] : groups) {
    const auto structure = independence_structure(group.front());
    for (const auto& h : hypotheses_for(n)) {
      int expected = 1;
      for (const Dag& g : group) {
        if (!relation_holds(g, h.rel, h.i, h.j)) expected = 0;
      }
      EXPECT_EQ(label_validity(structure, h.rel, h.i, h.j), expected);
    }
  }
}

TEST(Corr2Cause, SubsetSizesAndRates) {
  const std::vector<std::size_t> sizes{12, 90, 720};
  for (int n = 2; n <= 4; ++n) {
    const auto recs = build_subset(n, 1, SplitPolicy::Published);
    EXPECT_EQ(recs.size(), sizes[n - 2]);
  }
  const auto stats = dataset_stats(build_dataset(3, 1));
  EXPECT_DOUBLE_EQ(stats.by_n.at(2).positive_pct, 0.0);
  EXPECT_NEAR(stats.by_n.at(3).positive_pct, 3.33, 0.005);
  EXPECT_EQ(stats.by_n.at(2).test, 6U);
  EXPECT_EQ(stats.by_n.at(3).dev, 42U);
}

TEST(Corr2Cause, SplitQuotas) {
  EXPECT_EQ(split_quota(SplitPolicy::Published, 5, 8520),
            (std::pair<std::size_t, std::size_t>{514, 482}));
  EXPECT_EQ(split_quota(SplitPolicy::CapRule, 5, 8520),
            (std::pair<std::size_t, std::size_t>{852, 852}));
  EXPECT_EQ(split_quota(SplitPolicy::CapRule, 6, 198000),
            (std::pair<std::size_t, std::size_t>{1000, 1000}));
  EXPECT_EQ(split_quota(SplitPolicy::CapRule, 3, 90),
            (std::pair<std::size_t, std::size_t>{45, 45}));
  EXPECT_EQ(split_quota(SplitPolicy::Published, 2, 4),
            (std::pair<std::size_t, std::size_t>{4, 0}));
}

TEST(Corr2Cause, SplitsDeterministicPerSeed) {
  auto a = build_subset(4, 42, SplitPolicy::Published);
  auto b = build_subset(4, 42, SplitPolicy::Published);
  auto c = build_subset(4, 43, SplitPolicy::Published);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].split, b[k].split);
    differs = differs || a[k].split != c[k].split;
  }
  EXPECT_TRUE(differs);
}

TEST(Corr2Cause, RefactorIsInvolutionAndKeepsLabels) {
  for (const auto& r : build_subset(4, 3, SplitPolicy::Published)) {
    const auto once = perturb(r, PerturbMode::VariableRefactor);
    const auto twice = perturb(once, PerturbMode::VariableRefactor);
    EXPECT_EQ(once.label, r.label);
    EXPECT_NE(once.premise, r.premise);
    EXPECT_EQ(twice.premise, r.premise);
    EXPECT_EQ(twice.hypothesis, r.hypothesis);
    EXPECT_FALSE(twice.refactored);
  }
}

TEST(Corr2Cause, RefactorMapsLetters) {
  Corr2CauseRecord r;
  r.n = 2;
  r.premise = "A correlates with B.";
  r.hypothesis = "A directly causes B.";
  const auto out = perturb(r, PerturbMode::VariableRefactor);
  EXPECT_EQ(out.premise, "Z correlates with Y.");
  EXPECT_EQ(out.hypothesis, "Z directly causes Y.");
  r.hypothesis = "A directly causes Q.";
  EXPECT_THROW(perturb(r, PerturbMode::VariableRefactor),
               std::invalid_argument);
}

TEST(Corr2Cause, ParaphraseKeepsLabelAndComposesWithRefactor) {
  for (const auto& r : build_subset(3, 3, SplitPolicy::Published)) {
    const auto p = perturb(r, PerturbMode::Paraphrase);
    EXPECT_EQ(p.label, r.label);
    EXPECT_EQ(p.premise, r.premise);
    EXPECT_EQ(p.variant, TemplateVariant::Paraphrased);
    const auto pr = perturb(p, PerturbMode::VariableRefactor);
    const auto rp = perturb(perturb(r, PerturbMode::VariableRefactor),
                            PerturbMode::Paraphrase);
    EXPECT_EQ(pr.hypothesis, rp.hypothesis);
  }
}

TEST(Corr2Cause, Tokenize) {
  EXPECT_EQ(tokenize("A is independent of B, given C."),
            (std::vector<std::string>{"A", "is", "independent", "of", "B", ",",
                                      "given", "C", "."}));
}

TEST(Corr2Cause, TwoNodePremiseLength) {
  const auto stats = dataset_stats(build_subset(2, 0, SplitPolicy::Published));
  EXPECT_DOUBLE_EQ(stats.overall.tokens_per_premise, 31.5);
}
