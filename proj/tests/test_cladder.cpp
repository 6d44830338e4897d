#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "causegen/cladder.hpp"

using namespace causegen;

namespace {

const Story& first_story(GraphId graph) {
  return *StoryBank::builtin().stories_for(graph).front();
}

bool same_forms(const VariableForms& a, const VariableForms& b) {
  return a.role == b.role && a.overall == b.overall && a.noun == b.noun &&
         a.sent == b.sent && a.attr == b.attr && a.cond == b.cond;
}

// Text between `open` and the next `close`, starting the search at `from`.
std::string between(const std::string& text, const std::string& open,
                    const std::string& close, std::size_t from = 0) {
  const std::size_t a = text.find(open, from);
  if (a == std::string::npos) return {};
  const std::size_t b = text.find(close, a + open.size());
  return text.substr(a + open.size(), b - a - open.size());
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    out.push_back(s.substr(start, at - start));
    if (at == std::string::npos) break;
    start = at + sep.size();
  }
  return out;
}

}  // namespace

TEST(StoryBank, BuiltinCoversEveryGraph) {
  const StoryBank& bank = StoryBank::builtin();
  EXPECT_EQ(bank.id(), "default@1");
  for (GraphId g : kAllGraphs) {
    EXPECT_GE(bank.stories_for(g).size(), 2U) << to_string(g);
  }
  EXPECT_EQ(bank.anti_outcomes().size(), 10U);
  EXPECT_EQ(bank.anti_treatments().size(), 13U);
}

TEST(StoryBank, NonsenseWordsAreDeduplicated) {
  const auto& words = StoryBank::builtin().nonsense_words();
  EXPECT_EQ(words.size(), 99U);
  EXPECT_EQ(std::set<std::string>(words.begin(), words.end()).size(), words.size());
  EXPECT_NE(std::find(words.begin(), words.end(), "zory"), words.end());
  EXPECT_NE(std::find(words.begin(), words.end(), "qixy"), words.end());
}

TEST(StoryBank, RejectsMalformedInput) {
  const std::string forms =
      R"("noun": ["a", "b"], "sent": ["a", "b"], "attr": ["a", "b"], "cond": ["a", "b"])";
  auto bank_with = [&](const std::string& variables) {
    return R"({"name": "t", "version": 1, "stories": [{"id": "s", "graph": "chain", "variables": [)" +
           variables +
           R"(]}], "anti_outcomes": [], "anti_treatments": [], "nonsense_words": ["a", "b", "c", "d"]})";
  };
  auto var = [&](const std::string& role) {
    return R"({"role": ")" + role + R"(", "overall": "o", )" + forms + "}";
  };
  EXPECT_NO_THROW(StoryBank::parse(bank_with(var("X") + "," + var("V2") + "," + var("Y"))));
  EXPECT_THROW(StoryBank::parse(bank_with(var("X") + "," + var("V9") + "," + var("Y"))),
               std::invalid_argument);
  EXPECT_THROW(StoryBank::parse(bank_with(var("X") + "," + var("Y"))), std::invalid_argument);
  EXPECT_THROW(StoryBank::parse(bank_with(R"({"role": "X", "overall": "o"})")),
               std::invalid_argument);
  EXPECT_THROW(StoryBank::parse("{"), std::invalid_argument);
}

TEST(Stories, AntiCommonsenseChangesExactlyOneOfTreatmentOrOutcome) {
  const StoryBank& bank = StoryBank::builtin();
  Rng rng(3);
  int outcome_swaps = 0;
  for (const Story& base : bank.stories()) {
    for (int t = 0; t < 10; ++t) {
      const Story anti = anti_commonsense(bank, base, rng);
      const GraphSpec& g = graph_spec(base.graph);
      EXPECT_EQ(anti.sense, Sense::AntiCommonsense);
      std::vector<int> changed;
      for (int v = 0; v < g.dag.size(); ++v) {
        if (!same_forms(anti.var(v), base.var(v))) changed.push_back(v);
      }
      ASSERT_EQ(changed.size(), 1U) << anti.id;
      const int v = changed[0];
      ASSERT_TRUE(v == g.x || v == g.y);
      const auto& pool = v == g.y ? bank.anti_outcomes() : bank.anti_treatments();
      EXPECT_TRUE(std::any_of(pool.begin(), pool.end(), [&](const VariableForms& f) {
        return same_forms(f, anti.var(v));
      }));
      outcome_swaps += v == g.y;
    }
  }
  EXPECT_GT(outcome_swaps, 0);
  EXPECT_LT(outcome_swaps, static_cast<int>(bank.stories().size()) * 10);
}

TEST(Stories, NonsenseNamesComeFromTheWordList) {
  const StoryBank& bank = StoryBank::builtin();
  const auto& words = bank.nonsense_words();
  Rng rng(4);
  for (GraphId gid : kAllGraphs) {
    const Story s = nonsense(bank, gid, rng);
    std::set<std::string> seen;
    for (const VariableForms& v : s.variables) {
      EXPECT_NE(std::find(words.begin(), words.end(), v.overall), words.end());
      seen.insert(v.overall);
    }
    EXPECT_EQ(seen.size(), s.variables.size());
  }
}

TEST(Sampling, EntriesAreWholePercentsInRange) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    for (GraphId gid : kAllGraphs) {
      const BernoulliCbn cbn = sample_parameters(gid, rng);
      for (const auto& rows : cbn.cpds()) {
        for (double p : rows) {
          EXPECT_GE(p, 0.05);
          EXPECT_LE(p, 0.95);
          EXPECT_EQ(std::round(p * 100) / 100, p);
        }
      }
    }
  }
}

TEST(Sampling, IvOutcomeIsAdditiveAndTreatmentMonotone) {
  const GraphSpec& g = graph_spec(GraphId::Iv);
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    const BernoulliCbn cbn = sample_parameters(GraphId::Iv, rng);
    const auto& y = cbn.cpd(g.y);
    EXPECT_NEAR(y[3] - y[2], y[1] - y[0], 1e-12);
    const auto& x = cbn.cpd(g.x);
    EXPECT_GT(x[2], x[0]);
    EXPECT_GT(x[3], x[1]);
  }
}

TEST(Sampling, AcceptedAteClearsTheGate) {
  for (GraphId gid : kAllGraphs) {
    if (!covers(gid, QueryKind::Ate)) continue;
    const GraphSpec& g = graph_spec(gid);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const BernoulliCbn cbn = sample_cbn(g, {QueryKind::Ate}, seed);
      // Truncated factorization, independent of the estimand.
      const double ate = cbn.intervene({{g.x, 1}}).query_prob({{g.y, 1}}) -
                         cbn.intervene({{g.x, 0}}).query_prob({{g.y, 1}});
      EXPECT_GE(std::abs(ate), kAmbiguityEpsilon) << g.name;
    }
  }
}

TEST(Sampling, AcceptedRungThreeModelsAreScmInvariant) {
  for (QueryKind k : kAllQueries) {
    if (rung(k) != 3) continue;
    for (GraphId gid : kAllGraphs) {
      if (!covers(gid, k)) continue;
      const GraphSpec& g = graph_spec(gid);
      const Query q{k};
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const BernoulliCbn cbn = sample_cbn(g, q, seed);
        const double a = direct_value(g, q, cbn, ResponseFunctionScm::comonotone(cbn));
        const double b = direct_value(g, q, cbn, ResponseFunctionScm::independent(cbn));
        EXPECT_NEAR(a, b, 1e-9) << g.name << " " << to_string(k);
      }
    }
  }
}

TEST(Sampling, BudgetExhaustionIsAGenerationError) {
  EXPECT_THROW(sample_cbn(graph_spec(GraphId::Chain), {QueryKind::Ate}, 1, 0),
               GenerationError);
}

TEST(Solve, RoundedDataAgreesWithExactAnswer) {
  for (GraphId gid : kAllGraphs) {
    const GraphSpec& g = graph_spec(gid);
    for (QueryKind k : kAllQueries) {
      if (!covers(gid, k)) continue;
      const Query q{k};
      const BernoulliCbn cbn = sample_cbn(g, q, 11);
      const Solution s = solve(g, q, cbn);
      EXPECT_EQ(answer(q, s.value), s.answer);
      EXPECT_EQ(answer(q, s.exact), s.answer);
      for (const auto& [term, p] : s.data.entries()) {
        EXPECT_EQ(std::round(p * 100) / 100, p);
      }
    }
  }
}

TEST(Verbalize, ConfoundingDrugStory) {
  const GraphSpec& g = graph_spec(GraphId::Confounding);
  const Story& story = first_story(GraphId::Confounding);
  DataTable data;
  data.set({g.y, {}}, 0.60);
  data.set({g.y, {{g.node("V1"), 1}}}, 0.70);
  const std::string text = verbalize_question(g, story, data, {QueryKind::Ate});
  EXPECT_NE(text.find("Gender has a direct effect on drug taking and recovery."),
            std::string::npos)
      << text;
  EXPECT_NE(text.find("Drug taking has a direct effect on recovery."), std::string::npos);
  EXPECT_NE(text.find("The overall probability of recovery is 60%."), std::string::npos);
  EXPECT_NE(text.find("For patients who are male, the probability of recovery is 70%."),
            std::string::npos);
  EXPECT_NE(text.find("Will taking the drug increase the chance of recovery?"),
            std::string::npos);
  const std::string neg =
      verbalize_question(g, story, data, {QueryKind::Ate, Polarity::Negative});
  EXPECT_NE(neg.find("Will taking the drug decrease the chance of recovery?"),
            std::string::npos);
}

TEST(Verbalize, AdjustmentSetQuestion) {
  const GraphSpec& g = graph_spec(GraphId::Confounding);
  const std::string text =
      verbalize_question(g, first_story(GraphId::Confounding), DataTable{},
                         {QueryKind::BackdoorAdjustmentSet});
  EXPECT_NE(text.find("should we look directly at how drug taking correlates with recovery"),
            std::string::npos)
      << text;
  EXPECT_NE(text.find("case by case according to gender"), std::string::npos);
}

TEST(Verbalize, UnobservedNodesAreAnnounced) {
  const GraphSpec& g = graph_spec(GraphId::Frontdoor);
  const std::string text =
      verbalize_question(g, first_story(GraphId::Frontdoor), DataTable{}, {QueryKind::Ate});
  EXPECT_NE(text.find("Gene is unobserved."), std::string::npos) << text;
}

TEST(Verbalize, RejectsStoryFromAnotherGraph) {
  EXPECT_THROW(verbalize_question(graph_spec(GraphId::Chain), first_story(GraphId::Diamond),
                                  DataTable{}, {QueryKind::Ate}),
               std::invalid_argument);
}

TEST(Explanation, SixStepsInOrder) {
  const GraphSpec& g = graph_spec(GraphId::Confounding);
  const Query q{QueryKind::Ate};
  const BernoulliCbn cbn = sample_cbn(g, q, 2);
  const Solution s = solve(g, q, cbn);
  const std::string e = generate_explanation(g, first_story(GraphId::Confounding), q, s);
  EXPECT_EQ(e.rfind("Step 1) Extract the causal graph: The causal graph expressed in the "
                    "context is",
                    0),
            0U);
  std::size_t at = 0;
  for (int step = 1; step <= 6; ++step) {
    const std::size_t next = e.find("Step " + std::to_string(step) + ")", at);
    ASSERT_NE(next, std::string::npos) << step;
    at = next;
  }
  EXPECT_NE(e.find("\"V1->X,V1->Y,X->Y\""), std::string::npos);
  EXPECT_NE(e.find("\"average treatment effect\""), std::string::npos);
  EXPECT_NE(e.find("E[Y|do(X=1)]-E[Y|do(X=0)]"), std::string::npos);
}

TEST(Assemble, BalancedAndDeterministic) {
  const auto a = assemble_dataset(640, 9);
  const auto b = assemble_dataset(640, 9);
  ASSERT_EQ(a.records.size(), 640U);
  std::map<int, int> rungs;
  std::map<Sense, int> senses;
  int yes = 0;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& r = a.records[i];
    EXPECT_EQ(to_json(r).dump(), to_json(b.records[i]).dump());
    ++rungs[rung(r.query.kind)];
    ++senses[r.sense];
    yes += r.answer == Answer::Yes;
    if (r.query.kind == QueryKind::ColliderBias) {
      EXPECT_EQ(r.answer, Answer::No);
    }
  }
  EXPECT_EQ(yes, 320);
  EXPECT_EQ(rungs[1], 200);
  EXPECT_EQ(rungs[2], 200);
  EXPECT_EQ(rungs[3], 240);
  EXPECT_EQ(senses.size(), 3U);
  EXPECT_NE(to_json(assemble_dataset(640, 10).records[0]).dump(),
            to_json(a.records[0]).dump());
}

TEST(Assemble, OddSizeRoundsDown) {
  const auto d = assemble_dataset(33, 1);
  EXPECT_EQ(d.requested, 33U);
  EXPECT_EQ(d.records.size(), 32U);
  EXPECT_THROW(assemble_dataset(1, 1), std::invalid_argument);
}

TEST(Assemble, RecordsRoundTripAndExplanationsAreConsistent) {
  const auto d = assemble_dataset(400, 21);
  for (const auto& r : d.records) {
    const nlohmann::json j = nlohmann::json::parse(to_json(r).dump());
    const RoundTrip rt = check_record(j);
    EXPECT_TRUE(rt.ok) << rt.detail;

    const GraphSpec& g = graph_spec(r.graph);
    const Estimand est = derive_estimand(g, r.query);
    std::vector<std::string> expected;
    for (const DataTerm& t : required_data(est)) {
      expected.push_back(to_string(t, g.dag.names()));
    }
    const std::string step4 =
        between(r.explanation, "The available data are: \"", "\"");
    std::vector<std::string> listed;
    for (const std::string& item : split(step4, "; ")) {
      const std::size_t eq = item.rfind('=');
      listed.push_back(item.substr(0, eq));
    }
    EXPECT_EQ(listed, expected) << r.explanation;
    EXPECT_NE(r.explanation.find("estimand \"" + r.estimand + "\""), std::string::npos);
    const std::string shown = between(r.explanation, "≈ ", "\n");
    EXPECT_NEAR(std::stod(shown), r.value, 5e-5);
    EXPECT_NE(r.explanation.find("the overall answer to the question is " +
                                 std::string(to_string(r.answer)) + "."),
              std::string::npos);
  }
}

TEST(Assemble, RoundTripDetectsTampering) {
  const auto d = assemble_dataset(20, 2);
  for (const auto& r : d.records) {
    nlohmann::json j = nlohmann::json::parse(to_json(r).dump());
    j["answer"] = r.answer == Answer::Yes ? "no" : "yes";
    EXPECT_FALSE(check_record(j).ok);
    if (r.query.kind == QueryKind::BackdoorAdjustmentSet ||
        r.query.kind == QueryKind::ColliderBias) {
      continue;
    }
    nlohmann::json v = nlohmann::json::parse(to_json(r).dump());
    v["meta"]["value"] = r.value + 0.01;
    EXPECT_FALSE(check_record(v).ok);
  }
}
