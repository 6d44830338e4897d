#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "causegen/cbn.hpp"
#include "causegen/ci_engine.hpp"
#include "causegen/rng.hpp"

namespace causegen {

enum class Sense { Commonsense, AntiCommonsense, Nonsense };
std::string_view to_string(Sense sense);
Sense sense_from_string(std::string_view name);

/// Grammatical forms of one story variable. Index 0/1 is the variable's
/// value.
struct VariableForms {
  std::string role;
  std::string overall;
  std::array<std::string, 2> noun;
  std::array<std::string, 2> sent;
  std::array<std::string, 2> attr;
  std::array<std::string, 2> cond;
};

struct Story {
  std::string id;
  GraphId graph = GraphId::Chain;
  Sense sense = Sense::Commonsense;
  /// One entry per graph node, in node order.
  std::vector<VariableForms> variables;

  const VariableForms& var(int node) const { return variables.at(node); }
};

/// Commonsense stories plus the replacement attributes and invented words
/// used to derive the other two variants.
class StoryBank {
 public:
  /// Throws std::invalid_argument on malformed input: unknown graph, roles
  /// that do not match the graph's nodes, or a missing or empty form.
  static StoryBank parse(std::string_view json_text);
  /// The bank compiled in from data/story_bank.json.
  static const StoryBank& builtin();

  /// "name@version", recorded in output metadata.
  const std::string& id() const { return id_; }
  const std::vector<Story>& stories() const { return stories_; }
  std::vector<const Story*> stories_for(GraphId graph) const;
  const std::vector<VariableForms>& anti_outcomes() const { return anti_outcomes_; }
  const std::vector<VariableForms>& anti_treatments() const { return anti_treatments_; }
  /// Deduplicated, in listed order.
  const std::vector<std::string>& nonsense_words() const { return words_; }

 private:
  std::string id_;
  std::vector<Story> stories_;
  std::vector<VariableForms> anti_outcomes_;
  std::vector<VariableForms> anti_treatments_;
  std::vector<std::string> words_;
};

/// `base` with either its outcome replaced by an unrelated attribute or its
/// treatment replaced by a causally irrelevant one; all other variables are
/// kept verbatim.
Story anti_commonsense(const StoryBank& bank, const Story& base, Rng& rng);
/// Every variable named by a distinct invented word.
Story nonsense(const StoryBank& bank, GraphId graph, Rng& rng);

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every cpd entry is k/100 with k uniform in [5, 95]. The IV graph draws an
/// outcome additive in treatment and confounder and a treatment monotone in
/// the instrument, which the instrumental-variable estimand relies on.
BernoulliCbn sample_parameters(GraphId graph, Rng& rng);

inline constexpr int kMaxSampleAttempts = 1000;

/// Estimand, data and answer for a query on a concrete model.
struct Solution {
  Estimand estimand;
  /// Required terms with their values rounded to whole percents, in the
  /// order the estimand first uses them.
  DataTable data;
  /// Estimand evaluated on the exact model.
  double exact = 0.0;
  /// Estimand evaluated on the rounded data.
  double value = 0.0;
  Answer answer = Answer::No;
};

/// Throws DegenerateEstimand or AmbiguousAnswer when the model is unusable
/// for the query, including when rounding the data flips the answer.
Solution solve(const GraphSpec& graph, const Query& query, const BernoulliCbn& cbn);

/// Draws parameters until `query` has a clear answer that survives rounding
/// and, for rung-3 queries, does not depend on how the model is lifted to an
/// SCM. Attempt a uses seed derive_seed({seed, a}). Throws GenerationError
/// once `max_attempts` draws have been rejected.
BernoulliCbn sample_cbn(const GraphSpec& graph, const Query& query,
                        std::uint64_t seed, int max_attempts = kMaxSampleAttempts);

/// Graph, data and question sentences. Throws std::invalid_argument if the
/// story does not belong to the graph.
std::string verbalize_question(const GraphSpec& graph, const Story& story,
                               const DataTable& data, const Query& query);

/// "Step 1) ..." through "Step 6) ...", one step per paragraph.
std::string generate_explanation(const GraphSpec& graph, const Story& story,
                                 const Query& query, const Solution& solution);

struct CladderRecord {
  std::string question;
  Answer answer = Answer::No;
  std::string explanation;
  GraphId graph = GraphId::Chain;
  Query query;
  std::string story_id;
  Sense sense = Sense::Commonsense;
  std::vector<std::vector<double>> cpds;
  std::string estimand;
  double value = 0.0;
};

CladderRecord make_record(const GraphSpec& graph, const Query& query,
                          const Story& story, const BernoulliCbn& cbn);

/// Key order: question, answer, explanation, meta{graph, query, rung, story,
/// sense, cpds, estimand, value}.
nlohmann::ordered_json to_json(const CladderRecord& record);

struct CladderDataset {
  std::vector<CladderRecord> records;
  std::size_t requested = 0;
};

/// `size` rounded down to even. Rungs 1, 2 and 3 get 5/16, 5/16 and the rest;
/// within a rung records cycle over the covered (graph, query) cells and the
/// three story variants; exactly half the answers are yes. Deterministic in
/// (size, seed, bank).
CladderDataset assemble_dataset(std::size_t size, std::uint64_t seed,
                                const StoryBank& bank = StoryBank::builtin());

struct RoundTrip {
  bool ok = false;
  std::string detail;
};

/// Rebuilds the model from meta.cpds and checks the stored answer, estimand
/// and value against a fresh derivation.
RoundTrip check_record(const nlohmann::json& record);

}  // namespace causegen
