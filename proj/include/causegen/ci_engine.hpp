#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "causegen/cbn.hpp"
#include "causegen/dag.hpp"

namespace causegen {

enum class GraphId {
  Chain,
  Fork,
  Collision,
  Confounding,
  Mediation,
  Diamond,
  DiamondCut,
  Iv,
  Arrowhead,
  Frontdoor,
};

inline constexpr GraphId kAllGraphs[] = {
    GraphId::Chain,     GraphId::Fork,       GraphId::Collision,
    GraphId::Confounding, GraphId::Mediation, GraphId::Diamond,
    GraphId::DiamondCut, GraphId::Iv,        GraphId::Arrowhead,
    GraphId::Frontdoor};

/// A causal graph with a designated treatment X and outcome Y. Node names
/// are the roles ("X", "Y", "V1", ...).
struct GraphSpec {
  GraphId id;
  std::string name;
  Dag dag;
  int x;
  int y;
  NodeSet unobserved = 0;

  /// Index of the node named `role`; throws std::out_of_range if absent.
  int node(std::string_view role) const;
  /// Nodes on directed paths from X to Y, excluding both.
  NodeSet mediators() const;
};

const std::vector<GraphSpec>& graph_bank();
const GraphSpec& graph_spec(GraphId id);
std::string_view to_string(GraphId id);
GraphId graph_from_string(std::string_view name);

enum class QueryKind {
  MarginalProb,
  ConditionalProb,
  ExplainingAway,
  BackdoorAdjustmentSet,
  Ate,
  ColliderBias,
  CounterfactualProb,
  Att,
  Nde,
  Nie,
};

inline constexpr QueryKind kAllQueries[] = {
    QueryKind::MarginalProb, QueryKind::ConditionalProb,
    QueryKind::ExplainingAway, QueryKind::BackdoorAdjustmentSet,
    QueryKind::Ate,          QueryKind::ColliderBias,
    QueryKind::CounterfactualProb, QueryKind::Att,
    QueryKind::Nde,          QueryKind::Nie};

std::string_view to_string(QueryKind kind);
QueryKind query_from_string(std::string_view name);
/// Human-readable query type, as named in explanations.
std::string_view display_name(QueryKind kind);
int rung(QueryKind kind);

/// Which way the question is phrased. Positive: "increase", "greater than
/// chance", outcome Y=1, or (backdoor) asking about the candidate set.
/// Negative: the complementary phrasing.
enum class Polarity { Positive, Negative };
std::string_view to_string(Polarity polarity);
Polarity polarity_from_string(std::string_view name);

struct Query {
  QueryKind kind = QueryKind::Ate;
  Polarity polarity = Polarity::Positive;
  /// Value of the conditioned collider (ExplainingAway, ColliderBias).
  int given_value = 1;

  friend bool operator==(const Query&, const Query&) = default;
};

/// Whether (graph, kind) is in the coverage table.
bool covers(GraphId graph, QueryKind kind);

/// Candidate adjustment set asked about in backdoor questions.
NodeSet backdoor_candidate(GraphId graph);

/// Set asked about by a backdoor query: the candidate when Positive, the
/// empty set when Negative.
NodeSet asked_set(GraphId graph, const Query& query);

/// No member of z descends from x, and z d-separates x and y once x's
/// outgoing edges are removed. Throws std::invalid_argument if x == y or z
/// contains x or y.
bool check_backdoor_set(const Dag& dag, int x, int y, NodeSet z);

/// Operand of a probability term: node = value, where value is either a
/// literal or the current value of a summation variable.
struct Slot {
  int node = -1;
  int value = 0;
  int bound = -1;
};

/// Expression over observational probability terms.
class Estimand {
 public:
  enum class Op { Const, Term, Add, Sub, Mul, Div, Sum };

  static Estimand constant(double v);
  static Estimand term(Slot target, std::vector<Slot> given = {});
  static Estimand add(Estimand a, Estimand b);
  static Estimand sub(Estimand a, Estimand b);
  static Estimand mul(Estimand a, Estimand b);
  static Estimand div(Estimand a, Estimand b);
  /// Sum over values 0 and 1 of bound variable `bound`, which ranges over
  /// node `node`.
  static Estimand sum(int bound, int node, Estimand body);

  Op op() const { return op_; }
  double value() const { return value_; }
  const Slot& target() const { return target_; }
  const std::vector<Slot>& given() const { return given_; }
  const std::vector<Estimand>& args() const { return args_; }
  int bound() const { return bound_; }
  int sum_node() const { return sum_node_; }

 private:
  Op op_ = Op::Const;
  double value_ = 0.0;
  Slot target_;
  std::vector<Slot> given_;
  std::vector<Estimand> args_;
  int bound_ = -1;
  int sum_node_ = -1;
};

/// A leaf the estimand needs: P(node = 1 | given).
struct DataTerm {
  int node = -1;
  Assignment given;

  friend bool operator==(const DataTerm&, const DataTerm&) = default;
};

/// "P(Y=1|X=1,V2=0)" using the given node names.
std::string to_string(const DataTerm& term, std::span<const std::string> names);

/// Supplies P(node = 1 | given).
using TermSource = std::function<double(const DataTerm&)>;

/// Thrown when an estimand divides by zero; the caller should resample.
class DegenerateEstimand : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown by `answer` when the value is within epsilon of the decision
/// boundary.
class AmbiguousAnswer : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kAmbiguityEpsilon = 0.005;

Estimand derive_estimand(const GraphSpec& graph, const Query& query);

/// Leaf terms, expanded over summation variables, normalized to "= 1"
/// targets, deduplicated in first-appearance order.
std::vector<DataTerm> required_data(const Estimand& est);

double evaluate(const Estimand& est, const TermSource& source);
double evaluate(const Estimand& est, const BernoulliCbn& cbn);

/// Data table keyed by term; lookups of missing terms throw
/// std::out_of_range.
class DataTable {
 public:
  void set(const DataTerm& term, double p);
  double get(const DataTerm& term) const;
  const std::vector<std::pair<DataTerm, double>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<DataTerm, double>> entries_;
};

double evaluate(const Estimand& est, const DataTable& data);

/// Symbolic form, e.g. "P(Y=1|X=1) - P(Y=1|X=0)".
std::string to_string(const Estimand& est, std::span<const std::string> names);
/// Same expression with every leaf replaced by its value from `source` and
/// summations expanded.
std::string render_numeric(const Estimand& est, const TermSource& source);

/// Formal expression of the query, e.g. "E[Y|do(X=1)]-E[Y|do(X=0)]".
std::string symbolic_expression(const GraphSpec& graph, const Query& query);

/// Quantity the query asks about, computed directly from the model by
/// conditioning, intervention or counterfactual enumeration (using `scm`
/// for rung-3 queries). Matches evaluate(derive_estimand(...)) on covered
/// pairs.
double direct_value(const GraphSpec& graph, const Query& query,
                    const BernoulliCbn& cbn, const ResponseFunctionScm& scm);
double direct_value(const GraphSpec& graph, const Query& query,
                    const BernoulliCbn& cbn);

/// Natural direct effect E[Y_{1,M_0}] - E[Y_{0,M_0}].
double nde(const GraphSpec& graph, const ResponseFunctionScm& scm);
/// Natural indirect effect at baseline 0: E[Y_{0,M_1}] - E[Y_{0,M_0}].
double nie(const GraphSpec& graph, const ResponseFunctionScm& scm);
/// Indirect effect at baseline 1: E[Y_{1,M_1}] - E[Y_{1,M_0}].
double nie_treated(const GraphSpec& graph, const ResponseFunctionScm& scm);

enum class Answer { No, Yes };
std::string_view to_string(Answer a);

/// Yes/No for a query given its value. Throws AmbiguousAnswer when the value
/// is within kAmbiguityEpsilon of the boundary (0, or 0.5 for marginal and
/// counterfactual probabilities); ColliderBias is always No.
Answer answer(const Query& query, double value);

/// P(Y=1 | X=1, V3=z) - P(Y=1 | V3=z) on the Collision graph.
double explaining_away_delta(const BernoulliCbn& cbn, int z);

}  // namespace causegen
