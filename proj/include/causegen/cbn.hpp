#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "causegen/dag.hpp"

namespace causegen {

/// Partial 0/1 assignment to nodes. `values` is always a subset of `mask`.
struct Assignment {
  NodeSet mask = 0;
  NodeSet values = 0;

  Assignment() = default;
  Assignment(std::initializer_list<std::pair<int, int>> entries);

  Assignment& set(int node, int value);
  bool has(int node) const { return contains(mask, node); }
  int get(int node) const;
  bool empty() const { return mask == 0; }

  /// True if the full world (bit i = value of node i) agrees on every
  /// assigned node.
  bool matches(NodeSet world) const { return (world & mask) == values; }

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Thrown when conditioning on an event of probability zero.
class UndefinedCondition : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Causal Bayesian network over binary variables.
///
/// cpds[i][r] = P(node i = 1 | parents in row r), where row index
/// r = sum_k value(parent_k) << k over parents in ascending index order.
class BernoulliCbn {
 public:
  BernoulliCbn() = default;
  BernoulliCbn(Dag dag, std::vector<std::vector<double>> cpds);

  const Dag& dag() const { return dag_; }
  int size() const { return dag_.size(); }
  const std::vector<std::vector<double>>& cpds() const { return cpds_; }
  const std::vector<double>& cpd(int node) const { return cpds_.at(node); }

  /// Row of `node`'s table selected by the parent values in `world`.
  int row(int node, NodeSet world) const;

  /// P(node = 1 | parents as in world).
  double p_one(int node, NodeSet world) const {
    return cpds_[node][row(node, world)];
  }

  /// Markov factorization for a full assignment (bit i = value of node i).
  double joint_prob(NodeSet world) const;
  double joint_prob(std::span<const int> values) const;

  /// P(target | given) by exhaustive enumeration. Throws
  /// std::invalid_argument if target and given overlap, UndefinedCondition
  /// if P(given) = 0.
  double query_prob(const Assignment& target,
                    const Assignment& given = {}) const;

  /// Mutilated network: intervened nodes lose their parents and become
  /// constants.
  BernoulliCbn intervene(const Assignment& do_assignment) const;

 private:
  Dag dag_;
  std::vector<std::vector<double>> cpds_;
  std::vector<std::vector<int>> parents_;
};

/// A deterministic map from parent values to the node value, stored as a
/// truth table over rows (same row indexing as the cpds), with its
/// probability.
struct ResponseFunction {
  std::uint32_t table = 0;
  double prob = 0.0;
};

class ResponseFunctionScm;

/// One unit of the population: a fixed response function per node.
class Unit {
 public:
  Unit(const ResponseFunctionScm& scm, std::vector<std::uint32_t> tables)
      : scm_(&scm), tables_(std::move(tables)) {}

  /// Full world under the given intervention (empty = factual world).
  NodeSet world(const Assignment& intervention = {}) const;

 private:
  const ResponseFunctionScm* scm_;
  std::vector<std::uint32_t> tables_;
};

/// Structural causal model whose exogenous noise selects one response
/// function per node, independently across nodes.
class ResponseFunctionScm {
 public:
  ResponseFunctionScm(Dag dag, std::vector<std::vector<ResponseFunction>> responses);

  /// One uniform threshold per node shared across parent rows: value is
  /// 1 iff u < p(row). Supported on at most 2^k + 1 functions.
  static ResponseFunctionScm comonotone(const BernoulliCbn& cbn);
  /// Rows draw independent Bernoullis. Requires at most 4 parents per node.
  static ResponseFunctionScm independent(const BernoulliCbn& cbn);

  const Dag& dag() const { return dag_; }
  const std::vector<ResponseFunction>& responses(int node) const {
    return responses_.at(node);
  }
  const std::vector<int>& parents(int node) const { return parents_[node]; }

  /// Cbn with P(node = 1 | row) = mass of response functions mapping row to 1.
  BernoulliCbn induced_cbn() const;

  /// Sum over units of P(unit) * f(unit).
  double expectation(const std::function<double(const Unit&)>& f) const;

 private:
  Dag dag_;
  std::vector<std::vector<ResponseFunction>> responses_;
  std::vector<std::vector<int>> parents_;
};

/// P(target holds in the world under do_x | evidence holds in the factual
/// world): abduction over units, action, prediction. Throws
/// UndefinedCondition when the evidence has probability zero.
double counterfactual_prob(const ResponseFunctionScm& scm,
                           const Assignment& do_x, const Assignment& target,
                           const Assignment& evidence);

/// Conditional expectation of f over units satisfying `condition`.
double counterfactual_expectation(
    const ResponseFunctionScm& scm, const std::function<double(const Unit&)>& f,
    const std::function<bool(const Unit&)>& condition);

/// Evaluates `query` on the comonotone and independent response-function
/// models of `cbn`; returns both values.
std::pair<double, double> scm_pair_values(
    const BernoulliCbn& cbn,
    const std::function<double(const ResponseFunctionScm&)>& query);

/// True when the two parameterizations agree within `tol`.
bool scm_invariant(const BernoulliCbn& cbn,
                   const std::function<double(const ResponseFunctionScm&)>& query,
                   double tol = 1e-9);

}  // namespace causegen
