#include "causegen/cbn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace causegen {

namespace {

void check_node(int n, int node) {
  if (node < 0 || node >= n) {
    throw std::out_of_range("node " + std::to_string(node) + " out of range");
  }
}

void check_assignment(int n, const Assignment& a) {
  if (n < kMaxNodes && (a.mask >> n) != 0) {
    throw std::out_of_range("assignment references nodes outside the graph");
  }
}

int row_of(const std::vector<int>& parents, NodeSet world) {
  int r = 0;
  for (std::size_t k = 0; k < parents.size(); ++k) {
    if (contains(world, parents[k])) r |= 1 << k;
  }
  return r;
}

std::vector<std::vector<int>> parent_lists(const Dag& dag) {
  std::vector<std::vector<int>> out;
  out.reserve(dag.size());
  for (int i = 0; i < dag.size(); ++i) out.push_back(dag.parent_list(i));
  return out;
}

}  // namespace

Assignment::Assignment(std::initializer_list<std::pair<int, int>> entries) {
  for (const auto& [node, value] : entries) set(node, value);
}

Assignment& Assignment::set(int node, int value) {
  if (node < 0 || node >= kMaxNodes) {
    throw std::out_of_range("assignment node out of range");
  }
  if (value != 0 && value != 1) {
    throw std::invalid_argument("assignment values must be 0 or 1");
  }
  mask |= singleton(node);
  if (value == 1) {
    values |= singleton(node);
  } else {
    values &= ~singleton(node);
  }
  return *this;
}

int Assignment::get(int node) const {
  if (!has(node)) throw std::out_of_range("node not assigned");
  return contains(values, node) ? 1 : 0;
}

BernoulliCbn::BernoulliCbn(Dag dag, std::vector<std::vector<double>> cpds)
    : dag_(std::move(dag)), cpds_(std::move(cpds)), parents_(parent_lists(dag_)) {
  if (static_cast<int>(cpds_.size()) != dag_.size()) {
    throw std::invalid_argument("BernoulliCbn: one cpd table per node required");
  }
  for (int i = 0; i < dag_.size(); ++i) {
    const std::size_t rows = std::size_t{1} << parents_[i].size();
    if (cpds_[i].size() != rows) {
      throw std::invalid_argument("BernoulliCbn: node " + dag_.name(i) +
                                  " needs " + std::to_string(rows) + " rows");
    }
    for (double p : cpds_[i]) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("BernoulliCbn: probability outside [0, 1]");
      }
    }
  }
}

int BernoulliCbn::row(int node, NodeSet world) const {
  check_node(size(), node);
  return row_of(parents_[node], world);
}

double BernoulliCbn::joint_prob(NodeSet world) const {
  double p = 1.0;
  for (int i = 0; i < size(); ++i) {
    const double p1 = cpds_[i][row_of(parents_[i], world)];
    p *= contains(world, i) ? p1 : 1.0 - p1;
  }
  return p;
}

double BernoulliCbn::joint_prob(std::span<const int> values) const {
  if (static_cast<int>(values.size()) != size()) {
    throw std::invalid_argument("joint_prob: assignment must cover all nodes");
  }
  NodeSet world = 0;
  for (int i = 0; i < size(); ++i) {
    if (values[i] != 0 && values[i] != 1) {
      throw std::invalid_argument("joint_prob: values must be 0 or 1");
    }
    if (values[i] == 1) world |= singleton(i);
  }
  return joint_prob(world);
}

double BernoulliCbn::query_prob(const Assignment& target,
                                const Assignment& given) const {
  check_assignment(size(), target);
  check_assignment(size(), given);
  if ((target.mask & given.mask) != 0) {
    throw std::invalid_argument("query_prob: target and given overlap");
  }
  const NodeSet worlds = NodeSet{1} << size();
  double num = 0.0;
  double den = 0.0;
  for (NodeSet w = 0; w < worlds; ++w) {
    if (!given.matches(w)) continue;
    const double p = joint_prob(w);
    den += p;
    if (target.matches(w)) num += p;
  }
  if (given.empty()) return num;
  if (den <= 0.0) {
    throw UndefinedCondition("query_prob: conditioning event has probability 0");
  }
  return num / den;
}

BernoulliCbn BernoulliCbn::intervene(const Assignment& do_assignment) const {
  check_assignment(size(), do_assignment);
  Dag cut = dag_.without_incoming(do_assignment.mask);
  auto cpds = cpds_;
  for (int i : members(do_assignment.mask)) {
    cpds[i] = {static_cast<double>(do_assignment.get(i))};
  }
  return BernoulliCbn(std::move(cut), std::move(cpds));
}

NodeSet Unit::world(const Assignment& intervention) const {
  const Dag& dag = scm_->dag();
  NodeSet w = 0;
  for (int u : dag.topological_order()) {
    int value;
    if (intervention.has(u)) {
      value = intervention.get(u);
    } else {
      const int r = row_of(scm_->parents(u), w);
      value = static_cast<int>((tables_[u] >> r) & 1U);
    }
    if (value == 1) w |= singleton(u);
  }
  return w;
}

ResponseFunctionScm::ResponseFunctionScm(
    Dag dag, std::vector<std::vector<ResponseFunction>> responses)
    : dag_(std::move(dag)),
      responses_(std::move(responses)),
      parents_(parent_lists(dag_)) {
  if (static_cast<int>(responses_.size()) != dag_.size()) {
    throw std::invalid_argument("ResponseFunctionScm: one distribution per node");
  }
  for (int i = 0; i < dag_.size(); ++i) {
    if (parents_[i].size() > 5) {
      throw std::invalid_argument("ResponseFunctionScm: at most 5 parents");
    }
    double total = 0.0;
    for (const auto& f : responses_[i]) {
      if (!(f.prob >= 0.0)) {
        throw std::invalid_argument("ResponseFunctionScm: negative mass");
      }
      total += f.prob;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("ResponseFunctionScm: masses must sum to 1");
    }
  }
}

ResponseFunctionScm ResponseFunctionScm::comonotone(const BernoulliCbn& cbn) {
  std::vector<std::vector<ResponseFunction>> responses;
  for (int i = 0; i < cbn.size(); ++i) {
    const auto& p = cbn.cpd(i);
    std::vector<double> cuts{0.0, 1.0};
    cuts.insert(cuts.end(), p.begin(), p.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<ResponseFunction> fs;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      // For u in [cuts[k], cuts[k+1]) the row fires iff p(row) >= cuts[k+1].
      ResponseFunction f;
      for (std::size_t r = 0; r < p.size(); ++r) {
        if (p[r] >= cuts[k + 1]) f.table |= 1U << r;
      }
      f.prob = cuts[k + 1] - cuts[k];
      fs.push_back(f);
    }
    responses.push_back(std::move(fs));
  }
  return ResponseFunctionScm(cbn.dag(), std::move(responses));
}

ResponseFunctionScm ResponseFunctionScm::independent(const BernoulliCbn& cbn) {
  std::vector<std::vector<ResponseFunction>> responses;
  for (int i = 0; i < cbn.size(); ++i) {
    const auto& p = cbn.cpd(i);
    if (p.size() > 16) {
      throw std::invalid_argument("independent: at most 4 parents per node");
    }
    std::vector<ResponseFunction> fs;
    const std::uint32_t tables = 1U << p.size();
    for (std::uint32_t t = 0; t < tables; ++t) {
      double prob = 1.0;
      for (std::size_t r = 0; r < p.size(); ++r) {
        prob *= ((t >> r) & 1U) ? p[r] : 1.0 - p[r];
      }
      if (prob > 0.0) fs.push_back({t, prob});
    }
    responses.push_back(std::move(fs));
  }
  return ResponseFunctionScm(cbn.dag(), std::move(responses));
}

BernoulliCbn ResponseFunctionScm::induced_cbn() const {
  std::vector<std::vector<double>> cpds;
  for (int i = 0; i < dag_.size(); ++i) {
    std::vector<double> p(std::size_t{1} << parents_[i].size(), 0.0);
    for (const auto& f : responses_[i]) {
      for (std::size_t r = 0; r < p.size(); ++r) {
        if ((f.table >> r) & 1U) p[r] += f.prob;
      }
    }
    for (double& x : p) x = std::clamp(x, 0.0, 1.0);
    cpds.push_back(std::move(p));
  }
  return BernoulliCbn(dag_, std::move(cpds));
}

double ResponseFunctionScm::expectation(
    const std::function<double(const Unit&)>& f) const {
  const int n = dag_.size();
  std::vector<std::size_t> index(n, 0);
  std::vector<std::uint32_t> tables(n);
  double total = 0.0;
  while (true) {
    double prob = 1.0;
    for (int i = 0; i < n; ++i) {
      const auto& rf = responses_[i][index[i]];
      prob *= rf.prob;
      tables[i] = rf.table;
    }
    if (prob > 0.0) total += prob * f(Unit(*this, tables));
    int k = 0;
    while (k < n && ++index[k] == responses_[k].size()) index[k++] = 0;
    if (k == n) break;
  }
  return total;
}

double counterfactual_expectation(
    const ResponseFunctionScm& scm, const std::function<double(const Unit&)>& f,
    const std::function<bool(const Unit&)>& condition) {
  double weight = 0.0;
  const double num = scm.expectation([&](const Unit& u) {
    if (!condition(u)) return 0.0;
    return f(u);
  });
  weight = scm.expectation(
      [&](const Unit& u) { return condition(u) ? 1.0 : 0.0; });
  if (weight <= 0.0) {
    throw UndefinedCondition("counterfactual: evidence has probability 0");
  }
  return num / weight;
}

double counterfactual_prob(const ResponseFunctionScm& scm,
                           const Assignment& do_x, const Assignment& target,
                           const Assignment& evidence) {
  return counterfactual_expectation(
      scm,
      [&](const Unit& u) { return target.matches(u.world(do_x)) ? 1.0 : 0.0; },
      [&](const Unit& u) { return evidence.matches(u.world()); });
}

std::pair<double, double> scm_pair_values(
    const BernoulliCbn& cbn,
    const std::function<double(const ResponseFunctionScm&)>& query) {
  return {query(ResponseFunctionScm::comonotone(cbn)),
          query(ResponseFunctionScm::independent(cbn))};
}

bool scm_invariant(const BernoulliCbn& cbn,
                   const std::function<double(const ResponseFunctionScm&)>& query,
                   double tol) {
  const auto [a, b] = scm_pair_values(cbn, query);
  return std::abs(a - b) <= tol;
}

}  // namespace causegen
