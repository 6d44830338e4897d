#include "causegen/dag.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace causegen {

namespace {

void check_node(int n, int i) {
  if (i < 0 || i >= n) {
    throw std::out_of_range("node index " + std::to_string(i) +
                            " out of range for " + std::to_string(n) +
                            " nodes");
  }
}

bool acyclic(const std::vector<NodeSet>& out) {
  const int n = static_cast<int>(out.size());
  std::vector<int> indeg(n, 0);
  for (int u = 0; u < n; ++u) {
    for (int v : members(out[u])) ++indeg[v];
  }
  std::vector<int> stack;
  for (int u = 0; u < n; ++u) {
    if (indeg[u] == 0) stack.push_back(u);
  }
  int seen = 0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    ++seen;
    for (int v : members(out[u])) {
      if (--indeg[v] == 0) stack.push_back(v);
    }
  }
  return seen == n;
}

// Upper-triangle cell (r, c), r < c, in row-major order.
int upper_index(int n, int r, int c) {
  return r * n - r * (r + 1) / 2 + (c - r - 1);
}

std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> result;
  do {
    result.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return result;
}

// Code of a topological relabeling: upper-triangle bits packed with the first
// row-major cell as the most significant bit, so numeric order matches the
// lexicographic order of the adjacency string.
struct CanonicalResult {
  std::uint64_t code = 0;
  std::vector<int> perm;
};

CanonicalResult minimize_code(const Dag& dag) {
  const int n = dag.size();
  if (n > 11) {
    throw std::invalid_argument("canonical_form: n too large for exhaustive "
                                "permutation search");
  }
  const int cells = n * (n - 1) / 2;
  CanonicalResult best;
  bool found = false;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::uint64_t code = 0;
    bool topo = true;
    for (const Edge& e : dag.edges()) {
      const int a = perm[e.from];
      const int b = perm[e.to];
      if (a > b) {
        topo = false;
        break;
      }
      code |= std::uint64_t{1} << (cells - 1 - upper_index(n, a, b));
    }
    if (topo && (!found || code < best.code)) {
      best.code = code;
      best.perm = perm;
      found = true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::string code_to_string(int n, std::uint64_t code) {
  const int cells = n * (n - 1) / 2;
  std::string s(static_cast<std::size_t>(n) * n, '0');
  for (int r = 0; r < n; ++r) {
    for (int c = r + 1; c < n; ++c) {
      const int k = upper_index(n, r, c);
      if ((code >> (cells - 1 - k)) & 1U) s[r * n + c] = '1';
    }
  }
  return s;
}

Dag code_to_dag(int n, std::uint64_t code) {
  const int cells = n * (n - 1) / 2;
  std::vector<Edge> edges;
  for (int r = 0; r < n; ++r) {
    for (int c = r + 1; c < n; ++c) {
      if ((code >> (cells - 1 - upper_index(n, r, c))) & 1U) {
        edges.push_back({r, c});
      }
    }
  }
  return Dag(n, std::move(edges));
}

}  // namespace

std::string default_name(int i) {
  if (i >= 0 && i < 26) return std::string(1, static_cast<char>('A' + i));
  return "V" + std::to_string(i + 1);
}

std::vector<std::string> default_names(int n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 0; i < n; ++i) names.push_back(default_name(i));
  return names;
}

std::vector<int> members(NodeSet s) {
  std::vector<int> out;
  while (s != 0) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

NodeSet make_set(std::initializer_list<int> nodes) {
  NodeSet s = 0;
  for (int i : nodes) s |= singleton(i);
  return s;
}

Dag::Dag(int n) : Dag(n, {}) {}

Dag::Dag(int n, std::vector<Edge> edges, std::vector<std::string> names)
    : n_(n), edges_(std::move(edges)), out_(n, 0), in_(n, 0) {
  if (n < 0 || n > kMaxNodes) {
    throw std::invalid_argument("Dag: node count must be in [0, 32]");
  }
  for (const Edge& e : edges_) {
    check_node(n, e.from);
    check_node(n, e.to);
    if (e.from == e.to) throw std::invalid_argument("Dag: self-loop");
    if (contains(out_[e.from], e.to)) {
      throw std::invalid_argument("Dag: duplicate edge");
    }
    out_[e.from] |= singleton(e.to);
    in_[e.to] |= singleton(e.from);
  }
  if (!acyclic(out_)) throw std::invalid_argument("Dag: graph has a cycle");
  std::sort(edges_.begin(), edges_.end());
  if (names.empty()) {
    names_ = default_names(n);
  } else if (static_cast<int>(names.size()) != n) {
    throw std::invalid_argument("Dag: name count does not match node count");
  } else {
    names_ = std::move(names);
  }
}

bool Dag::has_edge(int from, int to) const {
  check_node(n_, from);
  check_node(n_, to);
  return contains(out_[from], to);
}

std::vector<int> Dag::parent_list(int i) const { return members(parents(i)); }

NodeSet Dag::descendants(int i) const {
  check_node(n_, i);
  NodeSet seen = 0;
  NodeSet frontier = out_[i];
  while (frontier != 0) {
    const int u = std::countr_zero(frontier);
    frontier &= frontier - 1;
    if (contains(seen, u)) continue;
    seen |= singleton(u);
    frontier |= out_[u] & ~seen;
  }
  return seen;
}

NodeSet Dag::ancestors(int i) const {
  check_node(n_, i);
  NodeSet seen = 0;
  NodeSet frontier = in_[i];
  while (frontier != 0) {
    const int u = std::countr_zero(frontier);
    frontier &= frontier - 1;
    if (contains(seen, u)) continue;
    seen |= singleton(u);
    frontier |= in_[u] & ~seen;
  }
  return seen;
}

std::vector<int> Dag::topological_order() const {
  std::vector<int> order;
  order.reserve(n_);
  NodeSet placed = 0;
  while (static_cast<int>(order.size()) < n_) {
    for (int u = 0; u < n_; ++u) {
      if (!contains(placed, u) && (in_[u] & ~placed) == 0) {
        order.push_back(u);
        placed |= singleton(u);
        break;
      }
    }
  }
  return order;
}

bool Dag::is_upper_triangular() const {
  return std::all_of(edges_.begin(), edges_.end(),
                     [](const Edge& e) { return e.from < e.to; });
}

Dag Dag::relabeled(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) {
    throw std::invalid_argument("relabeled: permutation size mismatch");
  }
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const Edge& e : edges_) edges.push_back({perm[e.from], perm[e.to]});
  std::vector<std::string> names(n_);
  for (int i = 0; i < n_; ++i) names.at(perm[i]) = names_[i];
  return Dag(n_, std::move(edges), std::move(names));
}

Dag Dag::with_names(std::vector<std::string> names) const {
  return Dag(n_, edges_, std::move(names));
}

Dag Dag::without_incoming(NodeSet nodes) const {
  std::vector<Edge> kept;
  for (const Edge& e : edges_) {
    if (!contains(nodes, e.to)) kept.push_back(e);
  }
  return Dag(n_, std::move(kept), names_);
}

Dag Dag::without_outgoing(NodeSet nodes) const {
  std::vector<Edge> kept;
  for (const Edge& e : edges_) {
    if (!contains(nodes, e.from)) kept.push_back(e);
  }
  return Dag(n_, std::move(kept), names_);
}

std::string_view to_string(RelationKind rel) {
  switch (rel) {
    case RelationKind::IsParent: return "is_parent";
    case RelationKind::IsAncestor: return "is_ancestor";
    case RelationKind::IsChild: return "is_child";
    case RelationKind::IsDescendant: return "is_descendant";
    case RelationKind::HasCollider: return "has_collider";
    case RelationKind::HasConfounder: return "has_confounder";
  }
  throw std::invalid_argument("unknown relation");
}

RelationKind relation_from_string(std::string_view text) {
  for (RelationKind rel : kAllRelations) {
    if (to_string(rel) == text) return rel;
  }
  throw std::invalid_argument("unknown relation: " + std::string(text));
}

bool relation_holds(const Dag& dag, RelationKind rel, int i, int j) {
  check_node(dag.size(), i);
  check_node(dag.size(), j);
  if (i == j) throw std::invalid_argument("relation_holds: i == j");
  switch (rel) {
    case RelationKind::IsParent:
      return dag.has_edge(i, j);
    case RelationKind::IsChild:
      return dag.has_edge(j, i);
    case RelationKind::IsAncestor:
      return contains(dag.descendants(i), j) && !dag.has_edge(i, j);
    case RelationKind::IsDescendant:
      return contains(dag.descendants(j), i) && !dag.has_edge(j, i);
    case RelationKind::HasCollider:
      return (dag.children(i) & dag.children(j)) != 0;
    case RelationKind::HasConfounder:
      return (dag.parents(i) & dag.parents(j)) != 0;
  }
  throw std::invalid_argument("unknown relation");
}

std::string canonical_form(const Dag& dag) {
  return code_to_string(dag.size(), minimize_code(dag).code);
}

Dag canonical_dag(const Dag& dag) {
  return code_to_dag(dag.size(), minimize_code(dag).code);
}

std::vector<Dag> enumerate_dags(int n) {
  if (n < 1) throw std::invalid_argument("enumerate_dags: n must be >= 1");
  if (n > 7) throw std::invalid_argument("enumerate_dags: n must be <= 7");
  const int cells = n * (n - 1) / 2;
  const auto perms = all_permutations(n);

  // target[p][k]: packed bit position of upper cell k under permutation p,
  // or -1 if the permutation reverses that edge.
  std::vector<std::vector<int>> target(perms.size(), std::vector<int>(cells));
  for (std::size_t p = 0; p < perms.size(); ++p) {
    for (int r = 0; r < n; ++r) {
      for (int c = r + 1; c < n; ++c) {
        const int a = perms[p][r];
        const int b = perms[p][c];
        target[p][upper_index(n, r, c)] =
            a < b ? cells - 1 - upper_index(n, a, b) : -1;
      }
    }
  }

  std::unordered_set<std::uint64_t> codes;
  const std::uint64_t total = std::uint64_t{1} << cells;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    // mask bit k (LSB-first) marks upper cell k.
    std::uint64_t best = ~std::uint64_t{0};
    for (const auto& map : target) {
      std::uint64_t code = 0;
      std::uint64_t rest = mask;
      bool ok = true;
      while (rest != 0) {
        const int k = std::countr_zero(rest);
        rest &= rest - 1;
        const int t = map[k];
        if (t < 0) {
          ok = false;
          break;
        }
        code |= std::uint64_t{1} << t;
      }
      if (ok && code < best) best = code;
    }
    codes.insert(best);
  }

  std::vector<std::uint64_t> sorted(codes.begin(), codes.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Dag> result;
  result.reserve(sorted.size());
  for (std::uint64_t code : sorted) result.push_back(code_to_dag(n, code));
  return result;
}

std::vector<Dag> enumerate_labeled_dags(int n) {
  if (n < 1 || n > 6) {
    throw std::invalid_argument("enumerate_labeled_dags: n must be in [1, 6]");
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<Dag> result;
  std::vector<int> state(pairs.size(), 0);
  while (true) {
    std::vector<NodeSet> out(n, 0);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (state[k] == 1) out[pairs[k].first] |= singleton(pairs[k].second);
      if (state[k] == 2) out[pairs[k].second] |= singleton(pairs[k].first);
    }
    if (acyclic(out)) {
      std::vector<Edge> edges;
      for (int u = 0; u < n; ++u) {
        for (int v : members(out[u])) edges.push_back({u, v});
      }
      result.emplace_back(n, std::move(edges));
    }
    std::size_t k = 0;
    while (k < state.size() && state[k] == 2) state[k++] = 0;
    if (k == state.size()) break;
    ++state[k];
  }
  return result;
}

}  // namespace causegen
