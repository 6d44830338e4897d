#include "causegen/independence.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace causegen {

namespace {

void check_pair(int n, int i, int j) {
  if (i < 0 || i >= n || j < 0 || j >= n) {
    throw std::out_of_range("node index out of range");
  }
  if (i == j) throw std::invalid_argument("pair must have distinct nodes");
}

int pair_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

// Witness order: cardinality first, then sorted member lists compared
// lexicographically.
bool witness_less(NodeSet a, NodeSet b) {
  const int ca = std::popcount(a);
  const int cb = std::popcount(b);
  if (ca != cb) return ca < cb;
  return members(a) < members(b);
}

NodeSet map_set(NodeSet s, std::span<const int> perm) {
  NodeSet out = 0;
  while (s != 0) {
    out |= singleton(perm[std::countr_zero(s)]);
    s &= s - 1;
  }
  return out;
}

}  // namespace

bool is_d_separated(const Dag& dag, int i, int j, NodeSet z) {
  const int n = dag.size();
  check_pair(n, i, j);
  if (contains(z, i) || contains(z, j)) {
    throw std::invalid_argument("conditioning set contains an endpoint");
  }
  if (n < kMaxNodes && (z >> n) != 0) {
    throw std::out_of_range("conditioning set has out-of-range nodes");
  }

  // Nodes that are in z or have a descendant in z: colliders there are open.
  NodeSet open_colliders = z;
  for (int u : members(z)) open_colliders |= dag.ancestors(u);

  // States: arrived "up" (from a child) or "down" (from a parent).
  NodeSet visited_up = 0;
  NodeSet visited_down = 0;
  std::vector<std::pair<int, bool>> stack{{i, true}};
  while (!stack.empty()) {
    const auto [u, up] = stack.back();
    stack.pop_back();
    NodeSet& visited = up ? visited_up : visited_down;
    if (contains(visited, u)) continue;
    visited |= singleton(u);
    const bool observed = contains(z, u);
    if (!observed && u == j) return false;
    if (up) {
      if (observed) continue;
      for (int p : members(dag.parents(u))) stack.emplace_back(p, true);
      for (int c : members(dag.children(u))) stack.emplace_back(c, false);
    } else {
      if (!observed) {
        for (int c : members(dag.children(u))) stack.emplace_back(c, false);
      }
      if (contains(open_colliders, u)) {
        for (int p : members(dag.parents(u))) stack.emplace_back(p, true);
      }
    }
  }
  return true;
}

IndependenceStructure::IndependenceStructure(int n) : n_(n) {
  if (n < 1 || n > kMaxNodes) {
    throw std::invalid_argument("IndependenceStructure: n must be in [1, 10]");
  }
  words_.assign(static_cast<std::size_t>(pair_count()) * words_per_pair(), 0);
}

int IndependenceStructure::words_per_pair() const {
  return std::max(1, (1 << n_) / 64);
}

std::size_t IndependenceStructure::offset(int i, int j) const {
  check_pair(n_, i, j);
  return static_cast<std::size_t>(pair_index(n_, i, j)) * words_per_pair();
}

bool IndependenceStructure::separates(int i, int j, NodeSet z) const {
  const std::size_t base = offset(i, j);
  return ((words_[base + z / 64] >> (z % 64)) & 1U) != 0;
}

void IndependenceStructure::add_separating_set(int i, int j, NodeSet z) {
  if (contains(z, i) || contains(z, j) || (z >> n_) != 0) {
    throw std::invalid_argument("separating set must exclude the pair");
  }
  const std::size_t base = offset(i, j);
  words_[base + z / 64] |= std::uint64_t{1} << (z % 64);
}

bool IndependenceStructure::directly_correlated(int i, int j) const {
  const std::size_t base = offset(i, j);
  for (int w = 0; w < words_per_pair(); ++w) {
    if (words_[base + w] != 0) return false;
  }
  return true;
}

std::vector<NodeSet> IndependenceStructure::separating_sets(int i,
                                                            int j) const {
  const std::size_t base = offset(i, j);
  std::vector<NodeSet> sets;
  for (int w = 0; w < words_per_pair(); ++w) {
    std::uint64_t word = words_[base + w];
    while (word != 0) {
      sets.push_back(static_cast<NodeSet>(w * 64 + std::countr_zero(word)));
      word &= word - 1;
    }
  }
  std::sort(sets.begin(), sets.end(), witness_less);
  return sets;
}

std::optional<NodeSet> IndependenceStructure::witness(int i, int j) const {
  auto sets = separating_sets(i, j);
  if (sets.empty()) return std::nullopt;
  return sets.front();
}

IndependenceStructure IndependenceStructure::relabeled(
    std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) {
    throw std::invalid_argument("relabeled: permutation size mismatch");
  }
  IndependenceStructure out(n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      for (NodeSet z : separating_sets(i, j)) {
        out.add_separating_set(perm[i], perm[j], map_set(z, perm));
      }
    }
  }
  return out;
}

IndependenceStructure independence_structure(const Dag& dag) {
  const int n = dag.size();
  IndependenceStructure s(n);
  const NodeSet all = (NodeSet{1} << n) - 1;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const NodeSet rest = all & ~singleton(i) & ~singleton(j);
      // Enumerate every subset of `rest`, including the empty set.
      NodeSet z = rest;
      while (true) {
        if (is_d_separated(dag, i, j, z)) s.add_separating_set(i, j, z);
        if (z == 0) break;
        z = (z - 1) & rest;
      }
    }
  }
  return s;
}

IndependenceStructure canonical_structure(const IndependenceStructure& s,
                                          std::vector<int>* perm_out) {
  const int n = s.size();
  const int subsets = 1 << n;
  const int words = std::max(1, subsets / 64);
  const int pairs = s.pair_count();

  // Separating families per pair, decoded once.
  std::vector<std::pair<int, int>> pair_nodes;
  std::vector<std::vector<NodeSet>> families;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      pair_nodes.emplace_back(i, j);
      families.push_back(s.separating_sets(i, j));
    }
  }

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::uint64_t> best;
  std::vector<int> best_perm;
  std::vector<std::uint64_t> code(static_cast<std::size_t>(pairs) * words);
  std::vector<NodeSet> subset_map(subsets);
  do {
    for (int z = 0; z < subsets; ++z) {
      subset_map[z] = map_set(static_cast<NodeSet>(z), perm);
    }
    std::fill(code.begin(), code.end(), 0);
    for (int p = 0; p < pairs; ++p) {
      const auto [i, j] = pair_nodes[p];
      const std::size_t base =
          static_cast<std::size_t>(pair_index(n, perm[i], perm[j])) * words;
      for (NodeSet z : families[p]) {
        const NodeSet mz = subset_map[z];
        code[base + mz / 64] |= std::uint64_t{1} << (mz % 64);
      }
    }
    if (best.empty() || code < best) {
      best = code;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  if (perm_out != nullptr) *perm_out = best_perm;
  return s.relabeled(best_perm);
}

std::vector<Mec> cluster_mecs(std::span<const Dag> dags) {
  if (dags.empty()) return {};
  const int n = dags.front().size();
  std::map<std::vector<std::uint64_t>, Mec> groups;
  for (const Dag& dag : dags) {
    if (dag.size() != n) {
      throw std::invalid_argument("cluster_mecs: mixed node counts");
    }
    IndependenceStructure canon = canonical_structure(independence_structure(dag));
    auto key = canon.encoding();
    auto [it, inserted] = groups.try_emplace(std::move(key));
    if (inserted) it->second.structure = std::move(canon);
    it->second.sources.push_back(dag);
  }
  std::vector<Mec> result;
  result.reserve(groups.size());
  for (auto& [key, mec] : groups) {
    mec.members = mec_members(mec.structure);
    result.push_back(std::move(mec));
  }
  return result;
}

std::vector<Dag> mec_members(const IndependenceStructure& structure) {
  const int n = structure.size();
  std::vector<std::pair<int, int>> skeleton;
  std::vector<NodeSet> adjacent(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (structure.directly_correlated(i, j)) {
        skeleton.emplace_back(i, j);
        adjacent[i] |= singleton(j);
        adjacent[j] |= singleton(i);
      }
    }
  }

  // Expected v-structures: bit pair_index(i, j) of expected[k] marks i -> k <- j.
  std::vector<std::uint64_t> expected(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (contains(adjacent[i], j)) continue;
      const NodeSet sep = *structure.witness(i, j);
      for (int k : members(adjacent[i] & adjacent[j])) {
        if (!contains(sep, k)) {
          expected[k] |= std::uint64_t{1} << pair_index(n, i, j);
        }
      }
    }
  }

  std::vector<Dag> result;
  const std::uint64_t total = std::uint64_t{1} << skeleton.size();
  std::vector<NodeSet> in(n);
  for (std::uint64_t orient = 0; orient < total; ++orient) {
    std::fill(in.begin(), in.end(), 0);
    std::vector<Edge> edges;
    edges.reserve(skeleton.size());
    for (std::size_t e = 0; e < skeleton.size(); ++e) {
      auto [a, b] = skeleton[e];
      if ((orient >> e) & 1U) std::swap(a, b);
      in[b] |= singleton(a);
      edges.push_back({a, b});
    }
    // Acyclicity by repeatedly peeling nodes with no remaining parents.
    NodeSet placed = 0;
    bool progress = true;
    while (progress) {
      progress = false;
      for (int u = 0; u < n; ++u) {
        if (!contains(placed, u) && (in[u] & ~placed) == 0) {
          placed |= singleton(u);
          progress = true;
        }
      }
    }
    if (placed != (NodeSet{1} << n) - 1) continue;

    bool same_v = true;
    for (int k = 0; k < n && same_v; ++k) {
      std::uint64_t found = 0;
      const auto pa = members(in[k]);
      for (std::size_t a = 0; a < pa.size(); ++a) {
        for (std::size_t b = a + 1; b < pa.size(); ++b) {
          if (!contains(adjacent[pa[a]], pa[b])) {
            found |= std::uint64_t{1} << pair_index(n, pa[a], pa[b]);
          }
        }
      }
      same_v = found == expected[k];
    }
    if (!same_v) continue;

    Dag candidate(n, std::move(edges));
    if (independence_structure(candidate) == structure) {
      result.push_back(std::move(candidate));
    }
  }
  if (result.empty()) {
    throw std::invalid_argument("mec_members: structure is not realizable");
  }
  std::sort(result.begin(), result.end(), [](const Dag& a, const Dag& b) {
    return a.edges() < b.edges();
  });
  return result;
}

}  // namespace causegen
