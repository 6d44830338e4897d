#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace causegen {

/// Bit set over node indices; bit i stands for node i.
using NodeSet = std::uint32_t;

/// Upper bound on node count for every bitmask-based routine in the library.
inline constexpr int kMaxNodes = 32;

struct Edge {
  int from = 0;
  int to = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Labeled directed acyclic graph over nodes 0..n-1.
///
/// Structural logic works on indices only; `names()` is presentation data and
/// defaults to A, B, C, ...  Construction validates range, self-loops,
/// duplicates and acyclicity and throws std::invalid_argument on violation.
class Dag {
 public:
  Dag() = default;
  explicit Dag(int n);
  Dag(int n, std::vector<Edge> edges, std::vector<std::string> names = {});

  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int i) const { return names_.at(i); }

  bool has_edge(int from, int to) const;
  NodeSet parents(int i) const { return in_.at(i); }
  NodeSet children(int i) const { return out_.at(i); }
  std::vector<int> parent_list(int i) const;

  /// Strict descendants (excluding i itself).
  NodeSet descendants(int i) const;
  /// Strict ancestors (excluding i itself).
  NodeSet ancestors(int i) const;

  /// A topological order; ties resolved by smallest index first.
  std::vector<int> topological_order() const;

  /// True when every edge goes from a lower to a higher index.
  bool is_upper_triangular() const;

  /// Graph with node i renamed to perm[i]; names travel with their nodes.
  Dag relabeled(std::span<const int> perm) const;

  /// Copy with a different set of names (size must match).
  Dag with_names(std::vector<std::string> names) const;

  /// Copy with the incoming edges of every node in `nodes` removed.
  Dag without_incoming(NodeSet nodes) const;
  /// Copy with the outgoing edges of every node in `nodes` removed.
  Dag without_outgoing(NodeSet nodes) const;

  /// Structural equality (names are ignored).
  bool same_structure(const Dag& other) const {
    return n_ == other.n_ && out_ == other.out_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<NodeSet> out_;
  std::vector<NodeSet> in_;
  std::vector<std::string> names_;
};

/// Default variable label for node i: A..Z, then V27, V28, ...
std::string default_name(int i);
std::vector<std::string> default_names(int n);

/// Node set helpers.
inline bool contains(NodeSet s, int i) { return ((s >> i) & 1U) != 0; }
inline NodeSet singleton(int i) { return NodeSet{1} << i; }
std::vector<int> members(NodeSet s);
NodeSet make_set(std::initializer_list<int> nodes);

/// Six pairwise causal relations used for hypotheses.
enum class RelationKind {
  IsParent,
  IsAncestor,
  IsChild,
  IsDescendant,
  HasCollider,
  HasConfounder,
};

inline constexpr RelationKind kAllRelations[] = {
    RelationKind::IsParent,     RelationKind::IsAncestor,
    RelationKind::IsChild,      RelationKind::IsDescendant,
    RelationKind::HasCollider,  RelationKind::HasConfounder,
};

std::string_view to_string(RelationKind rel);
RelationKind relation_from_string(std::string_view text);

/// Whether `rel` holds between nodes i and j of `dag`.
///
/// IsAncestor requires a directed path of length >= 2 and i not a parent of j;
/// IsDescendant is the mirror image. Throws std::out_of_range for bad indices
/// and std::invalid_argument when i == j.
bool relation_holds(const Dag& dag, RelationKind rel, int i, int j);

/// Canonical string of a DAG: the row-major n*n adjacency matrix of the
/// relabeling that minimizes the encoding over all n! permutations, where
/// below-diagonal cells are compared before above-diagonal ones. The minimizer
/// is therefore always a topological labeling. Isomorphic graphs map to the
/// same string.
std::string canonical_form(const Dag& dag);

/// Canonical relabeling itself (upper-triangular, default names).
Dag canonical_dag(const Dag& dag);

/// All non-isomorphic DAGs on n unlabeled nodes, each in canonical
/// upper-triangular form, ordered by canonical string.
std::vector<Dag> enumerate_dags(int n);

/// Every labeled DAG on n nodes (no isomorphism reduction). Small n only.
std::vector<Dag> enumerate_labeled_dags(int n);

}  // namespace causegen
