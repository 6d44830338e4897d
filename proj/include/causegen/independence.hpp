#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "causegen/dag.hpp"

namespace causegen {

/// d-separation of i and j given z, decided by a reachability sweep over
/// (node, direction) states. Throws std::out_of_range on bad indices and
/// std::invalid_argument when i == j or z contains i or j.
bool is_d_separated(const Dag& dag, int i, int j, NodeSet z);

/// All-pairs conditional-independence facts of a DAG.
///
/// For every unordered pair the full family of separating sets is stored as a
/// bit set indexed by NodeSet value (bit S set iff S separates the pair). A
/// pair with an empty family is directly correlated.
class IndependenceStructure {
 public:
  /// Largest node count supported (family bit sets grow as 2^n).
  static constexpr int kMaxNodes = 10;

  IndependenceStructure() = default;
  explicit IndependenceStructure(int n);

  int size() const { return n_; }
  int pair_count() const { return n_ * (n_ - 1) / 2; }

  bool separates(int i, int j, NodeSet z) const;
  void add_separating_set(int i, int j, NodeSet z);

  bool directly_correlated(int i, int j) const;

  /// Displayed witness: smallest separating set, ties broken by comparing
  /// sorted member lists lexicographically. Empty optional when correlated.
  std::optional<NodeSet> witness(int i, int j) const;

  /// Every separating set of the pair, in witness order.
  std::vector<NodeSet> separating_sets(int i, int j) const;

  /// Structure of the graph relabeled by node i -> perm[i].
  IndependenceStructure relabeled(std::span<const int> perm) const;

  /// Flat word encoding (pairs in lexicographic order); defines the order
  /// used for canonicalization.
  const std::vector<std::uint64_t>& encoding() const { return words_; }

  friend bool operator==(const IndependenceStructure&,
                         const IndependenceStructure&) = default;

 private:
  int words_per_pair() const;
  std::size_t offset(int i, int j) const;

  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Brute-force over all candidate conditioning sets of every pair.
IndependenceStructure independence_structure(const Dag& dag);

/// Relabel-canonical form: the minimal encoding over all node permutations.
/// `perm` receives the permutation that produced it.
IndependenceStructure canonical_structure(const IndependenceStructure& s,
                                          std::vector<int>* perm = nullptr);

/// A Markov equivalence class identified up to node relabeling.
struct Mec {
  /// Relabel-canonical representative structure.
  IndependenceStructure structure;
  /// Every labeled DAG whose independence structure equals `structure`.
  std::vector<Dag> members;
  /// Input DAGs (from the unlabeled enumeration) that fall into this class.
  std::vector<Dag> sources;
};

/// Group DAGs by relabel-canonical independence structure. Output is ordered
/// by canonical encoding. Throws std::invalid_argument on mixed node counts.
std::vector<Mec> cluster_mecs(std::span<const Dag> dags);

/// All labeled DAGs consistent with `structure`: acyclic orientations of the
/// skeleton with the implied v-structures, each confirmed to reproduce the
/// structure exactly. Throws std::invalid_argument if none does.
std::vector<Dag> mec_members(const IndependenceStructure& structure);

}  // namespace causegen
