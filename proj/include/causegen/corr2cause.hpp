#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "causegen/dag.hpp"
#include "causegen/independence.hpp"

namespace causegen {

enum class TemplateVariant { Original, Paraphrased };

struct Hypothesis {
  RelationKind rel = RelationKind::IsParent;
  int i = 0;
  int j = 1;
  TemplateVariant variant = TemplateVariant::Original;
};

/// Every hypothesis for n variables: relation order outer, pairs (i < j)
/// lexicographic inner; 3n(n-1) entries.
std::vector<Hypothesis> hypotheses_for(int n);

/// 1 iff the relation holds in every member DAG.
int label_validity(std::span<const Dag> members, RelationKind rel, int i,
                   int j);
/// Same, enumerating the members of `structure` first.
int label_validity(const IndependenceStructure& structure, RelationKind rel,
                   int i, int j);

/// "A and B", "A, B and C".
std::string join_names(std::span<const std::string> names);

/// Premise text listing every pairwise statistical relation.
std::string verbalize_premise(const IndependenceStructure& structure,
                              std::span<const std::string> names);

std::string verbalize_hypothesis(const Hypothesis& h,
                                 std::span<const std::string> names);

enum class Split { Train, Dev, Test };
std::string_view to_string(Split split);

/// How per-n subsets are divided between test, dev and train.
enum class SplitPolicy {
  /// Per-n test/dev sizes of the released dataset (clamped to the subset).
  Published,
  /// n <= 3 entirely to test+dev; otherwise min(1000, 10%) each.
  CapRule,
};

struct Corr2CauseRecord {
  std::string premise;
  std::string hypothesis;
  int label = 0;
  int n = 0;
  int mec_id = 0;
  RelationKind rel = RelationKind::IsParent;
  int i = 0;
  int j = 1;
  TemplateVariant variant = TemplateVariant::Original;
  bool refactored = false;
  Split split = Split::Train;
};

/// Test/dev sizes for one subset under a policy.
std::pair<std::size_t, std::size_t> split_quota(SplitPolicy policy, int n,
                                                std::size_t subset_size);

/// Records for n = 2..max_n, one per (MEC, hypothesis), with split tags.
std::vector<Corr2CauseRecord> build_dataset(
    int max_n, std::uint64_t seed, SplitPolicy policy = SplitPolicy::Published);

/// Records for a single n (labels only depend on n; splits use `seed`).
std::vector<Corr2CauseRecord> build_subset(int n, std::uint64_t seed,
                                           SplitPolicy policy);

enum class PerturbMode { Paraphrase, VariableRefactor };

/// Paraphrase re-renders the hypothesis with the paraphrase template;
/// VariableRefactor maps A<->Z, B<->Y, ... in premise and hypothesis. Labels
/// are untouched. Throws std::invalid_argument on a variable token that does
/// not belong to the record.
Corr2CauseRecord perturb(const Corr2CauseRecord& record, PerturbMode mode);

/// Current variable labels of a record (reversed alphabet when refactored).
std::vector<std::string> record_names(const Corr2CauseRecord& record);

/// Whitespace tokenization with every punctuation character split off.
std::vector<std::string> tokenize(std::string_view text);

struct SubsetStats {
  std::size_t samples = 0;
  std::size_t test = 0;
  std::size_t dev = 0;
  std::size_t train = 0;
  std::size_t positives = 0;
  double positive_pct = 0.0;
  double tokens_per_premise = 0.0;
  double tokens_per_hypothesis = 0.0;
  std::size_t vocab_size = 0;
};

struct Corr2CauseStats {
  SubsetStats overall;
  std::map<int, SubsetStats> by_n;
};

Corr2CauseStats dataset_stats(std::span<const Corr2CauseRecord> records);

}  // namespace causegen
