#include "causegen/corr2cause.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>
#include <set>
#include <stdexcept>

#include "causegen/rng.hpp"

namespace causegen {

namespace {

std::string fill(std::string_view pattern, const std::string& x,
                 const std::string& y) {
  std::string out;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    if (pattern[k] == '{' && k + 2 < pattern.size() && pattern[k + 2] == '}') {
      out += pattern[k + 1] == 'i' ? x : y;
      k += 2;
    } else {
      out += pattern[k];
    }
  }
  return out;
}

std::string_view original_template(RelationKind rel) {
  switch (rel) {
    case RelationKind::IsParent: return "{i} directly causes {j}.";
    case RelationKind::IsAncestor:
      return "{i} causes something else which causes {j}.";
    case RelationKind::IsChild: return "{j} directly causes {i}.";
    case RelationKind::IsDescendant:
      return "{j} is a cause for {i}, but not a direct one.";
    case RelationKind::HasCollider:
      return "There exists at least one collider (i.e., common effect) of {i} "
             "and {j}.";
    case RelationKind::HasConfounder:
      return "There exists at least one confounder (i.e., common cause) of {i} "
             "and {j}.";
  }
  throw std::invalid_argument("unknown relation");
}

std::string_view paraphrase_template(RelationKind rel) {
  switch (rel) {
    case RelationKind::IsParent: return "{i} directly affects {j}.";
    case RelationKind::IsAncestor:
      return "{i} influences {j} through some mediator(s).";
    case RelationKind::IsChild: return "{j} directly affects {i}.";
    case RelationKind::IsDescendant:
      return "{j} influences {i} through some mediator(s).";
    case RelationKind::HasCollider:
      return "{i} and {j} together cause some other variable(s).";
    case RelationKind::HasConfounder:
      return "Some variable(s) cause(s) both {i} and {j}.";
  }
  throw std::invalid_argument("unknown relation");
}

struct Quota {
  int n;
  std::size_t test;
  std::size_t dev;
};

// Per-n sizes of the released test and dev splits.
constexpr std::array<Quota, 5> kPublishedQuota{{
    {2, 6, 6},
    {3, 48, 42},
    {4, 72, 72},
    {5, 514, 482},
    {6, 522, 474},
}};

bool is_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::vector<Hypothesis> hypotheses_for(int n) {
  std::vector<Hypothesis> out;
  out.reserve(static_cast<std::size_t>(3 * n * (n - 1)));
  for (RelationKind rel : kAllRelations) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) out.push_back({rel, i, j});
    }
  }
  return out;
}

int label_validity(std::span<const Dag> members, RelationKind rel, int i,
                   int j) {
  if (members.empty()) {
    throw std::invalid_argument("label_validity: empty equivalence class");
  }
  return std::all_of(members.begin(), members.end(),
                     [&](const Dag& g) { return relation_holds(g, rel, i, j); })
             ? 1
             : 0;
}

int label_validity(const IndependenceStructure& structure, RelationKind rel,
                   int i, int j) {
  const auto members = mec_members(structure);
  return label_validity(members, rel, i, j);
}

std::string join_names(std::span<const std::string> names) {
  std::string out;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k > 0) out += k + 1 == names.size() ? " and " : ", ";
    out += names[k];
  }
  return out;
}

std::string verbalize_premise(const IndependenceStructure& structure,
                              std::span<const std::string> names) {
  const int n = structure.size();
  if (static_cast<int>(names.size()) != n) {
    throw std::invalid_argument("verbalize_premise: name count mismatch");
  }
  const std::string count = std::to_string(n);
  std::string out = "Suppose there is a closed system of " + count +
                    " variables, " + join_names(names) +
                    ". All the statistical relations among these " + count +
                    " variables are as follows: ";
  bool first = true;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!first) out += ' ';
      first = false;
      const auto witness = structure.witness(i, j);
      if (!witness) {
        out += names[i] + " correlates with " + names[j] + ".";
        continue;
      }
      out += names[i] + " is independent of " + names[j];
      if (*witness != 0) {
        out += " given ";
        bool first_given = true;
        for (int k : members(*witness)) {
          if (!first_given) out += ", ";
          first_given = false;
          out += names[k];
        }
      }
      out += ".";
    }
  }
  return out;
}

std::string verbalize_hypothesis(const Hypothesis& h,
                                 std::span<const std::string> names) {
  const int n = static_cast<int>(names.size());
  if (h.i < 0 || h.j < 0 || h.i >= n || h.j >= n) {
    throw std::out_of_range("verbalize_hypothesis: node index out of range");
  }
  const auto pattern = h.variant == TemplateVariant::Original
                           ? original_template(h.rel)
                           : paraphrase_template(h.rel);
  return fill(pattern, names[h.i], names[h.j]);
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  throw std::invalid_argument("unknown split");
}

std::pair<std::size_t, std::size_t> split_quota(SplitPolicy policy, int n,
                                                std::size_t subset_size) {
  std::size_t test = 0;
  std::size_t dev = 0;
  if (policy == SplitPolicy::Published) {
    auto it = std::find_if(kPublishedQuota.begin(), kPublishedQuota.end(),
                           [n](const Quota& q) { return q.n == n; });
    if (it == kPublishedQuota.end()) {
      return split_quota(SplitPolicy::CapRule, n, subset_size);
    }
    test = it->test;
    dev = it->dev;
  } else if (n <= 3) {
    test = (subset_size + 1) / 2;
    dev = subset_size - test;
  } else {
    test = dev = std::min<std::size_t>(1000, subset_size / 10);
  }
  test = std::min(test, subset_size);
  dev = std::min(dev, subset_size - test);
  return {test, dev};
}

std::vector<Corr2CauseRecord> build_subset(int n, std::uint64_t seed,
                                           SplitPolicy policy) {
  if (n < 2 || n > 6) {
    throw std::invalid_argument("build_subset: n must be in [2, 6]");
  }
  const auto dags = enumerate_dags(n);
  const auto mecs = cluster_mecs(dags);
  const auto names = default_names(n);
  const auto hyps = hypotheses_for(n);

  std::vector<Corr2CauseRecord> records;
  records.reserve(mecs.size() * hyps.size());
  for (std::size_t m = 0; m < mecs.size(); ++m) {
    const std::string premise = verbalize_premise(mecs[m].structure, names);
    for (const Hypothesis& h : hyps) {
      Corr2CauseRecord r;
      r.premise = premise;
      r.hypothesis = verbalize_hypothesis(h, names);
      r.label = label_validity(mecs[m].members, h.rel, h.i, h.j);
      r.n = n;
      r.mec_id = static_cast<int>(m);
      r.rel = h.rel;
      r.i = h.i;
      r.j = h.j;
      records.push_back(std::move(r));
    }
  }

  const auto [test, dev] = split_quota(policy, n, records.size());
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed({seed, static_cast<std::uint64_t>(n)}));
  rng.shuffle(order);
  for (std::size_t k = 0; k < order.size(); ++k) {
    records[order[k]].split =
        k < test ? Split::Test : (k < test + dev ? Split::Dev : Split::Train);
  }
  return records;
}

std::vector<Corr2CauseRecord> build_dataset(int max_n, std::uint64_t seed,
                                            SplitPolicy policy) {
  if (max_n < 2 || max_n > 6) {
    throw std::invalid_argument("build_dataset: max_n must be in [2, 6]");
  }
  std::vector<Corr2CauseRecord> all;
  for (int n = 2; n <= max_n; ++n) {
    auto part = build_subset(n, seed, policy);
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return all;
}

std::vector<std::string> record_names(const Corr2CauseRecord& record) {
  if (record.n < 1 || record.n > 26) {
    throw std::invalid_argument("record_names: n out of range");
  }
  std::vector<std::string> names;
  for (int k = 0; k < record.n; ++k) {
    names.emplace_back(1, static_cast<char>(record.refactored ? 'Z' - k
                                                              : 'A' + k));
  }
  return names;
}

Corr2CauseRecord perturb(const Corr2CauseRecord& record, PerturbMode mode) {
  Corr2CauseRecord out = record;
  if (mode == PerturbMode::Paraphrase) {
    out.variant = TemplateVariant::Paraphrased;
    out.hypothesis = verbalize_hypothesis(
        {record.rel, record.i, record.j, out.variant}, record_names(record));
    return out;
  }

  const auto current = record_names(record);
  auto flip = [&](const std::string& text) {
    std::string result = text;
    for (std::size_t k = 0; k < text.size(); ++k) {
      const char c = text[k];
      if (!std::isupper(static_cast<unsigned char>(c))) continue;
      const bool left_ok =
          k == 0 || !std::isalnum(static_cast<unsigned char>(text[k - 1]));
      const bool right_ok = k + 1 == text.size() ||
                            !std::isalnum(static_cast<unsigned char>(text[k + 1]));
      if (!left_ok || !right_ok) continue;
      const std::string token(1, c);
      if (std::find(current.begin(), current.end(), token) == current.end()) {
        throw std::invalid_argument("perturb: unknown variable token '" +
                                    token + "'");
      }
      result[k] = static_cast<char>('Z' - (c - 'A'));
    }
    return result;
  };
  out.premise = flip(record.premise);
  out.hypothesis = flip(record.hypothesis);
  out.refactored = !record.refactored;
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (is_punct(c)) {
      flush();
      tokens.emplace_back(1, c);
    } else {
      current += c;
    }
  }
  flush();
  return tokens;
}

Corr2CauseStats dataset_stats(std::span<const Corr2CauseRecord> records) {
  struct Acc {
    SubsetStats s;
    std::size_t premise_tokens = 0;
    std::size_t hypothesis_tokens = 0;
    std::set<std::string> vocab;
  };
  Acc total;
  std::map<int, Acc> per_n;
  for (const auto& r : records) {
    const auto pt = tokenize(r.premise);
    const auto ht = tokenize(r.hypothesis);
    for (Acc* acc : {&total, &per_n[r.n]}) {
      ++acc->s.samples;
      acc->s.positives += r.label;
      switch (r.split) {
        case Split::Test: ++acc->s.test; break;
        case Split::Dev: ++acc->s.dev; break;
        case Split::Train: ++acc->s.train; break;
      }
      acc->premise_tokens += pt.size();
      acc->hypothesis_tokens += ht.size();
      acc->vocab.insert(pt.begin(), pt.end());
      acc->vocab.insert(ht.begin(), ht.end());
    }
  }
  auto finish = [](Acc& acc) {
    if (acc.s.samples > 0) {
      const double count = static_cast<double>(acc.s.samples);
      acc.s.positive_pct = 100.0 * static_cast<double>(acc.s.positives) / count;
      acc.s.tokens_per_premise = static_cast<double>(acc.premise_tokens) / count;
      acc.s.tokens_per_hypothesis =
          static_cast<double>(acc.hypothesis_tokens) / count;
    }
    acc.s.vocab_size = acc.vocab.size();
    return acc.s;
  };
  Corr2CauseStats stats;
  stats.overall = finish(total);
  for (auto& [n, acc] : per_n) stats.by_n[n] = finish(acc);
  return stats;
}

}  // namespace causegen
