#include "causegen/jsonl.hpp"

#include <string>

namespace causegen {

namespace {

constexpr std::string_view kRefactoredSuffix = "+refactored";

nlohmann::ordered_json subset_json(const SubsetStats& s) {
  return {{"samples", s.samples},
          {"test", s.test},
          {"dev", s.dev},
          {"train", s.train},
          {"positives", s.positives},
          {"positive_pct", s.positive_pct},
          {"tokens_per_premise", s.tokens_per_premise},
          {"tokens_per_hypothesis", s.tokens_per_hypothesis},
          {"vocab_size", s.vocab_size}};
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string variant_label(const Corr2CauseRecord& record) {
  std::string s = record.variant == TemplateVariant::Original ? "original" : "paraphrased";
  if (record.refactored) s += kRefactoredSuffix;
  return s;
}

nlohmann::ordered_json to_json(const Corr2CauseRecord& r) {
  return {{"premise", r.premise},
          {"hypothesis", r.hypothesis},
          {"label", r.label},
          {"n", r.n},
          {"mec_id", r.mec_id},
          {"relation", to_string(r.rel)},
          {"pair", {r.i, r.j}},
          {"variant", variant_label(r)}};
}

Corr2CauseRecord corr2cause_from_json(const nlohmann::json& j, Split split) {
  Corr2CauseRecord r;
  try {
    r.premise = j.at("premise").get<std::string>();
    r.hypothesis = j.at("hypothesis").get<std::string>();
    r.label = j.at("label").get<int>();
    r.n = j.at("n").get<int>();
    r.mec_id = j.at("mec_id").get<int>();
    r.rel = relation_from_string(j.at("relation").get<std::string>());
    const auto pair = j.at("pair").get<std::vector<int>>();
    if (pair.size() != 2) throw std::invalid_argument("record: pair must have two entries");
    r.i = pair[0];
    r.j = pair[1];
    std::string variant = j.at("variant").get<std::string>();
    if (variant.size() > kRefactoredSuffix.size() &&
        variant.compare(variant.size() - kRefactoredSuffix.size(), kRefactoredSuffix.size(),
                        kRefactoredSuffix) == 0) {
      r.refactored = true;
      variant.resize(variant.size() - kRefactoredSuffix.size());
    }
    if (variant == "original") {
      r.variant = TemplateVariant::Original;
    } else if (variant == "paraphrased") {
      r.variant = TemplateVariant::Paraphrased;
    } else {
      throw std::invalid_argument("record: unknown variant " + variant);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("record: ") + e.what());
  }
  if (r.label != 0 && r.label != 1) throw std::invalid_argument("record: label must be 0 or 1");
  if (r.n < 2 || r.n > 26 || r.i < 0 || r.j <= r.i || r.j >= r.n) {
    throw std::invalid_argument("record: pair out of range");
  }
  r.split = split;
  return r;
}

Split split_from_string(std::string_view name) {
  for (Split s : {Split::Train, Split::Dev, Split::Test}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown split: " + std::string(name));
}

nlohmann::ordered_json to_json(const Corr2CauseStats& stats) {
  nlohmann::ordered_json by_n = nlohmann::ordered_json::object();
  for (const auto& [n, s] : stats.by_n) by_n[std::to_string(n)] = subset_json(s);
  return {{"overall", subset_json(stats.overall)}, {"by_n", std::move(by_n)}};
}

JsonlFile read_jsonl(std::istream& in) {
  JsonlFile file;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument("line " + std::to_string(number) + ": " + e.what());
    }
    if (!j.is_object()) {
      throw std::invalid_argument("line " + std::to_string(number) + ": not a JSON object");
    }
    if (j.contains("_meta")) {
      if (!file.meta) file.meta = j.at("_meta");
      continue;
    }
    file.rows.push_back(std::move(j));
  }
  return file;
}

}  // namespace causegen
