#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "causegen/corr2cause.hpp"

namespace causegen {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

/// "original" or "paraphrased", with "+refactored" appended when the
/// variables have been renamed.
std::string variant_label(const Corr2CauseRecord& record);

/// {"premise", "hypothesis", "label", "n", "mec_id", "relation", "pair",
/// "variant"}. The split is a property of the file, not the record.
nlohmann::ordered_json to_json(const Corr2CauseRecord& record);

/// Inverse of to_json. Throws std::invalid_argument on a missing or malformed
/// field.
Corr2CauseRecord corr2cause_from_json(const nlohmann::json& j, Split split = Split::Train);

Split split_from_string(std::string_view name);

nlohmann::ordered_json to_json(const Corr2CauseStats& stats);

/// A JSONL file: the optional leading {"_meta": ...} header and the data
/// rows.
struct JsonlFile {
  std::optional<nlohmann::json> meta;
  std::vector<nlohmann::json> rows;
};

/// Blank lines are skipped. Throws std::invalid_argument naming the line on
/// malformed JSON or a non-object row.
JsonlFile read_jsonl(std::istream& in);

}  // namespace causegen
