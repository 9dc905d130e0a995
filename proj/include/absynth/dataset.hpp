#ifndef ABSYNTH_DATASET_HPP_
#define ABSYNTH_DATASET_HPP_

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "absynth/converters.hpp"
#include "absynth/search.hpp"
#include "absynth/training.hpp"

namespace absynth {

// One JSON object per line: {"utterance": str, "mr": str, "table"?: {...}}.
// Blank lines are skipped. Malformed lines throw parse_error with the line
// number; MRs that do not convert are collected and reported together as
// conversion_failure.
std::vector<Example> read_dataset(std::istream& in, MrFormat format, const Grammar& grammar);
std::vector<Example> load_dataset(const std::string& path, MrFormat format, const Grammar& grammar);

// Utterance (plus optional table) without a gold MR; plain text lines or the
// same JSONL shape as datasets.
struct Query {
  std::vector<std::string> utterance;
  std::optional<TableContext> table;
};
std::vector<Query> read_queries(std::istream& in);

struct Outcome {
  std::optional<std::string> predicted;  // empty when decoding failed
  bool exact = false;
  // Set only for examples with a table; unset with `indeterminate` when the
  // gold query itself returns nothing.
  std::optional<bool> executed;
  bool indeterminate = false;
};

struct EvalReport {
  std::size_t total = 0;
  double exact_match = 0.0;
  std::optional<double> execution = std::nullopt;
  std::size_t indeterminate = 0;
  std::vector<Outcome> outcomes;
};

// Scores predicted trees (null for "no output") against the gold examples.
// Exact match is structural tree equality. Execution accuracy is computed
// over every example with a table; examples whose gold result is empty are
// counted as misses and flagged indeterminate.
EvalReport evaluate(const std::vector<Example>& gold, const std::vector<TreePtr>& predicted, MrFormat format);

nlohmann::json report_to_json(const EvalReport& report);

}  // namespace absynth

#endif  // ABSYNTH_DATASET_HPP_
