#include "absynth/dataset.hpp"

#include <fstream>

#include "absynth/error.hpp"
#include "absynth/scorer.hpp"
#include "absynth/text.hpp"

namespace absynth {

namespace {

nlohmann::json parse_line(const std::string& line, std::size_t lineno) {
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": expected an object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": " + e.what());
  }
}

std::string string_field(const nlohmann::json& j, const char* key, std::size_t lineno) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": missing string field \"" + key + "\"");
  }
  return j.at(key).get<std::string>();
}

std::optional<TableContext> table_field(const nlohmann::json& j, std::size_t lineno) {
  if (!j.contains("table") || j.at("table").is_null()) return std::nullopt;
  try {
    return table_from_json(j.at("table"));
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": " + e.what());
  }
}

std::vector<std::string> utterance_tokens(const std::string& text, std::size_t lineno) {
  auto toks = tokenize_utterance(text);
  if (toks.empty()) throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": empty utterance");
  return toks;
}

}  // namespace

std::vector<Example> read_dataset(std::istream& in, MrFormat format, const Grammar& grammar) {
  std::vector<Example> out;
  std::vector<std::string> failures;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    const auto j = parse_line(line, lineno);
    Example ex;
    ex.utterance = utterance_tokens(string_field(j, "utterance", lineno), lineno);
    ex.mr = string_field(j, "mr", lineno);
    ex.table = table_field(j, lineno);
    try {
      ex.tree = mr_to_ast(format, ex.mr, grammar, ex.table ? &*ex.table : nullptr);
      auto problems = validate_ast(grammar, *ex.tree);
      if (!problems.empty()) throw Error(ErrorCode::invalid_tree, problems.front().message);
    } catch (const Error& e) {
      failures.push_back("line " + std::to_string(lineno) + ": " + e.what());
      continue;
    }
    out.push_back(std::move(ex));
  }
  if (!failures.empty()) throw Error(ErrorCode::conversion_failure, join(failures, "; "));
  return out;
}

std::vector<Example> load_dataset(const std::string& path, MrFormat format, const Grammar& grammar) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  try {
    return read_dataset(in, format, grammar);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
  }
}

std::vector<Query> read_queries(std::istream& in) {
  std::vector<Query> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto text = trim(line);
    if (text.empty()) continue;
    Query q;
    if (text.front() == '{') {
      const auto j = parse_line(line, lineno);
      q.utterance = utterance_tokens(string_field(j, "utterance", lineno), lineno);
      q.table = table_field(j, lineno);
    } else {
      q.utterance = utterance_tokens(std::string(text), lineno);
    }
    out.push_back(std::move(q));
  }
  return out;
}

EvalReport evaluate(const std::vector<Example>& gold, const std::vector<TreePtr>& predicted, MrFormat format) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorCode::shape_mismatch, "expected " + std::to_string(gold.size()) + " predictions, got " +
                                               std::to_string(predicted.size()));
  }
  EvalReport r;
  r.total = gold.size();
  std::size_t exact = 0, executed = 0, with_tables = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Example& ex = gold[i];
    const TableContext* table = ex.table ? &*ex.table : nullptr;
    Outcome o;
    if (predicted[i]) {
      try {
        o.predicted = ast_to_mr(format, *predicted[i], table);
      } catch (const Error&) {
        o.predicted = to_sexpr(*predicted[i]);
      }
      o.exact = trees_equal(*predicted[i], *ex.tree);
    }
    if (table) {
      ++with_tables;
      const auto want = execute_sql(*ex.tree, *table);
      if (want.empty) {
        o.indeterminate = true;
        ++r.indeterminate;
      } else {
        bool same = false;
        if (predicted[i]) {
          try {
            same = execute_sql(*predicted[i], *table).values == want.values;
          } catch (const Error&) {
            same = false;
          }
        }
        o.executed = same;
        executed += same;
      }
    }
    exact += o.exact;
    r.outcomes.push_back(std::move(o));
  }
  if (r.total) r.exact_match = static_cast<double>(exact) / static_cast<double>(r.total);
  if (with_tables) r.execution = static_cast<double>(executed) / static_cast<double>(with_tables);
  return r;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json outcomes = nlohmann::json::array();
  for (const Outcome& o : report.outcomes) {
    nlohmann::json j{{"predicted", o.predicted ? nlohmann::json(*o.predicted) : nlohmann::json()},
                     {"exact", o.exact}};
    if (o.executed) j["executed"] = *o.executed;
    if (o.indeterminate) j["indeterminate"] = true;
    outcomes.push_back(std::move(j));
  }
  return {{"total", report.total},
          {"exact_match", report.exact_match},
          {"execution", report.execution ? nlohmann::json(*report.execution) : nlohmann::json()},
          {"indeterminate", report.indeterminate},
          {"outcomes", std::move(outcomes)}};
}

}  // namespace absynth
