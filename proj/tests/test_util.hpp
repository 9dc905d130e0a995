#ifndef ABSYNTH_TESTS_TEST_UTIL_HPP_
#define ABSYNTH_TESTS_TEST_UTIL_HPP_

#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "absynth/ast.hpp"
#include "absynth/grammar.hpp"

namespace absynth::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string grammar_path(const std::string& name) {
  return std::string(ABSYNTH_GRAMMAR_DIR) + "/" + name + ".asdl";
}

inline std::string root_of(const std::string& name) {
  return name == "minimal" || name == "lambda" ? "expr" : "stmt";
}

inline std::shared_ptr<const Grammar> grammar(const std::string& name) {
  return load_grammar(grammar_path(name), root_of(name));
}

// pandas.read_csv('file.csv', nrows=1000)
inline TreePtr read_csv_tree(const Grammar& g) {
  auto name = node(g, "Name", {prim("pandas")});
  auto attr = node(g, "Attribute", {name, prim("read_csv")});
  auto str = node(g, "Str", {prim("file.csv")});
  auto num = node(g, "Num", {prim("1000")});
  auto kw = node(g, "keyword", {prim("nrows"), num});
  auto call = node(g, "Call", {attr, std::vector<FieldValue>{str}, std::vector<FieldValue>{kw}});
  return node(g, "Expr", {call});
}

// Token pools under which random trees render to text that reads back.
inline std::map<std::string, std::vector<std::string>> lambda_pools() {
  return {{"var", {"$0", "$1", "$2", "x"}},
          {"var_type", {"e", "i"}},
          {"ent", {"texas:s", "boston:ci", "1200:ti", "mississippi_river:r"}},
          {"num", {"0", "2", "3.5", "1200", "-1"}},
          {"pred", {"state", "next_to", "flight", "loc:t", "population:i", "from"}}};
}

inline std::map<std::string, std::vector<std::string>> sql_pools(std::size_t width) {
  std::vector<std::string> idx;
  for (std::size_t i = 0; i < width; ++i) idx.push_back(std::to_string(i));
  return {{"idx", idx}, {"string", {"Calvin", "Mccarty", "1997", "and", "12.5", "(OT)", "x-y"}}};
}

inline std::map<std::string, std::vector<std::string>> pyexpr_pools() {
  return {{"identifier", {"pandas", "read_csv", "x", "nrows", "f_1"}},
          {"string", {"file.csv", "a", "it's", "C:\\dir", "\"q\""}},
          {"object", {"0", "1000", "2.5", "-3", "1e5"}}};
}

}  // namespace absynth::testing

#endif  // ABSYNTH_TESTS_TEST_UTIL_HPP_
