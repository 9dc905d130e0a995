#include <map>
#include <memory>

#include "absynth/converters.hpp"
#include "absynth/error.hpp"
#include "absynth/text.hpp"

namespace absynth {

namespace {

struct SNode {
  std::string atom;  // set for atoms
  std::vector<SNode> items;
  bool is_list = false;
};

std::vector<std::string> lex(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    if (ch == '(' || ch == ')') {
      flush();
      out.emplace_back(1, ch);
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

SNode read_list(const std::vector<std::string>& toks, std::size_t& pos) {
  SNode list;
  list.is_list = true;
  ++pos;  // '('
  while (pos < toks.size() && toks[pos] != ")") {
    if (toks[pos] == "(") {
      list.items.push_back(read_list(toks, pos));
    } else {
      list.items.push_back(SNode{toks[pos++], {}, false});
    }
  }
  if (pos >= toks.size()) throw Error(ErrorCode::unbalanced_parens, "missing ')'");
  ++pos;  // ')'
  return list;
}

// A whole logical form. Bare top-level sequences ("lambda $0 e (...)") are
// read as one list.
SNode read_form(std::string_view text) {
  auto toks = lex(text);
  if (toks.empty()) throw Error(ErrorCode::unknown_form, "empty logical form");
  std::vector<SNode> top;
  std::size_t pos = 0;
  while (pos < toks.size()) {
    if (toks[pos] == ")") throw Error(ErrorCode::unbalanced_parens, "unexpected ')'");
    if (toks[pos] == "(") {
      top.push_back(read_list(toks, pos));
    } else {
      top.push_back(SNode{toks[pos++], {}, false});
    }
  }
  if (top.size() == 1) return std::move(top.front());
  SNode list;
  list.is_list = true;
  list.items = std::move(top);
  return list;
}

enum class Shape { var_body, var_domain_body, lambda, unary, nary, compare };

struct Form {
  const char* constructor;
  Shape shape;
};

const std::map<std::string, Form, std::less<>>& special_forms() {
  static const std::map<std::string, Form, std::less<>> forms = {
      {"lambda", {"Lambda", Shape::lambda}},
      {"argmax", {"Argmax", Shape::var_domain_body}},
      {"argmin", {"Argmin", Shape::var_domain_body}},
      {"sum", {"Sum", Shape::var_domain_body}},
      {"count", {"Count", Shape::var_body}},
      {"exists", {"Exists", Shape::var_body}},
      {"max", {"Max", Shape::var_body}},
      {"min", {"Min", Shape::var_body}},
      {"the", {"The", Shape::var_body}},
      {"not", {"Not", Shape::unary}},
      {"and", {"And", Shape::nary}},
      {"or", {"Or", Shape::nary}},
      {"=", {"Equal", Shape::compare}},
      {"<", {"LessThan", Shape::compare}},
      {">", {"GreaterThan", Shape::compare}},
  };
  return forms;
}

bool is_variable_token(std::string_view tok) {
  return tok.find(':') == std::string_view::npos && !parse_number(tok) && !tok.empty();
}

class LambdaReader {
 public:
  explicit LambdaReader(const Grammar& g) : g_(g) {}

  TreePtr expr(const SNode& n) {
    if (!n.is_list) return atom(n.atom);
    if (n.items.empty()) throw Error(ErrorCode::unknown_form, "empty form ()");
    const SNode& head = n.items.front();
    if (head.is_list) throw Error(ErrorCode::unknown_form, "form head must be an atom");
    const std::size_t argc = n.items.size() - 1;
    auto arity = [&](std::size_t want) {
      if (argc != want) {
        throw Error(ErrorCode::unknown_form, "'" + head.atom + "' takes " + std::to_string(want) +
                                                 " arguments, got " + std::to_string(argc));
      }
    };
    auto var = [&](std::size_t i) {
      const SNode& v = n.items[i];
      if (v.is_list) throw Error(ErrorCode::unknown_form, "'" + head.atom + "' needs a variable");
      return PrimitiveValue{{v.atom}};
    };
    auto it = special_forms().find(head.atom);
    if (it == special_forms().end()) {
      std::vector<FieldValue> args;
      for (std::size_t i = 1; i < n.items.size(); ++i) args.emplace_back(expr(n.items[i]));
      return node(g_, "Apply", {PrimitiveValue{{head.atom}}, std::move(args)});
    }
    const Form& form = it->second;
    switch (form.shape) {
      case Shape::lambda:
        arity(3);
        return node(g_, form.constructor, {var(1), var(2), expr(n.items[3])});
      case Shape::var_domain_body:
        arity(3);
        return node(g_, form.constructor, {var(1), expr(n.items[2]), expr(n.items[3])});
      case Shape::var_body:
        arity(2);
        return node(g_, form.constructor, {var(1), expr(n.items[2])});
      case Shape::unary:
        arity(1);
        return node(g_, form.constructor, {expr(n.items[1])});
      case Shape::nary: {
        std::vector<FieldValue> args;
        for (std::size_t i = 1; i < n.items.size(); ++i) args.emplace_back(expr(n.items[i]));
        return node(g_, form.constructor, {std::move(args)});
      }
      case Shape::compare:
        arity(2);
        return node(g_, "Compare",
                    {node(g_, form.constructor), expr(n.items[1]), expr(n.items[2])});
    }
    throw Error(ErrorCode::unknown_form, head.atom);
  }

 private:
  TreePtr atom(const std::string& tok) {
    if (tok.find(':') != std::string::npos) return node(g_, "Entity", {PrimitiveValue{{tok}}});
    if (parse_number(tok)) return node(g_, "Number", {PrimitiveValue{{tok}}});
    return node(g_, "Variable", {PrimitiveValue{{tok}}});
  }

  const Grammar& g_;
};

const std::string& single_token(const AbstractTree& t, std::size_t field) {
  const auto& values = t.fields.at(field).values;
  if (values.size() != 1) throw Error(ErrorCode::invalid_tree, t.constructor->name + " field count");
  const auto* pv = std::get_if<PrimitiveValue>(&values[0]);
  if (!pv || pv->tokens.size() != 1) {
    throw Error(ErrorCode::invalid_tree, t.constructor->name + " expects one token");
  }
  const std::string& tok = pv->tokens[0];
  if (tok.empty() || tok.find_first_of("() \t\n") != std::string::npos) {
    throw Error(ErrorCode::invalid_tree, "token '" + tok + "' cannot be written in a logical form");
  }
  return tok;
}

const AbstractTree& child(const AbstractTree& t, std::size_t field, std::size_t i = 0) {
  const auto& values = t.fields.at(field).values;
  if (i >= values.size()) throw Error(ErrorCode::invalid_tree, t.constructor->name + " missing child");
  const auto* c = std::get_if<TreePtr>(&values[i]);
  if (!c || !*c) throw Error(ErrorCode::invalid_tree, t.constructor->name + " expects a subtree");
  return **c;
}

std::string lower_name(const std::string& constructor) {
  for (const auto& [surface, form] : special_forms()) {
    if (constructor == form.constructor) return surface;
  }
  return "";
}

// Items of the list this node renders to, or a single atom (no parens).
std::vector<std::string> render_items(const AbstractTree& t);

std::string render(const AbstractTree& t) {
  const std::string& c = t.constructor->name;
  if (c == "Variable" || c == "Entity" || c == "Number") {
    const std::string& tok = single_token(t, 0);
    const bool ok = c == "Entity"   ? tok.find(':') != std::string::npos
                    : c == "Number" ? parse_number(tok).has_value()
                                    : is_variable_token(tok);
    if (!ok) throw Error(ErrorCode::invalid_tree, c + " token '" + tok + "' would not read back");
    return tok;
  }
  return "(" + join(render_items(t), " ") + ")";
}

std::vector<std::string> render_items(const AbstractTree& t) {
  const std::string& c = t.constructor->name;
  std::vector<std::string> items;
  auto var = [&](std::size_t f) { return single_token(t, f); };
  if (c == "Apply") {
    const std::string& pred = single_token(t, 0);
    if (special_forms().count(pred)) {
      throw Error(ErrorCode::invalid_tree, "predicate '" + pred + "' is a reserved form");
    }
    items.push_back(pred);
    for (std::size_t i = 0; i < t.fields[1].values.size(); ++i) items.push_back(render(child(t, 1, i)));
  } else if (c == "Lambda") {
    items = {"lambda", var(0), var(1), render(child(t, 2))};
  } else if (c == "Argmax" || c == "Argmin" || c == "Sum") {
    items = {lower_name(c), var(0), render(child(t, 1)), render(child(t, 2))};
  } else if (c == "Count" || c == "Exists" || c == "Max" || c == "Min" || c == "The") {
    items = {lower_name(c), var(0), render(child(t, 1))};
  } else if (c == "Not") {
    items = {"not", render(child(t, 0))};
  } else if (c == "And" || c == "Or") {
    items.push_back(lower_name(c));
    for (std::size_t i = 0; i < t.fields[0].values.size(); ++i) items.push_back(render(child(t, 0, i)));
  } else if (c == "Compare") {
    items = {lower_name(child(t, 0).constructor->name), render(child(t, 1)), render(child(t, 2))};
  } else {
    throw Error(ErrorCode::invalid_tree, "constructor " + c + " is not a logical form");
  }
  return items;
}

void write_canonical(const SNode& n, std::string& out) {
  if (!n.is_list) {
    out += n.atom;
    return;
  }
  out += '(';
  for (std::size_t i = 0; i < n.items.size(); ++i) {
    if (i) out += ' ';
    write_canonical(n.items[i], out);
  }
  out += ')';
}

}  // namespace

TreePtr lambda_to_ast(std::string_view text, const Grammar& grammar) {
  return LambdaReader(grammar).expr(read_form(text));
}

std::string ast_to_lambda(const AbstractTree& tree) {
  const std::string& c = tree.constructor->name;
  if (c == "Variable" || c == "Entity" || c == "Number") return render(tree);
  auto items = render_items(tree);
  // The outer form is written bare unless that would read back as an atom.
  if (items.size() < 2) return "(" + join(items, " ") + ")";
  return join(items, " ");
}

std::string canonicalize_lambda(std::string_view text) {
  SNode form = read_form(text);
  std::string out;
  if (form.is_list && form.items.size() >= 2) {
    for (std::size_t i = 0; i < form.items.size(); ++i) {
      if (i) out += ' ';
      write_canonical(form.items[i], out);
    }
  } else {
    write_canonical(form, out);
  }
  return out;
}

}  // namespace absynth
