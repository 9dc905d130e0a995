#include "absynth/ast.hpp"

#include <cctype>
#include <sstream>

#include "absynth/error.hpp"
#include "absynth/text.hpp"

namespace absynth {

AbstractTree make_node(const Constructor& constructor) {
  AbstractTree t;
  t.constructor = &constructor;
  t.fields.reserve(constructor.fields.size());
  for (const Field& f : constructor.fields) t.fields.push_back({&f, {}});
  return t;
}

TreePtr node(const Grammar& grammar, std::string_view constructor, std::vector<Arg> args) {
  const Constructor& c = grammar.constructor(constructor);
  if (args.size() != c.fields.size()) {
    throw Error(ErrorCode::invalid_tree,
                c.name + " expects " + std::to_string(c.fields.size()) + " fields, got " +
                    std::to_string(args.size()));
  }
  AbstractTree t = make_node(c);
  for (std::size_t i = 0; i < args.size(); ++i) t.fields[i].values = std::move(args[i].values);
  return std::make_shared<const AbstractTree>(std::move(t));
}

PrimitiveValue prim(std::string_view text) { return PrimitiveValue{split_whitespace(text)}; }

FieldValue value(TreePtr tree) { return FieldValue(std::move(tree)); }
FieldValue value(PrimitiveValue v) { return FieldValue(std::move(v)); }

bool is_multi_token(const Field& field) { return field.type == "string"; }

namespace {

bool owned_by(const Grammar& grammar, const Constructor* c) {
  return c && c->id < grammar.constructors().size() && &grammar.constructors()[c->id] == c;
}

void validate_node(const Grammar& grammar, const AbstractTree& tree, const std::string& path,
                   std::vector<Violation>& out) {
  if (!owned_by(grammar, tree.constructor)) {
    throw Error(ErrorCode::foreign_constructor,
                (tree.constructor ? tree.constructor->name : std::string("<null>")) +
                    " at path '" + path + "'");
  }
  const Constructor& c = *tree.constructor;
  auto child_path = [&path](const std::string& name) {
    return path.empty() ? name : path + "." + name;
  };
  if (tree.fields.size() != c.fields.size()) {
    out.push_back({Violation::Kind::arity, path,
                   c.name + " has " + std::to_string(tree.fields.size()) + " fields, expected " +
                       std::to_string(c.fields.size())});
    return;
  }
  for (std::size_t i = 0; i < c.fields.size(); ++i) {
    const Field& field = c.fields[i];
    const RealizedField& rf = tree.fields[i];
    const std::string fpath = child_path(field.name);
    if (rf.field != &field) {
      out.push_back({Violation::Kind::arity, fpath, "realized field does not match declaration"});
      continue;
    }
    const std::size_t n = rf.values.size();
    if (field.cardinality == Cardinality::single && n != 1) {
      out.push_back({Violation::Kind::cardinality, fpath,
                     "single field holds " + std::to_string(n) + " values"});
    } else if (field.cardinality == Cardinality::optional && n > 1) {
      out.push_back({Violation::Kind::cardinality, fpath,
                     "optional field holds " + std::to_string(n) + " values"});
    }
    const bool primitive = grammar.is_primitive(field.type);
    for (std::size_t j = 0; j < n; ++j) {
      const std::string vpath = field.cardinality == Cardinality::sequential
                                    ? fpath + "[" + std::to_string(j) + "]"
                                    : fpath;
      const FieldValue& v = rf.values[j];
      if (primitive) {
        const auto* pv = std::get_if<PrimitiveValue>(&v);
        if (!pv) {
          out.push_back({Violation::Kind::expected_primitive, vpath,
                         "field of type " + field.type + " holds a tree"});
          continue;
        }
        if (pv->tokens.empty()) {
          out.push_back({Violation::Kind::bad_token, vpath, "primitive value has no tokens"});
        } else if (!is_multi_token(field) && pv->tokens.size() != 1) {
          out.push_back({Violation::Kind::bad_token, vpath,
                         "field of type " + field.type + " holds " +
                             std::to_string(pv->tokens.size()) + " tokens"});
        }
        for (const std::string& tok : pv->tokens) {
          if (tok.empty()) out.push_back({Violation::Kind::bad_token, vpath, "empty token"});
        }
      } else {
        const auto* child = std::get_if<TreePtr>(&v);
        if (!child || !*child) {
          out.push_back({Violation::Kind::expected_tree, vpath,
                         "field of type " + field.type + " holds a primitive"});
          continue;
        }
        if (owned_by(grammar, (*child)->constructor) &&
            (*child)->constructor->type != field.type) {
          out.push_back({Violation::Kind::type_mismatch, vpath,
                         (*child)->constructor->name + " has type " +
                             (*child)->constructor->type + ", field expects " + field.type});
        }
        validate_node(grammar, **child, vpath, out);
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate_ast(const Grammar& grammar, const AbstractTree& tree) {
  std::vector<Violation> out;
  validate_node(grammar, tree, "", out);
  return out;
}

bool trees_equal(const AbstractTree& a, const AbstractTree& b) {
  if (&a == &b) return true;
  if (a.constructor != b.constructor) {
    // Trees built against different Grammar objects compare by name.
    if (!a.constructor || !b.constructor || a.constructor->name != b.constructor->name) {
      return false;
    }
  }
  if (a.fields.size() != b.fields.size()) return false;
  for (std::size_t i = 0; i < a.fields.size(); ++i) {
    const auto& va = a.fields[i].values;
    const auto& vb = b.fields[i].values;
    if (va.size() != vb.size()) return false;
    for (std::size_t j = 0; j < va.size(); ++j) {
      if (va[j].index() != vb[j].index()) return false;
      if (const auto* ta = std::get_if<TreePtr>(&va[j])) {
        const TreePtr& tb = std::get<TreePtr>(vb[j]);
        if (!*ta || !tb) {
          if (*ta != tb) return false;
          continue;
        }
        if (!trees_equal(**ta, *tb)) return false;
      } else if (std::get<PrimitiveValue>(va[j]) != std::get<PrimitiveValue>(vb[j])) {
        return false;
      }
    }
  }
  return true;
}

std::size_t tree_size(const AbstractTree& tree) {
  std::size_t n = 1;
  for (const RealizedField& rf : tree.fields) {
    for (const FieldValue& v : rf.values) {
      if (const auto* t = std::get_if<TreePtr>(&v); t && *t) n += tree_size(**t);
    }
  }
  return n;
}

namespace {

void write_value(std::ostream& out, const FieldValue& v);

void write_tree(std::ostream& out, const AbstractTree& tree) {
  out << '(' << tree.constructor->name;
  for (const RealizedField& rf : tree.fields) {
    out << ' ' << rf.field->name << ':';
    const bool as_list = rf.field->cardinality == Cardinality::sequential ||
                         (rf.field->cardinality == Cardinality::optional && rf.values.empty());
    if (as_list) {
      out << '[';
      for (std::size_t j = 0; j < rf.values.size(); ++j) {
        if (j) out << ' ';
        write_value(out, rf.values[j]);
      }
      out << ']';
    } else if (!rf.values.empty()) {
      write_value(out, rf.values.front());
    } else {
      out << "[]";
    }
  }
  out << ')';
}

void write_value(std::ostream& out, const FieldValue& v) {
  if (const auto* t = std::get_if<TreePtr>(&v)) {
    write_tree(out, **t);
  } else {
    out << quote(join(std::get<PrimitiveValue>(v).tokens, " "));
  }
}

class SexprReader {
 public:
  SexprReader(const Grammar& grammar, std::string_view text) : grammar_(grammar), text_(text) {}

  TreePtr read() {
    TreePtr t = tree();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::parse_error,
                "s-expression offset " + std::to_string(pos_) + ": " + message);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char ch) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != ch) fail(std::string("expected '") + ch + "'");
    ++pos_;
  }

  bool at(char ch) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == ch;
  }

  std::string name() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  FieldValue item(const Field& f) {
    skip_space();
    if (grammar_.is_primitive(f.type)) {
      std::size_t consumed = 0;
      auto s = unquote(text_.substr(pos_), &consumed);
      if (!s) fail("expected a quoted primitive value");
      pos_ += consumed;
      return prim(*s);
    }
    return tree();
  }

  TreePtr tree() {
    expect('(');
    const Constructor* c = grammar_.find_constructor(name());
    if (!c) fail("unknown constructor");
    AbstractTree t = make_node(*c);
    for (std::size_t i = 0; i < c->fields.size(); ++i) {
      const Field& f = c->fields[i];
      if (name() != f.name) fail("expected field " + f.name);
      expect(':');
      if (at('[')) {
        ++pos_;
        while (!at(']')) t.fields[i].values.push_back(item(f));
        ++pos_;
      } else {
        t.fields[i].values.push_back(item(f));
      }
    }
    expect(')');
    return std::make_shared<const AbstractTree>(std::move(t));
  }

  const Grammar& grammar_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_sexpr(const AbstractTree& tree) {
  std::ostringstream out;
  write_tree(out, tree);
  return out.str();
}

TreePtr parse_sexpr(const Grammar& grammar, std::string_view text) {
  return SexprReader(grammar, text).read();
}

}  // namespace absynth
