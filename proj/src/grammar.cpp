#include "absynth/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "absynth/error.hpp"

namespace absynth {

std::string_view to_string(Cardinality c) {
  switch (c) {
    case Cardinality::single: return "single";
    case Cardinality::optional: return "optional";
    case Cardinality::sequential: return "sequential";
  }
  return "?";
}

Grammar::Grammar(std::vector<TypeName> types,
                 std::vector<Constructor> constructors, std::string root_type)
    : types_(std::move(types)),
      constructors_(std::move(constructors)),
      root_type_(std::move(root_type)) {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (!type_index_.emplace(types_[i].name, i).second) {
      throw Error(ErrorCode::duplicate_type, types_[i].name);
    }
  }
  field_offsets_.reserve(constructors_.size());
  for (std::size_t i = 0; i < constructors_.size(); ++i) {
    Constructor& c = constructors_[i];
    c.id = i;
    if (!constructor_index_.emplace(c.name, i).second) {
      throw Error(ErrorCode::duplicate_constructor, c.name);
    }
    if (!is_composite(c.type)) {
      throw Error(ErrorCode::syntax_error,
                  "constructor " + c.name + " has non-composite type " + c.type);
    }
    for (const Field& f : c.fields) {
      if (!find_type(f.type)) {
        throw Error(ErrorCode::syntax_error,
                    "field " + c.name + "." + f.name + " has undeclared type " + f.type);
      }
    }
    field_offsets_.push_back(total_fields_);
    total_fields_ += c.fields.size();
  }
  for (const TypeName& t : types_) {
    if (t.kind == TypeKind::composite && constructors_of(t.name).empty()) {
      throw Error(ErrorCode::syntax_error, "composite type " + t.name + " has no constructors");
    }
  }
  if (!is_composite(root_type_)) {
    throw Error(ErrorCode::unknown_root_type, root_type_);
  }
}

const TypeName* Grammar::find_type(std::string_view name) const {
  auto it = type_index_.find(std::string(name));
  return it == type_index_.end() ? nullptr : &types_[it->second];
}

const Constructor* Grammar::find_constructor(std::string_view name) const {
  auto it = constructor_index_.find(std::string(name));
  return it == constructor_index_.end() ? nullptr : &constructors_[it->second];
}

const Constructor& Grammar::constructor(std::string_view name) const {
  const Constructor* c = find_constructor(name);
  if (!c) throw Error(ErrorCode::unknown_constructor, std::string(name));
  return *c;
}

bool Grammar::is_primitive(std::string_view type) const {
  const TypeName* t = find_type(type);
  return t && t->kind == TypeKind::primitive;
}

bool Grammar::is_composite(std::string_view type) const {
  const TypeName* t = find_type(type);
  return t && t->kind == TypeKind::composite;
}

std::vector<const Constructor*> Grammar::constructors_of(std::string_view type) const {
  const TypeName* t = find_type(type);
  if (!t) throw Error(ErrorCode::syntax_error, "unknown type " + std::string(type));
  if (t->kind == TypeKind::primitive) {
    throw Error(ErrorCode::primitive_type_query, std::string(type));
  }
  std::vector<const Constructor*> out;
  for (const Constructor& c : constructors_) {
    if (c.type == type) out.push_back(&c);
  }
  return out;
}

std::size_t Grammar::field_id(const Constructor& c, std::size_t field_index) const {
  return 1 + field_offsets_.at(c.id) + field_index;
}

std::string Grammar::render() const {
  std::ostringstream out;
  for (const TypeName& t : types_) {
    if (t.kind != TypeKind::composite) continue;
    out << t.name << " =";
    bool first = true;
    for (const Constructor* c : constructors_of(t.name)) {
      out << (first ? " " : " | ") << c->name;
      first = false;
      if (c->fields.empty()) continue;
      out << '(';
      for (std::size_t i = 0; i < c->fields.size(); ++i) {
        const Field& f = c->fields[i];
        if (i) out << ", ";
        out << f.type;
        if (f.cardinality == Cardinality::optional) out << '?';
        if (f.cardinality == Cardinality::sequential) out << '*';
        out << ' ' << f.name;
      }
      out << ')';
    }
    out << '\n';
  }
  return out.str();
}

namespace {

struct Token {
  enum Kind { ident, equals, bar, lparen, rparen, comma, star, question, end } kind;
  std::string text;
  int line;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1;
  std::size_t i = 0;
  auto is_ident_start = [](char ch) {
    return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_';
  };
  auto is_ident_char = [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
  };
  while (i < text.size()) {
    char ch = text[i];
    if (ch == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '#' || (ch == '-' && i + 1 < text.size() && text[i + 1] == '-')) {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (is_ident_start(ch)) {
      std::size_t start = i;
      while (i < text.size() && is_ident_char(text[i])) ++i;
      tokens.push_back({Token::ident, std::string(text.substr(start, i - start)), line});
    } else {
      Token::Kind kind;
      switch (ch) {
        case '=': kind = Token::equals; break;
        case '|': kind = Token::bar; break;
        case '(': kind = Token::lparen; break;
        case ')': kind = Token::rparen; break;
        case ',': kind = Token::comma; break;
        case '*': kind = Token::star; break;
        case '?': kind = Token::question; break;
        default:
          throw Error(ErrorCode::syntax_error, "line " + std::to_string(line) +
                                                   ": unexpected character '" +
                                                   std::string(1, ch) + "'");
      }
      tokens.push_back({kind, std::string(1, ch), line});
      ++i;
    }
  }
  tokens.push_back({Token::end, "", line});
  return tokens;
}

struct RawField {
  std::string type;
  std::string name;
  Cardinality cardinality;
};

struct RawConstructor {
  std::string name;
  std::vector<RawField> fields;
};

struct RawProduction {
  std::string type;
  std::vector<RawConstructor> constructors;
};

class GrammarParser {
 public:
  explicit GrammarParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::vector<RawProduction> parse() {
    std::vector<RawProduction> productions;
    while (peek().kind != Token::end) productions.push_back(production());
    return productions;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }

  const Token& expect(Token::Kind kind, const char* what) {
    const Token& t = peek();
    if (t.kind != kind) fail(t, std::string("expected ") + what);
    ++pos_;
    return t;
  }

  [[noreturn]] void fail(const Token& at, const std::string& message) const {
    std::string got = at.kind == Token::end ? "end of input" : "'" + at.text + "'";
    throw Error(ErrorCode::syntax_error,
                "line " + std::to_string(at.line) + ": " + message + ", got " + got);
  }

  RawProduction production() {
    RawProduction p;
    p.type = expect(Token::ident, "type name").text;
    expect(Token::equals, "'='");
    if (peek().kind == Token::lparen) fail(peek(), "product types are not supported");
    p.constructors.push_back(constructor());
    while (peek().kind == Token::bar) {
      ++pos_;
      p.constructors.push_back(constructor());
    }
    if (peek().kind == Token::ident && peek().text == "attributes" &&
        peek(1).kind == Token::lparen) {
      ++pos_;
      field_list();  // dropped
    }
    return p;
  }

  RawConstructor constructor() {
    RawConstructor c;
    c.name = expect(Token::ident, "constructor name").text;
    if (peek().kind == Token::lparen) c.fields = field_list();
    std::unordered_set<std::string> names;
    for (const RawField& f : c.fields) {
      if (!names.insert(f.name).second) {
        throw Error(ErrorCode::syntax_error,
                    "duplicate field " + f.name + " in constructor " + c.name);
      }
    }
    return c;
  }

  std::vector<RawField> field_list() {
    expect(Token::lparen, "'('");
    std::vector<RawField> fields;
    if (peek().kind == Token::rparen) fail(peek(), "empty field list");
    while (true) {
      RawField f;
      f.type = expect(Token::ident, "field type").text;
      f.cardinality = Cardinality::single;
      if (peek().kind == Token::star) {
        f.cardinality = Cardinality::sequential;
        ++pos_;
      } else if (peek().kind == Token::question) {
        f.cardinality = Cardinality::optional;
        ++pos_;
      }
      f.name = expect(Token::ident, "field name").text;
      fields.push_back(std::move(f));
      if (peek().kind == Token::comma) {
        ++pos_;
        continue;
      }
      expect(Token::rparen, "',' or ')'");
      return fields;
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Grammar parse_grammar(std::string_view text, std::string_view root_type) {
  std::vector<RawProduction> productions = GrammarParser(tokenize(text)).parse();
  if (productions.empty()) throw Error(ErrorCode::syntax_error, "grammar has no productions");

  std::vector<TypeName> types;
  std::unordered_set<std::string> defined;
  for (const RawProduction& p : productions) {
    if (!defined.insert(p.type).second) throw Error(ErrorCode::duplicate_type, p.type);
    types.push_back({p.type, TypeKind::composite});
  }
  std::vector<Constructor> constructors;
  for (const RawProduction& p : productions) {
    for (const RawConstructor& rc : p.constructors) {
      Constructor c;
      c.name = rc.name;
      c.type = p.type;
      for (const RawField& rf : rc.fields) {
        if (defined.insert(rf.type).second) types.push_back({rf.type, TypeKind::primitive});
        c.fields.push_back({rf.name, rf.type, rf.cardinality});
      }
      constructors.push_back(std::move(c));
    }
  }
  if (!defined.count(std::string(root_type))) {
    throw Error(ErrorCode::unknown_root_type, std::string(root_type));
  }
  return Grammar(std::move(types), std::move(constructors), std::string(root_type));
}

std::shared_ptr<const Grammar> load_grammar(const std::string& path,
                                            std::string_view root_type) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open grammar file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return std::make_shared<const Grammar>(parse_grammar(buffer.str(), root_type));
}

std::vector<const Constructor*> constructors_of(const Grammar& grammar,
                                                std::string_view type) {
  return grammar.constructors_of(type);
}

std::string grammar_fingerprint(const Grammar& grammar) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](std::string_view s) {
    for (unsigned char ch : s) {
      hash ^= ch;
      hash *= 0x100000001b3ULL;
    }
  };
  mix("root:");
  mix(grammar.root_type());
  mix("\n");
  mix(grammar.render());
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

bool grammars_equal(const Grammar& a, const Grammar& b) {
  if (a.root_type() != b.root_type()) return false;
  if (a.types().size() != b.types().size()) return false;
  for (std::size_t i = 0; i < a.types().size(); ++i) {
    if (a.types()[i].name != b.types()[i].name || a.types()[i].kind != b.types()[i].kind) {
      return false;
    }
  }
  return a.render() == b.render();
}

}  // namespace absynth
