#include <cctype>
#include <regex>

#include "absynth/converters.hpp"
#include "absynth/error.hpp"
#include "absynth/text.hpp"

namespace absynth {

namespace {

enum class Tok { name, number, string, dot, lparen, rparen, comma, equals, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

const std::regex& identifier_re() {
  static const std::regex re("[A-Za-z_][A-Za-z0-9_]*");
  return re;
}

const std::regex& number_re() {
  static const std::regex re("-?[0-9]+(\\.[0-9]+)?([eE][-+]?[0-9]+)?");
  return re;
}

[[noreturn]] void unsupported(const std::string& what, std::size_t offset) {
  throw Error(ErrorCode::unsupported_construct, what + " at offset " + std::to_string(offset));
}

std::vector<Token> tokenize(std::string_view code) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto digit = [&](std::size_t k) {
    return k < code.size() && std::isdigit(static_cast<unsigned char>(code[k]));
  };
  while (i < code.size()) {
    const char c = code[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < code.size() && (std::isalnum(static_cast<unsigned char>(code[j])) || code[j] == '_')) ++j;
      out.push_back({Tok::name, std::string(code.substr(i, j - i)), i});
      i = j;
    } else if (digit(i) || (c == '-' && digit(i + 1))) {
      std::size_t j = i + 1;
      while (digit(j)) ++j;
      if (j < code.size() && code[j] == '.' && digit(j + 1)) {
        ++j;
        while (digit(j)) ++j;
      }
      if (j < code.size() && (code[j] == 'e' || code[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < code.size() && (code[k] == '+' || code[k] == '-')) ++k;
        if (digit(k)) {
          j = k;
          while (digit(j)) ++j;
        }
      }
      out.push_back({Tok::number, std::string(code.substr(i, j - i)), i});
      i = j;
    } else if (c == '\'' || c == '"') {
      std::string text;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < code.size()) {
        if (code[j] == '\\' && j + 1 < code.size()) {
          text += code[j + 1];
          j += 2;
        } else if (code[j] == c) {
          closed = true;
          ++j;
          break;
        } else {
          text += code[j++];
        }
      }
      if (!closed) unsupported("unterminated string", i);
      out.push_back({Tok::string, std::move(text), i});
      i = j;
    } else {
      Tok kind;
      switch (c) {
        case '.': kind = Tok::dot; break;
        case '(': kind = Tok::lparen; break;
        case ')': kind = Tok::rparen; break;
        case ',': kind = Tok::comma; break;
        case '=': kind = Tok::equals; break;
        default: unsupported(std::string("character '") + c + "'", i);
      }
      out.push_back({kind, std::string(1, c), i});
      ++i;
    }
  }
  out.push_back({Tok::end, "", code.size()});
  return out;
}

class PyReader {
 public:
  PyReader(std::vector<Token> toks, const Grammar& g) : toks_(std::move(toks)), g_(g) {}

  TreePtr statement() {
    TreePtr value = expr();
    if (peek().kind != Tok::end) unsupported("unexpected '" + peek().text + "'", peek().offset);
    return node(g_, "Expr", {value});
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) unsupported(std::string("expected ") + what, peek().offset);
    ++pos_;
  }

  TreePtr expr() {
    TreePtr e = atom();
    for (;;) {
      if (peek().kind == Tok::dot) {
        ++pos_;
        if (peek().kind != Tok::name) unsupported("expected attribute name", peek().offset);
        e = node(g_, "Attribute", {e, PrimitiveValue{{take().text}}});
      } else if (peek().kind == Tok::lparen) {
        ++pos_;
        e = call(e);
      } else {
        return e;
      }
    }
  }

  TreePtr call(TreePtr func) {
    std::vector<FieldValue> args;
    std::vector<FieldValue> keywords;
    while (peek().kind != Tok::rparen) {
      if (peek().kind == Tok::name && peek(1).kind == Tok::equals) {
        std::string arg = take().text;
        ++pos_;
        keywords.emplace_back(node(g_, "keyword", {PrimitiveValue{{arg}}, expr()}));
      } else {
        if (!keywords.empty()) unsupported("positional argument after keyword", peek().offset);
        args.emplace_back(expr());
      }
      if (peek().kind == Tok::comma) {
        ++pos_;
      } else if (peek().kind != Tok::rparen) {
        unsupported("expected ',' or ')'", peek().offset);
      }
    }
    ++pos_;
    return node(g_, "Call", {func, std::move(args), std::move(keywords)});
  }

  TreePtr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::name:
        ++pos_;
        return node(g_, "Name", {PrimitiveValue{{t.text}}});
      case Tok::number:
        ++pos_;
        return node(g_, "Num", {PrimitiveValue{{t.text}}});
      case Tok::string: {
        ++pos_;
        auto words = split_whitespace(t.text);
        if (words.empty()) unsupported("empty string literal", t.offset);
        return node(g_, "Str", {PrimitiveValue{std::move(words)}});
      }
      case Tok::lparen: {
        ++pos_;
        TreePtr inner = expr();
        expect(Tok::rparen, "')'");
        return inner;
      }
      default:
        unsupported(t.kind == Tok::end ? "unexpected end of input" : "unexpected '" + t.text + "'", t.offset);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Grammar& g_;
};

const AbstractTree& sub(const AbstractTree& t, std::size_t field, std::size_t i = 0) {
  const auto& values = t.fields.at(field).values;
  const auto* c = i < values.size() ? std::get_if<TreePtr>(&values[i]) : nullptr;
  if (!c || !*c) throw Error(ErrorCode::invalid_tree, t.constructor->name + " expects a subtree");
  return **c;
}

const std::vector<std::string>& tokens(const AbstractTree& t, std::size_t field) {
  const auto& values = t.fields.at(field).values;
  const auto* p = values.size() == 1 ? std::get_if<PrimitiveValue>(&values[0]) : nullptr;
  if (!p || p->tokens.empty()) throw Error(ErrorCode::invalid_tree, t.constructor->name + " needs a value");
  return p->tokens;
}

const std::string& matching(const AbstractTree& t, std::size_t field, const std::regex& re,
                            const char* what) {
  const auto& toks = tokens(t, field);
  if (toks.size() != 1 || !std::regex_match(toks[0], re)) {
    throw Error(ErrorCode::invalid_tree, "'" + join(toks, " ") + "' is not a valid " + what);
  }
  return toks[0];
}

std::string render(const AbstractTree& t) {
  const std::string& c = t.constructor->name;
  if (c == "Expr") return render(sub(t, 0));
  if (c == "Name") return matching(t, 0, identifier_re(), "identifier");
  if (c == "Num") return matching(t, 0, number_re(), "number");
  if (c == "Str") {
    std::string out = "'";
    for (char ch : join(tokens(t, 0), " ")) {
      if (ch == '\'' || ch == '\\') out += '\\';
      out += ch;
    }
    return out + "'";
  }
  if (c == "Attribute") {
    const AbstractTree& base = sub(t, 0);
    std::string b = render(base);
    // "1.x" would lex as a number.
    if (base.constructor->name == "Num") b = "(" + b + ")";
    return b + "." + matching(t, 1, identifier_re(), "identifier");
  }
  if (c == "Call") {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < t.fields[1].values.size(); ++i) parts.push_back(render(sub(t, 1, i)));
    for (std::size_t i = 0; i < t.fields[2].values.size(); ++i) {
      const AbstractTree& kw = sub(t, 2, i);
      if (kw.constructor->name != "keyword") throw Error(ErrorCode::invalid_tree, "expected keyword");
      parts.push_back(matching(kw, 0, identifier_re(), "identifier") + "=" + render(sub(kw, 1)));
    }
    return render(sub(t, 0)) + "(" + join(parts, ", ") + ")";
  }
  throw Error(ErrorCode::invalid_tree, "constructor " + c + " has no Python rendering");
}

}  // namespace

TreePtr pyexpr_to_ast(std::string_view code, const Grammar& grammar) {
  return PyReader(tokenize(code), grammar).statement();
}

std::string ast_to_pyexpr(const AbstractTree& tree) { return render(tree); }

}  // namespace absynth
