#include "absynth/transition.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "absynth/error.hpp"
#include "absynth/text.hpp"

namespace absynth {

namespace {

constexpr std::string_view kColumnType = "idx";

bool closes_after_value(const Field& f) { return f.cardinality != Cardinality::sequential; }

const AbstractTree& node_at(const AbstractTree& root,
                            const std::vector<std::pair<std::size_t, std::size_t>>& path) {
  const AbstractTree* t = &root;
  for (const auto& [field, index] : path) {
    t = std::get<TreePtr>(t->fields[field].values[index]).get();
  }
  return *t;
}

TreePtr append_value(const TreePtr& tree, const FrontierRef& at, FieldValue v, std::size_t depth) {
  AbstractTree copy = *tree;
  if (depth == at.node_path.size()) {
    copy.fields[at.field_index].values.push_back(std::move(v));
  } else {
    auto [field, index] = at.node_path[depth];
    FieldValue& slot = copy.fields[field].values[index];
    slot = append_value(std::get<TreePtr>(slot), at, std::move(v), depth + 1);
  }
  return std::make_shared<const AbstractTree>(std::move(copy));
}

std::string describe(const FrontierRef& f) {
  std::string where = f.owner ? f.owner->name + "." + f.field->name : std::string("root");
  return where + " (" + f.field->type + ", " + std::string(to_string(f.field->cardinality)) + ")";
}

}  // namespace

bool LegalActions::contains(const Action& action) const {
  switch (action.kind) {
    case Action::Kind::apply_constr:
      return std::find(constructors.begin(), constructors.end(), action.constructor) !=
             constructors.end();
    case Action::Kind::reduce:
      return reduce;
    case Action::Kind::gen_token:
      if (action.token == kEndToken) return end_token;
      return gen_token && !action.token.empty();
    case Action::Kind::sel_column:
      return action.column < columns;
  }
  return false;
}

std::vector<Action> LegalActions::enumerate_closed() const {
  std::vector<Action> out;
  for (const Constructor* c : constructors) out.push_back(Action::apply(*c));
  if (reduce) out.push_back(Action::reduce());
  if (end_token) out.push_back(Action::end());
  for (std::size_t k = 0; k < columns; ++k) out.push_back(Action::select_column(k));
  return out;
}

std::optional<FrontierRef> Hypothesis::frontier() const {
  if (open_.empty()) return std::nullopt;
  return open_.back();
}

std::vector<Step> Hypothesis::history() const {
  std::vector<Step> out(length());
  std::size_t i = out.size();
  for (const HistoryNode* n = history_.get(); n; n = n->prev.get()) out[--i] = n->step;
  return out;
}

std::vector<Action> Hypothesis::actions() const {
  std::vector<Action> out(length());
  std::size_t i = out.size();
  for (const HistoryNode* n = history_.get(); n; n = n->prev.get()) out[--i] = n->step.action;
  return out;
}

std::size_t Hypothesis::frontier_value_count() const {
  if (open_.empty()) return 0;
  const FrontierRef& f = open_.back();
  if (!f.owner) return tree_ ? 1 : 0;
  return node_at(*tree_, f.node_path).fields[f.field_index].values.size();
}

Hypothesis init_hypothesis(const Grammar& grammar, std::optional<std::size_t> table_width) {
  Hypothesis h;
  h.grammar_ = &grammar;
  h.root_field_ = std::make_shared<const Field>(Field{"root", grammar.root_type(), Cardinality::single});
  FrontierRef root;
  root.field = h.root_field_.get();
  h.open_.push_back(std::move(root));
  h.table_width_ = table_width;
  return h;
}

bool is_complete(const Hypothesis& hyp) { return !hyp.frontier().has_value(); }

LegalActions valid_actions(const Hypothesis& hyp) {
  auto frontier = hyp.frontier();
  if (!frontier) throw Error(ErrorCode::complete_hypothesis, "derivation is complete");
  const Grammar& g = hyp.grammar();
  const Field& field = *frontier->field;
  LegalActions legal;
  const bool pending = !hyp.pending_tokens().empty();
  const bool may_close =
      field.cardinality == Cardinality::sequential ||
      (field.cardinality == Cardinality::optional && hyp.frontier_value_count() == 0);
  legal.reduce = may_close && !pending;
  if (g.is_composite(field.type)) {
    legal.constructors = g.constructors_of(field.type);
  } else if (field.type == kColumnType && hyp.table_width()) {
    legal.columns = *hyp.table_width();
  } else {
    legal.gen_token = true;
    legal.end_token = is_multi_token(field) && pending;
  }
  return legal;
}

Hypothesis apply_action(const Hypothesis& hyp, const Action& action, double logprob) {
  const LegalActions legal = valid_actions(hyp);
  const FrontierRef frontier = *hyp.frontier();
  const Field& field = *frontier.field;
  if (!legal.contains(action)) {
    std::string rule;
    switch (action.kind) {
      case Action::Kind::apply_constr:
        rule = "ApplyConstr[" + (action.constructor ? action.constructor->name : "?") +
               "] requires a composite frontier of the constructor's type";
        break;
      case Action::Kind::reduce:
        rule = "Reduce requires an optional (empty) or sequential frontier with no token in progress";
        break;
      case Action::Kind::gen_token:
        rule = action.token == kEndToken
                   ? "GenToken[</f>] requires a string frontier with at least one token"
                   : "GenToken requires a non-empty token at a primitive frontier";
        break;
      case Action::Kind::sel_column:
        rule = "SelColumn[" + std::to_string(action.column) +
               "] requires an idx frontier with an attached table wider than k";
        break;
    }
    throw Error(ErrorCode::illegal_action, rule + "; frontier is " + describe(frontier));
  }

  Hypothesis next = hyp;
  next.score_ += logprob;
  const std::size_t step = hyp.length();
  auto attach = [&](FieldValue v) {
    if (!frontier.owner) {
      next.tree_ = std::get<TreePtr>(std::move(v));
    } else {
      next.tree_ = append_value(hyp.tree_, frontier, std::move(v), 0);
    }
  };

  switch (action.kind) {
    case Action::Kind::apply_constr: {
      const Constructor& c = *action.constructor;
      const std::size_t index = hyp.frontier_value_count();
      attach(std::make_shared<const AbstractTree>(make_node(c)));
      if (closes_after_value(field)) next.open_.pop_back();
      auto path = frontier.node_path;
      if (frontier.owner) path.emplace_back(frontier.field_index, index);
      for (std::size_t i = c.fields.size(); i-- > 0;) {
        FrontierRef child;
        child.node_path = path;
        child.owner = &c;
        child.field = &c.fields[i];
        child.field_index = i;
        child.field_id = hyp.grammar().field_id(c, i);
        child.parent_step = static_cast<int>(step);
        next.open_.push_back(std::move(child));
      }
      break;
    }
    case Action::Kind::reduce:
      next.open_.pop_back();
      break;
    case Action::Kind::gen_token:
      if (is_multi_token(field)) {
        if (action.is_end_token()) {
          attach(PrimitiveValue{std::move(next.pending_)});
          next.pending_.clear();
          if (closes_after_value(field)) next.open_.pop_back();
        } else {
          next.pending_.push_back(action.token);
        }
      } else {
        attach(PrimitiveValue{{action.token}});
        if (closes_after_value(field)) next.open_.pop_back();
      }
      break;
    case Action::Kind::sel_column:
      attach(PrimitiveValue{{std::to_string(action.column)}});
      if (closes_after_value(field)) next.open_.pop_back();
      break;
  }

  next.history_ = std::make_shared<const Hypothesis::HistoryNode>(
      Hypothesis::HistoryNode{Step{action, frontier}, hyp.history_, step + 1});
  return next;
}

namespace {

void emit_node(const Grammar& g, const AbstractTree& t, bool use_columns, std::vector<Action>& out) {
  out.push_back(Action::apply(*t.constructor));
  for (const RealizedField& rf : t.fields) {
    const Field& f = *rf.field;
    for (const FieldValue& v : rf.values) {
      if (const auto* child = std::get_if<TreePtr>(&v)) {
        emit_node(g, **child, use_columns, out);
        continue;
      }
      const PrimitiveValue& pv = std::get<PrimitiveValue>(v);
      if (use_columns && f.type == kColumnType) {
        std::size_t k = 0;
        const std::string& tok = pv.tokens.front();
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), k);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
          throw Error(ErrorCode::invalid_tree, "column index '" + tok + "' is not an integer");
        }
        out.push_back(Action::select_column(k));
      } else if (is_multi_token(f)) {
        for (const std::string& tok : pv.tokens) out.push_back(Action::gen(tok));
        out.push_back(Action::end());
      } else {
        out.push_back(Action::gen(pv.tokens.front()));
      }
    }
    if (f.cardinality == Cardinality::sequential ||
        (f.cardinality == Cardinality::optional && rf.values.empty())) {
      out.push_back(Action::reduce());
    }
  }
}

}  // namespace

std::vector<Action> extract_actions(const Grammar& grammar, const AbstractTree& tree,
                                    bool use_columns) {
  auto violations = validate_ast(grammar, tree);
  if (!violations.empty()) {
    throw Error(ErrorCode::invalid_tree,
                violations.front().message + " at '" + violations.front().path + "'");
  }
  if (tree.constructor->type != grammar.root_type()) {
    throw Error(ErrorCode::invalid_tree, "root constructor " + tree.constructor->name +
                                             " is not of root type " + grammar.root_type());
  }
  std::vector<Action> out;
  emit_node(grammar, tree, use_columns, out);
  return out;
}

TreePtr reconstruct(const Grammar& grammar, const std::vector<Action>& actions,
                    std::optional<std::size_t> table_width) {
  Hypothesis h = init_hypothesis(grammar, table_width);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (is_complete(h)) {
      throw Error(ErrorCode::trailing_actions,
                  std::to_string(actions.size() - i) + " actions after completion at index " +
                      std::to_string(i));
    }
    try {
      h = apply_action(h, actions[i]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::illegal_action) throw;
      throw Error(ErrorCode::illegal_action, "at index " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!is_complete(h)) {
    throw Error(ErrorCode::incomplete_sequence,
                "derivation open after " + std::to_string(actions.size()) + " actions");
  }
  return h.tree();
}

std::string format_action(const Action& action) {
  switch (action.kind) {
    case Action::Kind::apply_constr:
      return "APPLY " + action.constructor->name;
    case Action::Kind::reduce:
      return "REDUCE";
    case Action::Kind::gen_token: {
      const std::string& t = action.token;
      const bool needs_quotes =
          t.empty() || t.front() == '"' ||
          std::any_of(t.begin(), t.end(), [](char ch) {
            return ch == '\\' || std::isspace(static_cast<unsigned char>(ch));
          });
      return "GENTOKEN " + (needs_quotes ? quote(t) : t);
    }
    case Action::Kind::sel_column:
      return "SELCOL " + std::to_string(action.column);
  }
  return "";
}

Action parse_action(const Grammar& grammar, std::string_view line) {
  line = trim(line);
  auto fail = [&line](const std::string& why) -> Error {
    return Error(ErrorCode::parse_error, why + ": '" + std::string(line) + "'");
  };
  auto space = line.find(' ');
  std::string_view verb = line.substr(0, space);
  std::string_view rest = space == std::string_view::npos ? std::string_view{} : trim(line.substr(space));
  if (verb == "REDUCE") {
    if (!rest.empty()) throw fail("REDUCE takes no argument");
    return Action::reduce();
  }
  if (verb == "APPLY") {
    const Constructor* c = grammar.find_constructor(rest);
    if (!c) throw fail("unknown constructor");
    return Action::apply(*c);
  }
  if (verb == "GENTOKEN") {
    if (!rest.empty() && rest.front() == '"') {
      std::size_t used = 0;
      auto s = unquote(rest, &used);
      if (!s || used != rest.size()) throw fail("bad quoted token");
      return Action::gen(*s);
    }
    if (rest.empty()) throw fail("GENTOKEN needs a token");
    return Action::gen(std::string(rest));
  }
  if (verb == "SELCOL") {
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
    if (rest.empty() || ec != std::errc() || ptr != rest.data() + rest.size()) {
      throw fail("SELCOL needs a column index");
    }
    return Action::select_column(k);
  }
  throw fail("unknown action");
}

std::string format_actions(const std::vector<Action>& actions) {
  std::string out;
  for (const Action& a : actions) {
    out += format_action(a);
    out += '\n';
  }
  return out;
}

std::vector<Action> parse_actions(const Grammar& grammar, std::string_view text) {
  std::vector<Action> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    out.push_back(parse_action(grammar, line));
  }
  return out;
}

}  // namespace absynth
