#ifndef ABSYNTH_TRANSITION_HPP_
#define ABSYNTH_TRANSITION_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absynth/ast.hpp"
#include "absynth/grammar.hpp"

namespace absynth {

inline constexpr std::string_view kEndToken = "</f>";
inline constexpr std::size_t kDefaultMaxActions = 200;

struct Action {
  enum class Kind { apply_constr, reduce, gen_token, sel_column };

  Kind kind = Kind::reduce;
  const Constructor* constructor = nullptr;  // apply_constr
  std::string token;                         // gen_token
  std::size_t column = 0;                    // sel_column

  static Action apply(const Constructor& c) { return {Kind::apply_constr, &c, {}, 0}; }
  static Action reduce() { return {Kind::reduce, nullptr, {}, 0}; }
  static Action gen(std::string token) { return {Kind::gen_token, nullptr, std::move(token), 0}; }
  static Action end() { return gen(std::string(kEndToken)); }
  static Action select_column(std::size_t k) { return {Kind::sel_column, nullptr, {}, k}; }

  bool is_end_token() const { return kind == Kind::gen_token && token == kEndToken; }

  friend bool operator==(const Action& a, const Action& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::apply_constr: return a.constructor == b.constructor;
      case Kind::reduce: return true;
      case Kind::gen_token: return a.token == b.token;
      case Kind::sel_column: return a.column == b.column;
    }
    return false;
  }
};

// The open field the next action expands.
struct FrontierRef {
  // (field index, value index) from the root to the node owning the field.
  std::vector<std::pair<std::size_t, std::size_t>> node_path;
  const Constructor* owner = nullptr;  // null for the virtual root field
  const Field* field = nullptr;
  std::size_t field_index = 0;
  std::size_t field_id = 0;  // Grammar::field_id, 0 for the root field
  int parent_step = -1;      // step that applied `owner`; -1 for the root field
};

struct Step {
  Action action;
  FrontierRef frontier;
};

// Legal continuations at a frontier. GenToken is an open class, so it is
// described rather than enumerated.
struct LegalActions {
  std::vector<const Constructor*> constructors;
  bool reduce = false;
  bool gen_token = false;
  bool end_token = false;     // GenToken[</f>]
  std::size_t columns = 0;    // SelColumn[0..columns)

  bool contains(const Action& action) const;
  // Every legal action except the open GenToken class.
  std::vector<Action> enumerate_closed() const;
};

// A partial derivation. Persistent: apply_action returns a new value that
// shares the tree and history with its input. Holds a raw pointer to the
// grammar, which must outlive it.
class Hypothesis {
 public:
  const Grammar& grammar() const { return *grammar_; }
  const TreePtr& tree() const { return tree_; }
  std::optional<FrontierRef> frontier() const;
  const std::vector<std::string>& pending_tokens() const { return pending_; }
  std::optional<std::size_t> table_width() const { return table_width_; }
  double score() const { return score_; }
  std::size_t length() const { return history_ ? history_->length : 0; }

  std::vector<Step> history() const;
  std::vector<Action> actions() const;
  const Action* last_action() const { return history_ ? &history_->step.action : nullptr; }

  // Closed values already held by the frontier field.
  std::size_t frontier_value_count() const;

 private:
  friend Hypothesis init_hypothesis(const Grammar&, std::optional<std::size_t>);
  friend Hypothesis apply_action(const Hypothesis&, const Action&, double);

  struct HistoryNode {
    Step step;
    std::shared_ptr<const HistoryNode> prev;
    std::size_t length;
  };

  const Grammar* grammar_ = nullptr;
  std::shared_ptr<const Field> root_field_;
  TreePtr tree_;
  std::vector<FrontierRef> open_;  // back() is the frontier
  std::shared_ptr<const HistoryNode> history_;
  std::vector<std::string> pending_;
  std::optional<std::size_t> table_width_;
  double score_ = 0.0;
};

// Root frontier is a virtual single field named "root" of the grammar's root
// type. With a table width, `idx` primitive fields take SelColumn actions.
Hypothesis init_hypothesis(const Grammar& grammar,
                           std::optional<std::size_t> table_width = std::nullopt);

bool is_complete(const Hypothesis& hyp);

LegalActions valid_actions(const Hypothesis& hyp);

// `logprob` is added to the score; it must be <= 0.
Hypothesis apply_action(const Hypothesis& hyp, const Action& action, double logprob = 0.0);

// Top-down, left-to-right oracle. With `use_columns`, `idx` fields emit
// SelColumn[k] instead of GenToken[k].
std::vector<Action> extract_actions(const Grammar& grammar, const AbstractTree& tree,
                                    bool use_columns = false);

TreePtr reconstruct(const Grammar& grammar, const std::vector<Action>& actions,
                    std::optional<std::size_t> table_width = std::nullopt);

// One action per line: APPLY <Name> | REDUCE | GENTOKEN <token> | SELCOL <k>.
std::string format_action(const Action& action);
Action parse_action(const Grammar& grammar, std::string_view line);
std::string format_actions(const std::vector<Action>& actions);
std::vector<Action> parse_actions(const Grammar& grammar, std::string_view text);

}  // namespace absynth

#endif  // ABSYNTH_TRANSITION_HPP_
