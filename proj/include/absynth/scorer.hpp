#ifndef ABSYNTH_SCORER_HPP_
#define ABSYNTH_SCORER_HPP_

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "absynth/converters.hpp"
#include "absynth/grammar.hpp"
#include "absynth/graph.hpp"
#include "absynth/transition.hpp"
#include "absynth/vocab.hpp"

namespace absynth {

enum class Precision { single, double_precision };

struct ScorerConfig {
  int embed_dim = 128;
  int hidden_dim = 256;
  int field_embed_dim = 64;
  int action_embed_dim = 64;
  double dropout_rate = 0.3;
  int vocab_cutoff = 2;
  Precision precision = Precision::single;
  bool parent_feeding = true;

  // Throws shape_mismatch on non-positive dims or dropout outside [0, 1).
  void validate() const;
};

nlohmann::json config_to_json(const ScorerConfig& config);
ScorerConfig config_from_json(const nlohmann::json& j);

// Lowercase + whitespace split.
std::vector<std::string> tokenize_utterance(std::string_view text);

// Decoder state after one step.
struct DecoderStep {
  Var hidden = -1;     // s_t
  Var cell = -1;
  Var attentional = -1;  // tanh(W_c [context : hidden])
  Var context = -1;
  Var attention = -1;    // weights over source positions
  Var parent_feed = -1;  // the p_t part of the input
};

template <typename Scalar>
class Scorer {
 public:
  using G = Graph<Scalar>;
  using M = Mat<Scalar>;

  struct Encoding {
    std::vector<std::string> tokens;
    std::vector<Var> states;  // one 2H vector per token
    Var memory = -1;          // states side by side (2H x n)
    Var init_hidden = -1;
    Var init_cell = -1;
    std::vector<Var> columns;  // one 2H vector per table column
    Var column_memory = -1;
  };

  Scorer(ScorerConfig config, std::shared_ptr<const Grammar> grammar, Vocab source, Vocab target,
         std::uint64_t seed);
  Scorer(const Scorer&) = delete;
  Scorer& operator=(const Scorer&) = delete;

  const ScorerConfig& config() const { return config_; }
  ScorerConfig& mutable_config() { return config_; }
  const Grammar& grammar() const { return *grammar_; }
  std::shared_ptr<const Grammar> grammar_ptr() const { return grammar_; }
  const Vocab& source_vocab() const { return source_; }
  const Vocab& target_vocab() const { return target_; }

  std::vector<Param<Scalar>*> params();
  Param<Scalar>* find_param(std::string_view name);
  void zero_grad();

  // `rng` switches dropout on.
  Encoding encode(G& g, const std::vector<std::string>& tokens, const TableContext* table,
                  std::mt19937_64* rng = nullptr);

  // `prev` is null at the first step; `parent_state` is the hidden state of
  // the step that created the frontier's owner (zeros at the root).
  DecoderStep decode_step(G& g, const Encoding& enc, const DecoderStep* prev, const Action* prev_action,
                          const FrontierRef& frontier, Var parent_state, std::mt19937_64* rng = nullptr);

  // Log-probability of every legal action. GenToken is enumerated over the
  // target vocabulary plus the utterance tokens.
  std::vector<std::pair<Action, Scalar>> action_logprobs(G& g, const Encoding& enc, const DecoderStep& step,
                                                         const LegalActions& legal);

  Var action_logprob(G& g, const Encoding& enc, const DecoderStep& step, const LegalActions& legal,
                     const Action& action);

  // Teacher-forced negative log-likelihood of `actions`. Throws
  // illegal_oracle when the sequence cannot be replayed.
  Var sequence_nll(G& g, const std::vector<std::string>& tokens, const std::vector<Action>& actions,
                   const TableContext* table, std::mt19937_64* rng = nullptr);

  Scalar sequence_nll_value(const std::vector<std::string>& tokens, const std::vector<Action>& actions,
                            const TableContext* table = nullptr);

 private:
  struct Heads {
    // closed choice: constructors (+ reduce), or reduce + token slot
    Var closed = -1;
    std::vector<int> closed_ids;
    // token generation
    Var gate = -1;  // log [p(gen), p(copy)]
    Var vocab = -1;
    std::vector<int> vocab_ids;
    Var pointer = -1;
    // columns
    Var column = -1;
  };

  Heads heads(G& g, const Encoding& enc, const DecoderStep& step, const LegalActions& legal);
  Var token_logprob(G& g, const Encoding& enc, const Heads& h, const std::string& token, bool end_legal);
  int closed_index(const Heads& h, int id) const;
  Var prev_action_embedding(G& g, const Encoding& enc, const Action* action);
  std::pair<Var, Var> run_lstm(G& g, Param<Scalar>& w, Param<Scalar>& b, const std::vector<Var>& xs,
                               bool reverse, std::vector<Var>* outputs);
  Var dropout(G& g, Var x, std::mt19937_64* rng);

  Param<Scalar>& add_param(const std::string& name, int rows, int cols);

  ScorerConfig config_;
  std::shared_ptr<const Grammar> grammar_;
  Vocab source_;
  Vocab target_;
  int reduce_id_ = 0;
  int slot_id_ = 0;
  std::size_t end_id_ = 0;

  std::deque<Param<Scalar>> params_;
  Param<Scalar>* src_emb_;
  Param<Scalar>* enc_fwd_w_;
  Param<Scalar>* enc_fwd_b_;
  Param<Scalar>* enc_bwd_w_;
  Param<Scalar>* enc_bwd_b_;
  Param<Scalar>* col_fwd_w_;
  Param<Scalar>* col_fwd_b_;
  Param<Scalar>* col_bwd_w_;
  Param<Scalar>* col_bwd_b_;
  Param<Scalar>* init_w_;
  Param<Scalar>* init_b_;
  Param<Scalar>* dec_w_;
  Param<Scalar>* dec_b_;
  Param<Scalar>* att_w_;
  Param<Scalar>* comb_w_;
  Param<Scalar>* act_emb_;
  Param<Scalar>* field_emb_;
  Param<Scalar>* tok_emb_;
  Param<Scalar>* constr_w_;
  Param<Scalar>* gen_w_;
  Param<Scalar>* gen_b_;
  Param<Scalar>* copy_w_;
  Param<Scalar>* gate_w_;
  Param<Scalar>* gate_b_;
  Param<Scalar>* colptr_w_;
  Param<Scalar>* colact_w_;
};

extern template class Scorer<float>;
extern template class Scorer<double>;
extern template class Scorer<long double>;

}  // namespace absynth

#endif  // ABSYNTH_SCORER_HPP_
