#include "absynth/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absynth/error.hpp"
#include "absynth/text.hpp"

namespace absynth {

void ScorerConfig::validate() const {
  for (int d : {embed_dim, hidden_dim, field_embed_dim, action_embed_dim}) {
    if (d < 1) throw Error(ErrorCode::shape_mismatch, "all dimensions must be >= 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::shape_mismatch, "dropout_rate must be in [0, 1)");
  }
  if (vocab_cutoff < 1) throw Error(ErrorCode::shape_mismatch, "vocab_cutoff must be >= 1");
}

nlohmann::json config_to_json(const ScorerConfig& c) {
  return {{"embed_dim", c.embed_dim},
          {"hidden_dim", c.hidden_dim},
          {"field_embed_dim", c.field_embed_dim},
          {"action_embed_dim", c.action_embed_dim},
          {"dropout_rate", c.dropout_rate},
          {"vocab_cutoff", c.vocab_cutoff},
          {"precision", c.precision == Precision::single ? "single" : "double"},
          {"parent_feeding", c.parent_feeding}};
}

ScorerConfig config_from_json(const nlohmann::json& j) {
  ScorerConfig c;
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.field_embed_dim = j.value("field_embed_dim", c.field_embed_dim);
  c.action_embed_dim = j.value("action_embed_dim", c.action_embed_dim);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  c.vocab_cutoff = j.value("vocab_cutoff", c.vocab_cutoff);
  c.precision = j.value("precision", std::string("single")) == "double" ? Precision::double_precision
                                                                       : Precision::single;
  c.parent_feeding = j.value("parent_feeding", c.parent_feeding);
  c.validate();
  return c;
}

std::vector<std::string> tokenize_utterance(std::string_view text) {
  return split_whitespace(to_lower(text));
}

namespace {

// Uniform in [0, 1) from raw engine bits, so values do not depend on the
// standard library's distribution implementation.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename Scalar>
Scalar log_add(Scalar a, Scalar b) {
  if (a == -std::numeric_limits<Scalar>::infinity()) return b;
  if (b == -std::numeric_limits<Scalar>::infinity()) return a;
  const Scalar m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

template <typename Scalar>
Param<Scalar>& Scorer<Scalar>::add_param(const std::string& name, int rows, int cols) {
  params_.emplace_back(name, rows, cols);
  return params_.back();
}

template <typename Scalar>
Scorer<Scalar>::Scorer(ScorerConfig config, std::shared_ptr<const Grammar> grammar, Vocab source,
                       Vocab target, std::uint64_t seed)
    : config_(config), grammar_(std::move(grammar)), source_(std::move(source)), target_(std::move(target)) {
  config_.validate();
  end_id_ = target_.add(std::string(kEndToken));
  const int E = config_.embed_dim;
  const int H = config_.hidden_dim;
  const int F = config_.field_embed_dim;
  const int A = config_.action_embed_dim;
  const int C = static_cast<int>(grammar_->constructors().size());
  reduce_id_ = C;
  slot_id_ = C + 1;
  const int dec_in = A + H + F + (config_.parent_feeding ? H : 0);

  src_emb_ = &add_param("src_emb", E, static_cast<int>(source_.size()));
  enc_fwd_w_ = &add_param("enc_fwd_w", 4 * H, E + H);
  enc_fwd_b_ = &add_param("enc_fwd_b", 4 * H, 1);
  enc_bwd_w_ = &add_param("enc_bwd_w", 4 * H, E + H);
  enc_bwd_b_ = &add_param("enc_bwd_b", 4 * H, 1);
  col_fwd_w_ = &add_param("col_fwd_w", 4 * H, E + H);
  col_fwd_b_ = &add_param("col_fwd_b", 4 * H, 1);
  col_bwd_w_ = &add_param("col_bwd_w", 4 * H, E + H);
  col_bwd_b_ = &add_param("col_bwd_b", 4 * H, 1);
  init_w_ = &add_param("init_w", H, 2 * H);
  init_b_ = &add_param("init_b", H, 1);
  dec_w_ = &add_param("dec_w", 4 * H, dec_in + H);
  dec_b_ = &add_param("dec_b", 4 * H, 1);
  att_w_ = &add_param("att_w", 2 * H, H);
  comb_w_ = &add_param("comb_w", H, 3 * H);
  act_emb_ = &add_param("act_emb", A, C + 2);
  field_emb_ = &add_param("field_emb", F, static_cast<int>(grammar_->field_count()));
  tok_emb_ = &add_param("tok_emb", A, static_cast<int>(target_.size()));
  constr_w_ = &add_param("constr_w", A, H);
  gen_w_ = &add_param("gen_w", A, H);
  gen_b_ = &add_param("gen_b", static_cast<int>(target_.size()), 1);
  copy_w_ = &add_param("copy_w", 2 * H, H);
  gate_w_ = &add_param("gate_w", 2, H);
  gate_b_ = &add_param("gate_b", 2, 1);
  colptr_w_ = &add_param("colptr_w", 2 * H, H);
  colact_w_ = &add_param("colact_w", A, 2 * H);

  std::mt19937_64 rng(seed);
  for (auto& p : params_) {
    for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
      for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
        p.value(i, j) = static_cast<Scalar>(0.2 * unit(rng) - 0.1);
      }
    }
  }
  for (Param<Scalar>* b : {enc_fwd_b_, enc_bwd_b_, col_fwd_b_, col_bwd_b_, dec_b_}) {
    b->value.middleRows(H, H).setOnes();  // forget gate
  }
}

template <typename Scalar>
std::vector<Param<Scalar>*> Scorer<Scalar>::params() {
  std::vector<Param<Scalar>*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

template <typename Scalar>
Param<Scalar>* Scorer<Scalar>::find_param(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

template <typename Scalar>
void Scorer<Scalar>::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

template <typename Scalar>
Var Scorer<Scalar>::dropout(G& g, Var x, std::mt19937_64* rng) {
  if (!rng || config_.dropout_rate <= 0.0) return x;
  const double keep = 1.0 - config_.dropout_rate;
  M mask(g.value(x).rows(), 1);
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    mask(i, 0) = unit(*rng) < keep ? static_cast<Scalar>(1.0 / keep) : Scalar(0);
  }
  return g.mask(x, std::move(mask));
}

template <typename Scalar>
std::pair<Var, Var> Scorer<Scalar>::run_lstm(G& g, Param<Scalar>& w, Param<Scalar>& b,
                                             const std::vector<Var>& xs, bool reverse,
                                             std::vector<Var>* outputs) {
  const int H = config_.hidden_dim;
  Var h = g.zeros(H);
  Var c = g.zeros(H);
  if (outputs) outputs->assign(xs.size(), -1);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const std::size_t i = reverse ? xs.size() - 1 - k : k;
    Var out = g.lstm(w, b, xs[i], h, c);
    h = g.slice(out, 0, H);
    c = g.slice(out, H, H);
    if (outputs) (*outputs)[i] = h;
  }
  return {h, c};
}

template <typename Scalar>
typename Scorer<Scalar>::Encoding Scorer<Scalar>::encode(G& g, const std::vector<std::string>& tokens,
                                                         const TableContext* table, std::mt19937_64* rng) {
  if (tokens.empty()) throw Error(ErrorCode::shape_mismatch, "cannot encode an empty utterance");
  Encoding enc;
  enc.tokens = tokens;
  std::vector<Var> xs;
  for (const auto& t : tokens) xs.push_back(dropout(g, g.lookup(*src_emb_, source_.id(t)), rng));
  std::vector<Var> fwd, bwd;
  auto [hf, cf] = run_lstm(g, *enc_fwd_w_, *enc_fwd_b_, xs, false, &fwd);
  auto [hb, cb] = run_lstm(g, *enc_bwd_w_, *enc_bwd_b_, xs, true, &bwd);
  (void)hf;
  (void)hb;
  for (std::size_t i = 0; i < tokens.size(); ++i) enc.states.push_back(g.concat({fwd[i], bwd[i]}));
  enc.memory = g.hcat(enc.states);
  enc.init_cell = g.affine(*init_w_, g.concat({cf, cb}), init_b_);
  enc.init_hidden = g.tanh(enc.init_cell);

  if (table) {
    for (const auto& name : table->column_names()) {
      std::vector<Var> cx;
      for (const auto& t : tokenize_utterance(name)) cx.push_back(g.lookup(*src_emb_, source_.id(t)));
      std::vector<Var> cbwd;
      auto [last_f, unused_f] = run_lstm(g, *col_fwd_w_, *col_fwd_b_, cx, false, nullptr);
      run_lstm(g, *col_bwd_w_, *col_bwd_b_, cx, true, &cbwd);
      (void)unused_f;
      enc.columns.push_back(g.concat({last_f, cbwd.front()}));
    }
    if (!enc.columns.empty()) enc.column_memory = g.hcat(enc.columns);
  }
  return enc;
}

template <typename Scalar>
Var Scorer<Scalar>::prev_action_embedding(G& g, const Encoding& enc, const Action* action) {
  if (!action) return g.zeros(config_.action_embed_dim);
  switch (action->kind) {
    case Action::Kind::apply_constr:
      return g.lookup(*act_emb_, action->constructor->id);
    case Action::Kind::reduce:
      return g.lookup(*act_emb_, reduce_id_);
    case Action::Kind::gen_token:
      return g.lookup(*tok_emb_, target_.id(action->token));
    case Action::Kind::sel_column:
      if (action->column >= enc.columns.size()) {
        throw Error(ErrorCode::missing_table, "SelColumn without a matching table column");
      }
      return g.affine(*colact_w_, enc.columns[action->column]);
  }
  return g.zeros(config_.action_embed_dim);
}

template <typename Scalar>
DecoderStep Scorer<Scalar>::decode_step(G& g, const Encoding& enc, const DecoderStep* prev,
                                        const Action* prev_action, const FrontierRef& frontier,
                                        Var parent_state, std::mt19937_64* rng) {
  const int H = config_.hidden_dim;
  if (frontier.field_id >= grammar_->field_count()) throw Error(ErrorCode::shape_mismatch, "field id");
  DecoderStep step;
  Var a_prev = prev_action_embedding(g, enc, prev_action);
  Var att_prev = prev ? prev->attentional : g.zeros(H);
  Var h_prev = prev ? prev->hidden : enc.init_hidden;
  Var c_prev = prev ? prev->cell : enc.init_cell;
  Var field = g.lookup(*field_emb_, frontier.field_id);
  if (config_.parent_feeding) {
    if (g.value(parent_state).rows() != H) throw Error(ErrorCode::shape_mismatch, "parent state size");
    step.parent_feed = g.concat({field, parent_state});
  } else {
    step.parent_feed = field;
  }
  Var x = g.concat({a_prev, att_prev, step.parent_feed});
  Var out = g.lstm(*dec_w_, *dec_b_, x, h_prev, c_prev);
  step.hidden = g.slice(out, 0, H);
  step.cell = g.slice(out, H, H);
  step.attention = g.softmax(g.mat_t_vec(enc.memory, g.affine(*att_w_, step.hidden)));
  step.context = g.mat_vec(enc.memory, step.attention);
  step.attentional = dropout(g, g.tanh(g.affine(*comb_w_, g.concat({step.context, step.hidden}))), rng);
  return step;
}

template <typename Scalar>
typename Scorer<Scalar>::Heads Scorer<Scalar>::heads(G& g, const Encoding& enc, const DecoderStep& step,
                                                     const LegalActions& legal) {
  Heads h;
  const Var att = step.attentional;
  const bool open_head = legal.gen_token || legal.columns > 0;
  if (!legal.constructors.empty()) {
    for (const Constructor* c : legal.constructors) h.closed_ids.push_back(static_cast<int>(c->id));
    if (legal.reduce) h.closed_ids.push_back(reduce_id_);
  } else if (legal.reduce) {
    h.closed_ids.push_back(reduce_id_);
    if (open_head) h.closed_ids.push_back(slot_id_);
  }
  if (!h.closed_ids.empty()) {
    h.closed = g.log_softmax(g.gather_dot(*act_emb_, h.closed_ids, g.affine(*constr_w_, att)));
  }
  if (legal.gen_token) {
    h.gate = g.log_softmax(g.affine(*gate_w_, att, gate_b_));
    for (std::size_t i = 0; i < target_.size(); ++i) {
      if (i != end_id_ || legal.end_token) h.vocab_ids.push_back(static_cast<int>(i));
    }
    h.vocab = g.log_softmax(g.gather_dot(*tok_emb_, h.vocab_ids, g.affine(*gen_w_, att), gen_b_));
    h.pointer = g.log_softmax(g.mat_t_vec(enc.memory, g.affine(*copy_w_, att)));
  }
  if (legal.columns > 0) {
    if (enc.columns.size() != legal.columns) {
      throw Error(ErrorCode::missing_table, "column selection needs the table that sized the hypothesis");
    }
    h.column = g.log_softmax(g.mat_t_vec(enc.column_memory, g.affine(*colptr_w_, att)));
  }
  return h;
}

template <typename Scalar>
int Scorer<Scalar>::closed_index(const Heads& h, int id) const {
  auto it = std::find(h.closed_ids.begin(), h.closed_ids.end(), id);
  if (it == h.closed_ids.end()) throw Error(ErrorCode::illegal_action, "action outside the legal set");
  return static_cast<int>(it - h.closed_ids.begin());
}

template <typename Scalar>
Var Scorer<Scalar>::token_logprob(G& g, const Encoding& enc, const Heads& h, const std::string& token,
                                  bool end_legal) {
  std::vector<Var> parts;
  if (auto id = target_.find(token); id && (*id != end_id_ || end_legal)) {
    const int pos = (!end_legal && *id > end_id_) ? static_cast<int>(*id) - 1 : static_cast<int>(*id);
    parts.push_back(g.add(g.pick(h.gate, 0), g.pick(h.vocab, pos)));
  }
  std::vector<Var> hits;
  for (std::size_t i = 0; i < enc.tokens.size(); ++i) {
    if (enc.tokens[i] == token) hits.push_back(g.pick(h.pointer, static_cast<int>(i)));
  }
  if (!hits.empty()) parts.push_back(g.add(g.pick(h.gate, 1), g.logsumexp(hits)));
  if (parts.empty()) {
    // Neither generable nor copyable: scored as <unk>.
    parts.push_back(g.add(g.pick(h.gate, 0), g.pick(h.vocab, 0)));
  }
  return g.logsumexp(parts);
}

template <typename Scalar>
Var Scorer<Scalar>::action_logprob(G& g, const Encoding& enc, const DecoderStep& step,
                                   const LegalActions& legal, const Action& action) {
  if (!legal.contains(action)) throw Error(ErrorCode::illegal_action, format_action(action) + " is not legal here");
  Heads h = heads(g, enc, step, legal);
  auto with_slot = [&](Var lp) {
    return h.closed >= 0 ? g.add(g.pick(h.closed, closed_index(h, slot_id_)), lp) : lp;
  };
  switch (action.kind) {
    case Action::Kind::apply_constr:
      return g.pick(h.closed, closed_index(h, static_cast<int>(action.constructor->id)));
    case Action::Kind::reduce:
      return g.pick(h.closed, closed_index(h, reduce_id_));
    case Action::Kind::gen_token:
      return with_slot(token_logprob(g, enc, h, action.token, legal.end_token));
    case Action::Kind::sel_column:
      return with_slot(g.pick(h.column, static_cast<int>(action.column)));
  }
  throw Error(ErrorCode::illegal_action, "unknown action kind");
}

template <typename Scalar>
std::vector<std::pair<Action, Scalar>> Scorer<Scalar>::action_logprobs(G& g, const Encoding& enc,
                                                                       const DecoderStep& step,
                                                                       const LegalActions& legal) {
  Heads h = heads(g, enc, step, legal);
  std::vector<std::pair<Action, Scalar>> out;
  auto closed = [&](int id) { return g.value(h.closed)(closed_index(h, id), 0); };
  for (const Constructor* c : legal.constructors) out.emplace_back(Action::apply(*c), closed(static_cast<int>(c->id)));
  if (legal.reduce) out.emplace_back(Action::reduce(), closed(reduce_id_));
  const Scalar slot = (h.closed >= 0 && (legal.gen_token || legal.columns > 0)) ? closed(slot_id_) : Scalar(0);

  if (legal.gen_token) {
    const M& gate = g.value(h.gate);
    const M& vocab = g.value(h.vocab);
    const M& ptr = g.value(h.pointer);
    const Scalar ninf = -std::numeric_limits<Scalar>::infinity();
    auto copy_lp = [&](const std::string& tok) {
      Scalar lp = ninf;
      for (std::size_t i = 0; i < enc.tokens.size(); ++i) {
        if (enc.tokens[i] == tok) lp = log_add(lp, ptr(static_cast<Eigen::Index>(i), 0));
      }
      return lp == ninf ? ninf : gate(1, 0) + lp;
    };
    for (std::size_t pos = 0; pos < h.vocab_ids.size(); ++pos) {
      const std::string& tok = target_.token(h.vocab_ids[pos]);
      const Scalar lp = log_add(gate(0, 0) + vocab(static_cast<Eigen::Index>(pos), 0), copy_lp(tok));
      out.emplace_back(Action::gen(tok), slot + lp);
    }
    std::vector<std::string> seen;
    for (const auto& tok : enc.tokens) {
      if (target_.contains(tok) || std::find(seen.begin(), seen.end(), tok) != seen.end()) continue;
      seen.push_back(tok);
      out.emplace_back(Action::gen(tok), slot + copy_lp(tok));
    }
  }
  for (std::size_t k = 0; k < legal.columns; ++k) {
    out.emplace_back(Action::select_column(k), slot + g.value(h.column)(static_cast<Eigen::Index>(k), 0));
  }
  return out;
}

template <typename Scalar>
Var Scorer<Scalar>::sequence_nll(G& g, const std::vector<std::string>& tokens, const std::vector<Action>& actions,
                                 const TableContext* table, std::mt19937_64* rng) {
  Encoding enc = encode(g, tokens, table, rng);
  Hypothesis hyp = init_hypothesis(*grammar_, table ? std::optional<std::size_t>(table->width()) : std::nullopt);
  std::vector<Var> hidden;
  std::vector<Var> terms;
  std::optional<DecoderStep> prev;
  const Var root_parent = g.zeros(config_.hidden_dim);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    auto frontier = hyp.frontier();
    const LegalActions legal = valid_actions(hyp);
    if (!frontier || !legal.contains(actions[t])) {
      throw Error(ErrorCode::illegal_oracle,
                  "action " + std::to_string(t) + " (" + format_action(actions[t]) + ") cannot be replayed");
    }
    const Var parent = frontier->parent_step < 0 ? root_parent : hidden.at(frontier->parent_step);
    DecoderStep step = decode_step(g, enc, prev ? &*prev : nullptr, t ? &actions[t - 1] : nullptr, *frontier,
                                   parent, rng);
    hidden.push_back(step.hidden);
    terms.push_back(action_logprob(g, enc, step, legal, actions[t]));
    hyp = apply_action(hyp, actions[t]);
    prev = step;
  }
  if (!is_complete(hyp)) throw Error(ErrorCode::illegal_oracle, "oracle sequence leaves the tree incomplete");
  return g.sum(terms, Scalar(-1));
}

template <typename Scalar>
Scalar Scorer<Scalar>::sequence_nll_value(const std::vector<std::string>& tokens, const std::vector<Action>& actions,
                                          const TableContext* table) {
  G g;
  return g.scalar(sequence_nll(g, tokens, actions, table));
}

template class Scorer<float>;
template class Scorer<double>;
// Extended precision serves as the reference in gradient checks.
template class Scorer<long double>;

}  // namespace absynth
