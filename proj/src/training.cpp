#include "absynth/training.hpp"

#include <cmath>
#include <numeric>

#include "absynth/error.hpp"
#include "absynth/search.hpp"
#include "absynth/text.hpp"

namespace absynth {

std::vector<Action> oracle_actions(const Grammar& grammar, const Example& example) {
  if (!example.tree) throw Error(ErrorCode::conversion_failure, "example has no tree");
  return extract_actions(grammar, *example.tree, example.table.has_value());
}

Vocabs build_vocabs(const std::vector<Example>& examples, const Grammar& grammar, int cutoff) {
  std::vector<std::vector<std::string>> utterances;
  std::vector<std::vector<std::string>> targets;
  std::vector<std::string> column_tokens;
  for (const Example& ex : examples) {
    utterances.push_back(ex.utterance);
    std::vector<std::string> toks;
    for (const Action& a : oracle_actions(grammar, ex)) {
      if (a.kind == Action::Kind::gen_token && !a.is_end_token()) toks.push_back(a.token);
    }
    targets.push_back(std::move(toks));
    if (ex.table) {
      for (const auto& name : ex.table->column_names()) {
        for (auto& t : tokenize_utterance(name)) column_tokens.push_back(std::move(t));
      }
    }
  }
  Vocabs v{Vocab::build(utterances, cutoff, column_tokens), Vocab::build(targets, cutoff, {std::string(kEndToken)})};
  return v;
}

namespace {

template <typename Scalar>
struct Adam {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Mat<Scalar>> m;
  std::vector<Mat<Scalar>> v;

  void update(const std::vector<Param<Scalar>*>& params) {
    if (m.empty()) {
      for (auto* p : params) {
        m.push_back(Mat<Scalar>::Zero(p->value.rows(), p->value.cols()));
        v.push_back(Mat<Scalar>::Zero(p->value.rows(), p->value.cols()));
      }
    }
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    const Scalar rate = static_cast<Scalar>(lr * std::sqrt(c2) / c1);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& gr = params[i]->grad;
      m[i] = static_cast<Scalar>(beta1) * m[i] + static_cast<Scalar>(1 - beta1) * gr;
      v[i] = static_cast<Scalar>(beta2) * v[i] + static_cast<Scalar>(1 - beta2) * gr.cwiseAbs2();
      params[i]->value.array() -= rate * m[i].array() / (v[i].array().sqrt() + static_cast<Scalar>(eps));
    }
  }
};

template <typename Scalar>
void clip_gradients(const std::vector<Param<Scalar>*>& params, double max_norm) {
  double sq = 0;
  for (auto* p : params) sq += static_cast<double>(p->grad.squaredNorm());
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const Scalar scale = static_cast<Scalar>(max_norm / norm);
    for (auto* p : params) p->grad *= scale;
  }
}

}  // namespace

template <typename Scalar>
double greedy_exact_match(Scorer<Scalar>& scorer, const std::vector<Example>& examples, std::size_t max_actions) {
  if (examples.empty()) return 0.0;
  BeamConfig greedy{1, max_actions, false};
  std::size_t hits = 0;
  for (const Example& ex : examples) {
    auto out = beam_search(scorer, ex.utterance, greedy, ex.table ? &*ex.table : nullptr);
    if (!out.empty() && trees_equal(*out.front().tree, *ex.tree)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

template <typename Scalar>
std::vector<EpochStats> train(Scorer<Scalar>& scorer, const std::vector<Example>& examples,
                              const TrainOptions& options, const std::function<void(const EpochStats&)>& on_epoch) {
  if (examples.empty()) throw Error(ErrorCode::empty_dataset, "no training examples");
  if (options.batch_size == 0) throw Error(ErrorCode::shape_mismatch, "batch size must be >= 1");
  const Grammar& grammar = scorer.grammar();

  std::vector<std::vector<Action>> oracles;
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    try {
      oracles.push_back(oracle_actions(grammar, examples[i]));
    } catch (const Error& e) {
      bad.push_back(std::to_string(i) + ": " + e.what());
    }
  }
  if (!bad.empty()) throw Error(ErrorCode::conversion_failure, "cannot build oracles for examples " + join(bad, "; "));

  std::mt19937_64 rng(options.seed);
  Adam<Scalar> adam;
  adam.lr = options.learning_rate;
  const auto params = scorer.params();
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochStats> history;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    // Fisher-Yates with raw engine output, independent of the library's shuffle.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double total = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      scorer.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const Example& ex = examples[order[k]];
        Graph<Scalar> g;
        Var loss = scorer.sequence_nll(g, ex.utterance, oracles[order[k]], ex.table ? &*ex.table : nullptr, &rng);
        const double value = static_cast<double>(g.scalar(loss));
        if (!std::isfinite(value)) throw Error(ErrorCode::shape_mismatch, "non-finite loss");
        total += value;
        g.backward(loss);
      }
      const Scalar inv = static_cast<Scalar>(1.0 / static_cast<double>(end - start));
      for (auto* p : params) p->grad *= inv;
      clip_gradients(params, options.clip_norm);
      adam.update(params);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = total / static_cast<double>(examples.size());
    if (options.eval_train_em) stats.train_em = greedy_exact_match(scorer, examples, options.max_actions);
    history.push_back(stats);
    if (on_epoch) on_epoch(stats);
    if (options.target_em && options.eval_train_em && stats.train_em >= *options.target_em) break;
  }
  return history;
}

template std::vector<EpochStats> train(Scorer<float>&, const std::vector<Example>&, const TrainOptions&,
                                       const std::function<void(const EpochStats&)>&);
template std::vector<EpochStats> train(Scorer<double>&, const std::vector<Example>&, const TrainOptions&,
                                       const std::function<void(const EpochStats&)>&);
template double greedy_exact_match(Scorer<float>&, const std::vector<Example>&, std::size_t);
template double greedy_exact_match(Scorer<double>&, const std::vector<Example>&, std::size_t);

}  // namespace absynth
