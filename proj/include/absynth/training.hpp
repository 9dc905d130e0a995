#ifndef ABSYNTH_TRAINING_HPP_
#define ABSYNTH_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absynth/converters.hpp"
#include "absynth/scorer.hpp"
#include "absynth/vocab.hpp"

namespace absynth {

struct Example {
  std::vector<std::string> utterance;
  std::string mr;
  std::optional<TableContext> table;
  TreePtr tree;  // mr converted under the dataset's grammar
};

struct Vocabs {
  Vocab source;
  Vocab target;
};

// Source: utterance tokens at the cutoff plus every column-name token.
// Target: GenToken values of the oracle sequences at the cutoff.
Vocabs build_vocabs(const std::vector<Example>& examples, const Grammar& grammar, int cutoff);

std::vector<Action> oracle_actions(const Grammar& grammar, const Example& example);

struct TrainOptions {
  int epochs = 50;
  std::size_t batch_size = 10;
  double learning_rate = 0.001;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  // Greedy train exact match after every epoch.
  bool eval_train_em = true;
  // Stop as soon as train exact match reaches this value.
  std::optional<double> target_em;
  std::size_t max_actions = kDefaultMaxActions;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;  // mean per-example NLL
  double train_em = 0.0;
};

template <typename Scalar>
std::vector<EpochStats> train(Scorer<Scalar>& scorer, const std::vector<Example>& examples,
                              const TrainOptions& options,
                              const std::function<void(const EpochStats&)>& on_epoch = {});

// Greedy exact match of `scorer` over `examples`.
template <typename Scalar>
double greedy_exact_match(Scorer<Scalar>& scorer, const std::vector<Example>& examples,
                          std::size_t max_actions = kDefaultMaxActions);

extern template std::vector<EpochStats> train(Scorer<float>&, const std::vector<Example>&, const TrainOptions&,
                                              const std::function<void(const EpochStats&)>&);
extern template std::vector<EpochStats> train(Scorer<double>&, const std::vector<Example>&, const TrainOptions&,
                                              const std::function<void(const EpochStats&)>&);
extern template double greedy_exact_match(Scorer<float>&, const std::vector<Example>&, std::size_t);
extern template double greedy_exact_match(Scorer<double>&, const std::vector<Example>&, std::size_t);

}  // namespace absynth

#endif  // ABSYNTH_TRAINING_HPP_
