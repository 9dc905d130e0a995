#ifndef ABSYNTH_SEARCH_HPP_
#define ABSYNTH_SEARCH_HPP_

#include <string>
#include <vector>

#include "absynth/converters.hpp"
#include "absynth/scorer.hpp"
#include "absynth/transition.hpp"

namespace absynth {

struct BeamConfig {
  std::size_t beam_size = 5;
  std::size_t max_actions = kDefaultMaxActions;
  bool length_normalize = false;
};

struct Candidate {
  TreePtr tree;
  double score = 0.0;  // total log-probability (normalized if configured)
  std::vector<Action> actions;
  std::size_t completed_at = 0;  // search step at which it completed
};

// Best-first list of at most beam_size complete trees. Empty only when no
// hypothesis completes within max_actions.
template <typename Scalar>
std::vector<Candidate> beam_search(Scorer<Scalar>& scorer, const std::vector<std::string>& utterance,
                                   const BeamConfig& config, const TableContext* table = nullptr);

// Drops candidates whose SQL runs to an empty result, keeping order. Returns
// the input unchanged when every candidate is empty.
std::vector<Candidate> answer_prune(const std::vector<Candidate>& candidates, const TableContext& table);

extern template std::vector<Candidate> beam_search(Scorer<float>&, const std::vector<std::string>&,
                                                   const BeamConfig&, const TableContext*);
extern template std::vector<Candidate> beam_search(Scorer<double>&, const std::vector<std::string>&,
                                                   const BeamConfig&, const TableContext*);

}  // namespace absynth

#endif  // ABSYNTH_SEARCH_HPP_
