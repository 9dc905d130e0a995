#include "absynth/search.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "absynth/error.hpp"

namespace absynth {

namespace {

template <typename Scalar>
struct Live {
  Hypothesis hyp;
  std::optional<DecoderStep> step;
  std::vector<Var> hidden;  // decoder hidden state per taken step
  std::string text;         // formatted actions, for tie-breaking
};

struct Expansion {
  std::size_t parent;
  Action action;
  double logprob;
  double score;
  std::string text;
};

bool better(const Expansion& a, const Expansion& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.text < b.text;
}

double final_score(const Candidate& c, bool normalize) {
  return normalize && !c.actions.empty() ? c.score / static_cast<double>(c.actions.size()) : c.score;
}

}  // namespace

template <typename Scalar>
std::vector<Candidate> beam_search(Scorer<Scalar>& scorer, const std::vector<std::string>& utterance,
                                   const BeamConfig& config, const TableContext* table) {
  if (config.beam_size == 0) throw Error(ErrorCode::shape_mismatch, "beam size must be >= 1");
  Graph<Scalar> g;
  auto enc = scorer.encode(g, utterance, table);
  const Var root_parent = g.zeros(scorer.config().hidden_dim);
  const auto width = table ? std::optional<std::size_t>(table->width()) : std::nullopt;

  std::vector<Live<Scalar>> live;
  live.push_back({init_hypothesis(scorer.grammar(), width), std::nullopt, {}, {}});
  std::vector<std::pair<Candidate, std::string>> done;

  for (std::size_t t = 0; t < config.max_actions && !live.empty() && done.size() < config.beam_size; ++t) {
    const std::size_t room = config.beam_size - done.size();
    std::vector<Expansion> expansions;
    std::vector<DecoderStep> steps;
    for (std::size_t i = 0; i < live.size(); ++i) {
      Live<Scalar>& h = live[i];
      const FrontierRef frontier = *h.hyp.frontier();
      const LegalActions legal = valid_actions(h.hyp);
      const Var parent = frontier.parent_step < 0 ? root_parent : h.hidden.at(frontier.parent_step);
      DecoderStep step = scorer.decode_step(g, enc, h.step ? &*h.step : nullptr, h.hyp.last_action(), frontier, parent);
      steps.push_back(step);
      std::vector<Expansion> local;
      for (auto& [action, lp] : scorer.action_logprobs(g, enc, step, legal)) {
        const double l = static_cast<double>(lp);
        if (std::isinf(l) && l < 0) continue;
        local.push_back({i, action, l, h.hyp.score() + l, {}});
      }
      // Only the best `room` continuations of one hypothesis can survive.
      auto by_score = [](const Expansion& a, const Expansion& b) {
        if (a.score != b.score) return a.score > b.score;
        return format_action(a.action) < format_action(b.action);
      };
      const std::size_t keep = std::min(room, local.size());
      std::partial_sort(local.begin(), local.begin() + static_cast<std::ptrdiff_t>(keep), local.end(), by_score);
      local.resize(keep);
      for (auto& e : local) {
        e.text = h.text + format_action(e.action) + "\n";
        expansions.push_back(std::move(e));
      }
    }
    std::sort(expansions.begin(), expansions.end(), better);
    if (expansions.size() > room) expansions.resize(room);

    std::vector<Live<Scalar>> next;
    for (const Expansion& e : expansions) {
      const Live<Scalar>& parent = live[e.parent];
      Hypothesis hyp = apply_action(parent.hyp, e.action, std::min(e.logprob, 0.0));
      if (is_complete(hyp)) {
        Candidate c{hyp.tree(), hyp.score(), hyp.actions(), t};
        done.emplace_back(std::move(c), e.text);
      } else {
        Live<Scalar> child{std::move(hyp), steps[e.parent], parent.hidden, e.text};
        child.hidden.push_back(steps[e.parent].hidden);
        next.push_back(std::move(child));
      }
    }
    live = std::move(next);
  }

  std::stable_sort(done.begin(), done.end(), [&](const auto& a, const auto& b) {
    const double sa = final_score(a.first, config.length_normalize);
    const double sb = final_score(b.first, config.length_normalize);
    if (sa != sb) return sa > sb;
    if (a.first.completed_at != b.first.completed_at) return a.first.completed_at < b.first.completed_at;
    return a.second < b.second;
  });
  std::vector<Candidate> out;
  for (auto& [c, text] : done) {
    c.score = final_score(c, config.length_normalize);
    out.push_back(std::move(c));
    if (out.size() == config.beam_size) break;
  }
  return out;
}

std::vector<Candidate> answer_prune(const std::vector<Candidate>& candidates, const TableContext& table) {
  std::vector<Candidate> kept;
  for (const Candidate& c : candidates) {
    bool empty = true;
    try {
      empty = execute_sql(*c.tree, table).empty;
    } catch (const Error&) {
      empty = true;
    }
    if (!empty) kept.push_back(c);
  }
  return kept.empty() ? candidates : kept;
}

template std::vector<Candidate> beam_search(Scorer<float>&, const std::vector<std::string>&, const BeamConfig&,
                                            const TableContext*);
template std::vector<Candidate> beam_search(Scorer<double>&, const std::vector<std::string>&, const BeamConfig&,
                                            const TableContext*);

}  // namespace absynth
