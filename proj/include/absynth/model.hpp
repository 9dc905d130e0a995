#ifndef ABSYNTH_MODEL_HPP_
#define ABSYNTH_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "absynth/scorer.hpp"
#include "absynth/search.hpp"
#include "absynth/training.hpp"

namespace absynth {

inline constexpr const char* kCheckpointFormat = "absynth-checkpoint";
inline constexpr int kCheckpointVersion = 1;

// A scorer at either precision behind one interface.
class Model {
 public:
  Model(const ScorerConfig& config, std::shared_ptr<const Grammar> grammar, const Vocabs& vocabs,
        std::uint64_t seed);

  // Throws checkpoint_mismatch when the checkpoint was trained under a
  // different grammar, parse_error when the document is malformed.
  static Model from_json(const nlohmann::json& checkpoint, std::shared_ptr<const Grammar> grammar);
  static Model load(const std::string& path, std::shared_ptr<const Grammar> grammar);

  nlohmann::json to_json() const;
  void save(const std::string& path) const;

  std::vector<EpochStats> train(const std::vector<Example>& examples, const TrainOptions& options,
                                const std::function<void(const EpochStats&)>& on_epoch = {});
  std::vector<Candidate> parse(const std::vector<std::string>& utterance, const BeamConfig& config,
                               const TableContext* table = nullptr);
  double sequence_nll(const std::vector<std::string>& utterance, const std::vector<Action>& actions,
                      const TableContext* table = nullptr);

  const ScorerConfig& config() const;
  const Grammar& grammar() const;
  const Vocab& source_vocab() const;
  const Vocab& target_vocab() const;
  std::size_t parameter_count() const;

  // Direct access for callers that need the typed scorer.
  Scorer<float>* single() { return std::get_if<0>(&impl_) ? std::get<0>(impl_).get() : nullptr; }
  Scorer<double>* double_precision() { return std::get_if<1>(&impl_) ? std::get<1>(impl_).get() : nullptr; }

 private:
  Model() = default;
  std::variant<std::unique_ptr<Scorer<float>>, std::unique_ptr<Scorer<double>>> impl_;
};

}  // namespace absynth

#endif  // ABSYNTH_MODEL_HPP_
