#include "absynth/model.hpp"

#include <cstdio>
#include <fstream>

#include "absynth/error.hpp"

namespace absynth {

namespace {

template <typename Scalar>
nlohmann::json params_to_json(Scorer<Scalar>& scorer) {
  nlohmann::json out = nlohmann::json::object();
  for (Param<Scalar>* p : scorer.params()) {
    std::vector<double> data(static_cast<std::size_t>(p->value.size()));
    // column-major, same as Eigen's storage
    for (Eigen::Index i = 0; i < p->value.size(); ++i) data[static_cast<std::size_t>(i)] = p->value.data()[i];
    out[p->name] = {{"shape", {p->value.rows(), p->value.cols()}}, {"data", std::move(data)}};
  }
  return out;
}

template <typename Scalar>
void params_from_json(Scorer<Scalar>& scorer, const nlohmann::json& j) {
  for (Param<Scalar>* p : scorer.params()) {
    if (!j.contains(p->name)) throw Error(ErrorCode::checkpoint_mismatch, "checkpoint lacks parameter " + p->name);
    const auto& entry = j.at(p->name);
    const auto shape = entry.at("shape").template get<std::vector<Eigen::Index>>();
    if (shape.size() != 2 || shape[0] != p->value.rows() || shape[1] != p->value.cols()) {
      throw Error(ErrorCode::checkpoint_mismatch, "shape of " + p->name + " does not match the configuration");
    }
    const auto data = entry.at("data").template get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != p->value.size()) {
      throw Error(ErrorCode::parse_error, "parameter " + p->name + " has the wrong number of values");
    }
    for (std::size_t i = 0; i < data.size(); ++i) p->value.data()[i] = static_cast<Scalar>(data[i]);
  }
  if (j.size() != scorer.params().size()) throw Error(ErrorCode::checkpoint_mismatch, "checkpoint has extra parameters");
}

}  // namespace

Model::Model(const ScorerConfig& config, std::shared_ptr<const Grammar> grammar, const Vocabs& vocabs,
             std::uint64_t seed) {
  if (config.precision == Precision::double_precision) {
    impl_ = std::make_unique<Scorer<double>>(config, std::move(grammar), vocabs.source, vocabs.target, seed);
  } else {
    impl_ = std::make_unique<Scorer<float>>(config, std::move(grammar), vocabs.source, vocabs.target, seed);
  }
}

Model Model::from_json(const nlohmann::json& j, std::shared_ptr<const Grammar> grammar) {
  try {
    if (j.value("format", std::string()) != kCheckpointFormat) {
      throw Error(ErrorCode::parse_error, "not an absynth checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw Error(ErrorCode::checkpoint_mismatch, "unsupported checkpoint version " + std::to_string(version));
    }
    const std::string expected = j.at("grammar_fingerprint").get<std::string>();
    const std::string actual = grammar_fingerprint(*grammar);
    if (expected != actual) {
      throw Error(ErrorCode::checkpoint_mismatch,
                  "checkpoint was trained under grammar " + expected + ", got " + actual);
    }
    Vocabs vocabs{Vocab(j.at("source_vocab").get<std::vector<std::string>>()),
                  Vocab(j.at("target_vocab").get<std::vector<std::string>>())};
    Model m(config_from_json(j.at("config")), std::move(grammar), vocabs, 0);
    std::visit([&](auto& s) { params_from_json(*s, j.at("params")); }, m.impl_);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed checkpoint: ") + e.what());
  }
}

Model Model::load(const std::string& path, std::shared_ptr<const Grammar> grammar) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return from_json(j, std::move(grammar));
}

nlohmann::json Model::to_json() const {
  return std::visit(
      [](const auto& s) {
        return nlohmann::json{{"format", kCheckpointFormat},
                              {"version", kCheckpointVersion},
                              {"config", config_to_json(s->config())},
                              {"grammar_fingerprint", grammar_fingerprint(s->grammar())},
                              {"root_type", s->grammar().root_type()},
                              {"source_vocab", s->source_vocab().tokens()},
                              {"target_vocab", s->target_vocab().tokens()},
                              {"params", params_to_json(*s)}};
      },
      impl_);
}

void Model::save(const std::string& path) const {
  // Write next to the target and rename, so a crash never leaves half a file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp);
    out << to_json().dump() << '\n';
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error(ErrorCode::io_error, "cannot rename to " + path);
}

std::vector<EpochStats> Model::train(const std::vector<Example>& examples, const TrainOptions& options,
                                     const std::function<void(const EpochStats&)>& on_epoch) {
  return std::visit([&](auto& s) { return absynth::train(*s, examples, options, on_epoch); }, impl_);
}

std::vector<Candidate> Model::parse(const std::vector<std::string>& utterance, const BeamConfig& config,
                                    const TableContext* table) {
  return std::visit([&](auto& s) { return beam_search(*s, utterance, config, table); }, impl_);
}

double Model::sequence_nll(const std::vector<std::string>& utterance, const std::vector<Action>& actions,
                           const TableContext* table) {
  return std::visit(
      [&](auto& s) { return static_cast<double>(s->sequence_nll_value(utterance, actions, table)); }, impl_);
}

const ScorerConfig& Model::config() const {
  return std::visit([](const auto& s) -> const ScorerConfig& { return s->config(); }, impl_);
}

const Grammar& Model::grammar() const {
  return std::visit([](const auto& s) -> const Grammar& { return s->grammar(); }, impl_);
}

const Vocab& Model::source_vocab() const {
  return std::visit([](const auto& s) -> const Vocab& { return s->source_vocab(); }, impl_);
}

const Vocab& Model::target_vocab() const {
  return std::visit([](const auto& s) -> const Vocab& { return s->target_vocab(); }, impl_);
}

std::size_t Model::parameter_count() const {
  return std::visit(
      [](const auto& s) {
        std::size_t n = 0;
        for (const auto* p : s->params()) n += static_cast<std::size_t>(p->value.size());
        return n;
      },
      impl_);
}

}  // namespace absynth
