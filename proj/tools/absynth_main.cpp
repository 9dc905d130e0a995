// absynth: train, parse, evaluate and inspect grammar-constrained parsers.
#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "absynth/converters.hpp"
#include "absynth/dataset.hpp"
#include "absynth/error.hpp"
#include "absynth/model.hpp"
#include "absynth/search.hpp"
#include "absynth/text.hpp"
#include "absynth/transition.hpp"

namespace {

using namespace absynth;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheckpoint = 3;

struct GrammarFlags {
  std::string path;
  std::string root_type;
  std::string format = "lambda";
};

void add_grammar_flags(CLI::App* cmd, GrammarFlags& f) {
  cmd->add_option("--grammar", f.path, "ASDL grammar file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--root-type", f.root_type, "root type of the grammar")->required();
  cmd->add_option("--format", f.format, "meaning representation format")
      ->check(CLI::IsMember({"lambda", "sql", "pyexpr", "python"}));
}

struct SearchFlags {
  std::size_t beam = 5;
  std::size_t max_actions = kDefaultMaxActions;
  bool length_normalize = false;
  bool prune = false;
};

void add_search_flags(CLI::App* cmd, SearchFlags& f) {
  cmd->add_option("--beam", f.beam, "beam size")->check(CLI::PositiveNumber);
  cmd->add_option("--max-actions", f.max_actions, "decoding step budget")->check(CLI::PositiveNumber);
  cmd->add_flag("--length-normalize", f.length_normalize, "rank by per-action log-probability");
  cmd->add_flag("--prune", f.prune, "drop candidates with empty execution results (tables only)");
}

// Top of the (optionally pruned) beam; null when nothing completed.
std::vector<Candidate> decode(Model& model, const std::vector<std::string>& utterance, const TableContext* table,
                              const SearchFlags& f) {
  auto out = model.parse(utterance, BeamConfig{f.beam, f.max_actions, f.length_normalize}, table);
  if (f.prune && table) out = answer_prune(out, *table);
  return out;
}

int cmd_train(const GrammarFlags& gf, const std::string& data, const std::string& ckpt,
              const std::string& resume, const std::string& log_path, ScorerConfig config,
              const TrainOptions& options) {
  auto grammar = load_grammar(gf.path, gf.root_type);
  const MrFormat format = parse_format(gf.format);
  const auto examples = load_dataset(data, format, *grammar);
  std::optional<Model> model;
  if (!resume.empty()) {
    model.emplace(Model::load(resume, grammar));
  } else {
    model.emplace(config, grammar, build_vocabs(examples, *grammar, config.vocab_cutoff), options.seed);
  }

  std::ofstream log_file;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw Error(ErrorCode::io_error, "cannot write " + log_path);
  }
  std::ostream& log = log_path.empty() ? std::cout : log_file;
  log << "epoch,loss,train_em\n";
  model->train(examples, options, [&](const EpochStats& s) {
    log << s.epoch + 1 << ',' << std::fixed << std::setprecision(6) << s.loss << ',' << s.train_em << '\n';
    log.flush();
  });
  model->save(ckpt);
  std::cerr << "saved " << ckpt << " (" << model->parameter_count() << " parameters)\n";
  return kExitOk;
}

int cmd_parse(const GrammarFlags& gf, const std::string& ckpt, const std::string& input, const SearchFlags& sf,
              std::size_t nbest, const std::string& nbest_out) {
  auto grammar = load_grammar(gf.path, gf.root_type);
  const MrFormat format = parse_format(gf.format);
  Model model = Model::load(ckpt, grammar);

  std::vector<Query> queries;
  if (input.empty() || input == "-") {
    queries = read_queries(std::cin);
  } else {
    std::ifstream in(input);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + input);
    queries = read_queries(in);
  }

  std::ofstream nbest_file;
  if (nbest && !nbest_out.empty()) {
    nbest_file.open(nbest_out);
    if (!nbest_file) throw Error(ErrorCode::io_error, "cannot write " + nbest_out);
  }
  for (const Query& q : queries) {
    const TableContext* table = q.table ? &*q.table : nullptr;
    const auto beam = decode(model, q.utterance, table, sf);
    if (beam.empty()) {
      std::cout << "<FAIL>\n";
    } else {
      std::cout << ast_to_mr(format, *beam.front().tree, table) << '\n';
    }
    if (nbest) {
      nlohmann::json cands = nlohmann::json::array();
      for (std::size_t i = 0; i < beam.size() && i < nbest; ++i) {
        cands.push_back({{"mr", ast_to_mr(format, *beam[i].tree, table)}, {"score", beam[i].score}});
      }
      nlohmann::json line{{"utterance", absynth::join(q.utterance, " ")}, {"candidates", std::move(cands)}};
      (nbest_out.empty() ? std::cerr : nbest_file) << line.dump() << '\n';
    }
  }
  return kExitOk;
}

int cmd_eval(const GrammarFlags& gf, const std::string& ckpt, const std::string& data,
             const std::string& predictions, const SearchFlags& sf, const std::string& report_path) {
  auto grammar = load_grammar(gf.path, gf.root_type);
  const MrFormat format = parse_format(gf.format);
  const auto gold = load_dataset(data, format, *grammar);

  std::vector<TreePtr> predicted;
  if (!predictions.empty()) {
    // One MR per line, aligned with the dataset; `<FAIL>` marks no output.
    std::ifstream in(predictions);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + predictions);
    std::string line;
    while (predicted.size() < gold.size() && std::getline(in, line)) {
      const Example& ex = gold[predicted.size()];
      if (absynth::trim(line) == "<FAIL>") {
        predicted.push_back(nullptr);
        continue;
      }
      try {
        predicted.push_back(mr_to_ast(format, line, *grammar, ex.table ? &*ex.table : nullptr));
      } catch (const Error&) {
        predicted.push_back(nullptr);  // unparseable output scores as a miss
      }
    }
    if (predicted.size() != gold.size()) {
      throw Error(ErrorCode::parse_error, predictions + " has fewer lines than " + data);
    }
  } else {
    if (ckpt.empty()) throw CLI::ValidationError("eval", "either --ckpt or --predictions is required");
    Model model = Model::load(ckpt, grammar);
    for (const Example& ex : gold) {
      const auto beam = decode(model, ex.utterance, ex.table ? &*ex.table : nullptr, sf);
      predicted.push_back(beam.empty() ? nullptr : beam.front().tree);
    }
  }

  const auto report = report_to_json(evaluate(gold, predicted, format));
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + report_path);
    out << report.dump(2) << '\n';
  }
  nlohmann::json summary{{"total", report["total"]},
                         {"exact_match", report["exact_match"]},
                         {"execution", report["execution"]},
                         {"indeterminate", report["indeterminate"]}};
  std::cout << summary.dump() << '\n';
  return kExitOk;
}

int cmd_oracle(const GrammarFlags& gf, const std::string& data) {
  auto grammar = load_grammar(gf.path, gf.root_type);
  const auto examples = load_dataset(data, parse_format(gf.format), *grammar);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (i) std::cout << '\n';
    for (const Action& a : oracle_actions(*grammar, examples[i])) std::cout << format_action(a) << '\n';
  }
  return kExitOk;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::checkpoint_mismatch:
      return kExitCheckpoint;
    default:
      return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grammar-constrained transition-based semantic parser"};
  app.require_subcommand(1);

  GrammarFlags gf;
  SearchFlags sf;
  std::string data, ckpt, resume, log_path, input, nbest_out, predictions, report_path;
  std::size_t nbest = 0;
  ScorerConfig config;
  TrainOptions options;
  std::string precision = "single";
  double target_em = -1;
  bool no_parent_feeding = false;

  auto* train = app.add_subcommand("train", "train a parser and write a checkpoint");
  add_grammar_flags(train, gf);
  train->add_option("--data", data, "training JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--ckpt", ckpt, "checkpoint to write")->required();
  train->add_option("--resume", resume, "continue from this checkpoint")->check(CLI::ExistingFile);
  train->add_option("--log", log_path, "epoch log (CSV); stdout when omitted");
  train->add_option("--epochs", options.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--batch-size", options.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--lr", options.learning_rate)->check(CLI::PositiveNumber);
  train->add_option("--clip", options.clip_norm, "global gradient norm limit; 0 disables");
  train->add_option("--seed", options.seed);
  train->add_option("--target-em", target_em, "stop once train exact match reaches this");
  train->add_option("--embed-dim", config.embed_dim)->check(CLI::PositiveNumber);
  train->add_option("--hidden-dim", config.hidden_dim)->check(CLI::PositiveNumber);
  train->add_option("--field-dim", config.field_embed_dim)->check(CLI::PositiveNumber);
  train->add_option("--action-dim", config.action_embed_dim)->check(CLI::PositiveNumber);
  train->add_option("--dropout", config.dropout_rate)->check(CLI::Range(0.0, 0.999));
  train->add_option("--cutoff", config.vocab_cutoff, "minimum token count for the vocabularies")
      ->check(CLI::PositiveNumber);
  train->add_option("--precision", precision)->check(CLI::IsMember({"single", "double"}));
  train->add_flag("--no-parent-feeding", no_parent_feeding, "drop the parent state from decoder inputs");
  train->add_flag("--no-train-em", [&](std::int64_t) { options.eval_train_em = false; },
                  "skip the per-epoch greedy exact match");
  train->add_option("--max-actions", options.max_actions)->check(CLI::PositiveNumber);

  auto* parse = app.add_subcommand("parse", "decode utterances into meaning representations");
  add_grammar_flags(parse, gf);
  add_search_flags(parse, sf);
  parse->add_option("--ckpt", ckpt)->required()->check(CLI::ExistingFile);
  parse->add_option("--input", input, "utterances, plain lines or JSONL with tables; stdin by default");
  parse->add_option("--nbest", nbest, "also emit up to k scored candidates per input as JSONL");
  parse->add_option("--nbest-out", nbest_out, "file for the n-best JSONL; stderr when omitted");

  auto* eval = app.add_subcommand("eval", "exact match and execution accuracy on a dataset");
  add_grammar_flags(eval, gf);
  add_search_flags(eval, sf);
  eval->add_option("--data", data)->required()->check(CLI::ExistingFile);
  eval->add_option("--ckpt", ckpt)->check(CLI::ExistingFile);
  eval->add_option("--predictions", predictions, "score these MRs (one per line) instead of decoding")
      ->check(CLI::ExistingFile);
  eval->add_option("--report", report_path, "write the full JSON report here");

  auto* oracle = app.add_subcommand("oracle", "print the gold action sequence of every example");
  add_grammar_flags(oracle, gf);
  oracle->add_option("--data", data)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      config.precision = precision == "double" ? Precision::double_precision : Precision::single;
      config.parent_feeding = !no_parent_feeding;
      config.validate();
      if (target_em >= 0) options.target_em = target_em;
      return cmd_train(gf, data, ckpt, resume, log_path, config, options);
    }
    if (*parse) return cmd_parse(gf, ckpt, input, sf, nbest, nbest_out);
    if (*eval) return cmd_eval(gf, ckpt, data, predictions, sf, report_path);
    if (*oracle) return cmd_oracle(gf, data);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
