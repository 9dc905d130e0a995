#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absynth/converters.hpp"
#include "absynth/dataset.hpp"
#include "absynth/error.hpp"
#include "absynth/model.hpp"
#include "absynth/search.hpp"
#include "absynth/transition.hpp"

namespace py = pybind11;
using namespace absynth;

namespace {

// pybind11 holders cannot point at const objects, so the shared handles are
// wrapped.
struct PyGrammar {
  std::shared_ptr<const Grammar> ptr;
};

struct PyTree {
  TreePtr ptr;
};

std::optional<std::size_t> width_of(const TableContext* table) {
  return table ? std::optional<std::size_t>(table->width()) : std::nullopt;
}

py::object cell_to_py(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return py::float_(*d);
  return py::str(std::get<std::string>(c));
}

std::vector<Example> examples_from(const PyGrammar& g, const std::string& format, const py::list& rows) {
  const MrFormat f = parse_format(format);
  std::vector<Example> out;
  for (const auto& item : rows) {
    const auto row = item.cast<py::dict>();
    Example ex;
    ex.utterance = tokenize_utterance(row["utterance"].cast<std::string>());
    ex.mr = row["mr"].cast<std::string>();
    if (row.contains("table") && !row["table"].is_none()) ex.table = row["table"].cast<TableContext>();
    ex.tree = mr_to_ast(f, ex.mr, *g.ptr, ex.table ? &*ex.table : nullptr);
    out.push_back(std::move(ex));
  }
  return out;
}

class PyModel {
 public:
  PyModel(Model m, MrFormat format) : model_(std::move(m)), format_(format) {}

  static PyModel create(const PyGrammar& g, const std::string& format, const py::list& examples, int embed_dim,
                        int hidden_dim, int field_dim, int action_dim, double dropout, int cutoff,
                        const std::string& precision, bool parent_feeding, std::uint64_t seed) {
    ScorerConfig c;
    c.embed_dim = embed_dim;
    c.hidden_dim = hidden_dim;
    c.field_embed_dim = field_dim;
    c.action_embed_dim = action_dim;
    c.dropout_rate = dropout;
    c.vocab_cutoff = cutoff;
    c.precision = precision == "double" ? Precision::double_precision : Precision::single;
    c.parent_feeding = parent_feeding;
    const auto data = examples_from(g, format, examples);
    return PyModel(Model(c, g.ptr, build_vocabs(data, *g.ptr, cutoff), seed), parse_format(format));
  }

  static PyModel load(const std::string& path, const PyGrammar& g, const std::string& format) {
    return PyModel(Model::load(path, g.ptr), parse_format(format));
  }

  std::vector<std::tuple<int, double, double>> train(const PyGrammar& g, const py::list& examples, int epochs,
                                                     double lr, std::size_t batch_size, std::uint64_t seed,
                                                     std::optional<double> target_em) {
    const auto data = examples_from(g, std::string(to_string(format_)), examples);
    TrainOptions o;
    o.epochs = epochs;
    o.learning_rate = lr;
    o.batch_size = batch_size;
    o.seed = seed;
    o.target_em = target_em;
    std::vector<std::tuple<int, double, double>> out;
    py::gil_scoped_release release;
    for (const auto& s : model_.train(data, o)) out.emplace_back(s.epoch + 1, s.loss, s.train_em);
    return out;
  }

  // [(mr, score)], best first; empty when nothing completes.
  std::vector<std::pair<std::string, double>> parse(const std::string& utterance, std::size_t beam,
                                                    std::size_t max_actions, const TableContext* table, bool prune) {
    std::vector<Candidate> cands;
    {
      py::gil_scoped_release release;
      cands = model_.parse(tokenize_utterance(utterance), BeamConfig{beam, max_actions, false}, table);
      if (prune && table) cands = answer_prune(cands, *table);
    }
    std::vector<std::pair<std::string, double>> out;
    for (const auto& c : cands) out.emplace_back(ast_to_mr(format_, *c.tree, table), c.score);
    return out;
  }

  void save(const std::string& path) const { model_.save(path); }
  std::size_t parameter_count() const { return model_.parameter_count(); }
  bool parent_feeding() const { return model_.config().parent_feeding; }

 private:
  Model model_;
  MrFormat format_;
};

}  // namespace

PYBIND11_MODULE(_absynth, m) {
  m.doc() = "Grammar-constrained transition-based semantic parsing";

  static py::exception<Error> exc(m, "AbsynthError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(exc, e.what());
    }
  });

  py::class_<PyGrammar>(m, "Grammar")
      .def_static("load", [](const std::string& path, const std::string& root) { return PyGrammar{load_grammar(path, root)}; },
                  py::arg("path"), py::arg("root_type"))
      .def_static("parse",
                  [](const std::string& text, const std::string& root) {
                    return PyGrammar{std::make_shared<const Grammar>(parse_grammar(text, root))};
                  },
                  py::arg("text"), py::arg("root_type"))
      .def_property_readonly("root_type", [](const PyGrammar& g) { return g.ptr->root_type(); })
      .def_property_readonly("fingerprint", [](const PyGrammar& g) { return grammar_fingerprint(*g.ptr); })
      .def_property_readonly("constructors",
                             [](const PyGrammar& g) {
                               std::vector<std::string> names;
                               for (const auto& c : g.ptr->constructors()) names.push_back(c.name);
                               return names;
                             })
      .def("render", [](const PyGrammar& g) { return g.ptr->render(); })
      .def("__eq__", [](const PyGrammar& a, const PyGrammar& b) { return grammars_equal(*a.ptr, *b.ptr); });

  py::class_<PyTree>(m, "Tree")
      .def("sexpr", [](const PyTree& t) { return to_sexpr(*t.ptr); })
      .def("__len__", [](const PyTree& t) { return tree_size(*t.ptr); })
      .def("__eq__", [](const PyTree& a, const PyTree& b) { return trees_equal(*a.ptr, *b.ptr); })
      .def("__repr__", [](const PyTree& t) { return "Tree(" + to_sexpr(*t.ptr) + ")"; });

  py::class_<TableContext>(m, "Table")
      .def(py::init<std::vector<std::string>, std::vector<std::vector<std::string>>>(), py::arg("columns"),
           py::arg("rows"))
      .def_property_readonly("columns", &TableContext::column_names)
      .def_property_readonly("rows", &TableContext::rows)
      .def("execute",
           [](const TableContext& t, const PyTree& q) {
             const auto r = execute_sql(*q.ptr, t);
             py::list values;
             for (const auto& c : r.values) values.append(cell_to_py(c));
             return values;
           },
           py::arg("query"));

  m.def(
      "to_tree",
      [](const std::string& format, const std::string& text, const PyGrammar& g, const TableContext* table) {
        return PyTree{mr_to_ast(parse_format(format), text, *g.ptr, table)};
      },
      py::arg("format"), py::arg("text"), py::arg("grammar"), py::arg("table") = nullptr,
      "Convert a meaning representation (lambda, sql or pyexpr) to a tree.");
  m.def(
      "to_text",
      [](const std::string& format, const PyTree& t, const TableContext* table) {
        return ast_to_mr(parse_format(format), *t.ptr, table);
      },
      py::arg("format"), py::arg("tree"), py::arg("table") = nullptr);
  m.def(
      "oracle",
      [](const PyGrammar& g, const PyTree& t, bool use_columns) {
        std::vector<std::string> out;
        for (const auto& a : extract_actions(*g.ptr, *t.ptr, use_columns)) out.push_back(format_action(a));
        return out;
      },
      py::arg("grammar"), py::arg("tree"), py::arg("use_columns") = false,
      "Gold action sequence of a tree, one action per string.");
  m.def(
      "reconstruct",
      [](const PyGrammar& g, const std::vector<std::string>& actions, std::optional<std::size_t> width) {
        std::vector<Action> parsed;
        for (const auto& s : actions) parsed.push_back(parse_action(*g.ptr, s));
        return PyTree{reconstruct(*g.ptr, parsed, width)};
      },
      py::arg("grammar"), py::arg("actions"), py::arg("table_width") = py::none());
  m.def(
      "validate",
      [](const PyGrammar& g, const PyTree& t) {
        std::vector<std::string> out;
        for (const auto& v : validate_ast(*g.ptr, *t.ptr)) out.push_back(v.path + ": " + v.message);
        return out;
      },
      py::arg("grammar"), py::arg("tree"));
  m.def("tokenize", [](const std::string& text) { return tokenize_utterance(text); }, py::arg("text"));

  py::class_<PyModel>(m, "Model")
      .def_static("create", &PyModel::create, py::arg("grammar"), py::arg("format"), py::arg("examples"),
                  py::arg("embed_dim") = 128, py::arg("hidden_dim") = 256, py::arg("field_dim") = 64,
                  py::arg("action_dim") = 64, py::arg("dropout") = 0.3, py::arg("cutoff") = 2,
                  py::arg("precision") = "single", py::arg("parent_feeding") = true, py::arg("seed") = 0)
      .def_static("load", &PyModel::load, py::arg("path"), py::arg("grammar"), py::arg("format"))
      .def("train", &PyModel::train, py::arg("grammar"), py::arg("examples"), py::arg("epochs") = 50,
           py::arg("lr") = 0.001, py::arg("batch_size") = 10, py::arg("seed") = 0, py::arg("target_em") = py::none(),
           "Returns [(epoch, loss, train_em)].")
      .def("parse", &PyModel::parse, py::arg("utterance"), py::arg("beam") = 5,
           py::arg("max_actions") = kDefaultMaxActions, py::arg("table") = nullptr, py::arg("prune") = false)
      .def("save", &PyModel::save, py::arg("path"))
      .def_property_readonly("parameter_count", &PyModel::parameter_count)
      .def_property_readonly("parent_feeding", &PyModel::parent_feeding);
}
