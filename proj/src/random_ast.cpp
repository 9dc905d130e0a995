#include <limits>
#include <random>
#include <unordered_map>

#include "absynth/ast.hpp"
#include "absynth/error.hpp"

namespace absynth {

namespace {

constexpr int kInfinite = std::numeric_limits<int>::max();

// Minimal tree height per composite type and per constructor, by least
// fixpoint. Only single-cardinality composite fields force children.
struct Heights {
  std::unordered_map<std::string, int> type;
  std::vector<int> constructor;
};

Heights minimal_heights(const Grammar& grammar) {
  Heights h;
  for (const TypeName& t : grammar.types()) {
    if (t.kind == TypeKind::composite) h.type[t.name] = kInfinite;
  }
  h.constructor.assign(grammar.constructors().size(), kInfinite);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Constructor& c : grammar.constructors()) {
      int height = 1;
      for (const Field& f : c.fields) {
        if (f.cardinality != Cardinality::single || grammar.is_primitive(f.type)) continue;
        int child = h.type.at(f.type);
        if (child == kInfinite) {
          height = kInfinite;
          break;
        }
        height = std::max(height, child + 1);
      }
      if (height < h.constructor[c.id]) {
        h.constructor[c.id] = height;
        changed = true;
      }
      if (height < h.type.at(c.type)) {
        h.type.at(c.type) = height;
        changed = true;
      }
    }
  }
  return h;
}

class Generator {
 public:
  Generator(const Grammar& grammar, const RandomAstOptions& options)
      : grammar_(grammar), options_(options), heights_(minimal_heights(grammar)), rng_(options.seed) {}

  TreePtr run() {
    if (heights_.type.at(grammar_.root_type()) == kInfinite) {
      throw Error(ErrorCode::non_terminating_grammar,
                  "no finite tree exists for root type " + grammar_.root_type());
    }
    return tree(grammar_.root_type(), 1);
  }

 private:
  std::size_t uniform(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  TreePtr tree(const std::string& type, int depth) {
    const bool shallow = depth < options_.max_depth;
    std::vector<const Constructor*> choices;
    for (const Constructor* c : grammar_.constructors_of(type)) {
      int h = heights_.constructor[c->id];
      if (h == kInfinite) continue;
      if (shallow || h == heights_.type.at(type)) choices.push_back(c);
    }
    const Constructor& c = *choices[uniform(choices.size())];
    AbstractTree t = make_node(c);
    for (std::size_t i = 0; i < c.fields.size(); ++i) {
      const Field& f = c.fields[i];
      const bool primitive = grammar_.is_primitive(f.type);
      std::size_t count = 1;
      if (f.cardinality != Cardinality::single) {
        const bool can_grow = shallow && (primitive || heights_.type.at(f.type) != kInfinite);
        if (!can_grow) {
          count = 0;
        } else if (f.cardinality == Cardinality::optional) {
          count = uniform(2);
        } else {
          count = uniform(static_cast<std::size_t>(options_.max_sequence) + 1);
        }
      }
      for (std::size_t k = 0; k < count; ++k) {
        if (primitive) {
          t.fields[i].values.emplace_back(primitive_value(f));
        } else {
          t.fields[i].values.emplace_back(tree(f.type, depth + 1));
        }
      }
    }
    return std::make_shared<const AbstractTree>(std::move(t));
  }

  PrimitiveValue primitive_value(const Field& f) {
    const std::vector<std::string>* pool = &options_.token_pool;
    if (auto it = options_.type_pools.find(f.type); it != options_.type_pools.end()) {
      pool = &it->second;
    }
    std::size_t n = is_multi_token(f) ? 1 + uniform(3) : 1;
    PrimitiveValue v;
    for (std::size_t k = 0; k < n; ++k) v.tokens.push_back((*pool)[uniform(pool->size())]);
    return v;
  }

  const Grammar& grammar_;
  const RandomAstOptions& options_;
  Heights heights_;
  std::mt19937_64 rng_;
};

}  // namespace

TreePtr random_ast(const Grammar& grammar, const RandomAstOptions& options) {
  if (options.max_depth < 1) throw Error(ErrorCode::invalid_tree, "max_depth must be >= 1");
  if (options.token_pool.empty()) {
    for (const TypeName& t : grammar.types()) {
      if (t.kind == TypeKind::primitive && !options.type_pools.count(t.name)) {
        throw Error(ErrorCode::invalid_tree, "token_pool must be non-empty");
      }
    }
  }
  for (const auto& [type, pool] : options.type_pools) {
    if (pool.empty()) throw Error(ErrorCode::invalid_tree, "empty token pool for " + type);
  }
  return Generator(grammar, options).run();
}

TreePtr random_ast(const Grammar& grammar, int max_depth, std::uint64_t seed,
                   const std::vector<std::string>& token_pool) {
  RandomAstOptions options;
  options.max_depth = max_depth;
  options.seed = seed;
  options.token_pool = token_pool;
  return random_ast(grammar, options);
}

}  // namespace absynth
