#ifndef ABSYNTH_GRAMMAR_HPP_
#define ABSYNTH_GRAMMAR_HPP_

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace absynth {

enum class TypeKind { composite, primitive };

enum class Cardinality { single, optional, sequential };

struct TypeName {
  std::string name;
  TypeKind kind = TypeKind::composite;
};

struct Field {
  std::string name;
  std::string type;
  Cardinality cardinality = Cardinality::single;
};

struct Constructor {
  std::string name;
  std::string type;            // result type, always composite
  std::vector<Field> fields;   // declaration order
  std::size_t id = 0;          // dense index in declaration order
};

// An ASDL grammar. Immutable once built; Constructor and Field addresses are
// stable for the lifetime of the object, so trees and hypotheses hold raw
// pointers into it. Not copyable for that reason; share via shared_ptr.
class Grammar {
 public:
  Grammar(std::vector<TypeName> types, std::vector<Constructor> constructors,
          std::string root_type);

  Grammar(const Grammar&) = delete;
  Grammar& operator=(const Grammar&) = delete;
  Grammar(Grammar&&) = default;
  Grammar& operator=(Grammar&&) = default;

  const std::vector<TypeName>& types() const { return types_; }
  const std::vector<Constructor>& constructors() const { return constructors_; }
  const std::string& root_type() const { return root_type_; }

  const TypeName* find_type(std::string_view name) const;
  const Constructor* find_constructor(std::string_view name) const;
  // Throws unknown_constructor.
  const Constructor& constructor(std::string_view name) const;

  bool is_primitive(std::string_view type) const;
  bool is_composite(std::string_view type) const;

  // Declaration order. Throws primitive_type_query for primitive types.
  std::vector<const Constructor*> constructors_of(std::string_view type) const;

  // Dense id for a (constructor, field index) pair. Id 0 is the virtual root
  // field; real fields are numbered 1..field_count()-1.
  std::size_t field_id(const Constructor& c, std::size_t field_index) const;
  std::size_t field_count() const { return total_fields_ + 1; }

  // Canonical text serializer; parse_grammar(render()) reproduces this grammar.
  std::string render() const;

 private:
  std::vector<TypeName> types_;
  std::vector<Constructor> constructors_;
  std::string root_type_;
  std::unordered_map<std::string, std::size_t> type_index_;
  std::unordered_map<std::string, std::size_t> constructor_index_;
  std::vector<std::size_t> field_offsets_;
  std::size_t total_fields_ = 0;
};

// Parses ASDL text. Types referenced by fields but never defined become
// primitive. Comments start with '#' or '--'; attributes(...) clauses are
// accepted and dropped.
Grammar parse_grammar(std::string_view text, std::string_view root_type);
std::shared_ptr<const Grammar> load_grammar(const std::string& path,
                                            std::string_view root_type);

std::vector<const Constructor*> constructors_of(const Grammar& grammar,
                                                std::string_view type);

// FNV-1a over the canonical rendering, hex encoded. Insensitive to comments
// and whitespace in the source text.
std::string grammar_fingerprint(const Grammar& grammar);

bool grammars_equal(const Grammar& a, const Grammar& b);

std::string_view to_string(Cardinality c);

}  // namespace absynth

#endif  // ABSYNTH_GRAMMAR_HPP_
