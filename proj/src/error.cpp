#include "absynth/error.hpp"

namespace absynth {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::syntax_error: return "SyntaxError";
    case ErrorCode::duplicate_constructor: return "DuplicateConstructor";
    case ErrorCode::duplicate_type: return "DuplicateType";
    case ErrorCode::unknown_root_type: return "UnknownRootType";
    case ErrorCode::primitive_type_query: return "PrimitiveTypeQuery";
    case ErrorCode::unknown_constructor: return "UnknownConstructor";
    case ErrorCode::foreign_constructor: return "ForeignConstructor";
    case ErrorCode::non_terminating_grammar: return "NonTerminatingGrammar";
    case ErrorCode::invalid_tree: return "InvalidTree";
    case ErrorCode::complete_hypothesis: return "CompleteHypothesis";
    case ErrorCode::illegal_action: return "IllegalAction";
    case ErrorCode::incomplete_sequence: return "IncompleteSequence";
    case ErrorCode::trailing_actions: return "TrailingActions";
    case ErrorCode::unbalanced_parens: return "UnbalancedParens";
    case ErrorCode::unknown_form: return "UnknownForm";
    case ErrorCode::unknown_column: return "UnknownColumn";
    case ErrorCode::unsupported_syntax: return "UnsupportedSyntax";
    case ErrorCode::column_index_out_of_range: return "ColumnIndexOutOfRange";
    case ErrorCode::unsupported_construct: return "UnsupportedConstruct";
    case ErrorCode::invalid_table: return "InvalidTable";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::missing_table: return "MissingTable";
    case ErrorCode::illegal_oracle: return "IllegalOracle";
    case ErrorCode::conversion_failure: return "ConversionFailure";
    case ErrorCode::empty_dataset: return "EmptyDataset";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::checkpoint_mismatch: return "CheckpointMismatch";
    case ErrorCode::io_error: return "IOError";
  }
  return "Error";
}

}  // namespace absynth
