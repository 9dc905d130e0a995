#ifndef ABSYNTH_ERROR_HPP_
#define ABSYNTH_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace absynth {

enum class ErrorCode {
  // grammar
  syntax_error,
  duplicate_constructor,
  duplicate_type,
  unknown_root_type,
  primitive_type_query,
  unknown_constructor,
  // ast
  foreign_constructor,
  non_terminating_grammar,
  invalid_tree,
  // transition
  complete_hypothesis,
  illegal_action,
  incomplete_sequence,
  trailing_actions,
  // converters
  unbalanced_parens,
  unknown_form,
  unknown_column,
  unsupported_syntax,
  column_index_out_of_range,
  unsupported_construct,
  invalid_table,
  // scorer
  shape_mismatch,
  missing_table,
  illegal_oracle,
  conversion_failure,
  empty_dataset,
  // io
  parse_error,
  checkpoint_mismatch,
  io_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace absynth

#endif  // ABSYNTH_ERROR_HPP_
