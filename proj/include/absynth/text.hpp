#ifndef ABSYNTH_TEXT_HPP_
#define ABSYNTH_TEXT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace absynth {

std::vector<std::string> split_whitespace(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string to_lower(std::string_view text);
std::string to_upper(std::string_view text);
std::string_view trim(std::string_view text);
bool iequals(std::string_view a, std::string_view b);

// Double-quoted with backslash escapes for '"' and '\'.
std::string quote(std::string_view text);
// Reads a quoted string at the start of `text`; sets *consumed to the number
// of characters read. nullopt when `text` does not start with a valid quote.
std::optional<std::string> unquote(std::string_view text, std::size_t* consumed = nullptr);

std::optional<double> parse_number(std::string_view text);
// Shortest round-trip decimal text.
std::string format_number(double value);

}  // namespace absynth

#endif  // ABSYNTH_TEXT_HPP_
