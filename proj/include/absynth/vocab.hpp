#ifndef ABSYNTH_VOCAB_HPP_
#define ABSYNTH_VOCAB_HPP_

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace absynth {

inline constexpr const char* kUnkToken = "<unk>";

// Token <-> id. Id 0 is always <unk>.
class Vocab {
 public:
  Vocab();
  explicit Vocab(const std::vector<std::string>& tokens);

  // Tokens seen at least `cutoff` times, in first-seen order, after `always`.
  static Vocab build(const std::vector<std::vector<std::string>>& documents, int cutoff,
                     const std::vector<std::string>& always = {});

  std::size_t add(const std::string& token);
  std::optional<std::size_t> find(const std::string& token) const;
  std::size_t id(const std::string& token) const { return find(token).value_or(0); }
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace absynth

#endif  // ABSYNTH_VOCAB_HPP_
