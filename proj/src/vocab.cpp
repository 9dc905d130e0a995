#include "absynth/vocab.hpp"

#include <map>

namespace absynth {

Vocab::Vocab() { add(kUnkToken); }

Vocab::Vocab(const std::vector<std::string>& tokens) : Vocab() {
  for (const auto& t : tokens) add(t);
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& documents, int cutoff,
                   const std::vector<std::string>& always) {
  Vocab v;
  for (const auto& t : always) v.add(t);
  std::unordered_map<std::string, int> counts;
  std::vector<std::string> order;
  for (const auto& doc : documents) {
    for (const auto& tok : doc) {
      if (counts[tok]++ == 0) order.push_back(tok);
    }
  }
  for (const auto& tok : order) {
    if (counts[tok] >= cutoff) v.add(tok);
  }
  return v;
}

std::size_t Vocab::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::optional<std::size_t> Vocab::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace absynth
