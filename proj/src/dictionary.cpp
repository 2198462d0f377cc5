#include "tagrec/dictionary.hpp"

#include <stdexcept>

namespace tagrec {

std::uint32_t Dictionary::intern(std::string_view label) {
  if (auto it = ids_.find(label); it != ids_.end()) return it->second;
  if (label.empty()) throw std::invalid_argument("empty label");
  const auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.emplace_back(label);
  ids_.emplace(labels_.back(), id);
  return id;
}

std::optional<std::uint32_t> Dictionary::find(std::string_view label) const {
  if (auto it = ids_.find(label); it != ids_.end()) return it->second;
  return std::nullopt;
}

}  // namespace tagrec
