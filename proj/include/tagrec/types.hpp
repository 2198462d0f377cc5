#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tagrec {

using TagId = std::uint32_t;
using UserId = std::uint32_t;
using GroupId = std::uint32_t;
using InterestId = std::uint32_t;
using TransactionId = std::uint32_t;
using Count = std::uint64_t;

/// Marks a query issued by a user the corpus has never seen.
inline constexpr UserId kUnknownUser = std::numeric_limits<UserId>::max();
/// An interest label present on a query but absent from the corpus.
inline constexpr InterestId kUnknownInterest = std::numeric_limits<InterestId>::max();

/// A set of tags, kept as a sorted vector without duplicates.
using Tagset = std::vector<TagId>;

/// Sorts and deduplicates; returns how many duplicates were removed.
inline std::size_t normalize_tagset(Tagset& tags) {
  std::sort(tags.begin(), tags.end());
  const auto last = std::unique(tags.begin(), tags.end());
  const auto removed = static_cast<std::size_t>(tags.end() - last);
  tags.erase(last, tags.end());
  return removed;
}

inline Tagset make_tagset(std::vector<TagId> tags) {
  normalize_tagset(tags);
  return tags;
}

/// True when every tag of `sub` occurs in `super` (both sorted).
inline bool is_subset(std::span<const TagId> sub, std::span<const TagId> super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

inline bool contains_tag(std::span<const TagId> tags, TagId tag) {
  return std::binary_search(tags.begin(), tags.end(), tag);
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or command-line configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

  std::size_t line() const noexcept { return line_; }
  /// The message without the source and line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

}  // namespace tagrec
