#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tagrec/corpus.hpp"
#include "tagrec/types.hpp"

namespace tagrec {

/// Minimum support, either relative to |D| or an absolute transaction count.
class MinSupport {
 public:
  static MinSupport relative(double fraction);
  static MinSupport absolute(Count count);
  /// "0.0007" (has '.' or exponent) is relative, "3" is absolute.
  static MinSupport parse(std::string_view text);

  /// ceil(fraction * |D|), never below 1.
  Count resolve(std::size_t db_size) const;

  bool is_relative() const noexcept { return relative_; }
  double value() const noexcept { return value_; }
  std::string to_string() const;

 private:
  MinSupport(bool relative, double value) : relative_(relative), value_(value) {}
  bool relative_;
  double value_;
};

enum class Closedness {
  kLengthBounded,  // no equal-support superset of size <= max_len
  kGlobal,         // no equal-support superset of any size
};

struct MiningParams {
  MinSupport min_support = MinSupport::relative(0.0007);
  std::size_t max_len = 3;
  std::size_t top_m = 50;
  Closedness closedness = Closedness::kLengthBounded;

  void validate() const;
};

/// Number of transactions whose tags include `tags`.
Count support(const TagDatabase& db, std::span<const TagId> tags);

/// Vertical layout of a database: one transaction bitset per tag.
class TidsetIndex {
 public:
  explicit TidsetIndex(const TagDatabase& db);

  std::size_t words() const noexcept { return words_; }
  std::size_t transactions() const noexcept { return transactions_; }
  /// Empty span for tags that never occur.
  std::span<const std::uint64_t> tids(TagId tag) const;
  Count support(TagId tag) const;
  Count support(std::span<const TagId> tags) const;
  /// Transaction positions (not instance ids) containing every tag.
  std::vector<std::size_t> positions(std::span<const TagId> tags) const;

 private:
  std::size_t transactions_;
  std::size_t words_;
  std::vector<std::vector<std::uint64_t>> bits_;
};

struct Cooccurrence {
  TagId tag;
  Count joint;
  friend bool operator==(const Cooccurrence&, const Cooccurrence&) = default;
};

/// Per-tag supports plus the top-m co-occurring tags of every tag.
class CooccurrenceIndex {
 public:
  CooccurrenceIndex() = default;
  CooccurrenceIndex(std::size_t top_m, std::vector<Count> tag_support,
                    std::vector<std::vector<Cooccurrence>> top_lists);

  std::size_t top_m() const noexcept { return top_m_; }
  std::size_t vocabulary_size() const noexcept { return tag_support_.size(); }
  Count tag_support(TagId tag) const {
    return tag < tag_support_.size() ? tag_support_[tag] : 0;
  }
  std::span<const Cooccurrence> top_list(TagId tag) const;
  /// Joint count if `other` is in the top list of `tag`.
  std::optional<Count> joint(TagId tag, TagId other) const;

  friend bool operator==(const CooccurrenceIndex&, const CooccurrenceIndex&) = default;

 private:
  std::size_t top_m_ = 0;
  std::vector<Count> tag_support_;
  std::vector<std::vector<Cooccurrence>> top_lists_;
};

CooccurrenceIndex build_cooccurrence(const TagDatabase& db, std::size_t top_m);

/// Closed frequent tagsets with their exact supports.
class FrequentTagsetCollection {
 public:
  FrequentTagsetCollection() = default;
  FrequentTagsetCollection(MiningParams params, Count min_support_abs, std::size_t db_size,
                           std::vector<std::pair<Tagset, Count>> entries);

  const MiningParams& params() const noexcept { return params_; }
  Count min_support() const noexcept { return min_support_; }
  std::size_t db_size() const noexcept { return db_size_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  /// Sorted by tagset.
  std::span<const std::pair<Tagset, Count>> entries() const noexcept { return entries_; }

  /// Support of a stored tagset.
  std::optional<Count> find(std::span<const TagId> tags) const;
  /// Support of any frequent tagset no longer than max_len, recovered as the
  /// largest support among stored supersets. nullopt when not frequent.
  std::optional<Count> support_of(std::span<const TagId> tags) const;

 private:
  struct Hash {
    std::size_t operator()(const Tagset& t) const noexcept;
  };

  MiningParams params_;
  Count min_support_ = 1;
  std::size_t db_size_ = 0;
  std::vector<std::pair<Tagset, Count>> entries_;
  std::unordered_map<Tagset, std::size_t, Hash> lookup_;
  std::vector<std::vector<std::size_t>> postings_;  // tag -> entry positions
};

FrequentTagsetCollection mine_closed(const TagDatabase& db, const MiningParams& params);

/// `tag1,tag2:support` lines sorted by tagset, after a `#` header.
void write_frequent(const FrequentTagsetCollection& f, const Dictionary& vocabulary, std::ostream& out);
FrequentTagsetCollection read_frequent(std::istream& in, const Dictionary& vocabulary);

/// Header, then `tag:support` lines, then `tag,other:joint` lines in list order.
void write_cooccurrence(const CooccurrenceIndex& index, const Dictionary& vocabulary, std::ostream& out);
CooccurrenceIndex read_cooccurrence(std::istream& in, const Dictionary& vocabulary);

}  // namespace tagrec
