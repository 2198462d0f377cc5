#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "tagrec/corpus.hpp"
#include "tagrec/miner.hpp"

namespace tagrec {

struct CodeTableElement {
  Tagset tags;
  Count usage = 0;
  Count support = 0;  // support in the source database
  friend bool operator==(const CodeTableElement&, const CodeTableElement&) = default;
};

/// Standard Cover Order: longer first, then higher support, then tag ids.
bool cover_order(const CodeTableElement& a, const CodeTableElement& b);

/// Encoded size split into data and model parts, in bits.
struct EncodedSize {
  double data = 0;
  double model = 0;
  double total() const { return data + model; }
};

/// A KRIMP-style code table. Elements carry their cover usage; usages of
/// the elements containing X estimate the support of X.
class CodeTable {
 public:
  CodeTable() = default;
  /// Elements are re-sorted into Standard Cover Order.
  CodeTable(std::vector<CodeTableElement> elements, std::size_t source_db_size, std::size_t max_len);

  std::span<const CodeTableElement> elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  /// Elements with two or more tags.
  std::size_t pattern_count() const noexcept;
  Count total_usage() const noexcept { return total_usage_; }
  std::size_t source_db_size() const noexcept { return source_db_size_; }
  /// Length bound of the candidates the table was induced from.
  std::size_t max_len() const noexcept { return max_len_; }
  bool has_singleton(TagId tag) const;

  friend bool operator==(const CodeTable& a, const CodeTable& b) {
    return a.elements_ == b.elements_ && a.source_db_size_ == b.source_db_size_ && a.max_len_ == b.max_len_;
  }

 private:
  friend std::vector<Tagset> cover(const CodeTable&, std::span<const TagId>);
  friend Count estimate_support(const CodeTable&, std::span<const TagId>);

  std::vector<CodeTableElement> elements_;
  Count total_usage_ = 0;
  std::size_t source_db_size_ = 0;
  std::size_t max_len_ = 1;
  std::vector<std::vector<std::size_t>> postings_;  // tag -> element positions, cover order
};

/// Greedy cover in Standard Cover Order. Throws if a tag has no singleton.
std::vector<Tagset> cover(const CodeTable& ct, std::span<const TagId> tags);

/// Sum of usages of all elements that contain `tags`. Never exceeds the
/// true support: cover elements of one transaction are disjoint, so at most
/// one of them contains `tags`.
Count estimate_support(const CodeTable& ct, std::span<const TagId> tags);

/// L(D|CT) + L(CT) computed from scratch by covering every transaction.
EncodedSize encoded_size(const CodeTable& ct, const TagDatabase& db);

struct InductionTrace {
  double singleton_size = 0;           // L(D,CT) of the singleton-only table
  std::vector<double> accepted_sizes;  // L(D,CT) after each acceptance
  std::size_t candidates_tested = 0;
};

/// Starts from the singleton-only table and keeps each candidate (in Standard
/// Candidate Order) iff it strictly reduces the total encoded size.
CodeTable induce(const TagDatabase& db, const FrequentTagsetCollection& candidates,
                 InductionTrace* trace = nullptr);

/// Header with total_usage/source_db_size/max_len, then `tags:usage` lines
/// in cover order.
void write_code_table(const CodeTable& ct, const Dictionary& vocabulary, std::ostream& out);
CodeTable read_code_table(std::istream& in, const Dictionary& vocabulary);

}  // namespace tagrec
