#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tagrec/dictionary.hpp"
#include "tagrec/types.hpp"

namespace tagrec {

/// Label tables shared by a corpus and every database derived from it.
struct Lexicon {
  Dictionary tags;
  Dictionary users;
  Dictionary groups;
  Dictionary interests;
};

struct Transaction {
  TransactionId id = 0;  // instance id, stable across sub-databases
  UserId user = 0;
  std::optional<GroupId> group;
  std::optional<InterestId> interest;
  Tagset tags;
};

struct Query {
  UserId user = kUnknownUser;
  Tagset input;
  std::optional<InterestId> interest;
};

/// Ordered multiset of tag transactions over one lexicon.
///
/// Sub-databases produced by filtering keep a pointer to the parent's
/// lexicon, so tag ids stay comparable across all of them.
class TagDatabase {
 public:
  TagDatabase();
  TagDatabase(std::shared_ptr<const Lexicon> lexicon, std::vector<Transaction> transactions);

  const Lexicon& lexicon() const noexcept { return *lexicon_; }
  const std::shared_ptr<const Lexicon>& lexicon_ptr() const noexcept { return lexicon_; }
  const Dictionary& vocabulary() const noexcept { return lexicon_->tags; }

  std::span<const Transaction> transactions() const noexcept { return transactions_; }
  const Transaction& operator[](std::size_t i) const { return transactions_[i]; }
  std::size_t size() const noexcept { return transactions_.size(); }
  bool empty() const noexcept { return transactions_.empty(); }

  template <typename Pred>
  TagDatabase filter(Pred&& keep) const {
    std::vector<Transaction> kept;
    for (const auto& t : transactions_)
      if (keep(t)) kept.push_back(t);
    return TagDatabase(lexicon_, std::move(kept));
  }

  /// Same lexicon, different transactions.
  TagDatabase with(std::vector<Transaction> transactions) const {
    return TagDatabase(lexicon_, std::move(transactions));
  }

 private:
  std::shared_ptr<const Lexicon> lexicon_;
  std::vector<Transaction> transactions_;
};

/// Undirected friendship graph without self-loops.
class SocialGraph {
 public:
  SocialGraph() = default;
  SocialGraph(std::size_t user_count, std::span<const std::pair<UserId, UserId>> edges);

  std::span<const UserId> friends(UserId user) const;
  std::size_t user_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept;
  bool connected(UserId a, UserId b) const;

 private:
  std::vector<std::vector<UserId>> adjacency_;
};

class GroupIndex {
 public:
  GroupIndex() = default;
  GroupIndex(std::size_t user_count, std::size_t group_count,
             std::span<const std::pair<GroupId, UserId>> memberships,
             std::span<const Transaction> transactions);

  std::span<const GroupId> groups_of(UserId user) const;
  std::span<const UserId> members(GroupId group) const;
  std::span<const TransactionId> transactions_of(GroupId group) const;
  std::size_t group_count() const noexcept { return group_members_.size(); }
  bool has_groups(UserId user) const { return !groups_of(user).empty(); }

 private:
  std::vector<std::vector<GroupId>> user_groups_;
  std::vector<std::vector<UserId>> group_members_;
  std::vector<std::vector<TransactionId>> group_transactions_;
};

struct LoadOptions {
  std::size_t min_tags = 2;
};

/// What ingestion repaired or discarded.
struct LoadReport {
  std::size_t dropped_short = 0;
  std::size_t duplicate_tags = 0;
  std::size_t asymmetric_edges = 0;
  std::size_t self_loops = 0;
};

struct Corpus {
  TagDatabase db;
  SocialGraph graph;
  GroupIndex groups;
  LoadReport report;
};

Corpus load_corpus(const std::filesystem::path& transactions,
                   const std::optional<std::filesystem::path>& graph,
                   const std::optional<std::filesystem::path>& groups,
                   const LoadOptions& options = {});

/// Stream variant; `graph`/`groups` may be null.
Corpus parse_corpus(std::istream& transactions, std::istream* graph, std::istream* groups,
                    const LoadOptions& options = {});

void write_transactions(const TagDatabase& db, std::ostream& out);
void write_graph(const SocialGraph& graph, const Lexicon& lexicon, std::ostream& out);
void write_groups(const GroupIndex& groups, const Lexicon& lexicon, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::filesystem::path& transactions,
                  const std::optional<std::filesystem::path>& graph,
                  const std::optional<std::filesystem::path>& groups);

/// Parses `tag1,tag2,...`, resolving labels against `lexicon`.
/// Unknown labels are rejected unless `unknown` is non-null, in which case
/// they are skipped and counted there.
Tagset parse_tag_list(std::string_view field, const Lexicon& lexicon, std::size_t* unknown = nullptr);

std::string format_tagset(std::span<const TagId> tags, const Dictionary& vocabulary);

/// Query stream: `user<TAB>interest_or_-<TAB>tags[<TAB>arrival_ms]`.
struct QueryLine {
  Query query;
  std::optional<long long> arrival_ms;
  std::size_t unknown_tags = 0;
};
std::vector<QueryLine> parse_queries(std::istream& in, const Lexicon& lexicon,
                                     const std::string& source = "<queries>");

struct DatasetProfile {
  std::size_t users = 0;
  std::size_t tags = 0;
  std::size_t transactions = 0;
  /// Percent of transactions with <6, 6-8 and >8 tags.
  std::array<int, 3> length_pct{};
  /// Users with 0, 1-2, 3-10, 11-50, 51-250 and >=251 friends.
  std::array<std::size_t, 6> friend_hist{};
};

DatasetProfile profile(const TagDatabase& db, const SocialGraph& graph);

}  // namespace tagrec
