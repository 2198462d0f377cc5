#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagrec/corpus.hpp"

namespace tagrec {

enum class SourceKind {
  kCollective,        // CK: the whole training database
  kUserCentered,      // UK: n-th degree friends sharing the query's interest
  kPersonomy,         // D_u
  kSocialPersonomy,   // D^n
  kBatched,           // D^u_batched
  kSocialBatched,     // D^n_batched
  kCommunityBatched,  // GK: own + group data; CK batches for ungrouped users
};

struct SourceSelection {
  SourceKind kind = SourceKind::kCollective;
  std::optional<std::size_t> degree;

  /// Throws ConfigError when degree presence does not match the kind.
  void validate() const;
  /// Lowercase CLI keyword, e.g. "social-batched".
  std::string keyword() const;
  /// Row label such as "CK", "UK", "D^2_batched", "GK".
  std::string label() const;
};

SourceKind parse_source_kind(std::string_view keyword);
bool needs_degree(SourceKind kind);
bool needs_graph(SourceKind kind);

/// Users within `n` hops of `user`, including `user`. Sorted.
std::vector<UserId> nth_degree_users(const SocialGraph& graph, UserId user, std::size_t n);

/// When a selected database is empty (or below `min_transactions`), the
/// collective one is used instead.
struct FallbackPolicy {
  std::size_t min_transactions = 0;
  bool triggers(const TagDatabase& selected) const {
    return selected.size() < std::max<std::size_t>(1, min_transactions);
  }
};

TagDatabase build_ck(const TagDatabase& db);

/// Transactions of users within `n` hops that carry the query's interest.
/// Without a query interest only the friendship filter applies.
TagDatabase build_uk(const TagDatabase& db, const SocialGraph& graph, const Query& query, std::size_t n);

/// Transactions owned by `user`; empty when it has none.
TagDatabase build_personomy(const TagDatabase& db, UserId user);

/// Union of the personomies of the users within `n` hops.
TagDatabase build_social_personomy(const TagDatabase& db, const SocialGraph& graph, UserId user,
                                   std::size_t n);

struct BatchPolicy {
  std::size_t max_queries = 100;
  std::chrono::milliseconds max_wait = std::chrono::milliseconds::max();

  void validate() const;
  /// The whole stream as a single batch.
  static BatchPolicy unbounded();
};

enum class BatchReason { kMaxCount, kMaxWait, kFlush };

std::string to_string(BatchReason reason);

struct Batch {
  std::vector<Query> queries;
  BatchReason reason = BatchReason::kFlush;
};

struct TimedQuery {
  Query query;
  std::chrono::milliseconds arrival{0};
};

/// Offline batching of a recorded stream. A batch closes when it reaches
/// max_queries, when the next arrival comes max_wait or later after the
/// oldest pending query, or when the stream ends.
std::vector<Batch> form_batches(std::span<const TimedQuery> stream, const BatchPolicy& policy);
std::vector<Batch> form_batches(std::span<const Query> stream, const BatchPolicy& policy);

/// Thread-safe batcher for live submission: any number of producers call
/// submit(); one consumer drains batches with next().
class QueryBatcher {
 public:
  explicit QueryBatcher(BatchPolicy policy);

  void submit(Query query);
  /// No more submissions; pending queries flush on the next call to next().
  void close();
  /// Blocks until a batch is due. nullopt once closed and drained.
  std::optional<Batch> next();

 private:
  using Clock = std::chrono::steady_clock;

  BatchPolicy policy_;
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<std::pair<Query, Clock::time_point>> pending_;
  bool closed_ = false;
};

/// Union of the histories of the batch's users (plus their friends up to
/// `degree` hops when given). Falls back to `db` itself when that is empty.
TagDatabase build_batched(const TagDatabase& db, const SocialGraph& graph, const Batch& batch,
                          std::optional<std::size_t> degree, const FallbackPolicy& fallback = {},
                          bool* fell_back = nullptr);

struct CommunityRoute {
  std::vector<Query> grouped;
  std::vector<Query> ungrouped;
};

/// True when the user belongs to a group and its groups hold at least
/// `min_group_transactions` transactions.
bool is_grouped(UserId user, const GroupIndex& groups, std::size_t min_group_transactions = 1);

/// Splits queries by group membership of their users. Users whose groups
/// hold fewer than `min_group_transactions` transactions count as ungrouped.
CommunityRoute route_community(std::span<const Query> queries, const GroupIndex& groups,
                               std::size_t min_group_transactions = 1);

/// The user's own transactions plus every transaction posted to one of the
/// user's groups, each instance once.
TagDatabase build_community(const TagDatabase& db, const GroupIndex& groups, const Query& query);

}  // namespace tagrec
