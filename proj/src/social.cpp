#include "tagrec/social.hpp"

#include <unordered_set>

namespace tagrec {

namespace {

bool infinite(std::chrono::milliseconds wait) { return wait == std::chrono::milliseconds::max(); }

TagDatabase owned_by(const TagDatabase& db, std::span<const UserId> users) {
  return db.filter([&](const Transaction& t) { return std::binary_search(users.begin(), users.end(), t.user); });
}

}  // namespace

void SourceSelection::validate() const {
  if (needs_degree(kind) && !degree)
    throw ConfigError("source '" + keyword() + "' requires a friendship degree");
  if (!needs_degree(kind) && degree)
    throw ConfigError("source '" + keyword() + "' does not take a friendship degree");
}

std::string SourceSelection::keyword() const {
  switch (kind) {
    case SourceKind::kCollective: return "ck";
    case SourceKind::kUserCentered: return "uk";
    case SourceKind::kPersonomy: return "personomy";
    case SourceKind::kSocialPersonomy: return "social-personomy";
    case SourceKind::kBatched: return "batched";
    case SourceKind::kSocialBatched: return "social-batched";
    case SourceKind::kCommunityBatched: return "community";
  }
  return "?";
}

std::string SourceSelection::label() const {
  const auto n = degree ? std::to_string(*degree) : std::string("u");
  switch (kind) {
    case SourceKind::kCollective: return "CK";
    case SourceKind::kUserCentered: return "UK";
    case SourceKind::kPersonomy: return "D^u";
    case SourceKind::kSocialPersonomy: return "D^" + n;
    case SourceKind::kBatched: return "D^u_batched";
    case SourceKind::kSocialBatched: return "D^" + n + "_batched";
    case SourceKind::kCommunityBatched: return "GK";
  }
  return "?";
}

SourceKind parse_source_kind(std::string_view keyword) {
  if (keyword == "ck") return SourceKind::kCollective;
  if (keyword == "uk") return SourceKind::kUserCentered;
  if (keyword == "personomy") return SourceKind::kPersonomy;
  if (keyword == "social-personomy") return SourceKind::kSocialPersonomy;
  if (keyword == "batched") return SourceKind::kBatched;
  if (keyword == "social-batched") return SourceKind::kSocialBatched;
  if (keyword == "community") return SourceKind::kCommunityBatched;
  throw ConfigError("unknown source '" + std::string(keyword) + "'");
}

bool needs_degree(SourceKind kind) {
  return kind == SourceKind::kUserCentered || kind == SourceKind::kSocialPersonomy ||
         kind == SourceKind::kSocialBatched;
}

bool needs_graph(SourceKind kind) { return needs_degree(kind); }

std::vector<UserId> nth_degree_users(const SocialGraph& graph, UserId user, std::size_t n) {
  std::vector<UserId> reached{user};
  if (user == kUnknownUser) return reached;
  std::unordered_set<UserId> seen{user};
  std::vector<UserId> frontier{user};
  for (std::size_t hop = 0; hop < n && !frontier.empty(); ++hop) {
    std::vector<UserId> next;
    for (auto u : frontier)
      for (auto v : graph.friends(u))
        if (seen.insert(v).second) next.push_back(v);
    reached.insert(reached.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(reached.begin(), reached.end());
  return reached;
}

TagDatabase build_ck(const TagDatabase& db) { return db; }

TagDatabase build_uk(const TagDatabase& db, const SocialGraph& graph, const Query& query, std::size_t n) {
  const auto users = nth_degree_users(graph, query.user, n);
  return db.filter([&](const Transaction& t) {
    if (query.interest && t.interest != query.interest) return false;
    return std::binary_search(users.begin(), users.end(), t.user);
  });
}

TagDatabase build_personomy(const TagDatabase& db, UserId user) {
  return db.filter([&](const Transaction& t) { return t.user == user; });
}

TagDatabase build_social_personomy(const TagDatabase& db, const SocialGraph& graph, UserId user,
                                   std::size_t n) {
  return owned_by(db, nth_degree_users(graph, user, n));
}

void BatchPolicy::validate() const {
  if (max_queries < 1) throw ConfigError("max_queries must be >= 1");
  if (max_wait.count() < 0) throw ConfigError("max_wait must be non-negative");
}

BatchPolicy BatchPolicy::unbounded() {
  return {std::numeric_limits<std::size_t>::max(), std::chrono::milliseconds::max()};
}

std::string to_string(BatchReason reason) {
  switch (reason) {
    case BatchReason::kMaxCount: return "max-count";
    case BatchReason::kMaxWait: return "max-wait";
    case BatchReason::kFlush: return "flush";
  }
  return "?";
}

std::vector<Batch> form_batches(std::span<const TimedQuery> stream, const BatchPolicy& policy) {
  policy.validate();
  std::vector<Batch> out;
  Batch pending;
  std::chrono::milliseconds oldest{0};
  auto emit = [&](BatchReason reason) {
    pending.reason = reason;
    out.push_back(std::move(pending));
    pending = Batch{};
  };
  for (const auto& q : stream) {
    if (!pending.queries.empty() && !infinite(policy.max_wait) && q.arrival - oldest >= policy.max_wait)
      emit(BatchReason::kMaxWait);
    if (pending.queries.empty()) oldest = q.arrival;
    pending.queries.push_back(q.query);
    if (pending.queries.size() >= policy.max_queries) emit(BatchReason::kMaxCount);
  }
  if (!pending.queries.empty()) emit(BatchReason::kFlush);
  return out;
}

std::vector<Batch> form_batches(std::span<const Query> stream, const BatchPolicy& policy) {
  std::vector<TimedQuery> timed;
  timed.reserve(stream.size());
  for (const auto& q : stream) timed.push_back({q, std::chrono::milliseconds{0}});
  return form_batches(timed, policy);
}

QueryBatcher::QueryBatcher(BatchPolicy policy) : policy_(policy) { policy_.validate(); }

void QueryBatcher::submit(Query query) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) throw Error("submit on a closed batcher");
    pending_.push_back({std::move(query), Clock::now()});
  }
  ready_.notify_one();
}

void QueryBatcher::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

std::optional<Batch> QueryBatcher::next() {
  std::unique_lock lock(mutex_);
  auto take = [&](std::size_t n, BatchReason reason) {
    Batch b;
    b.reason = reason;
    for (std::size_t i = 0; i < n; ++i) {
      b.queries.push_back(std::move(pending_.front().first));
      pending_.pop_front();
    }
    return b;
  };
  while (true) {
    if (pending_.size() >= policy_.max_queries) return take(policy_.max_queries, BatchReason::kMaxCount);
    if (closed_) {
      if (pending_.empty()) return std::nullopt;
      return take(pending_.size(), BatchReason::kFlush);
    }
    if (pending_.empty() || infinite(policy_.max_wait)) {
      ready_.wait(lock);
      continue;
    }
    const auto deadline = pending_.front().second + policy_.max_wait;
    if (Clock::now() >= deadline) return take(pending_.size(), BatchReason::kMaxWait);
    ready_.wait_until(lock, deadline);
  }
}

TagDatabase build_batched(const TagDatabase& db, const SocialGraph& graph, const Batch& batch,
                          std::optional<std::size_t> degree, const FallbackPolicy& fallback,
                          bool* fell_back) {
  std::vector<UserId> users;
  for (const auto& q : batch.queries) {
    if (q.user == kUnknownUser) continue;
    if (degree) {
      const auto reach = nth_degree_users(graph, q.user, *degree);
      users.insert(users.end(), reach.begin(), reach.end());
    } else {
      users.push_back(q.user);
    }
  }
  normalize_tagset(users);
  auto selected = owned_by(db, users);
  const bool fallback_used = fallback.triggers(selected);
  if (fell_back) *fell_back = fallback_used;
  if (fallback_used) return build_ck(db);
  return selected;
}

bool is_grouped(UserId user, const GroupIndex& groups, std::size_t min_group_transactions) {
  if (!groups.has_groups(user)) return false;
  std::size_t group_transactions = 0;
  for (auto g : groups.groups_of(user)) group_transactions += groups.transactions_of(g).size();
  return group_transactions >= min_group_transactions;
}

CommunityRoute route_community(std::span<const Query> queries, const GroupIndex& groups,
                               std::size_t min_group_transactions) {
  CommunityRoute route;
  for (const auto& q : queries)
    (is_grouped(q.user, groups, min_group_transactions) ? route.grouped : route.ungrouped).push_back(q);
  return route;
}

TagDatabase build_community(const TagDatabase& db, const GroupIndex& groups, const Query& query) {
  const auto mine = groups.groups_of(query.user);
  return db.filter([&](const Transaction& t) {
    if (t.user == query.user) return true;
    return t.group && std::binary_search(mine.begin(), mine.end(), *t.group);
  });
}

}  // namespace tagrec
