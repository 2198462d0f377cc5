#include "tagrec/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <memory>
#include <numeric>
#include <random>
#include <unordered_map>

namespace tagrec {

namespace {

constexpr std::size_t kFolds = 5;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  return splitmix(splitmix(splitmix(a) ^ b) ^ c);
}

using ModelPtr = std::shared_ptr<const RecommenderModel>;

struct FoldOutcome {
  std::vector<QueryScore> scores;
  std::vector<double> frac_uk;
  std::vector<double> frac_ck;
  std::size_t skipped = 0;
  std::size_t batches = 0;
  std::size_t invocations = 0;
  std::size_t fallbacks = 0;
  double tagsets = 0;
  double time_ms = 0;
};

/// Builds (and optionally memoizes) models for source databases, counting
/// every mining run.
class ModelBuilder {
 public:
  ModelBuilder(const TagDatabase& train, const RecommenderConfig& config, FoldOutcome& out)
      : train_(train), config_(config), out_(out) {}

  ModelPtr build(const TagDatabase& db) {
    ++out_.invocations;
    auto model = std::make_shared<const RecommenderModel>(build_model(db, config_));
    out_.tagsets += static_cast<double>(model->tagset_count());
    return model;
  }

  ModelPtr collective() {
    if (!ck_) ck_ = build(train_);
    return ck_;
  }

  /// Same transaction selection, same model.
  ModelPtr cached(const TagDatabase& db) {
    std::vector<TransactionId> key;
    key.reserve(db.size());
    for (const auto& t : db.transactions()) key.push_back(t.id);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto model = build(db);
    cache_.emplace(std::move(key), model);
    return model;
  }

 private:
  const TagDatabase& train_;
  const RecommenderConfig& config_;
  FoldOutcome& out_;
  ModelPtr ck_;
  std::map<std::vector<TransactionId>, ModelPtr> cache_;
};

FoldOutcome run_fold(const Corpus& corpus, const Fold& fold, std::size_t fold_index,
                     const EvalConfig& config) {
  FoldOutcome out;
  const auto& train = fold.train;
  const auto& kind = config.source.kind;

  std::vector<Count> train_support(train.vocabulary().size(), 0);
  for (const auto& t : train.transactions())
    for (auto tag : t.tags) ++train_support[tag];

  std::vector<QueryCase> cases;
  for (const auto& t : fold.test.transactions()) {
    auto c = make_query(t, config.k, mix(config.seed, fold_index, t.id), config.input_strategy, train_support);
    if (c)
      cases.push_back(std::move(*c));
    else
      ++out.skipped;
  }
  if (config.query_order == QueryOrder::kShuffled) {
    std::mt19937_64 rng(mix(config.seed, fold_index, 0x5157));
    std::shuffle(cases.begin(), cases.end(), rng);
  }

  std::vector<Query> queries;
  queries.reserve(cases.size());
  for (const auto& c : cases) queries.push_back(c.query);

  const auto start = std::chrono::steady_clock::now();

  ModelBuilder models(train, config.recommender, out);
  std::vector<ModelPtr> model_of(cases.size());
  std::vector<std::size_t> source_size(cases.size(), 0);
  auto assign = [&](std::size_t i, const ModelPtr& model, std::size_t size) {
    model_of[i] = model;
    source_size[i] = size;
  };
  auto with_fallback = [&](std::size_t i, const TagDatabase& selected, bool memoize) {
    if (config.fallback.triggers(selected)) {
      ++out.fallbacks;
      assign(i, models.collective(), train.size());
    } else {
      assign(i, memoize ? models.cached(selected) : models.build(selected), selected.size());
    }
  };
  const BatchPolicy policy = config.batch_size == 0
                                 ? BatchPolicy::unbounded()
                                 : BatchPolicy{config.batch_size, std::chrono::milliseconds::max()};

  switch (kind) {
    case SourceKind::kCollective:
      for (std::size_t i = 0; i < cases.size(); ++i) assign(i, models.collective(), train.size());
      break;
    case SourceKind::kUserCentered:
      for (std::size_t i = 0; i < cases.size(); ++i)
        with_fallback(i, build_uk(train, corpus.graph, queries[i], *config.source.degree), true);
      break;
    case SourceKind::kPersonomy:
      for (std::size_t i = 0; i < cases.size(); ++i)
        with_fallback(i, build_personomy(train, queries[i].user), false);
      break;
    case SourceKind::kSocialPersonomy:
      for (std::size_t i = 0; i < cases.size(); ++i)
        with_fallback(i, build_social_personomy(train, corpus.graph, queries[i].user, *config.source.degree),
                      false);
      break;
    case SourceKind::kBatched:
    case SourceKind::kSocialBatched: {
      const auto degree = kind == SourceKind::kSocialBatched ? config.source.degree : std::nullopt;
      std::size_t next = 0;
      for (const auto& batch : form_batches(queries, policy)) {
        ++out.batches;
        bool fell_back = false;
        const auto db = build_batched(train, corpus.graph, batch, degree, config.fallback, &fell_back);
        if (fell_back) out.fallbacks += batch.queries.size();
        const auto model = models.build(db);
        for (std::size_t j = 0; j < batch.queries.size(); ++j) assign(next++, model, db.size());
      }
      break;
    }
    case SourceKind::kCommunityBatched: {
      std::unordered_map<UserId, std::pair<ModelPtr, std::size_t>> per_user;
      std::vector<Query> ungrouped;
      std::vector<std::size_t> ungrouped_index;
      for (std::size_t i = 0; i < cases.size(); ++i) {
        if (!is_grouped(queries[i].user, corpus.groups, config.min_group_transactions)) {
          ungrouped.push_back(queries[i]);
          ungrouped_index.push_back(i);
          continue;
        }
        auto it = per_user.find(queries[i].user);
        if (it == per_user.end()) {
          const auto db = build_community(train, corpus.groups, queries[i]);
          if (config.fallback.triggers(db)) {
            ++out.fallbacks;
            it = per_user.emplace(queries[i].user, std::pair{models.collective(), train.size()}).first;
          } else {
            it = per_user.emplace(queries[i].user, std::pair{models.build(db), db.size()}).first;
          }
        }
        assign(i, it->second.first, it->second.second);
      }
      std::size_t next = 0;
      for (const auto& batch : form_batches(ungrouped, policy)) {
        ++out.batches;
        const auto model = models.collective();
        for (std::size_t j = 0; j < batch.queries.size(); ++j) assign(ungrouped_index[next++], model, train.size());
      }
      break;
    }
  }

  out.scores.reserve(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto rec = recommend(*model_of[i], cases[i].query, config.recommender.max_recommendations);
    const auto ranked = rec.tags();
    out.scores.push_back(score(ranked, cases[i].truth, config.at_ranks));
  }
  out.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  std::unordered_map<InterestId, std::size_t> interest_size;
  for (const auto& t : train.transactions())
    if (t.interest) ++interest_size[*t.interest];
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& q = cases[i].query;
    const double size = static_cast<double>(source_size[i]);
    if (!train.empty()) out.frac_ck.push_back(100.0 * size / static_cast<double>(train.size()));
    const auto uk = q.interest && interest_size.contains(*q.interest) ? interest_size[*q.interest] : train.size();
    if (uk > 0) out.frac_uk.push_back(100.0 * size / static_cast<double>(uk));
  }
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

SplitMode parse_split(std::string_view text) {
  if (text == "cv5") return SplitMode::kCv5;
  if (text == "holdout40") return SplitMode::kHoldout40;
  throw ConfigError("unknown split '" + std::string(text) + "' (expected cv5 or holdout40)");
}

std::string to_string(SplitMode mode) { return mode == SplitMode::kCv5 ? "cv5" : "holdout40"; }

InputStrategy parse_input_strategy(std::string_view text) {
  if (text == "random") return InputStrategy::kRandom;
  if (text == "most-frequent-first") return InputStrategy::kMostFrequentFirst;
  throw ConfigError("unknown input strategy '" + std::string(text) + "'");
}

std::vector<Fold> split(const TagDatabase& db, SplitMode mode, std::uint64_t seed) {
  if (db.size() < kFolds)
    throw Error("need at least " + std::to_string(kFolds) + " transactions to split, got " +
                std::to_string(db.size()));
  const auto n = db.size();
  std::vector<Fold> folds;
  std::vector<std::size_t> order(n);

  auto make_fold = [&](const std::vector<bool>& in_test) {
    std::vector<Transaction> train, test;
    for (std::size_t i = 0; i < n; ++i) (in_test[i] ? test : train).push_back(db[i]);
    folds.push_back({db.with(std::move(train)), db.with(std::move(test))});
  };

  if (mode == SplitMode::kCv5) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix(seed, 0xC5));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> fold_of(n);
    for (std::size_t pos = 0; pos < n; ++pos) fold_of[order[pos]] = pos % kFolds;
    for (std::size_t f = 0; f < kFolds; ++f) {
      std::vector<bool> in_test(n);
      for (std::size_t i = 0; i < n; ++i) in_test[i] = fold_of[i] == f;
      make_fold(in_test);
    }
  } else {
    const auto test_size = static_cast<std::size_t>(std::llround(0.4 * static_cast<double>(n)));
    for (std::size_t f = 0; f < kFolds; ++f) {
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(mix(seed, 0x40, f));
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<bool> in_test(n, false);
      for (std::size_t pos = 0; pos < test_size; ++pos) in_test[order[pos]] = true;
      make_fold(in_test);
    }
  }
  return folds;
}

std::optional<QueryCase> make_query(const Transaction& transaction, std::size_t k, std::uint64_t seed,
                                    InputStrategy strategy, std::span<const Count> tag_support) {
  if (k == 0) throw ConfigError("k must be >= 1");
  if (transaction.tags.size() < k + 1) return std::nullopt;
  std::vector<TagId> tags = transaction.tags;
  if (strategy == InputStrategy::kRandom) {
    std::mt19937_64 rng(seed);
    std::shuffle(tags.begin(), tags.end(), rng);
  } else {
    auto sup = [&](TagId t) { return t < tag_support.size() ? tag_support[t] : Count{0}; };
    std::stable_sort(tags.begin(), tags.end(), [&](TagId a, TagId b) {
      return sup(a) != sup(b) ? sup(a) > sup(b) : a < b;
    });
  }
  QueryCase c;
  c.query.user = transaction.user;
  c.query.interest = transaction.interest;
  c.query.input = make_tagset({tags.begin(), tags.begin() + static_cast<std::ptrdiff_t>(k)});
  c.truth = make_tagset({tags.begin() + static_cast<std::ptrdiff_t>(k), tags.end()});
  return c;
}

QueryScore score(std::span<const TagId> ranked, const Tagset& truth, std::span<const std::size_t> at_ranks) {
  QueryScore s;
  std::vector<std::size_t> hits_prefix(ranked.size() + 1, 0);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const bool hit = contains_tag(truth, ranked[i]);
    hits_prefix[i + 1] = hits_prefix[i] + (hit ? 1 : 0);
    if (hit && s.reciprocal_rank == 0) s.reciprocal_rank = 1.0 / static_cast<double>(i + 1);
  }
  for (auto r : at_ranks) {
    const auto hits = hits_prefix[std::min(r, ranked.size())];
    s.precision.push_back(static_cast<double>(hits) / static_cast<double>(r));
    s.success.push_back(hits > 0 ? 1.0 : 0.0);
  }
  return s;
}

void EvalConfig::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (at_ranks.empty()) throw ConfigError("at least one rank is required");
  for (auto r : at_ranks)
    if (r < 1) throw ConfigError("ranks must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (recommender.max_recommendations < 1) throw ConfigError("limit must be >= 1");
  recommender.mining.validate();
  recommender.ct_mining.validate();
  source.validate();
}

double MetricsReport::p(std::size_t rank) const {
  auto it = p_at.find(rank);
  return it == p_at.end() ? 0.0 : it->second;
}

double MetricsReport::s(std::size_t rank) const {
  auto it = s_at.find(rank);
  return it == s_at.end() ? 0.0 : it->second;
}

MetricsReport run_experiment(const Corpus& corpus, const EvalConfig& input_config) {
  EvalConfig config = input_config;
  config.validate();
  for (std::size_t r : {1, 3, 5})
    if (std::find(config.at_ranks.begin(), config.at_ranks.end(), r) == config.at_ranks.end())
      config.at_ranks.push_back(r);
  std::sort(config.at_ranks.begin(), config.at_ranks.end());

  const auto folds = split(corpus.db, config.split, config.seed);
  std::vector<FoldOutcome> outcomes(folds.size());
  auto run = [&](std::size_t f) {
    try {
      return run_fold(corpus, folds[f], f, config);
    } catch (const std::exception& e) {
      throw Error("fold " + std::to_string(f) + ": " + e.what());
    }
  };
  if (config.jobs > 1) {
    std::vector<std::future<FoldOutcome>> pending;
    for (std::size_t f = 0; f < folds.size(); ++f) pending.push_back(std::async(std::launch::async, run, f));
    for (std::size_t f = 0; f < folds.size(); ++f) outcomes[f] = pending[f].get();
  } else {
    for (std::size_t f = 0; f < folds.size(); ++f) outcomes[f] = run(f);
  }

  MetricsReport report;
  report.k = config.k;
  report.method = to_string(config.recommender.method);
  report.source = config.source.label();
  report.folds = folds.size();

  std::vector<double> p_sum(config.at_ranks.size(), 0), s_sum(config.at_ranks.size(), 0), uk, ck;
  double rr_sum = 0, tagsets = 0;
  for (const auto& o : outcomes) {
    for (const auto& s : o.scores) {
      for (std::size_t r = 0; r < config.at_ranks.size(); ++r) {
        p_sum[r] += s.precision[r];
        s_sum[r] += s.success[r];
      }
      rr_sum += s.reciprocal_rank;
    }
    report.queries += o.scores.size();
    report.skipped += o.skipped;
    report.batches += o.batches;
    report.mining_invocations += o.invocations;
    report.fallbacks += o.fallbacks;
    report.time_ms_total += o.time_ms;
    tagsets += o.tagsets;
    uk.insert(uk.end(), o.frac_uk.begin(), o.frac_uk.end());
    ck.insert(ck.end(), o.frac_ck.begin(), o.frac_ck.end());
  }
  const auto n = static_cast<double>(report.queries);
  for (std::size_t r = 0; r < config.at_ranks.size(); ++r) {
    report.p_at[config.at_ranks[r]] = report.queries ? p_sum[r] / n : 0.0;
    report.s_at[config.at_ranks[r]] = report.queries ? s_sum[r] / n : 0.0;
  }
  report.mrr = report.queries ? rr_sum / n : 0.0;
  report.time_ms = report.queries ? report.time_ms_total / n : 0.0;
  report.n_tagsets = folds.empty() ? 0.0 : tagsets / static_cast<double>(folds.size());
  report.frac_uk = mean(uk);
  report.frac_ck = mean(ck);
  return report;
}

}  // namespace tagrec
