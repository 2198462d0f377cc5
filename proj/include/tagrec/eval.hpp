#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagrec/corpus.hpp"
#include "tagrec/recommend.hpp"
#include "tagrec/social.hpp"

namespace tagrec {

enum class SplitMode {
  kCv5,        // 5 disjoint folds, every transaction tested once
  kHoldout40,  // 5 independent random 40% test / 60% train splits
};

SplitMode parse_split(std::string_view text);
std::string to_string(SplitMode mode);

struct Fold {
  TagDatabase train;
  TagDatabase test;
};

std::vector<Fold> split(const TagDatabase& db, SplitMode mode, std::uint64_t seed);

enum class InputStrategy { kRandom, kMostFrequentFirst };

InputStrategy parse_input_strategy(std::string_view text);

struct QueryCase {
  Query query;
  Tagset truth;
};

/// Picks k input tags from the transaction; the rest become ground truth.
/// nullopt when fewer than k+1 tags leave nothing to predict.
/// `tag_support` is required for kMostFrequentFirst.
std::optional<QueryCase> make_query(const Transaction& transaction, std::size_t k, std::uint64_t seed,
                                    InputStrategy strategy = InputStrategy::kRandom,
                                    std::span<const Count> tag_support = {});

struct QueryScore {
  std::vector<double> precision;  // parallel to at_ranks
  std::vector<double> success;
  double reciprocal_rank = 0;
};

QueryScore score(std::span<const TagId> ranked, const Tagset& truth, std::span<const std::size_t> at_ranks);

/// Order in which a fold's test queries reach the batcher.
enum class QueryOrder { kCorpus, kShuffled };

struct EvalConfig {
  std::size_t k = 2;
  SplitMode split = SplitMode::kCv5;
  std::uint64_t seed = 1;
  std::vector<std::size_t> at_ranks{1, 3, 5};
  RecommenderConfig recommender;
  SourceSelection source;
  InputStrategy input_strategy = InputStrategy::kRandom;
  /// Queries per batch in batched modes; 0 puts a fold's whole test set in one batch.
  std::size_t batch_size = 0;
  QueryOrder query_order = QueryOrder::kCorpus;
  FallbackPolicy fallback;
  std::size_t min_group_transactions = 1;
  /// Folds evaluated concurrently.
  std::size_t jobs = 1;

  void validate() const;
};

struct MetricsReport {
  std::size_t k = 0;
  std::string method;
  std::string source;
  double n_tagsets = 0;               // tagsets mined per fold, all mining runs summed
  std::map<std::size_t, double> p_at;  // rank -> mean precision
  std::map<std::size_t, double> s_at;  // rank -> mean success
  double mrr = 0;
  double time_ms = 0;        // mean wall time per query, mining included
  double time_ms_total = 0;  // summed over folds
  double frac_uk = 0;        // mean |D|/|UK| in percent
  double frac_ck = 0;        // mean |D|/|CK| in percent

  std::size_t folds = 0;
  std::size_t queries = 0;
  std::size_t skipped = 0;  // test transactions with <= k tags
  std::size_t batches = 0;
  std::size_t mining_invocations = 0;
  std::size_t fallbacks = 0;

  double p(std::size_t rank) const;
  double s(std::size_t rank) const;
};

/// Evaluates one (method, source, k) cell over all folds.
MetricsReport run_experiment(const Corpus& corpus, const EvalConfig& config);

enum class ReportFormat { kTsv, kMarkdown };

ReportFormat parse_report_format(std::string_view text);

/// Columns: k method source n_tagsets p1 p3 p5 s3 s5 mrr time_ms frac_uk frac_ck.
std::string emit_report(std::span<const MetricsReport> rows, ReportFormat format);

/// Reads back the tsv columns of emit_report.
std::vector<MetricsReport> parse_report_tsv(std::string_view text);

}  // namespace tagrec
