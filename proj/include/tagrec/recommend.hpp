#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tagrec/codetable.hpp"
#include "tagrec/corpus.hpp"
#include "tagrec/miner.hpp"

namespace tagrec {

enum class Method { kPar, kNar, kFar };

Method parse_method(std::string_view text);
std::string to_string(Method method);

struct ScoredTag {
  TagId tag;
  double score;
  friend bool operator==(const ScoredTag&, const ScoredTag&) = default;
};

struct Recommendation {
  std::vector<ScoredTag> items;
  Query query;

  std::vector<TagId> tags() const;
};

struct RecommenderConfig {
  Method method = Method::kFar;
  /// Parameters for the closed tagsets NAR consults (and top_m for all).
  MiningParams mining{MinSupport::relative(0.0007), 3, 50};
  /// Parameters for the code-table candidates FAR induces from.
  MiningParams ct_mining{MinSupport::relative(0.00007), 3, 50};
  std::size_t max_recommendations = 5;
};

/// Pairwise: sum over input tags t of P(c|t) for c in the top-m list of t.
Recommendation recommend_par(const CooccurrenceIndex& index, const Query& query, std::size_t limit);

/// Any-length: adds P(c|X) for every X within the input, |X| <= max_len - 1,
/// with supports from the closed tagset collection.
Recommendation recommend_nar(const CooccurrenceIndex& index, const FrequentTagsetCollection& f,
                             const Query& query, std::size_t limit);

/// Like NAR, but multi-tag conditionals come from code-table support estimates.
Recommendation recommend_far(const CooccurrenceIndex& index, const CodeTable& ct, const Query& query,
                             std::size_t limit);

/// Per-database state a recommender needs. Holds whichever of the closed
/// collection / code table the method uses.
struct RecommenderModel {
  Method method = Method::kPar;
  CooccurrenceIndex index;
  FrequentTagsetCollection frequent;
  CodeTable code_table;

  /// |F| for NAR, |CT| for FAR, 0 for PAR.
  std::size_t tagset_count() const;
};

RecommenderModel build_model(const TagDatabase& db, const RecommenderConfig& config);

Recommendation recommend(const RecommenderModel& model, const Query& query, std::size_t limit);

}  // namespace tagrec
