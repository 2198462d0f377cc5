#pragma once

#include <cstdint>
#include <string>

#include "tagrec/corpus.hpp"

namespace tagrec {

struct Range {
  std::size_t min = 0;
  std::size_t max = 0;
};

/// Knobs of the planted-structure generator.
///
/// Every user belongs to one community, whose label becomes the interest of
/// all the user's transactions. Topics rank the community vocabulary in
/// different popularity orders; users lean towards one topic and each group
/// is bound to one.
struct SynthConfig {
  std::size_t users = 400;
  std::size_t communities = 2;
  std::size_t topics_per_community = 4;
  std::size_t tags_per_community = 80;
  std::size_t shared_tags = 30;
  Range transactions_per_user{10, 30};
  Range tags_per_transaction{3, 8};
  double intra_community_edge_prob = 0.08;
  double inter_community_edge_prob = 0.0005;
  std::size_t group_count = 16;
  double group_membership_prob = 0.5;
  /// Chance that a grouped user's transaction is posted to one of its groups.
  double group_post_prob = 0.5;
  double community_tag_affinity = 0.8;
  /// Chance that a community tag follows the transaction's topic ranking
  /// rather than the community-wide one.
  double topic_focus = 0.85;
  /// Chance that an ungrouped post uses the user's preferred topic.
  double topic_loyalty = 0.8;
  /// Per-user habitual tags, drawn from the shared pool, each added to a
  /// transaction independently with `signature_prob`.
  std::size_t signature_tags = 2;
  double signature_prob = 0.8;
  /// Tag popularity within a pool follows rank^-zipf_exponent.
  double zipf_exponent = 1.0;
  std::uint64_t seed = 42;

  /// Throws ConfigError for out-of-range or infeasible settings.
  void validate() const;
};

/// Deterministic per config (including seed) for a given standard library.
Corpus generate(const SynthConfig& config);

/// Same corpus as text in the three file formats.
struct CorpusText {
  std::string transactions;
  std::string graph;
  std::string groups;
};
CorpusText generate_text(const SynthConfig& config);

}  // namespace tagrec
