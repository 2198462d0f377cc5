#include "tagrec/recommend.hpp"

#include <unordered_map>

namespace tagrec {

namespace {

/// All subsets of `input` with sizes in [2, max_size], by size then lexicographically.
std::vector<Tagset> multi_subsets(const Tagset& input, std::size_t max_size) {
  std::vector<Tagset> out;
  const auto n = input.size();
  for (std::size_t size = 2; size <= std::min(max_size, n); ++size) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      Tagset subset;
      for (auto i : idx) subset.push_back(input[i]);
      out.push_back(std::move(subset));
      std::size_t i = size;
      while (i > 0 && idx[i - 1] == n - size + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (auto j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

Tagset with_tag(const Tagset& base, TagId tag) {
  Tagset out = base;
  out.insert(std::upper_bound(out.begin(), out.end(), tag), tag);
  return out;
}

/// Shared scoring skeleton. Candidates are the union of the input tags'
/// top-m lists; single-tag conditionals come from the index, and
/// `conditional(X, c)` supplies P(c|X) for |X| >= 2.
template <typename Conditional>
Recommendation score_candidates(const CooccurrenceIndex& index, const Query& query, std::size_t limit,
                                std::size_t max_len, Conditional&& conditional) {
  if (query.input.empty()) throw Error("query has an empty input tagset");
  const auto& input = query.input;

  std::vector<ScoredTag> candidates;
  std::unordered_map<TagId, std::size_t> slot;
  for (auto t : input) {
    const auto base = static_cast<double>(index.tag_support(t));
    for (const auto& c : index.top_list(t)) {
      if (contains_tag(input, c.tag)) continue;
      auto [it, fresh] = slot.try_emplace(c.tag, candidates.size());
      if (fresh) candidates.push_back({c.tag, 0.0});
      candidates[it->second].score += static_cast<double>(c.joint) / base;
    }
  }

  if (max_len >= 3 && input.size() >= 2) {
    for (const auto& subset : multi_subsets(input, max_len - 1))
      for (auto& c : candidates) c.score += conditional(subset, c.tag);
  }

  auto order = [&](const ScoredTag& a, const ScoredTag& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto sa = index.tag_support(a.tag), sb = index.tag_support(b.tag);
    if (sa != sb) return sa > sb;
    return a.tag < b.tag;
  };
  const auto keep = std::min(limit, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), order);
  candidates.resize(keep);
  return {std::move(candidates), query};
}

}  // namespace

Method parse_method(std::string_view text) {
  if (text == "par" || text == "PAR") return Method::kPar;
  if (text == "nar" || text == "NAR") return Method::kNar;
  if (text == "far" || text == "FAR") return Method::kFar;
  throw ConfigError("unknown method '" + std::string(text) + "' (expected par, nar or far)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kPar: return "PAR";
    case Method::kNar: return "NAR";
    case Method::kFar: return "FAR";
  }
  return "?";
}

std::vector<TagId> Recommendation::tags() const {
  std::vector<TagId> out;
  out.reserve(items.size());
  for (const auto& i : items) out.push_back(i.tag);
  return out;
}

Recommendation recommend_par(const CooccurrenceIndex& index, const Query& query, std::size_t limit) {
  return score_candidates(index, query, limit, 2, [](const Tagset&, TagId) { return 0.0; });
}

Recommendation recommend_nar(const CooccurrenceIndex& index, const FrequentTagsetCollection& f,
                             const Query& query, std::size_t limit) {
  return score_candidates(index, query, limit, f.params().max_len,
                          [&](const Tagset& subset, TagId c) {
                            const auto den = f.support_of(subset);
                            if (!den || *den == 0) return 0.0;
                            const auto num = f.support_of(with_tag(subset, c));
                            if (!num) return 0.0;
                            return static_cast<double>(*num) / static_cast<double>(*den);
                          });
}

Recommendation recommend_far(const CooccurrenceIndex& index, const CodeTable& ct, const Query& query,
                             std::size_t limit) {
  return score_candidates(index, query, limit, ct.max_len(), [&](const Tagset& subset, TagId c) {
    const auto den = estimate_support(ct, subset);
    if (den == 0) return 0.0;
    const auto num = estimate_support(ct, with_tag(subset, c));
    return static_cast<double>(num) / static_cast<double>(den);
  });
}

std::size_t RecommenderModel::tagset_count() const {
  switch (method) {
    case Method::kPar: return 0;
    case Method::kNar: return frequent.size();
    case Method::kFar: return code_table.size();
  }
  return 0;
}

RecommenderModel build_model(const TagDatabase& db, const RecommenderConfig& config) {
  RecommenderModel model;
  model.method = config.method;
  model.index = build_cooccurrence(db, config.mining.top_m);
  if (config.method == Method::kNar) {
    model.frequent = mine_closed(db, config.mining);
  } else if (config.method == Method::kFar && !db.empty()) {
    model.code_table = induce(db, mine_closed(db, config.ct_mining));
  }
  return model;
}

Recommendation recommend(const RecommenderModel& model, const Query& query, std::size_t limit) {
  switch (model.method) {
    case Method::kPar: return recommend_par(model.index, query, limit);
    case Method::kNar: return recommend_nar(model.index, model.frequent, query, limit);
    case Method::kFar: return recommend_far(model.index, model.code_table, query, limit);
  }
  return {};
}

}  // namespace tagrec
