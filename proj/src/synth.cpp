#include "tagrec/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace tagrec {

namespace {

std::string name(const char* prefix, std::size_t i, int width) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

void check_probability(double p, const char* field) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(field) + " must be in [0,1]");
}

void check_range(const Range& r, const char* field) {
  if (r.min > r.max) throw ConfigError(std::string(field) + ": min exceeds max");
}

/// Zipf sampler over ranks [0, n).
class Zipf {
 public:
  Zipf(std::size_t n, double exponent) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), exponent);
    dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }
  template <typename Rng>
  std::size_t operator()(Rng& rng) {
    return dist_(rng);
  }

 private:
  std::discrete_distribution<std::size_t> dist_;
};

}  // namespace

void SynthConfig::validate() const {
  if (users == 0) throw ConfigError("users must be >= 1");
  if (communities == 0) throw ConfigError("communities must be >= 1");
  if (communities > users) throw ConfigError("more communities than users");
  if (topics_per_community == 0) throw ConfigError("topics_per_community must be >= 1");
  if (tags_per_community < 1) throw ConfigError("tags_per_community must be >= 1");
  check_range(transactions_per_user, "transactions_per_user");
  if (transactions_per_user.min < 1) throw ConfigError("transactions_per_user min must be >= 1");
  check_range(tags_per_transaction, "tags_per_transaction");
  if (tags_per_transaction.min < 2) throw ConfigError("tags_per_transaction min must be >= 2");
  check_probability(intra_community_edge_prob, "intra_community_edge_prob");
  check_probability(inter_community_edge_prob, "inter_community_edge_prob");
  check_probability(group_membership_prob, "group_membership_prob");
  check_probability(group_post_prob, "group_post_prob");
  check_probability(topic_focus, "topic_focus");
  check_probability(topic_loyalty, "topic_loyalty");
  check_probability(signature_prob, "signature_prob");
  if (signature_tags > shared_tags) throw ConfigError("signature_tags exceeds shared_tags");
  if (signature_tags > tags_per_transaction.min)
    throw ConfigError("signature_tags exceeds tags_per_transaction min");
  if (!(community_tag_affinity > 0.5 && community_tag_affinity <= 1.0))
    throw ConfigError("community_tag_affinity must be in (0.5,1]");
  if (community_tag_affinity < 1.0 && shared_tags == 0)
    throw ConfigError("community_tag_affinity below 1 needs shared tags");
  if (!(zipf_exponent >= 0.0)) throw ConfigError("zipf_exponent must be >= 0");
  const auto reachable = tags_per_community + (community_tag_affinity < 1.0 ? shared_tags : 0);
  if (tags_per_transaction.max > reachable)
    throw ConfigError("tags_per_transaction max " + std::to_string(tags_per_transaction.max) +
                      " exceeds the " + std::to_string(reachable) + " tags a transaction can draw from");
  if (group_count > 0 && group_count < communities)
    throw ConfigError("group_count must be 0 or >= communities");
}

CorpusText generate_text(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::bernoulli_distribution coin;
  auto flip = [&](double p) { return coin(rng, std::bernoulli_distribution::param_type(p)); };
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };

  const auto C = config.communities;
  const auto K = config.topics_per_community;

  std::vector<std::vector<std::string>> community_tags(C);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < config.tags_per_community; ++i)
      community_tags[c].push_back("c" + std::to_string(c) + name("_t", i, 3));
  std::vector<std::string> shared;
  for (std::size_t i = 0; i < config.shared_tags; ++i) shared.push_back(name("s_t", i, 3));

  // A topic is a popularity order over the whole community vocabulary and
  // over the shared tags; the same tag ranks differently under each topic.
  auto permutation = [&](std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
  };
  struct Topic {
    std::vector<std::size_t> community_order;
    std::vector<std::size_t> shared_order;
  };
  std::vector<std::vector<Topic>> topics(C);
  std::vector<std::vector<std::size_t>> background(C);
  for (std::size_t c = 0; c < C; ++c) {
    background[c] = permutation(config.tags_per_community);
    for (std::size_t k = 0; k < K; ++k)
      topics[c].push_back({permutation(config.tags_per_community), permutation(config.shared_tags)});
  }

  // Users in community-major order.
  const int uw = static_cast<int>(std::to_string(config.users).size());
  std::vector<std::size_t> community_of(config.users), preferred(config.users);
  for (std::size_t u = 0; u < config.users; ++u) {
    community_of[u] = u * C / config.users;
    preferred[u] = uniform(0, K - 1);
  }

  // Groups are spread round-robin over communities and their topics.
  std::vector<std::size_t> group_topic(config.group_count);
  std::vector<std::vector<std::size_t>> groups_in(C);
  for (std::size_t g = 0; g < config.group_count; ++g) {
    group_topic[g] = (g / C) % K;
    groups_in[g % C].push_back(g);
  }
  std::vector<std::vector<std::size_t>> user_groups(config.users);
  for (std::size_t u = 0; u < config.users; ++u) {
    const auto& pool = groups_in[community_of[u]];
    if (pool.empty() || !flip(config.group_membership_prob)) continue;
    std::vector<std::size_t> topical;
    for (auto g : pool)
      if (group_topic[g] == preferred[u]) topical.push_back(g);
    const auto& first_pool = topical.empty() ? pool : topical;
    std::set<std::size_t> chosen{first_pool[uniform(0, first_pool.size() - 1)]};
    if (pool.size() > 1 && flip(0.3)) chosen.insert(pool[uniform(0, pool.size() - 1)]);
    user_groups[u].assign(chosen.begin(), chosen.end());
  }

  std::vector<std::vector<std::size_t>> signature(config.users);
  for (std::size_t u = 0; u < config.users; ++u) {
    auto pool = permutation(config.shared_tags);
    signature[u].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(config.signature_tags));
  }

  Zipf shared_rank(std::max<std::size_t>(1, shared.size()), config.zipf_exponent);
  Zipf community_rank(config.tags_per_community, config.zipf_exponent);

  std::ostringstream tx;
  for (std::size_t u = 0; u < config.users; ++u) {
    const auto c = community_of[u];
    const auto n_tx = uniform(config.transactions_per_user.min, config.transactions_per_user.max);
    for (std::size_t i = 0; i < n_tx; ++i) {
      std::optional<std::size_t> group;
      std::size_t topic = preferred[u];
      if (!user_groups[u].empty() && flip(config.group_post_prob)) {
        group = user_groups[u][uniform(0, user_groups[u].size() - 1)];
        topic = group_topic[*group];
      } else if (!flip(config.topic_loyalty)) {
        topic = uniform(0, K - 1);
      }
      const auto length = uniform(config.tags_per_transaction.min, config.tags_per_transaction.max);
      std::set<std::string> tags;
      for (auto st : signature[u])
        if (flip(config.signature_prob)) tags.insert(shared[st]);
      while (tags.size() < length) {
        const auto& t = topics[c][topic];
        if (flip(config.community_tag_affinity)) {
          const auto& order = flip(config.topic_focus) ? t.community_order : background[c];
          tags.insert(community_tags[c][order[community_rank(rng)]]);
        } else {
          tags.insert(shared[t.shared_order[shared_rank(rng)]]);
        }
      }
      tx << name("u", u, uw) << '\t' << (group ? name("g", *group, 3) : "-") << '\t' << "c" << c << '\t';
      bool first = true;
      for (const auto& t : tags) {
        tx << (first ? "" : ",") << t;
        first = false;
      }
      tx << '\n';
    }
  }

  std::ostringstream graph;
  for (std::size_t a = 0; a < config.users; ++a)
    for (std::size_t b = a + 1; b < config.users; ++b)
      if (flip(community_of[a] == community_of[b] ? config.intra_community_edge_prob
                                                  : config.inter_community_edge_prob))
        graph << name("u", a, uw) << ' ' << name("u", b, uw) << '\n';

  std::ostringstream groups;
  for (std::size_t u = 0; u < config.users; ++u)
    for (auto g : user_groups[u]) groups << name("g", g, 3) << '\t' << name("u", u, uw) << '\n';

  return {tx.str(), graph.str(), groups.str()};
}

Corpus generate(const SynthConfig& config) {
  const auto text = generate_text(config);
  std::istringstream tx(text.transactions), graph(text.graph), groups(text.groups);
  return parse_corpus(tx, &graph, &groups, LoadOptions{2});
}

}  // namespace tagrec
