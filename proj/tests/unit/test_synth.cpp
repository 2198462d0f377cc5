#include <set>

#include "doctest.h"
#include "tagrec/social.hpp"
#include "tagrec/synth.hpp"

using namespace tagrec;

namespace {

std::size_t components(const SocialGraph& g) {
  std::vector<bool> seen(g.user_count(), false);
  std::size_t n = 0;
  for (UserId u = 0; u < g.user_count(); ++u) {
    if (seen[u]) continue;
    ++n;
    for (auto v : nth_degree_users(g, u, g.user_count())) seen[v] = true;
  }
  return n;
}

SynthConfig small() {
  SynthConfig s;
  s.users = 80;
  s.tags_per_community = 30;
  s.shared_tags = 10;
  s.transactions_per_user = {2, 5};
  s.group_count = 4;
  return s;
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  auto a = generate_text(small());
  auto b = generate_text(small());
  CHECK(a.transactions == b.transactions);
  CHECK(a.graph == b.graph);
  CHECK(a.groups == b.groups);
  auto other = small();
  other.seed = 43;
  CHECK(generate_text(other).transactions != a.transactions);
}

TEST_CASE("generated corpus respects its ranges") {
  auto cfg = small();
  auto c = generate(cfg);
  CHECK(c.db.lexicon().users.size() == cfg.users);
  CHECK(c.db.lexicon().interests.size() == cfg.communities);
  std::vector<std::size_t> per_user(cfg.users, 0);
  for (const auto& t : c.db.transactions()) {
    CHECK(t.tags.size() >= cfg.tags_per_transaction.min);
    CHECK(t.tags.size() <= cfg.tags_per_transaction.max);
    CHECK(t.interest);
    ++per_user[t.user];
  }
  for (auto n : per_user) {
    CHECK(n >= cfg.transactions_per_user.min);
    CHECK(n <= cfg.transactions_per_user.max);
  }
  CHECK(c.report.dropped_short == 0);
}

TEST_CASE("communities without cross edges form separate components") {
  auto cfg = small();
  cfg.inter_community_edge_prob = 0.0;
  cfg.intra_community_edge_prob = 0.3;
  CHECK(components(generate(cfg).graph) >= 2);
}

TEST_CASE("full affinity without shared tags keeps communities apart") {
  auto cfg = small();
  cfg.community_tag_affinity = 1.0;
  cfg.shared_tags = 0;
  cfg.signature_tags = 0;
  auto c = generate(cfg);
  std::vector<std::set<InterestId>> owners(c.db.vocabulary().size());
  for (const auto& t : c.db.transactions())
    for (auto tag : t.tags) owners[tag].insert(*t.interest);
  for (const auto& o : owners) CHECK(o.size() == 1);
}

TEST_CASE("invalid configurations are rejected") {
  auto bad = small();
  bad.tags_per_transaction = {5, 3};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = small();
  bad.intra_community_edge_prob = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = small();
  bad.community_tag_affinity = 0.9;
  bad.shared_tags = 0;
  bad.signature_tags = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = small();
  bad.tags_per_transaction = {2, 100};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(generate(bad), ConfigError);
}

TEST_CASE("groups exist and receive posts") {
  auto c = generate(small());
  CHECK(c.groups.group_count() == 4);
  std::size_t posted = 0;
  for (GroupId g = 0; g < c.groups.group_count(); ++g) posted += c.groups.transactions_of(g).size();
  CHECK(posted > 0);
}
