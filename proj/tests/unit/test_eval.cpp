#include <numeric>
#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "tagrec/eval.hpp"
#include "tagrec/synth.hpp"

using namespace tagrec;

namespace {

std::multiset<TransactionId> ids(const TagDatabase& db) {
  std::multiset<TransactionId> out;
  for (const auto& t : db.transactions()) out.insert(t.id);
  return out;
}

const Corpus& small_corpus() {
  static const Corpus c = [] {
    SynthConfig s;
    s.users = 60;
    s.tags_per_community = 30;
    s.shared_tags = 10;
    s.transactions_per_user = {3, 6};
    s.group_count = 4;
    s.intra_community_edge_prob = 0.2;
    s.seed = 5;
    return generate(s);
  }();
  return c;
}

EvalConfig quick(SourceKind kind, std::optional<std::size_t> degree = std::nullopt) {
  EvalConfig c;
  c.source = {kind, degree};
  c.recommender.mining.min_support = MinSupport::absolute(2);
  c.recommender.ct_mining.min_support = MinSupport::absolute(2);
  return c;
}

}  // namespace

TEST_CASE("cv5 partitions the database") {
  std::mt19937_64 rng(1);
  auto db = oracle::random_db(rng, 8, 103);
  auto folds = split(db, SplitMode::kCv5, 7);
  REQUIRE(folds.size() == 5);
  std::multiset<TransactionId> tested;
  for (const auto& f : folds) {
    CHECK(f.train.size() + f.test.size() == db.size());
    CHECK(f.test.size() >= 20);
    CHECK(f.test.size() <= 21);
    auto tr = ids(f.train), te = ids(f.test);
    for (auto id : te) CHECK(tr.count(id) == 0);
    tested.insert(te.begin(), te.end());
  }
  CHECK(tested == ids(db));
}

TEST_CASE("holdout40 draws independent 40 percent test sets") {
  std::mt19937_64 rng(1);
  auto db = oracle::random_db(rng, 8, 100);
  auto folds = split(db, SplitMode::kHoldout40, 7);
  REQUIRE(folds.size() == 5);
  for (const auto& f : folds) {
    CHECK(f.test.size() == 40);
    CHECK(f.train.size() == 60);
  }
  CHECK(ids(folds[0].test) != ids(folds[1].test));
}

TEST_CASE("splits are seeded") {
  std::mt19937_64 rng(1);
  auto db = oracle::random_db(rng, 8, 50);
  CHECK(ids(split(db, SplitMode::kCv5, 3)[0].test) == ids(split(db, SplitMode::kCv5, 3)[0].test));
  CHECK(ids(split(db, SplitMode::kCv5, 3)[0].test) != ids(split(db, SplitMode::kCv5, 4)[0].test));
  CHECK_THROWS_AS(split(oracle::make_db(2, {{0, 1}}), SplitMode::kCv5, 1), Error);
}

TEST_CASE("make_query partitions the transaction") {
  Transaction t;
  t.user = 3;
  t.tags = {1, 4, 6, 9};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto c = make_query(t, 2, seed);
    REQUIRE(c);
    CHECK(c->query.input.size() == 2);
    CHECK(c->truth.size() == 2);
    Tagset all = c->query.input;
    all.insert(all.end(), c->truth.begin(), c->truth.end());
    CHECK(make_tagset(all) == t.tags);
    CHECK(c->query.user == 3);
    CHECK(make_query(t, 2, seed)->query.input == c->query.input);
  }
  CHECK_FALSE(make_query(t, 4, 0));
  CHECK_THROWS_AS(make_query(t, 0, 0), ConfigError);
}

TEST_CASE("most-frequent-first input picks the most popular tags") {
  Transaction t;
  t.tags = {0, 1, 2, 3};
  std::vector<Count> sup{5, 9, 1, 9};
  auto c = make_query(t, 2, 0, InputStrategy::kMostFrequentFirst, sup);
  REQUIRE(c);
  CHECK(c->query.input == Tagset{1, 3});
  CHECK(c->truth == Tagset{0, 2});
}

TEST_CASE("metrics on the worked example") {
  std::vector<TagId> ranked{2, 1, 3};  // c, b, d
  std::vector<std::size_t> ranks{1, 3, 5};
  auto s = score(ranked, Tagset{1}, ranks);
  CHECK(s.precision[0] == 0.0);
  CHECK(s.precision[1] == 1.0 / 3.0);
  CHECK(s.precision[2] == 1.0 / 5.0);
  CHECK(s.success[0] == 0.0);
  CHECK(s.success[1] == 1.0);
  CHECK(s.reciprocal_rank == 0.5);
  auto none = score(std::vector<TagId>{}, Tagset{1}, ranks);
  CHECK(none.reciprocal_rank == 0.0);
  CHECK(none.precision[2] == 0.0);
}

TEST_CASE("metrics match the naive reimplementation") {
  std::mt19937_64 rng(17);
  std::vector<std::size_t> ranks{1, 2, 3, 5, 10};
  for (int i = 0; i < 300; ++i) {
    std::vector<TagId> ranked(rng() % 8);
    std::iota(ranked.begin(), ranked.end(), 0);
    std::shuffle(ranked.begin(), ranked.end(), rng);
    std::set<TagId> truth;
    for (int j = 0, n = 1 + static_cast<int>(rng() % 4); j < n; ++j) truth.insert(static_cast<TagId>(rng() % 10));
    auto got = score(ranked, Tagset(truth.begin(), truth.end()), ranks);
    auto want = oracle::metrics(ranked, truth, ranks);
    CHECK(got.precision == want.precision);
    CHECK(got.success == want.success);
    CHECK(got.reciprocal_rank == want.rr);
  }
}

TEST_CASE("eval config validation and keyword parsing") {
  EvalConfig c;
  CHECK_NOTHROW(c.validate());
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.k = 1;
  c.at_ranks = {0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_split("holdout40") == SplitMode::kHoldout40);
  CHECK(parse_split("cv5") == SplitMode::kCv5);
  CHECK_THROWS_AS(parse_split("cv10"), ConfigError);
}

TEST_CASE("collective runs mine once per fold and count every query") {
  const auto& c = small_corpus();
  auto r = run_experiment(c, quick(SourceKind::kCollective));
  CHECK(r.folds == 5);
  CHECK(r.mining_invocations == 5);
  CHECK(r.queries + r.skipped == c.db.size());
  CHECK(r.frac_ck == doctest::Approx(100.0));
  CHECK(r.p(1) >= 0.0);
  CHECK(r.p(1) <= 1.0);
  CHECK(r.s(1) == doctest::Approx(r.p(1)));
  CHECK(r.mrr >= r.p(1) - 1e-12);
  CHECK(r.n_tagsets > 0);
}

TEST_CASE("batched runs mine once per batch") {
  const auto& c = small_corpus();
  auto cfg = quick(SourceKind::kBatched);
  cfg.split = SplitMode::kHoldout40;
  cfg.batch_size = 20;
  auto r = run_experiment(c, cfg);
  CHECK(r.batches > 5);
  CHECK(r.mining_invocations == r.batches);
  CHECK(r.frac_ck < 100.0);
  cfg.batch_size = 0;
  auto whole = run_experiment(c, cfg);
  CHECK(whole.batches == 5);
}

TEST_CASE("fractions of social batches grow with degree") {
  const auto& c = small_corpus();
  auto cfg = quick(SourceKind::kBatched);
  cfg.split = SplitMode::kHoldout40;
  cfg.batch_size = 10;
  cfg.recommender.method = Method::kPar;
  const auto d0 = run_experiment(c, cfg).frac_ck;
  cfg.source = {SourceKind::kSocialBatched, 1};
  const auto d1 = run_experiment(c, cfg).frac_ck;
  cfg.source = {SourceKind::kSocialBatched, 2};
  const auto d2 = run_experiment(c, cfg).frac_ck;
  CHECK(d0 <= d1);
  CHECK(d1 <= d2);
}

TEST_CASE("parallel folds give the same metrics") {
  const auto& c = small_corpus();
  auto cfg = quick(SourceKind::kUserCentered, 1);
  cfg.recommender.method = Method::kNar;
  auto serial = run_experiment(c, cfg);
  cfg.jobs = 3;
  auto parallel = run_experiment(c, cfg);
  CHECK(serial.p_at == parallel.p_at);
  CHECK(serial.mrr == parallel.mrr);
  CHECK(serial.n_tagsets == parallel.n_tagsets);
  CHECK(serial.mining_invocations == parallel.mining_invocations);
}

TEST_CASE("community runs cover every query") {
  const auto& c = small_corpus();
  auto r = run_experiment(c, quick(SourceKind::kCommunityBatched));
  CHECK(r.queries + r.skipped == c.db.size());
  CHECK(r.frac_ck < 100.0);
}
