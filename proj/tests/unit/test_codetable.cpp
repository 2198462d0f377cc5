#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tagrec/codetable.hpp"

using namespace tagrec;

namespace {

CodeTable induce_from(const TagDatabase& db, Count minsup, std::size_t max_len, InductionTrace* trace = nullptr) {
  return induce(db, mine_closed(db, MiningParams{MinSupport::absolute(minsup), max_len, 10}), trace);
}

void check_cover_exact(const CodeTable& ct, const Tagset& tags) {
  auto parts = cover(ct, tags);
  Tagset all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  const auto n = all.size();
  std::sort(all.begin(), all.end());
  CHECK(std::unique(all.begin(), all.end()) == all.end());  // disjoint
  CHECK(n == tags.size());
  CHECK(all == tags);  // exact union
}

}  // namespace

TEST_CASE("cover order ranks length, then support, then tags") {
  CodeTableElement a{{1, 2}, 0, 5}, b{{0, 3}, 0, 7}, c{{0}, 0, 100}, d{{0, 4}, 0, 7};
  CHECK(cover_order(b, a));
  CHECK(cover_order(a, c));
  CHECK(cover_order(b, d));
  CHECK_FALSE(cover_order(d, b));
}

TEST_CASE("greedy cover follows the table order") {
  std::vector<CodeTableElement> e{{{0}, 1, 3}, {{1}, 1, 3}, {{2}, 1, 3}, {{3}, 1, 3},
                                  {{0, 1}, 2, 2}, {{1, 2}, 1, 3}};
  CodeTable ct(e, 4, 3);
  // {1,2} outranks {0,1} on support, so it wins the shared tag 1.
  auto parts = cover(ct, Tagset{0, 1, 2});
  REQUIRE(parts.size() == 2);
  CHECK(parts[0] == Tagset{1, 2});
  CHECK(parts[1] == Tagset{0});
  CHECK_THROWS_AS(cover(ct, Tagset{0, 9}), Error);
}

TEST_CASE("estimate sums usages of containing elements") {
  std::vector<CodeTableElement> e{{{0}, 1, 3}, {{1}, 2, 3}, {{2}, 4, 3}, {{0, 1, 2}, 2, 2}, {{1, 2}, 3, 3}};
  CodeTable ct(e, 9, 3);
  CHECK(estimate_support(ct, Tagset{1, 2}) == 5);
  CHECK(estimate_support(ct, Tagset{0, 1}) == 2);
  CHECK(estimate_support(ct, Tagset{1}) == 7);
  CHECK(estimate_support(ct, Tagset{7}) == 0);
  CHECK(estimate_support(ct, Tagset{}) == 9);
  CHECK(ct.pattern_count() == 2);
  CHECK(ct.total_usage() == 12);
}

TEST_CASE("induced table: exact covers, usages and bounded estimates") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 25; ++round) {
    auto db = oracle::random_db(rng, 8 + round % 5, 40 + 3 * round);
    auto ct = induce_from(db, 2, 3);
    std::map<Tagset, Count> usage;
    for (const auto& t : db.transactions()) {
      check_cover_exact(ct, t.tags);
      for (const auto& p : cover(ct, t.tags)) ++usage[p];
    }
    for (const auto& e : ct.elements()) {
      CHECK(e.usage == usage[e.tags]);
      CHECK(e.support == oracle::support(db, e.tags));
    }
    for (const auto& x : oracle::all_tagsets(8, 3)) CHECK(estimate_support(ct, x) <= oracle::support(db, x));
  }
}

TEST_CASE("incremental sizes agree with from-scratch encoding") {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 15; ++round) {
    auto db = oracle::random_db(rng, 10, 120);
    InductionTrace trace;
    auto ct = induce_from(db, 2, 3, &trace);
    const double final_size = trace.accepted_sizes.empty() ? trace.singleton_size : trace.accepted_sizes.back();
    CHECK(encoded_size(ct, db).total() == doctest::Approx(final_size).epsilon(1e-9));

    std::vector<CodeTableElement> singles;
    for (TagId t = 0; t < 10; ++t) {
      const auto s = oracle::support(db, {t});
      if (s) singles.push_back({{t}, s, s});
    }
    CodeTable st(singles, db.size(), 1);
    CHECK(encoded_size(st, db).total() == doctest::Approx(trace.singleton_size).epsilon(1e-9));

    double prev = trace.singleton_size;
    for (double s : trace.accepted_sizes) {
      CHECK(s < prev);
      prev = s;
    }
  }
}

TEST_CASE("a repeated pattern is accepted") {
  std::vector<std::vector<TagId>> rows(30, std::vector<TagId>{0, 1, 2});
  rows.push_back({3, 4});
  rows.push_back({0, 4});
  auto db = oracle::make_db(5, rows);
  auto ct = induce_from(db, 2, 3);
  bool found = false;
  for (const auto& e : ct.elements())
    if (e.tags == Tagset{0, 1, 2}) found = e.usage == 30;
  CHECK(found);
}

TEST_CASE("empty database cannot be induced") {
  auto db = oracle::make_db(2, {});
  CHECK_THROWS_AS(induce(db, FrequentTagsetCollection{}), Error);
}

TEST_CASE("code table file round-trip preserves covers") {
  std::mt19937_64 rng(12);
  auto db = oracle::random_db(rng, 9, 90);
  auto ct = induce_from(db, 2, 3);
  std::stringstream s;
  write_code_table(ct, db.vocabulary(), s);
  auto back = read_code_table(s, db.vocabulary());
  REQUIRE(back.size() == ct.size());
  CHECK(back.total_usage() == ct.total_usage());
  CHECK(back.max_len() == ct.max_len());
  for (const auto& t : db.transactions()) CHECK(cover(back, t.tags) == cover(ct, t.tags));
  for (const auto& x : oracle::all_tagsets(9, 2)) CHECK(estimate_support(back, x) == estimate_support(ct, x));
}
