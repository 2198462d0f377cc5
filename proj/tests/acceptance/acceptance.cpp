// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tagrec/eval.hpp"
#include "tagrec/synth.hpp"

using namespace tagrec;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const Corpus& synthetic() {
  static const Corpus c = generate(SynthConfig{});
  return c;
}

Query query_of(Tagset input, UserId user = kUnknownUser) {
  Query q;
  q.user = user;
  q.input = std::move(input);
  return q;
}

Corpus hand_fixture(const char* text) {
  std::istringstream in(text);
  return parse_corpus(in, nullptr, nullptr);
}

/// Every corpus the property criteria run on.
std::vector<std::pair<std::string, TagDatabase>> test_corpora() {
  std::vector<std::pair<std::string, TagDatabase>> out;
  out.emplace_back("synthetic", synthetic().db);
  out.emplace_back("fixture-photo", hand_fixture("ann\t-\tnature\tsky,cloud,blue\n"
                                                 "ann\t-\tnature\tsky,sunset,orange\n"
                                                 "bob\t-\tnature\tsky,cloud,rain\n"
                                                 "bob\t-\tcity\tstreet,night,light\n"
                                                 "cat\t-\tcity\tnight,light,neon,street\n"
                                                 "cat\t-\tnature\tsunset,orange,sea\n")
                                        .db);
  out.emplace_back("fixture-overlap", hand_fixture("u\t-\t-\ta,b,c,d\nu\t-\t-\ta,b,c\nu\t-\t-\ta,b\n"
                                                   "v\t-\t-\tc,d\nv\t-\t-\tb,d,e\nv\t-\t-\ta,e\n")
                                          .db);
  std::mt19937_64 rng(1001);
  for (int i = 0; i < 10; ++i) out.emplace_back("random-" + std::to_string(i), oracle::random_db(rng, 12, 40));
  return out;
}

// Absolute minimum supports keep small corpora non-trivial; on the synthetic
// corpus the relative defaults apply.
RecommenderConfig config_for(const TagDatabase& db) {
  RecommenderConfig cfg;
  if (db.size() < 1000) {
    cfg.mining.min_support = MinSupport::absolute(2);
    cfg.ct_mining.min_support = MinSupport::absolute(1);
  }
  return cfg;
}

Outcome single_tag_equivalence() {
  Outcome o;
  std::size_t queries = 0, corpora = 0;
  double query_seconds = 0, model_seconds = 0;
  for (const auto& [name, db] : test_corpora()) {
    const auto build_start = Clock::now();
    const auto cfg = config_for(db);
    const auto index = build_cooccurrence(db, cfg.mining.top_m);
    const auto f = mine_closed(db, cfg.mining);
    const auto ct = induce(db, mine_closed(db, cfg.ct_mining));
    ++corpora;
    model_seconds += seconds_since(build_start);
    const auto start = Clock::now();
    for (TagId t = 0; t < db.vocabulary().size(); ++t) {
      if (index.tag_support(t) == 0) continue;
      const auto q = query_of({t});
      const auto limit = db.vocabulary().size();
      const auto par = recommend_par(index, q, limit).items;
      const auto nar = recommend_nar(index, f, q, limit).items;
      const auto far = recommend_far(index, ct, q, limit).items;
      ++queries;
      if (par != nar || par != far) {
        o.pass = false;
        o.detail = "mismatch on " + name + " tag " + db.vocabulary().label(t) + "; ";
      }
    }
    query_seconds += seconds_since(start);
  }
  if (query_seconds >= 1.0) o.pass = false;
  o.detail += std::to_string(queries) + " single-tag queries on " + std::to_string(corpora) +
              " corpora, comparison " + fmt(query_seconds, 3) + " s (budget 1 s), model building " +
              fmt(model_seconds, 2) + " s";
  return o;
}

Outcome mining_oracle() {
  Outcome o;
  std::mt19937_64 rng(2002);
  std::size_t sets = 0, bad = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t tags = 3 + rng() % 10;    // <= 12
    const std::size_t rows = 1 + rng() % 40;    // <= 40
    const auto db = oracle::random_db(rng, tags, rows, 2 + rng() % 6);
    const Count minsup = 1 + rng() % 3;
    const std::size_t max_len = 1 + rng() % 4;
    const bool global = i % 2 == 1;
    MiningParams p{MinSupport::absolute(minsup), max_len, 10,
                   global ? Closedness::kGlobal : Closedness::kLengthBounded};
    const auto got = mine_closed(db, p);
    const auto want = oracle::closed_tagsets(db, tags, minsup, max_len, global);
    sets += want.size();
    bool same = got.size() == want.size();
    for (const auto& [set, sup] : got.entries()) {
      auto it = want.find(set);
      if (it == want.end() || it->second != sup) same = false;
    }
    if (!same) ++bad;
  }
  o.pass = bad == 0;
  o.detail = "200 databases, " + std::to_string(sets) + " closed tagsets, " + std::to_string(bad) + " mismatches";
  return o;
}

Outcome nar_oracle() {
  Outcome o;
  std::mt19937_64 rng(3003);
  std::size_t bad = 0;
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t tags = 6 + rng() % 7;
    const auto db = oracle::random_db(rng, tags, 30 + rng() % 31, 3 + rng() % 4);
    const Count minsup = 1 + rng() % 3;
    MiningParams p{MinSupport::absolute(minsup), 3 + rng() % 2, 2 + rng() % 6};
    const auto index = build_cooccurrence(db, p.top_m);
    const auto f = mine_closed(db, p);
    std::uniform_int_distribution<TagId> pick(0, static_cast<TagId>(tags - 1));
    for (int j = 0; j < 20; ++j) {
      Tagset input;
      const std::size_t want_size = 1 + rng() % 4;
      while (input.size() < want_size) {
        input.push_back(pick(rng));
        normalize_tagset(input);
      }
      const auto got = recommend_nar(index, f, query_of(input), 10).items;
      const auto want = oracle::nar(db, tags, input, p.top_m, minsup, p.max_len, 10);
      bool same = got.size() == want.size();
      for (std::size_t r = 0; same && r < got.size(); ++r) {
        const double diff = std::abs(got[r].score - want[r].score);
        worst = std::max(worst, diff);
        same = got[r].tag == want[r].tag && diff <= 1e-9;
      }
      if (!same) ++bad;
    }
  }
  o.pass = bad == 0;
  o.detail = "1000 queries, " + std::to_string(bad) + " mismatches, max score error " + fmt(worst, 12);
  return o;
}

Outcome code_table_properties() {
  Outcome o;
  std::size_t transactions = 0, cover_bad = 0, estimate_bad = 0, estimates = 0, tables = 0, order_bad = 0;
  std::mt19937_64 rng(4004);
  const auto corpora = test_corpora();
  const std::size_t per_corpus = (10000 + corpora.size() - 1) / corpora.size();
  for (const auto& [name, db] : corpora) {
    const auto cfg = config_for(db);
    InductionTrace trace;
    const auto ct = induce(db, mine_closed(db, cfg.ct_mining), &trace);
    ++tables;
    double prev = trace.singleton_size;
    for (double s : trace.accepted_sizes) {
      if (!(s < prev)) ++order_bad;
      prev = s;
    }
    for (const auto& t : db.transactions()) {
      ++transactions;
      Tagset all;
      for (const auto& part : cover(ct, t.tags)) all.insert(all.end(), part.begin(), part.end());
      const auto n = all.size();
      std::sort(all.begin(), all.end());
      if (n != t.tags.size() || all != t.tags) ++cover_bad;
    }
    // Half the probes are drawn from transactions so they have support.
    std::uniform_int_distribution<std::size_t> row(0, db.size() - 1);
    std::uniform_int_distribution<TagId> tag(0, static_cast<TagId>(db.vocabulary().size() - 1));
    for (std::size_t i = 0; i < per_corpus; ++i) {
      Tagset x;
      const std::size_t size = 1 + rng() % 4;
      if (i % 2 == 0) {
        const auto& tags = db[row(rng)].tags;
        for (std::size_t k = 0; k < size && k < tags.size(); ++k) x.push_back(tags[rng() % tags.size()]);
      } else {
        for (std::size_t k = 0; k < size; ++k) x.push_back(tag(rng));
      }
      normalize_tagset(x);
      ++estimates;
      if (estimate_support(ct, x) > oracle::support(db, x)) ++estimate_bad;
    }
  }
  o.pass = cover_bad == 0 && estimate_bad == 0 && order_bad == 0;
  o.detail = std::to_string(transactions) + " covers (" + std::to_string(cover_bad) + " inexact), " +
             std::to_string(estimates) + " estimates (" + std::to_string(estimate_bad) + " above support), " +
             std::to_string(tables) + " size sequences (" + std::to_string(order_bad) + " non-decreasing steps)";
  return o;
}

Outcome metric_oracle() {
  Outcome o;
  const std::vector<std::size_t> ranks{1, 3, 5};
  // Worked example over tags a=0, b=1, c=2, d=3.
  const auto ex = score(std::vector<TagId>{2, 1, 3}, Tagset{1}, ranks);
  const bool example = ex.precision[1] == 1.0 / 3.0 && ex.reciprocal_rank == 0.5;
  std::mt19937_64 rng(5005);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t vocab = 2 + rng() % 15;
    std::vector<TagId> ranked(vocab);
    std::iota(ranked.begin(), ranked.end(), 0);
    std::shuffle(ranked.begin(), ranked.end(), rng);
    ranked.resize(rng() % (vocab + 1));
    std::set<TagId> truth;
    for (std::size_t j = 0, n = 1 + rng() % 5; j < n; ++j) truth.insert(static_cast<TagId>(rng() % vocab));
    const std::vector<std::size_t> at{1, 1 + rng() % 3, 3 + rng() % 8};
    const auto got = score(ranked, Tagset(truth.begin(), truth.end()), at);
    const auto want = oracle::metrics(ranked, truth, at);
    if (got.precision != want.precision || got.success != want.success || got.reciprocal_rank != want.rr) ++bad;
  }
  o.pass = example && bad == 0;
  o.detail = std::string("worked example ") + (example ? "holds" : "FAILS") + ", 1000 fixtures, " +
             std::to_string(bad) + " mismatches";
  return o;
}

EvalConfig directional(SourceKind kind, std::optional<std::size_t> degree, std::size_t k, SplitMode split) {
  EvalConfig c;
  c.k = k;
  c.split = split;
  c.source = {kind, degree};
  c.recommender.method = Method::kFar;
  return c;
}

Outcome uk_over_ck() {
  Outcome o;
  for (std::size_t k : {2, 3}) {
    const auto uk = run_experiment(synthetic(), directional(SourceKind::kUserCentered, 3, k, SplitMode::kCv5));
    const auto ck = run_experiment(synthetic(), directional(SourceKind::kCollective, std::nullopt, k, SplitMode::kCv5));
    if (!(uk.p(1) > ck.p(1))) o.pass = false;
    o.detail += "k=" + std::to_string(k) + " UK " + fmt(uk.p(1)) + " vs CK " + fmt(ck.p(1)) + "; ";
  }
  return o;
}

Outcome batched_over_ck() {
  Outcome o;
  const std::size_t k = 3;
  auto batched = [&](SourceKind kind, std::optional<std::size_t> degree) {
    auto c = directional(kind, degree, k, SplitMode::kHoldout40);
    c.batch_size = 50;
    return run_experiment(synthetic(), c);
  };
  const auto du = batched(SourceKind::kBatched, std::nullopt);
  const auto d1 = batched(SourceKind::kSocialBatched, 1);
  const auto d2 = batched(SourceKind::kSocialBatched, 2);
  const auto ck = run_experiment(synthetic(), directional(SourceKind::kCollective, std::nullopt, k, SplitMode::kHoldout40));
  const bool a = du.p(1) > ck.p(1);
  const bool b = du.frac_ck <= d1.frac_ck && d1.frac_ck <= d2.frac_ck;
  bool c = true;
  for (const auto* r : {&du, &d1, &d2}) c = c && r->mining_invocations == r->batches && r->batches > 0;
  o.pass = a && b && c;
  o.detail = "(a) D^u_batched " + fmt(du.p(1)) + " vs CK " + fmt(ck.p(1)) + "; (b) fractions " + fmt(du.frac_ck, 2) +
             " <= " + fmt(d1.frac_ck, 2) + " <= " + fmt(d2.frac_ck, 2) + "; (c) invocations/batches " +
             std::to_string(du.mining_invocations) + "/" + std::to_string(du.batches) + ", " +
             std::to_string(d1.mining_invocations) + "/" + std::to_string(d1.batches) + ", " +
             std::to_string(d2.mining_invocations) + "/" + std::to_string(d2.batches);
  return o;
}

Outcome gk_over_ck() {
  Outcome o;
  for (std::size_t k : {1, 2, 3}) {
    const auto gk = run_experiment(synthetic(), directional(SourceKind::kCommunityBatched, std::nullopt, k, SplitMode::kCv5));
    const auto ck = run_experiment(synthetic(), directional(SourceKind::kCollective, std::nullopt, k, SplitMode::kCv5));
    if (!(gk.p(1) > ck.p(1))) o.pass = false;
    o.detail += "k=" + std::to_string(k) + " GK " + fmt(gk.p(1)) + " vs CK " + fmt(ck.p(1)) + "; ";
  }
  return o;
}

/// Source databases the directional experiments mine, one fold each (all five
/// folds for CK).
std::vector<std::pair<std::string, TagDatabase>> protocol_sources() {
  const auto& corpus = synthetic();
  std::vector<std::pair<std::string, TagDatabase>> out;
  const auto cv = split(corpus.db, SplitMode::kCv5, 1);
  for (std::size_t f = 0; f < cv.size(); ++f) out.emplace_back("CK fold " + std::to_string(f), cv[f].train);

  const auto& train = cv[0].train;
  std::set<std::vector<TransactionId>> seen;
  auto add_distinct = [&](const std::string& label, TagDatabase db) {
    std::vector<TransactionId> key;
    for (const auto& t : db.transactions()) key.push_back(t.id);
    if (db.empty() || !seen.insert(key).second) return;
    out.emplace_back(label, std::move(db));
  };
  for (const auto& t : cv[0].test.transactions()) {
    Query q = query_of({}, t.user);
    q.interest = t.interest;
    add_distinct("UK", build_uk(train, corpus.graph, q, 3));
  }
  for (const auto& t : cv[0].test.transactions()) {
    Query q = query_of({}, t.user);
    if (is_grouped(t.user, corpus.groups)) add_distinct("GK", build_community(train, corpus.groups, q));
  }

  const auto holdout = split(corpus.db, SplitMode::kHoldout40, 1);
  std::vector<Query> stream;
  for (const auto& t : holdout[0].test.transactions()) stream.push_back(query_of({}, t.user));
  for (const auto& batch : form_batches(stream, BatchPolicy{50})) {
    add_distinct("D^u_batched", build_batched(holdout[0].train, corpus.graph, batch, std::nullopt));
    add_distinct("D^1_batched", build_batched(holdout[0].train, corpus.graph, batch, 1));
    add_distinct("D^2_batched", build_batched(holdout[0].train, corpus.graph, batch, 2));
  }
  return out;
}

Outcome economy() {
  Outcome o;
  const RecommenderConfig cfg;
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_kind;  // pairs, violations
  std::size_t pairs = 0, violations = 0;
  double ratio_sum = 0;
  for (const auto& [label, db] : protocol_sources()) {
    const auto f = mine_closed(db, cfg.mining);
    const auto ct = induce(db, mine_closed(db, cfg.ct_mining));
    const auto kind = label.substr(0, label.find(' '));
    ++pairs;
    ++by_kind[kind].first;
    ratio_sum += static_cast<double>(ct.size()) / static_cast<double>(std::max<std::size_t>(1, f.size()));
    if (!(ct.size() < f.size())) {
      ++violations;
      ++by_kind[kind].second;
      if (violations <= 3)
        o.detail += label + ": |CT|=" + std::to_string(ct.size()) + " |F|=" + std::to_string(f.size()) +
                    " (|D|=" + std::to_string(db.size()) + "); ";
    }
  }
  o.pass = violations == 0 && pairs > 0;
  o.detail += std::to_string(pairs) + " paired databases [";
  for (const auto& [kind, c] : by_kind) o.detail += kind + " " + std::to_string(c.first) + " ";
  o.detail += "], " + std::to_string(violations) + " with |CT| >= |F|, mean |CT|/|F| " +
              fmt(ratio_sum / static_cast<double>(std::max<std::size_t>(1, pairs)), 3);
  return o;
}

Outcome fallback_totality() {
  Outcome o;
  const auto& corpus = synthetic();
  // Hold out every transaction of a fifth of the users: they stay in the
  // graph and group index but have no history in the training data.
  std::set<UserId> ghosts;
  for (UserId u = 0; u < corpus.db.lexicon().users.size(); u += 5) ghosts.insert(u);
  const auto train = corpus.db.filter([&](const Transaction& t) { return !ghosts.count(t.user); });
  const auto held = corpus.db.filter([&](const Transaction& t) { return ghosts.count(t.user) > 0; });

  RecommenderConfig cfg;
  const auto ck = build_model(train, cfg);
  std::vector<Query> stream;
  for (const auto& t : held.transactions()) {
    auto c = make_query(t, 2, t.id);
    if (!c) continue;
    // CK must be able to answer: at least one input tag co-occurs in training.
    bool answerable = false;
    for (auto tag : c->query.input) answerable = answerable || !ck.index.top_list(tag).empty();
    if (!answerable) continue;
    stream.push_back(c->query);
    Query stranger = c->query;
    stranger.user = kUnknownUser;
    stream.push_back(stranger);
  }

  const FallbackPolicy fallback;
  std::size_t answered = 0, empty = 0, crashes = 0, fallbacks = 0;
  // Batched builders substitute CK themselves and report it through `swapped`.
  auto answer = [&](const TagDatabase& selected, const std::vector<Query>& qs, bool swapped = false) {
    try {
      const bool fall = swapped || fallback.triggers(selected);
      if (fall) fallbacks += qs.size();
      const auto model = fall ? ck : build_model(selected, cfg);
      for (const auto& q : qs) {
        ++answered;
        if (recommend(model, q, 5).items.empty()) ++empty;
      }
    } catch (const std::exception&) {
      crashes += qs.size();
    }
  };
  // Sources whose database comes from the querying user's own history.
  for (const auto& q : stream) answer(build_personomy(train, q.user), {q});
  bool fell_back = false;
  for (const auto& batch : form_batches(stream, BatchPolicy{100})) {
    const auto db = build_batched(train, corpus.graph, batch, std::nullopt, fallback, &fell_back);
    answer(db, batch.queries, fell_back);
  }
  // Strangers have no friends and no groups either.
  for (const auto& q : stream) {
    if (q.user != kUnknownUser) continue;
    answer(build_uk(train, corpus.graph, q, 3), {q});
    answer(build_social_personomy(train, corpus.graph, q.user, 2), {q});
  }
  const auto route = route_community(stream, corpus.groups);
  for (const auto& batch : form_batches(route.ungrouped, BatchPolicy{100})) {
    const auto db = build_batched(train, corpus.graph, batch, std::nullopt, fallback, &fell_back);
    answer(db, batch.queries, fell_back);
  }

  o.pass = crashes == 0 && empty == 0 && answered > 0 && fallbacks == answered;
  o.detail = std::to_string(answered) + " answers for " + std::to_string(stream.size()) +
             " history-less queries, " + std::to_string(fallbacks) + " via fallback, " + std::to_string(empty) +
             " empty, " + std::to_string(crashes) + " crashes";
  return o;
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "single-tag equivalence of PAR, NAR and FAR", 0, single_tag_equivalence},
      {2, "closed mining matches brute force", 30, mining_oracle},
      {3, "NAR matches brute-force conditionals", 30, nar_oracle},
      {4, "code-table cover, estimate and size properties", 60, code_table_properties},
      {5, "metrics match naive reimplementation", 0, metric_oracle},
      {6, "UK beats CK on P@1 (cv5, k=2,3, FAR)", 120, uk_over_ck},
      {7, "user batches beat CK; fractions and invocation count", 180, batched_over_ck},
      {8, "GK beats CK on P@1 (k=1,2,3, FAR)", 180, gk_over_ck},
      {9, "code table smaller than closed tagsets on paired sources", 0, economy},
      {10, "history-less queries answered through CK fallback", 0, fallback_totality},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(start);
    if (c.budget_seconds > 0 && secs >= c.budget_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt(c.budget_seconds, 0) + " s budget";
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.name << " [" << o.detail
              << "] " << fmt(secs, 2) << " s" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
