// Command-line front end: mine, induce, recommend, eval, synth, batch-replay, profile.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cli_support.hpp"
#include "tagrec/eval.hpp"
#include "tagrec/synth.hpp"

namespace fs = std::filesystem;
using namespace tagrec;
using cli::ArtifactCache;
using cli::RunManifest;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::optional<fs::path> out;
  std::string format = "tsv";
};

struct CorpusOptions {
  fs::path transactions;
  std::optional<fs::path> graph;
  std::optional<fs::path> groups;
  std::size_t min_tags = 2;

  void add(CLI::App& app, bool with_social) {
    app.add_option("transactions", transactions, "Transactions file")->required()->check(CLI::ExistingFile);
    if (with_social) {
      app.add_option("--graph", graph, "Social graph file")->check(CLI::ExistingFile);
      app.add_option("--groups", groups, "Group membership file")->check(CLI::ExistingFile);
    }
    app.add_option("--min-tags", min_tags, "Drop transactions with fewer tags")->capture_default_str();
  }

  Corpus load() const {
    auto corpus = load_corpus(transactions, graph, groups, LoadOptions{min_tags});
    const auto& r = corpus.report;
    if (r.dropped_short || r.duplicate_tags || r.asymmetric_edges || r.self_loops)
      std::cerr << "load: dropped_short=" << r.dropped_short << " duplicate_tags=" << r.duplicate_tags
                << " asymmetric_edges=" << r.asymmetric_edges << " self_loops=" << r.self_loops << '\n';
    return corpus;
  }

  void record(RunManifest& m) const {
    m.inputs.emplace_back("transactions", transactions.string());
    if (graph) m.inputs.emplace_back("graph", graph->string());
    if (groups) m.inputs.emplace_back("groups", groups->string());
    m.config["min_tags"] = min_tags;
  }
};

struct MiningOptions {
  std::string minsup;
  std::size_t max_len = 3;
  std::size_t top_m = 50;
  std::string closedness = "bounded";

  MiningOptions(std::string default_minsup) : minsup(std::move(default_minsup)) {}

  void add(CLI::App& app, const std::string& prefix = "") {
    app.add_option("--" + prefix + "minsup", minsup, "Minimum support: fraction (0.0007) or count (3)")
        ->capture_default_str();
    if (prefix.empty()) {
      app.add_option("--maxlen", max_len, "Maximum tagset length")->capture_default_str();
      app.add_option("--top-m", top_m, "Co-occurrence list length per tag")->capture_default_str();
    }
    app.add_option("--" + prefix + "closedness", closedness, "Closedness scope")
        ->check(CLI::IsMember({"bounded", "global"}))
        ->capture_default_str();
  }

  MiningParams params() const {
    MiningParams p;
    p.min_support = MinSupport::parse(minsup);
    p.max_len = max_len;
    p.top_m = top_m;
    p.closedness = closedness == "global" ? Closedness::kGlobal : Closedness::kLengthBounded;
    p.validate();
    return p;
  }
};

nlohmann::ordered_json to_json(const MiningParams& p) {
  return {{"min_support", p.min_support.to_string()},
          {"max_len", p.max_len},
          {"top_m", p.top_m},
          {"closedness", p.closedness == Closedness::kGlobal ? "global" : "bounded"}};
}

fs::path sidecar(const std::optional<fs::path>& out, const std::string& suffix, const std::string& fallback) {
  if (out && *out != "-") return fs::path(out->string() + suffix);
  return fallback;
}

/// Builds or loads the artifacts of one recommender over the whole corpus.
RecommenderModel cached_model(const TagDatabase& db, const RecommenderConfig& config, const ArtifactCache& cache,
                              const std::string& corpus_digest) {
  const auto& vocab = db.vocabulary();
  RecommenderModel model;
  model.method = config.method;
  const auto cooc_key = ArtifactCache::key("cooc", corpus_digest, "top_m=" + std::to_string(config.mining.top_m));
  if (auto hit = cache.load_cooccurrence(cooc_key, vocab)) {
    model.index = std::move(*hit);
  } else {
    model.index = build_cooccurrence(db, config.mining.top_m);
    cache.store_cooccurrence(cooc_key, model.index, vocab);
  }
  if (config.method == Method::kPar) return model;
  const auto& mining = config.method == Method::kNar ? config.mining : config.ct_mining;
  const auto f_key = ArtifactCache::key("closed", corpus_digest, cli::describe(mining));
  auto frequent = cache.load_frequent(f_key, vocab);
  if (!frequent) {
    frequent = mine_closed(db, mining);
    cache.store_frequent(f_key, *frequent, vocab);
  }
  if (config.method == Method::kNar) {
    model.frequent = std::move(*frequent);
    return model;
  }
  const auto ct_key = ArtifactCache::key("ct", corpus_digest, cli::describe(mining));
  if (auto hit = cache.load_code_table(ct_key, vocab)) {
    model.code_table = std::move(*hit);
  } else {
    model.code_table = induce(db, *frequent);
    cache.store_code_table(ct_key, model.code_table, vocab);
  }
  return model;
}

struct RecommenderOptions {
  std::string method = "far";
  MiningOptions mining{"0.0007"};
  MiningOptions ct_mining{"0.00007"};
  std::size_t limit = 5;

  void add(CLI::App& app, bool with_method = true) {
    if (with_method)
      app.add_option("--method", method, "Recommender")
          ->check(CLI::IsMember({"par", "nar", "far"}))
          ->capture_default_str();
    mining.add(app);
    ct_mining.add(app, "ct-");
    app.add_option("--limit", limit, "Recommendations per query")->capture_default_str();
  }

  RecommenderConfig config() const {
    RecommenderConfig c;
    c.method = parse_method(method);
    c.mining = mining.params();
    c.ct_mining = ct_mining.params();
    c.ct_mining.max_len = c.mining.max_len;
    c.ct_mining.top_m = c.mining.top_m;
    c.max_recommendations = limit;
    if (limit < 1) throw ConfigError("--limit must be >= 1");
    return c;
  }

  void record(RunManifest& m, const RecommenderConfig& c) const {
    m.config["method"] = to_string(c.method);
    m.config["mining"] = to_json(c.mining);
    m.config["ct_mining"] = to_json(c.ct_mining);
    m.config["limit"] = c.max_recommendations;
  }
};

void require_inputs(const SourceSelection& source, const CorpusOptions& corpus) {
  if (needs_graph(source.kind) && !corpus.graph)
    throw ConfigError("source '" + source.keyword() + "' needs a social graph file (--graph)");
  if (source.kind == SourceKind::kCommunityBatched && !corpus.groups)
    throw ConfigError("source 'community' needs a group membership file (--groups)");
}

SourceSelection make_source(const std::string& keyword, std::optional<std::size_t> degree) {
  SourceSelection s{parse_source_kind(keyword), needs_degree(parse_source_kind(keyword)) ? degree : std::nullopt};
  s.validate();
  return s;
}

void print_recommendation(std::ostream& out, std::size_t index, const Query& query, const Recommendation& rec,
                          const Lexicon& lex) {
  out << index << '\t' << (query.user == kUnknownUser ? "-" : lex.users.label(query.user)) << '\t'
      << format_tagset(query.input, lex.tags) << '\t';
  for (std::size_t i = 0; i < rec.items.size(); ++i) {
    const auto& item = rec.items[i];
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", item.score);
    out << (i ? "," : "") << lex.tags.label(item.tag) << ':' << score;
  }
  out << '\n';
}

std::vector<QueryLine> load_queries(const fs::path& path, const Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  auto lines = parse_queries(in, lexicon, path.string());
  std::size_t unknown = 0;
  for (const auto& l : lines) unknown += l.unknown_tags;
  if (unknown) std::cerr << "queries: skipped " << unknown << " unknown tag(s)\n";
  return lines;
}

// ---- commands ----

int cmd_mine(const GlobalOptions& g, const CorpusOptions& co, const MiningOptions& mo,
             const std::optional<fs::path>& cooc_out, const std::optional<fs::path>& cache_dir) {
  const auto params = mo.params();
  const auto corpus = co.load();
  const auto start = Clock::now();
  const ArtifactCache cache(cache_dir);
  const auto digest = cli::file_digest(co.transactions);
  const auto& vocab = corpus.db.vocabulary();

  const auto f_key = ArtifactCache::key("closed", digest, cli::describe(params));
  auto f = cache.load_frequent(f_key, vocab);
  const bool hit = f.has_value();
  if (!f) {
    f = mine_closed(corpus.db, params);
    cache.store_frequent(f_key, *f, vocab);
  }
  const auto c_key = ArtifactCache::key("cooc", digest, "top_m=" + std::to_string(params.top_m));
  auto index = cache.load_cooccurrence(c_key, vocab);
  if (!index) {
    index = build_cooccurrence(corpus.db, params.top_m);
    cache.store_cooccurrence(c_key, *index, vocab);
  }
  const auto elapsed = ms_since(start);

  cli::Output out(g.out);
  write_frequent(*f, vocab, out.stream());
  out.close();
  const auto cooc_path = cooc_out ? *cooc_out : sidecar(g.out, ".cooc", "");
  if (!cooc_path.empty()) {
    cli::Output cooc(cooc_path);
    write_cooccurrence(*index, vocab, cooc.stream());
    cooc.close();
  }
  std::cerr << "closed tagsets: " << f->size() << " (minsup " << params.min_support.to_string() << " -> "
            << f->min_support() << " of " << corpus.db.size() << ")" << (hit ? " [cache]" : "") << " in "
            << elapsed << " ms\n";
  return 0;
}

int cmd_induce(const GlobalOptions& g, const CorpusOptions& co, const MiningOptions& mo,
               const std::optional<fs::path>& cache_dir) {
  const auto params = mo.params();
  const auto corpus = co.load();
  if (corpus.db.empty()) throw Error("corpus " + co.transactions.string() + " has no transactions");
  const auto start = Clock::now();
  const ArtifactCache cache(cache_dir);
  const auto digest = cli::file_digest(co.transactions);
  const auto& vocab = corpus.db.vocabulary();

  const auto key = ArtifactCache::key("ct", digest, cli::describe(params));
  auto ct = cache.load_code_table(key, vocab);
  std::size_t candidates = 0;
  InductionTrace trace;
  const bool hit = ct.has_value();
  if (!ct) {
    const auto f_key = ArtifactCache::key("closed", digest, cli::describe(params));
    auto f = cache.load_frequent(f_key, vocab);
    if (!f) {
      f = mine_closed(corpus.db, params);
      cache.store_frequent(f_key, *f, vocab);
    }
    candidates = f->size();
    ct = induce(corpus.db, *f, &trace);
    cache.store_code_table(key, *ct, vocab);
  }
  const auto elapsed = ms_since(start);

  cli::Output out(g.out);
  write_code_table(*ct, vocab, out.stream());
  out.close();
  std::cerr << "code table: " << ct->size() << " elements (" << ct->pattern_count() << " patterns)";
  if (hit) {
    std::cerr << " [cache]";
  } else {
    std::cerr << " from " << candidates << " candidates, " << trace.accepted_sizes.size() << " accepted, bits "
              << trace.singleton_size << " -> "
              << (trace.accepted_sizes.empty() ? trace.singleton_size : trace.accepted_sizes.back());
  }
  std::cerr << " in " << elapsed << " ms\n";
  return 0;
}

struct RecommendArgs {
  std::optional<fs::path> queries;
  std::string tags;
  std::string user;
  std::string interest;
  std::string source = "ck";
  std::optional<std::size_t> degree;
  std::size_t fallback_min = 0;
  std::optional<fs::path> cache_dir;
};

int cmd_recommend(const GlobalOptions& g, const CorpusOptions& co, const RecommenderOptions& ro,
                  const RecommendArgs& a) {
  const auto config = ro.config();
  const auto source = make_source(a.source, a.degree);
  require_inputs(source, co);
  if (source.kind == SourceKind::kBatched || source.kind == SourceKind::kSocialBatched ||
      source.kind == SourceKind::kCommunityBatched)
    throw ConfigError("source '" + source.keyword() + "' is answered in batches; use batch-replay");
  if (a.queries.has_value() == !a.tags.empty()) throw ConfigError("give exactly one of --queries or --tags");

  const auto corpus = co.load();
  const auto& lex = corpus.db.lexicon();
  std::vector<Query> queries;
  if (a.queries) {
    for (auto& l : load_queries(*a.queries, lex)) queries.push_back(std::move(l.query));
  } else {
    Query q;
    std::size_t unknown = 0;
    q.input = parse_tag_list(a.tags, lex, &unknown);
    if (unknown) std::cerr << "query: skipped " << unknown << " unknown tag(s)\n";
    if (!a.user.empty()) {
      auto u = lex.users.find(a.user);
      q.user = u ? *u : kUnknownUser;
    }
    if (!a.interest.empty()) {
      auto i = lex.interests.find(a.interest);
      q.interest = i ? *i : kUnknownInterest;
    }
    queries.push_back(std::move(q));
  }

  const ArtifactCache cache(a.cache_dir);
  const auto digest = cli::file_digest(co.transactions);
  const FallbackPolicy fallback{a.fallback_min};
  std::optional<RecommenderModel> collective;
  auto ck = [&]() -> const RecommenderModel& {
    if (!collective) collective = cached_model(corpus.db, config, cache, digest);
    return *collective;
  };

  const auto start = Clock::now();
  cli::Output out(g.out);
  std::size_t fallbacks = 0, empty_input = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    if (q.input.empty()) {
      ++empty_input;
      print_recommendation(out.stream(), i, q, Recommendation{{}, q}, lex);
      continue;
    }
    if (source.kind == SourceKind::kCollective) {
      print_recommendation(out.stream(), i, q, recommend(ck(), q, config.max_recommendations), lex);
      continue;
    }
    TagDatabase selected;
    switch (source.kind) {
      case SourceKind::kUserCentered: selected = build_uk(corpus.db, corpus.graph, q, *source.degree); break;
      case SourceKind::kPersonomy: selected = build_personomy(corpus.db, q.user); break;
      default: selected = build_social_personomy(corpus.db, corpus.graph, q.user, *source.degree); break;
    }
    if (fallback.triggers(selected)) {
      ++fallbacks;
      print_recommendation(out.stream(), i, q, recommend(ck(), q, config.max_recommendations), lex);
    } else {
      const auto model = build_model(selected, config);
      print_recommendation(out.stream(), i, q, recommend(model, q, config.max_recommendations), lex);
    }
  }
  out.close();
  std::cerr << "answered " << queries.size() << " quer" << (queries.size() == 1 ? "y" : "ies") << " from "
            << source.label() << " in " << ms_since(start) << " ms; fallbacks=" << fallbacks
            << " empty_inputs=" << empty_input << '\n';
  return 0;
}

struct EvalArgs {
  std::vector<std::string> methods{"far"};
  std::vector<std::string> sources{"ck"};
  std::optional<std::size_t> degree;
  std::vector<std::size_t> ks{2};
  std::string split = "cv5";
  std::vector<std::size_t> ranks{1, 3, 5};
  std::string input_strategy = "random";
  std::size_t batch_size = 0;
  std::string query_order = "corpus";
  std::size_t fallback_min = 0;
  std::size_t min_group_transactions = 1;
  std::size_t jobs = 1;
  std::optional<fs::path> manifest;
};

int cmd_eval(const GlobalOptions& g, const CorpusOptions& co, const RecommenderOptions& ro, const EvalArgs& a) {
  const auto format = parse_report_format(g.format);
  const auto base_rec = ro.config();
  std::vector<SourceSelection> sources;
  for (const auto& s : a.sources) {
    sources.push_back(make_source(s, a.degree));
    require_inputs(sources.back(), co);
  }
  std::vector<Method> methods;
  for (const auto& m : a.methods) methods.push_back(parse_method(m));

  EvalConfig base;
  base.split = parse_split(a.split);
  base.seed = g.seed;
  base.at_ranks = a.ranks;
  base.recommender = base_rec;
  base.input_strategy = parse_input_strategy(a.input_strategy);
  base.batch_size = a.batch_size;
  if (a.query_order != "corpus" && a.query_order != "shuffled")
    throw ConfigError("--query-order must be corpus or shuffled");
  base.query_order = a.query_order == "shuffled" ? QueryOrder::kShuffled : QueryOrder::kCorpus;
  base.fallback = FallbackPolicy{a.fallback_min};
  base.min_group_transactions = a.min_group_transactions;
  base.jobs = a.jobs;
  for (auto k : a.ks) {
    EvalConfig probe = base;
    probe.k = k;
    probe.validate();
  }

  const auto corpus = co.load();
  std::vector<MetricsReport> rows;
  for (auto k : a.ks)
    for (auto method : methods)
      for (const auto& source : sources) {
        EvalConfig c = base;
        c.k = k;
        c.recommender.method = method;
        c.source = source;
        auto report = run_experiment(corpus, c);
        std::cerr << "k=" << k << ' ' << report.method << ' ' << report.source << ": queries=" << report.queries
                  << " skipped=" << report.skipped << " batches=" << report.batches
                  << " mining=" << report.mining_invocations << " fallbacks=" << report.fallbacks
                  << " time=" << report.time_ms_total << " ms\n";
        rows.push_back(std::move(report));
      }

  cli::Output out(g.out);
  out.stream() << emit_report(rows, format);
  out.close();

  RunManifest m;
  m.command = "eval";
  m.seed = g.seed;
  co.record(m);
  ro.record(m, base_rec);
  m.config["methods"] = a.methods;
  m.config["sources"] = a.sources;
  if (a.degree) m.config["degree"] = *a.degree;
  m.config["k"] = a.ks;
  m.config["split"] = a.split;
  m.config["ranks"] = a.ranks;
  m.config["input_strategy"] = a.input_strategy;
  m.config["batch_size"] = a.batch_size;
  m.config["query_order"] = a.query_order;
  m.config["fallback_min"] = a.fallback_min;
  m.config["min_group_transactions"] = a.min_group_transactions;
  m.config["jobs"] = a.jobs;
  m.config["format"] = g.format;
  cli::write_manifest(m, a.manifest ? *a.manifest : sidecar(g.out, ".manifest.json", "manifest.json"));
  return 0;
}

int cmd_synth(const GlobalOptions& g, SynthConfig config, const fs::path& dir) {
  config.seed = g.seed;
  const auto text = generate_text(config);
  fs::create_directories(dir);
  cli::write_text_file(dir / "transactions.tsv", text.transactions);
  cli::write_text_file(dir / "graph.txt", text.graph);
  cli::write_text_file(dir / "groups.tsv", text.groups);

  RunManifest m;
  m.command = "synth";
  m.seed = config.seed;
  m.config = {{"users", config.users},
              {"communities", config.communities},
              {"topics_per_community", config.topics_per_community},
              {"tags_per_community", config.tags_per_community},
              {"shared_tags", config.shared_tags},
              {"transactions_per_user", {config.transactions_per_user.min, config.transactions_per_user.max}},
              {"tags_per_transaction", {config.tags_per_transaction.min, config.tags_per_transaction.max}},
              {"intra_community_edge_prob", config.intra_community_edge_prob},
              {"inter_community_edge_prob", config.inter_community_edge_prob},
              {"group_count", config.group_count},
              {"group_membership_prob", config.group_membership_prob},
              {"group_post_prob", config.group_post_prob},
              {"community_tag_affinity", config.community_tag_affinity},
              {"topic_focus", config.topic_focus},
              {"topic_loyalty", config.topic_loyalty},
              {"signature_tags", config.signature_tags},
              {"signature_prob", config.signature_prob},
              {"zipf_exponent", config.zipf_exponent}};
  m.inputs = {{"transactions", (dir / "transactions.tsv").string()},
              {"graph", (dir / "graph.txt").string()},
              {"groups", (dir / "groups.tsv").string()}};
  cli::write_manifest(m, dir / "manifest.json");
  std::cerr << "wrote " << dir.string() << '\n';
  return 0;
}

struct ReplayArgs {
  fs::path queries;
  std::size_t max_queries = 100;
  std::optional<long long> max_wait_ms;
  std::optional<std::size_t> degree;
  std::size_t fallback_min = 0;
  std::optional<fs::path> summary;
};

int cmd_batch_replay(const GlobalOptions& g, const CorpusOptions& co, const RecommenderOptions& ro,
                     const ReplayArgs& a) {
  const auto config = ro.config();
  BatchPolicy policy{a.max_queries, a.max_wait_ms ? std::chrono::milliseconds(*a.max_wait_ms)
                                                  : std::chrono::milliseconds::max()};
  policy.validate();
  if (a.degree && !co.graph) throw ConfigError("--degree needs a social graph file (--graph)");

  const auto corpus = co.load();
  const auto& lex = corpus.db.lexicon();
  std::vector<TimedQuery> stream;
  for (auto& l : load_queries(a.queries, lex)) {
    if (l.query.input.empty()) throw ParseError(a.queries.string(), stream.size() + 1, "no known input tags");
    stream.push_back({std::move(l.query), std::chrono::milliseconds(l.arrival_ms.value_or(0))});
  }
  for (std::size_t i = 1; i < stream.size(); ++i)
    if (stream[i].arrival < stream[i - 1].arrival)
      throw ParseError(a.queries.string(), i + 1, "arrival times must be non-decreasing");

  const auto start = Clock::now();
  const auto batches = form_batches(stream, policy);
  cli::Output out(g.out);
  std::size_t index = 0, mining = 0, fallbacks = 0;
  std::vector<std::tuple<std::size_t, std::size_t, std::string>> per_batch;  // queries, |D|, reason
  for (const auto& batch : batches) {
    bool fell_back = false;
    const auto db = build_batched(corpus.db, corpus.graph, batch, a.degree, FallbackPolicy{a.fallback_min},
                                  &fell_back);
    const auto model = build_model(db, config);
    ++mining;
    if (fell_back) ++fallbacks;
    for (const auto& q : batch.queries)
      print_recommendation(out.stream(), index++, q, recommend(model, q, config.max_recommendations), lex);
    per_batch.emplace_back(batch.queries.size(), db.size(), to_string(batch.reason));
  }
  out.close();

  std::ostringstream s;
  s << "queries\t" << stream.size() << "\nbatches\t" << batches.size() << "\nmining_invocations\t" << mining
    << "\nfallbacks\t" << fallbacks << "\nelapsed_ms\t" << ms_since(start) << "\n";
  s << "batch\tqueries\tsource_transactions\treason\n";
  for (std::size_t b = 0; b < per_batch.size(); ++b)
    s << b << '\t' << std::get<0>(per_batch[b]) << '\t' << std::get<1>(per_batch[b]) << '\t'
      << std::get<2>(per_batch[b]) << '\n';
  if (a.summary)
    cli::write_text_file(*a.summary, s.str());
  else
    std::cerr << s.str();
  return 0;
}

int cmd_profile(const GlobalOptions& g, const CorpusOptions& co) {
  const auto corpus = co.load();
  const auto p = profile(corpus.db, corpus.graph);
  cli::Output out(g.out);
  auto& o = out.stream();
  if (g.format == "markdown") {
    o << "| |U| | |T| | transactions | <6 % | 6-8 % | >8 % | 0 | 1-2 | 3-10 | 11-50 | 51-250 | >=251 |\n"
      << "|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n| " << p.users << " | " << p.tags << " | "
      << p.transactions;
    for (auto v : p.length_pct) o << " | " << v;
    for (auto v : p.friend_hist) o << " | " << v;
    o << " |\n";
  } else {
    o << "users\ttags\ttransactions\tlen_lt6\tlen_6_8\tlen_gt8\tfriends_0\tfriends_1_2\tfriends_3_10\t"
         "friends_11_50\tfriends_51_250\tfriends_ge251\n"
      << p.users << '\t' << p.tags << '\t' << p.transactions;
    for (auto v : p.length_pct) o << '\t' << v;
    for (auto v : p.friend_hist) o << '\t' << v;
    o << '\n';
  }
  out.close();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Association-rule tag recommendation over social source databases"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", TAGREC_VERSION);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"tsv", "markdown"}))
      ->capture_default_str();
  app.fallthrough();

  std::function<int()> run;

  // mine
  auto* mine = app.add_subcommand("mine", "Mine closed frequent tagsets and the top-m co-occurrence index");
  CorpusOptions mine_corpus;
  MiningOptions mine_opts("0.0007");
  std::optional<fs::path> mine_cooc, mine_cache;
  mine_corpus.add(*mine, false);
  mine_opts.add(*mine);
  mine->add_option("--cooc-out", mine_cooc, "Co-occurrence index file (default: <out>.cooc when --out is a file)");
  mine->add_option("--cache-dir", mine_cache, "Reuse mining artifacts stored here");
  mine->callback([&] { run = [&] { return cmd_mine(g, mine_corpus, mine_opts, mine_cooc, mine_cache); }; });

  // induce
  auto* ind = app.add_subcommand("induce", "Induce a code table from closed frequent tagsets");
  CorpusOptions ind_corpus;
  MiningOptions ind_opts("0.00007");
  std::optional<fs::path> ind_cache;
  ind_corpus.add(*ind, false);
  ind_opts.add(*ind);
  ind->add_option("--cache-dir", ind_cache, "Reuse mining artifacts stored here");
  ind->callback([&] { run = [&] { return cmd_induce(g, ind_corpus, ind_opts, ind_cache); }; });

  // recommend
  auto* rec = app.add_subcommand("recommend", "Recommend tags for queries");
  CorpusOptions rec_corpus;
  RecommenderOptions rec_opts;
  RecommendArgs rec_args;
  rec_corpus.add(*rec, true);
  rec_opts.add(*rec);
  rec->add_option("--queries", rec_args.queries, "Query file: user, interest, tags[, arrival_ms]")
      ->check(CLI::ExistingFile);
  rec->add_option("--tags", rec_args.tags, "Comma-separated input tags of a single query");
  rec->add_option("--user", rec_args.user, "User of the single query");
  rec->add_option("--interest", rec_args.interest, "Interest of the single query");
  rec->add_option("--source", rec_args.source, "ck, uk, personomy or social-personomy")->capture_default_str();
  rec->add_option("--degree", rec_args.degree, "Friendship hops for uk and social-personomy");
  rec->add_option("--fallback-min", rec_args.fallback_min,
                  "Use the whole corpus when the source has fewer transactions")
      ->capture_default_str();
  rec->add_option("--cache-dir", rec_args.cache_dir, "Reuse mining artifacts stored here");
  rec->callback([&] { run = [&] { return cmd_recommend(g, rec_corpus, rec_opts, rec_args); }; });

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate (method x source x k) on held-out transactions");
  CorpusOptions ev_corpus;
  RecommenderOptions ev_opts;
  EvalArgs ev_args;
  ev_corpus.add(*ev, true);
  ev_opts.add(*ev, false);
  ev->add_option("--method", ev_args.methods, "Recommenders (repeatable)")
      ->check(CLI::IsMember({"par", "nar", "far"}))
      ->capture_default_str();
  ev->add_option("--source", ev_args.sources,
                 "Sources: ck uk personomy social-personomy batched social-batched community")
      ->capture_default_str();
  ev->add_option("--degree", ev_args.degree, "Friendship hops for sources that take one");
  ev->add_option("--k", ev_args.ks, "Input tags per query (repeatable)")->capture_default_str();
  ev->add_option("--split", ev_args.split, "Protocol")->check(CLI::IsMember({"cv5", "holdout40"}))->capture_default_str();
  ev->add_option("--ranks", ev_args.ranks, "Ranks for P@r and S@r; 1, 3 and 5 are always included")
      ->capture_default_str();
  ev->add_option("--input-strategy", ev_args.input_strategy, "How input tags are picked")
      ->check(CLI::IsMember({"random", "most-frequent-first"}))
      ->capture_default_str();
  ev->add_option("--batch-size", ev_args.batch_size, "Queries per batch in batched sources; 0 = whole test set")
      ->capture_default_str();
  ev->add_option("--query-order", ev_args.query_order, "Order in which test queries are batched")
      ->check(CLI::IsMember({"corpus", "shuffled"}))
      ->capture_default_str();
  ev->add_option("--fallback-min", ev_args.fallback_min, "Fall back to CK below this many source transactions")
      ->capture_default_str();
  ev->add_option("--min-group-transactions", ev_args.min_group_transactions,
                 "Users whose groups hold fewer transactions count as ungrouped")
      ->capture_default_str();
  ev->add_option("--jobs", ev_args.jobs, "Folds evaluated concurrently")->capture_default_str();
  ev->add_option("--manifest", ev_args.manifest, "Manifest path (default: <out>.manifest.json or manifest.json)");
  ev->callback([&] { run = [&] { return cmd_eval(g, ev_corpus, ev_opts, ev_args); }; });

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a synthetic corpus with planted communities");
  SynthConfig sc;
  fs::path syn_dir;
  syn->add_option("dir", syn_dir, "Output directory")->required();
  syn->add_option("--users", sc.users)->capture_default_str();
  syn->add_option("--communities", sc.communities)->capture_default_str();
  syn->add_option("--topics-per-community", sc.topics_per_community)->capture_default_str();
  syn->add_option("--tags-per-community", sc.tags_per_community)->capture_default_str();
  syn->add_option("--shared-tags", sc.shared_tags)->capture_default_str();
  syn->add_option("--min-transactions", sc.transactions_per_user.min, "Transactions per user, lower bound")
      ->capture_default_str();
  syn->add_option("--max-transactions", sc.transactions_per_user.max, "Transactions per user, upper bound")
      ->capture_default_str();
  syn->add_option("--min-length", sc.tags_per_transaction.min, "Tags per transaction, lower bound")
      ->capture_default_str();
  syn->add_option("--max-length", sc.tags_per_transaction.max, "Tags per transaction, upper bound")
      ->capture_default_str();
  syn->add_option("--intra-edge-prob", sc.intra_community_edge_prob)->capture_default_str();
  syn->add_option("--inter-edge-prob", sc.inter_community_edge_prob)->capture_default_str();
  syn->add_option("--groups", sc.group_count)->capture_default_str();
  syn->add_option("--group-membership-prob", sc.group_membership_prob)->capture_default_str();
  syn->add_option("--group-post-prob", sc.group_post_prob)->capture_default_str();
  syn->add_option("--affinity", sc.community_tag_affinity, "Community tag affinity, in (0.5, 1]")
      ->capture_default_str();
  syn->add_option("--topic-focus", sc.topic_focus)->capture_default_str();
  syn->add_option("--topic-loyalty", sc.topic_loyalty)->capture_default_str();
  syn->add_option("--signature-tags", sc.signature_tags)->capture_default_str();
  syn->add_option("--signature-prob", sc.signature_prob)->capture_default_str();
  syn->add_option("--zipf", sc.zipf_exponent)->capture_default_str();
  syn->callback([&] { run = [&] { return cmd_synth(g, sc, syn_dir); }; });

  // batch-replay
  auto* rep = app.add_subcommand("batch-replay", "Replay a query stream through the batcher");
  CorpusOptions rep_corpus;
  RecommenderOptions rep_opts;
  ReplayArgs rep_args;
  rep_corpus.add(*rep, true);
  rep_opts.add(*rep);
  rep->add_option("--queries", rep_args.queries, "Query stream file")->required()->check(CLI::ExistingFile);
  rep->add_option("--max-queries", rep_args.max_queries, "Close a batch at this many queries")
      ->capture_default_str();
  rep->add_option("--max-wait", rep_args.max_wait_ms, "Close a batch once its oldest query waited this long (ms)");
  rep->add_option("--degree", rep_args.degree, "Add friends up to this many hops");
  rep->add_option("--fallback-min", rep_args.fallback_min, "Fall back to the whole corpus below this size")
      ->capture_default_str();
  rep->add_option("--summary", rep_args.summary, "Instrumentation summary file (default: stderr)");
  rep->callback([&] { run = [&] { return cmd_batch_replay(g, rep_corpus, rep_opts, rep_args); }; });

  // profile
  auto* prof = app.add_subcommand("profile", "Dataset properties");
  CorpusOptions prof_corpus;
  prof_corpus.add(*prof, true);
  prof->callback([&] { run = [&] { return cmd_profile(g, prof_corpus); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return run();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
