#include "tagrec/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_set>

namespace tagrec {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool skippable(std::string_view line) {
  return line.empty() || line.front() == '#';
}

bool absent(std::string_view field) { return field == "-"; }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

/// Splits a tag field into distinct labels, first occurrence order.
std::vector<std::string_view> distinct_labels(std::string_view field, const std::string& source,
                                              std::size_t line, std::size_t& duplicates) {
  std::vector<std::string_view> labels;
  std::unordered_set<std::string_view> seen;
  for (auto label : split(field, ',')) {
    if (label.empty()) throw ParseError(source, line, "empty tag label");
    if (seen.insert(label).second)
      labels.push_back(label);
    else
      ++duplicates;
  }
  return labels;
}

}  // namespace

TagDatabase::TagDatabase() : lexicon_(std::make_shared<const Lexicon>()) {}

TagDatabase::TagDatabase(std::shared_ptr<const Lexicon> lexicon,
                         std::vector<Transaction> transactions)
    : lexicon_(std::move(lexicon)), transactions_(std::move(transactions)) {
  if (!lexicon_) throw std::invalid_argument("TagDatabase requires a lexicon");
}

SocialGraph::SocialGraph(std::size_t user_count,
                         std::span<const std::pair<UserId, UserId>> edges)
    : adjacency_(user_count) {
  for (auto [a, b] : edges) {
    if (a >= user_count || b >= user_count) throw std::out_of_range("edge endpoint out of range");
    if (a == b) continue;
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& list : adjacency_) normalize_tagset(list);
}

std::span<const UserId> SocialGraph::friends(UserId user) const {
  if (user >= adjacency_.size()) return {};
  return adjacency_[user];
}

std::size_t SocialGraph::edge_count() const noexcept {
  std::size_t degree_sum = 0;
  for (const auto& list : adjacency_) degree_sum += list.size();
  return degree_sum / 2;
}

bool SocialGraph::connected(UserId a, UserId b) const {
  const auto list = friends(a);
  return std::binary_search(list.begin(), list.end(), b);
}

GroupIndex::GroupIndex(std::size_t user_count, std::size_t group_count,
                       std::span<const std::pair<GroupId, UserId>> memberships,
                       std::span<const Transaction> transactions)
    : user_groups_(user_count), group_members_(group_count), group_transactions_(group_count) {
  auto join = [&](GroupId g, UserId u) {
    if (g >= group_count || u >= user_count) throw std::out_of_range("membership out of range");
    user_groups_[u].push_back(g);
    group_members_[g].push_back(u);
  };
  for (auto [g, u] : memberships) join(g, u);
  for (const auto& t : transactions) {
    if (!t.group) continue;
    join(*t.group, t.user);
    group_transactions_[*t.group].push_back(t.id);
  }
  for (auto& list : user_groups_) normalize_tagset(list);
  for (auto& list : group_members_) normalize_tagset(list);
}

std::span<const GroupId> GroupIndex::groups_of(UserId user) const {
  if (user >= user_groups_.size()) return {};
  return user_groups_[user];
}

std::span<const UserId> GroupIndex::members(GroupId group) const {
  if (group >= group_members_.size()) return {};
  return group_members_[group];
}

std::span<const TransactionId> GroupIndex::transactions_of(GroupId group) const {
  if (group >= group_transactions_.size()) return {};
  return group_transactions_[group];
}

Corpus parse_corpus(std::istream& transactions_in, std::istream* graph_in,
                    std::istream* groups_in, const LoadOptions& options) {
  auto lexicon = std::make_shared<Lexicon>();
  Corpus corpus;
  std::vector<Transaction> transactions;

  const std::string tx_source = "<transactions>";
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(transactions_in, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4) throw ParseError(tx_source, line_no, "expected 4 tab-separated fields");
    if (fields[0].empty() || absent(fields[0])) throw ParseError(tx_source, line_no, "missing user id");
    if (fields[1].empty() || fields[2].empty())
      throw ParseError(tx_source, line_no, "empty group or interest field (use '-')");

    Transaction t;
    t.user = lexicon->users.intern(fields[0]);
    const auto labels = distinct_labels(fields[3], tx_source, line_no, corpus.report.duplicate_tags);
    if (labels.size() < options.min_tags) {
      ++corpus.report.dropped_short;
      continue;
    }
    if (!absent(fields[1])) t.group = lexicon->groups.intern(fields[1]);
    if (!absent(fields[2])) t.interest = lexicon->interests.intern(fields[2]);
    for (auto label : labels) t.tags.push_back(lexicon->tags.intern(label));
    normalize_tagset(t.tags);
    t.id = static_cast<TransactionId>(transactions.size());
    transactions.push_back(std::move(t));
  }

  auto known_user = [&](std::string_view label, const std::string& source, std::size_t line) {
    auto id = lexicon->users.find(label);
    if (!id) throw ParseError(source, line, "unknown user '" + std::string(label) + "'");
    return *id;
  };

  std::vector<std::pair<UserId, UserId>> edges;
  if (graph_in) {
    const std::string source = "<graph>";
    std::set<std::pair<UserId, UserId>> directed;
    line_no = 0;
    while (std::getline(*graph_in, raw)) {
      ++line_no;
      const auto line = strip_cr(raw);
      if (skippable(line)) continue;
      std::istringstream fields{std::string(line)};
      std::string a, b, extra;
      if (!(fields >> a >> b) || (fields >> extra))
        throw ParseError(source, line_no, "expected 'user user'");
      const auto u = known_user(a, source, line_no);
      const auto v = known_user(b, source, line_no);
      if (u == v) {
        ++corpus.report.self_loops;
        continue;
      }
      directed.emplace(u, v);
    }
    for (auto [u, v] : directed) {
      if (!directed.contains({v, u})) ++corpus.report.asymmetric_edges;
      if (u < v || !directed.contains({v, u})) edges.emplace_back(u, v);
    }
  }

  std::vector<std::pair<GroupId, UserId>> memberships;
  if (groups_in) {
    const std::string source = "<groups>";
    line_no = 0;
    while (std::getline(*groups_in, raw)) {
      ++line_no;
      const auto line = strip_cr(raw);
      if (skippable(line)) continue;
      const auto fields = split(line, '\t');
      if (fields.size() != 2 || fields[0].empty())
        throw ParseError(source, line_no, "expected 'group<TAB>user'");
      const auto user = known_user(fields[1], source, line_no);
      memberships.emplace_back(lexicon->groups.intern(fields[0]), user);
    }
  }

  const auto users = lexicon->users.size();
  const auto groups = lexicon->groups.size();
  corpus.graph = SocialGraph(users, edges);
  corpus.groups = GroupIndex(users, groups, memberships, transactions);
  corpus.db = TagDatabase(std::move(lexicon), std::move(transactions));
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& transactions,
                   const std::optional<std::filesystem::path>& graph,
                   const std::optional<std::filesystem::path>& groups,
                   const LoadOptions& options) {
  auto tx_in = open_input(transactions);
  std::ifstream graph_in, groups_in;
  if (graph) graph_in = open_input(*graph);
  if (groups) groups_in = open_input(*groups);
  try {
    return parse_corpus(tx_in, graph ? &graph_in : nullptr, groups ? &groups_in : nullptr, options);
  } catch (const ParseError& e) {
    // Replace the placeholder stream name with the real path.
    std::string source = e.what();
    source = source.substr(0, source.find(':'));
    if (source == "<transactions>") source = transactions.string();
    else if (graph && source == "<graph>") source = graph->string();
    else if (groups && source == "<groups>") source = groups->string();
    throw ParseError(source, e.line(), e.detail());
  }
}

std::string format_tagset(std::span<const TagId> tags, const Dictionary& vocabulary) {
  std::string out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (i) out += ',';
    out += vocabulary.label(tags[i]);
  }
  return out;
}

void write_transactions(const TagDatabase& db, std::ostream& out) {
  const auto& lex = db.lexicon();
  for (const auto& t : db.transactions()) {
    out << lex.users.label(t.user) << '\t' << (t.group ? lex.groups.label(*t.group) : "-") << '\t'
        << (t.interest ? lex.interests.label(*t.interest) : "-") << '\t'
        << format_tagset(t.tags, lex.tags) << '\n';
  }
}

void write_graph(const SocialGraph& graph, const Lexicon& lexicon, std::ostream& out) {
  for (UserId u = 0; u < graph.user_count(); ++u)
    for (auto v : graph.friends(u))
      if (u < v) out << lexicon.users.label(u) << ' ' << lexicon.users.label(v) << '\n';
}

void write_groups(const GroupIndex& groups, const Lexicon& lexicon, std::ostream& out) {
  for (GroupId g = 0; g < groups.group_count(); ++g)
    for (auto u : groups.members(g))
      out << lexicon.groups.label(g) << '\t' << lexicon.users.label(u) << '\n';
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& transactions,
                  const std::optional<std::filesystem::path>& graph,
                  const std::optional<std::filesystem::path>& groups) {
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(transactions);
    write_transactions(corpus.db, out);
  }
  if (graph) {
    auto out = open(*graph);
    write_graph(corpus.graph, corpus.db.lexicon(), out);
  }
  if (groups) {
    auto out = open(*groups);
    write_groups(corpus.groups, corpus.db.lexicon(), out);
  }
}

Tagset parse_tag_list(std::string_view field, const Lexicon& lexicon, std::size_t* unknown) {
  Tagset tags;
  for (auto label : split(field, ',')) {
    if (label.empty()) continue;
    if (auto id = lexicon.tags.find(label)) {
      tags.push_back(*id);
    } else if (unknown) {
      ++*unknown;
    } else {
      throw Error("unknown tag '" + std::string(label) + "'");
    }
  }
  normalize_tagset(tags);
  return tags;
}

std::vector<QueryLine> parse_queries(std::istream& in, const Lexicon& lexicon,
                                     const std::string& source) {
  std::vector<QueryLine> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 3 && fields.size() != 4)
      throw ParseError(source, line_no, "expected 'user<TAB>interest<TAB>tags[<TAB>arrival_ms]'");
    QueryLine q;
    q.query.user = lexicon.users.find(fields[0]).value_or(kUnknownUser);
    if (!absent(fields[1]))
      q.query.interest = lexicon.interests.find(fields[1]).value_or(kUnknownInterest);
    q.query.input = parse_tag_list(fields[2], lexicon, &q.unknown_tags);
    if (fields.size() == 4) {
      try {
        q.arrival_ms = std::stoll(std::string(fields[3]));
      } catch (const std::exception&) {
        throw ParseError(source, line_no, "bad arrival time");
      }
    }
    out.push_back(std::move(q));
  }
  return out;
}

DatasetProfile profile(const TagDatabase& db, const SocialGraph& graph) {
  DatasetProfile p;
  p.transactions = db.size();
  std::set<UserId> users;
  std::unordered_set<TagId> tags;
  std::array<std::size_t, 3> lengths{};
  for (const auto& t : db.transactions()) {
    users.insert(t.user);
    tags.insert(t.tags.begin(), t.tags.end());
    const auto n = t.tags.size();
    ++lengths[n < 6 ? 0 : (n <= 8 ? 1 : 2)];
  }
  p.users = users.size();
  p.tags = tags.size();
  if (!db.empty()) {
    for (std::size_t i = 0; i < 3; ++i)
      p.length_pct[i] = static_cast<int>(
          std::lround(100.0 * static_cast<double>(lengths[i]) / static_cast<double>(db.size())));
  }
  for (auto u : users) {
    const auto f = graph.friends(u).size();
    const std::size_t bucket = f == 0 ? 0 : f <= 2 ? 1 : f <= 10 ? 2 : f <= 50 ? 3 : f <= 250 ? 4 : 5;
    ++p.friend_hist[bucket];
  }
  return p;
}

}  // namespace tagrec
