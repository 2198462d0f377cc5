#include "tagrec/codetable.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace tagrec {

namespace {

bool order_key(std::span<const TagId> a, Count sup_a, std::span<const TagId> b, Count sup_b) {
  if (a.size() != b.size()) return a.size() > b.size();
  if (sup_a != sup_b) return sup_a > sup_b;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Running sums from which L(D,CT) follows in O(1):
///   L(D|CT) = U log U - sum u log u
///   L(CT)   = sum st + n log U - sum log u      (over elements with u > 0)
struct SizeStats {
  double usage = 0;
  double u_log_u = 0;
  double log_u = 0;
  double standard = 0;
  double used = 0;

  void add(Count u, double st, int sign) {
    if (u == 0) return;
    const double du = static_cast<double>(u);
    const double lu = std::log2(du);
    usage += sign * du;
    u_log_u += sign * du * lu;
    log_u += sign * lu;
    standard += sign * st;
    used += sign;
  }

  EncodedSize size() const {
    if (usage <= 0) return {};
    const double lu = std::log2(usage);
    return {usage * lu - u_log_u, standard + used * lu - log_u};
  }
};

std::vector<double> standard_code_lengths(const TagDatabase& db) {
  std::vector<Count> sup(db.vocabulary().size(), 0);
  Count total = 0;
  for (const auto& t : db.transactions()) {
    for (auto tag : t.tags) ++sup[tag];
    total += t.tags.size();
  }
  std::vector<double> st(sup.size(), 0.0);
  for (std::size_t i = 0; i < sup.size(); ++i)
    if (sup[i] > 0) st[i] = -std::log2(static_cast<double>(sup[i]) / static_cast<double>(total));
  return st;
}

double standard_length(std::span<const TagId> tags, const std::vector<double>& st) {
  double sum = 0;
  for (auto t : tags) sum += st[t];
  return sum;
}

}  // namespace

bool cover_order(const CodeTableElement& a, const CodeTableElement& b) {
  return order_key(a.tags, a.support, b.tags, b.support);
}

CodeTable::CodeTable(std::vector<CodeTableElement> elements, std::size_t source_db_size,
                     std::size_t max_len)
    : elements_(std::move(elements)), source_db_size_(source_db_size), max_len_(max_len) {
  std::stable_sort(elements_.begin(), elements_.end(), cover_order);
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    total_usage_ += elements_[i].usage;
    for (auto tag : elements_[i].tags) {
      if (tag >= postings_.size()) postings_.resize(tag + 1);
      postings_[tag].push_back(i);
    }
  }
}

std::size_t CodeTable::pattern_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(elements_.begin(), elements_.end(),
                                                [](const auto& e) { return e.tags.size() > 1; }));
}

bool CodeTable::has_singleton(TagId tag) const {
  if (tag >= postings_.size()) return false;
  for (auto i : postings_[tag])
    if (elements_[i].tags.size() == 1) return true;
  return false;
}

std::vector<Tagset> cover(const CodeTable& ct, std::span<const TagId> tags) {
  std::vector<std::size_t> candidates;
  for (auto tag : tags) {
    if (!ct.has_singleton(tag))
      throw Error("tag id " + std::to_string(tag) + " has no singleton in the code table");
    for (auto i : ct.postings_[tag])
      if (is_subset(ct.elements_[i].tags, tags)) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<bool> covered(tags.size(), false);
  std::vector<Tagset> out;
  for (auto i : candidates) {
    const auto& e = ct.elements_[i].tags;
    bool free = true;
    for (auto tag : e) {
      const auto pos = static_cast<std::size_t>(std::lower_bound(tags.begin(), tags.end(), tag) - tags.begin());
      if (covered[pos]) {
        free = false;
        break;
      }
    }
    if (!free) continue;
    for (auto tag : e)
      covered[static_cast<std::size_t>(std::lower_bound(tags.begin(), tags.end(), tag) - tags.begin())] = true;
    out.push_back(e);
  }
  return out;
}

Count estimate_support(const CodeTable& ct, std::span<const TagId> tags) {
  if (tags.empty()) return ct.source_db_size_;
  const std::vector<std::size_t>* shortest = nullptr;
  for (auto tag : tags) {
    if (tag >= ct.postings_.size() || ct.postings_[tag].empty()) return 0;
    if (!shortest || ct.postings_[tag].size() < shortest->size()) shortest = &ct.postings_[tag];
  }
  Count sum = 0;
  for (auto i : *shortest) {
    const auto& e = ct.elements_[i];
    if (e.usage > 0 && e.tags.size() >= tags.size() && is_subset(tags, e.tags)) sum += e.usage;
  }
  return sum;
}

EncodedSize encoded_size(const CodeTable& ct, const TagDatabase& db) {
  std::map<Tagset, Count> usage;
  for (const auto& t : db.transactions())
    for (auto& part : cover(ct, t.tags)) ++usage[part];
  const auto st = standard_code_lengths(db);
  Count total = 0;
  for (const auto& [_, u] : usage) total += u;
  EncodedSize size;
  for (const auto& [tags, u] : usage) {
    const double code = -std::log2(static_cast<double>(u) / static_cast<double>(total));
    size.data += static_cast<double>(u) * code;
    size.model += standard_length(tags, st) + code;
  }
  return size;
}

CodeTable induce(const TagDatabase& db, const FrequentTagsetCollection& candidates,
                 InductionTrace* trace) {
  if (db.empty()) throw Error("cannot induce a code table from an empty database");

  struct Element {
    Tagset tags;
    Count support;
    Count usage = 0;
    double standard;
  };

  const auto st = standard_code_lengths(db);
  const TidsetIndex tids(db);
  std::vector<Element> elements;
  // Elements indexed under their smallest tag; a transaction only needs the
  // lists of its own tags.
  std::vector<std::vector<std::size_t>> by_first(db.vocabulary().size());

  auto add_element = [&](Tagset tags, Count sup) {
    const auto id = elements.size();
    by_first[tags.front()].push_back(id);
    const double s = standard_length(tags, st);
    elements.push_back({std::move(tags), sup, 0, s});
    return id;
  };
  for (TagId tag = 0; tag < db.vocabulary().size(); ++tag)
    if (auto sup = tids.support(tag); sup > 0) add_element({tag}, sup);

  auto before = [&](std::size_t a, std::size_t b) {
    return order_key(elements[a].tags, elements[a].support, elements[b].tags, elements[b].support);
  };

  std::vector<std::size_t> scratch;
  std::vector<bool> covered;
  auto cover_at = [&](std::size_t pos) {
    const auto& tags = db[pos].tags;
    scratch.clear();
    for (auto tag : tags)
      for (auto id : by_first[tag])
        if (is_subset(elements[id].tags, tags)) scratch.push_back(id);
    std::sort(scratch.begin(), scratch.end(), before);
    covered.assign(tags.size(), false);
    std::vector<std::size_t> used;
    auto slot = [&](TagId t) {
      return static_cast<std::size_t>(std::lower_bound(tags.begin(), tags.end(), t) - tags.begin());
    };
    for (auto id : scratch) {
      const auto& e = elements[id].tags;
      if (std::any_of(e.begin(), e.end(), [&](TagId t) { return covered[slot(t)]; })) continue;
      for (auto t : e) covered[slot(t)] = true;
      used.push_back(id);
    }
    return used;
  };

  std::vector<std::vector<std::size_t>> covers(db.size());
  SizeStats stats;
  for (std::size_t pos = 0; pos < db.size(); ++pos) {
    covers[pos] = cover_at(pos);
    for (auto id : covers[pos]) ++elements[id].usage;
  }
  for (const auto& e : elements) stats.add(e.usage, e.standard, +1);
  double current = stats.size().total();
  if (trace) {
    trace->singleton_size = current;
    trace->accepted_sizes.clear();
    trace->candidates_tested = 0;
  }

  std::vector<std::pair<Tagset, Count>> order;
  for (const auto& [tags, sup] : candidates.entries())
    if (tags.size() >= 2) order.emplace_back(tags, sup);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.first < b.first;
  });

  std::vector<long long> delta;
  std::vector<char> marked;  // element already listed in `touched`
  std::vector<std::size_t> touched;
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> saved;
  for (auto& [tags, sup] : order) {
    if (trace) ++trace->candidates_tested;
    const auto positions = tids.positions(tags);
    if (positions.empty()) continue;
    const auto id = add_element(tags, sup);
    delta.resize(elements.size(), 0);
    marked.resize(elements.size(), 0);
    touched.clear();
    saved.clear();
    auto bump = [&](std::size_t e, long long d) {
      if (!marked[e]) {
        marked[e] = 1;
        touched.push_back(e);
      }
      delta[e] += d;
    };
    const auto& cand = elements[id].tags;
    for (auto pos : positions) {
      // The greedy cover is unchanged up to the candidate's rank; if an earlier
      // element already claims one of its tags, the rest is unchanged too.
      bool blocked = false;
      for (auto e : covers[pos]) {
        if (!before(e, id)) continue;
        const auto& et = elements[e].tags;
        if (std::find_first_of(et.begin(), et.end(), cand.begin(), cand.end()) != et.end()) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      auto fresh = cover_at(pos);
      for (auto e : covers[pos]) bump(e, -1);
      for (auto e : fresh) bump(e, +1);
      saved.emplace_back(pos, std::move(covers[pos]));
      covers[pos] = std::move(fresh);
    }

    const SizeStats snapshot = stats;
    for (auto e : touched) {
      if (delta[e] == 0) continue;
      auto& el = elements[e];
      stats.add(el.usage, el.standard, -1);
      el.usage = static_cast<Count>(static_cast<long long>(el.usage) + delta[e]);
      stats.add(el.usage, el.standard, +1);
    }
    const double proposed = stats.size().total();
    const bool accept = proposed < current;
    auto reset_delta = [&] {
      for (auto e : touched) delta[e] = marked[e] = 0;
    };
    if (accept) {
      reset_delta();
      current = proposed;
      if (trace) trace->accepted_sizes.push_back(current);
      continue;
    }
    stats = snapshot;
    for (auto e : touched)
      elements[e].usage = static_cast<Count>(static_cast<long long>(elements[e].usage) - delta[e]);
    reset_delta();
    delta.pop_back();
    marked.pop_back();
    for (auto& [pos, old] : saved) covers[pos] = std::move(old);
    by_first[elements[id].tags.front()].pop_back();
    elements.pop_back();
  }

  // Final usages from a fresh cover of the whole database.
  for (auto& e : elements) e.usage = 0;
  for (std::size_t pos = 0; pos < db.size(); ++pos)
    for (auto id : cover_at(pos)) ++elements[id].usage;

  std::vector<CodeTableElement> out;
  out.reserve(elements.size());
  for (auto& e : elements) out.push_back({std::move(e.tags), e.usage, e.support});
  return CodeTable(std::move(out), db.size(), candidates.params().max_len);
}

void write_code_table(const CodeTable& ct, const Dictionary& vocabulary, std::ostream& out) {
  out << "# code-table elements=" << ct.size() << " total_usage=" << ct.total_usage()
      << " source_db_size=" << ct.source_db_size() << " max_len=" << ct.max_len() << '\n';
  for (const auto& e : ct.elements()) out << format_tagset(e.tags, vocabulary) << ':' << e.usage << '\n';
}

CodeTable read_code_table(std::istream& in, const Dictionary& vocabulary) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# code-table", 0) != 0) throw Error("not a code-table file");
  std::map<std::string, std::string> kv;
  {
    std::istringstream header(line);
    std::string token;
    while (header >> token)
      if (auto eq = token.find('='); eq != std::string::npos) kv[token.substr(0, eq)] = token.substr(eq + 1);
  }
  auto field = [&](const char* key) -> std::size_t {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(std::string("code-table header lacks ") + key);
    return std::stoull(it->second);
  };
  std::vector<CodeTableElement> elements;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.rfind(':');
    if (colon == std::string::npos) throw Error("malformed code-table line '" + line + "'");
    CodeTableElement e;
    std::stringstream labels(line.substr(0, colon));
    std::string label;
    while (std::getline(labels, label, ',')) {
      auto id = vocabulary.find(label);
      if (!id) throw Error("unknown tag '" + label + "' in code table");
      e.tags.push_back(*id);
    }
    normalize_tagset(e.tags);
    e.usage = std::stoull(line.substr(colon + 1));
    elements.push_back(std::move(e));
  }
  // Supports are not serialized; rank by file position so the stable sort
  // keeps the stored cover order within each length.
  const auto n = elements.size();
  for (std::size_t i = 0; i < n; ++i) elements[i].support = n - i;
  auto ct = CodeTable(std::move(elements), field("source_db_size"), field("max_len"));
  if (ct.total_usage() != field("total_usage")) throw Error("code-table usage total mismatch");
  return ct;
}

}  // namespace tagrec
