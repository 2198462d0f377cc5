#include "tagrec/miner.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace tagrec {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

/// Parses `key=value` tokens of a `#` header line.
std::map<std::string, std::string> parse_header(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq != std::string::npos) kv[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return kv;
}

std::string require(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw Error("missing header field '" + key + "'");
  return it->second;
}

/// Splits `a,b,c:123` into resolved tags and the count.
std::pair<std::vector<TagId>, Count> parse_count_line(const std::string& line,
                                                      const Dictionary& vocabulary) {
  const auto colon = line.rfind(':');
  if (colon == std::string::npos) throw Error("malformed line '" + line + "'");
  std::vector<TagId> tags;
  std::string_view labels(line.data(), colon);
  std::size_t start = 0;
  while (start <= labels.size()) {
    auto comma = labels.find(',', start);
    if (comma == std::string_view::npos) comma = labels.size();
    const auto label = labels.substr(start, comma - start);
    auto id = vocabulary.find(label);
    if (!id) throw Error("unknown tag '" + std::string(label) + "'");
    tags.push_back(*id);
    start = comma + 1;
  }
  Count count = 0;
  const char* first = line.data() + colon + 1;
  const char* last = line.data() + line.size();
  auto [ptr, ec] = std::from_chars(first, last, count);
  if (ec != std::errc() || ptr != last) throw Error("bad count in '" + line + "'");
  return {std::move(tags), count};
}

bool subset_bits(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  for (std::size_t w = 0; w < a.size(); ++w)
    if (a[w] & ~b[w]) return false;
  return true;
}

}  // namespace

MinSupport MinSupport::relative(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("relative minimum support must be in (0,1], got " + shortest(fraction));
  return MinSupport(true, fraction);
}

MinSupport MinSupport::absolute(Count count) {
  if (count < 1) throw ConfigError("absolute minimum support must be >= 1");
  return MinSupport(false, static_cast<double>(count));
}

MinSupport MinSupport::parse(std::string_view text) {
  const bool fractional = text.find_first_of(".eE") != std::string_view::npos;
  if (fractional) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw ConfigError("bad minimum support '" + std::string(text) + "'");
    return relative(v);
  }
  Count v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("bad minimum support '" + std::string(text) + "'");
  return absolute(v);
}

Count MinSupport::resolve(std::size_t db_size) const {
  if (!relative_) return static_cast<Count>(value_);
  const auto abs = static_cast<Count>(std::ceil(value_ * static_cast<double>(db_size)));
  return std::max<Count>(abs, 1);
}

std::string MinSupport::to_string() const {
  if (relative_) {
    auto s = shortest(value_);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
  }
  return std::to_string(static_cast<Count>(value_));
}

void MiningParams::validate() const {
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
  if (top_m < 1) throw ConfigError("top_m must be >= 1");
}

Count support(const TagDatabase& db, std::span<const TagId> tags) {
  Count n = 0;
  for (const auto& t : db.transactions())
    if (is_subset(tags, t.tags)) ++n;
  return n;
}

TidsetIndex::TidsetIndex(const TagDatabase& db)
    : transactions_(db.size()), words_((db.size() + 63) / 64), bits_(db.vocabulary().size()) {
  for (std::size_t pos = 0; pos < db.size(); ++pos) {
    for (auto tag : db[pos].tags) {
      auto& b = bits_[tag];
      if (b.empty()) b.assign(words_, 0);
      b[pos / 64] |= std::uint64_t{1} << (pos % 64);
    }
  }
}

std::span<const std::uint64_t> TidsetIndex::tids(TagId tag) const {
  if (tag >= bits_.size()) return {};
  return bits_[tag];
}

Count TidsetIndex::support(TagId tag) const {
  Count n = 0;
  for (auto w : tids(tag)) n += static_cast<Count>(std::popcount(w));
  return n;
}

Count TidsetIndex::support(std::span<const TagId> tags) const {
  if (tags.empty()) return transactions_;
  Count n = 0;
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t acc = ~std::uint64_t{0};
    for (auto tag : tags) {
      const auto t = tids(tag);
      if (t.empty()) return 0;
      acc &= t[w];
    }
    n += static_cast<Count>(std::popcount(acc));
  }
  return n;
}

std::vector<std::size_t> TidsetIndex::positions(std::span<const TagId> tags) const {
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t acc = w + 1 == words_ && transactions_ % 64
                            ? (std::uint64_t{1} << (transactions_ % 64)) - 1
                            : ~std::uint64_t{0};
    for (auto tag : tags) {
      const auto t = tids(tag);
      if (t.empty()) return {};
      acc &= t[w];
    }
    while (acc) {
      out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(acc)));
      acc &= acc - 1;
    }
  }
  return out;
}

CooccurrenceIndex::CooccurrenceIndex(std::size_t top_m, std::vector<Count> tag_support,
                                     std::vector<std::vector<Cooccurrence>> top_lists)
    : top_m_(top_m), tag_support_(std::move(tag_support)), top_lists_(std::move(top_lists)) {
  top_lists_.resize(tag_support_.size());
}

std::span<const Cooccurrence> CooccurrenceIndex::top_list(TagId tag) const {
  if (tag >= top_lists_.size()) return {};
  return top_lists_[tag];
}

std::optional<Count> CooccurrenceIndex::joint(TagId tag, TagId other) const {
  for (const auto& c : top_list(tag))
    if (c.tag == other) return c.joint;
  return std::nullopt;
}

CooccurrenceIndex build_cooccurrence(const TagDatabase& db, std::size_t top_m) {
  if (top_m < 1) throw ConfigError("top_m must be >= 1");
  const auto vocab = db.vocabulary().size();
  std::vector<Count> tag_support(vocab, 0);
  std::vector<std::vector<std::size_t>> postings(vocab);
  for (std::size_t pos = 0; pos < db.size(); ++pos) {
    for (auto tag : db[pos].tags) {
      ++tag_support[tag];
      postings[tag].push_back(pos);
    }
  }

  std::vector<std::vector<Cooccurrence>> lists(vocab);
  std::vector<Count> joint(vocab, 0);
  std::vector<TagId> touched;
  for (TagId t = 0; t < vocab; ++t) {
    if (postings[t].empty()) continue;
    for (auto pos : postings[t]) {
      for (auto c : db[pos].tags) {
        if (c == t) continue;
        if (joint[c]++ == 0) touched.push_back(c);
      }
    }
    auto& list = lists[t];
    list.reserve(touched.size());
    for (auto c : touched) {
      list.push_back({c, joint[c]});
      joint[c] = 0;
    }
    touched.clear();
    const auto keep = std::min(top_m, list.size());
    auto order = [](const Cooccurrence& a, const Cooccurrence& b) {
      return a.joint != b.joint ? a.joint > b.joint : a.tag < b.tag;
    };
    std::partial_sort(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(keep), list.end(), order);
    list.resize(keep);
    list.shrink_to_fit();
  }
  return CooccurrenceIndex(top_m, std::move(tag_support), std::move(lists));
}

std::size_t FrequentTagsetCollection::Hash::operator()(const Tagset& t) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (auto tag : t) {
    h ^= tag;
    h *= 1099511628211ull;
  }
  return h;
}

FrequentTagsetCollection::FrequentTagsetCollection(MiningParams params, Count min_support_abs,
                                                   std::size_t db_size,
                                                   std::vector<std::pair<Tagset, Count>> entries)
    : params_(params), min_support_(min_support_abs), db_size_(db_size), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
  lookup_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& tags = entries_[i].first;
    lookup_.emplace(tags, i);
    for (auto tag : tags) {
      if (tag >= postings_.size()) postings_.resize(tag + 1);
      postings_[tag].push_back(i);
    }
  }
}

std::optional<Count> FrequentTagsetCollection::find(std::span<const TagId> tags) const {
  auto it = lookup_.find(Tagset(tags.begin(), tags.end()));
  if (it == lookup_.end()) return std::nullopt;
  return entries_[it->second].second;
}

std::optional<Count> FrequentTagsetCollection::support_of(std::span<const TagId> tags) const {
  if (tags.empty()) return static_cast<Count>(db_size_);
  if (tags.size() > params_.max_len) return std::nullopt;
  if (auto exact = find(tags)) return exact;
  const std::vector<std::size_t>* shortest_list = nullptr;
  for (auto tag : tags) {
    if (tag >= postings_.size() || postings_[tag].empty()) return std::nullopt;
    if (!shortest_list || postings_[tag].size() < shortest_list->size()) shortest_list = &postings_[tag];
  }
  std::optional<Count> best;
  for (auto i : *shortest_list) {
    const auto& [entry, sup] = entries_[i];
    if (entry.size() > tags.size() && is_subset(tags, entry) && (!best || sup > *best)) best = sup;
  }
  return best;
}

FrequentTagsetCollection mine_closed(const TagDatabase& db, const MiningParams& params) {
  params.validate();
  const Count minsup = params.min_support.resolve(db.size());
  const TidsetIndex index(db);

  std::vector<TagId> items;
  for (TagId t = 0; t < db.vocabulary().size(); ++t)
    if (index.support(t) >= minsup) items.push_back(t);

  const auto words = index.words();
  const bool global = params.closedness == Closedness::kGlobal;
  std::vector<std::pair<Tagset, Count>> closed;
  Tagset prefix;

  // An equal-support one-tag extension must occur in every transaction
  // containing the prefix, so the first such transaction bounds the search.
  auto is_closed = [&](std::span<const std::uint64_t> tids) {
    if (!global && prefix.size() >= params.max_len) return true;
    std::size_t first = 0;
    while (first < words && tids[first] == 0) ++first;
    const auto pos = first * 64 + static_cast<std::size_t>(std::countr_zero(tids[first]));
    for (auto e : db[pos].tags) {
      if (contains_tag(prefix, e)) continue;
      if (subset_bits(tids, index.tids(e))) return false;
    }
    return true;
  };

  // Eclat-style: each level holds the frequent one-tag extensions of the
  // current prefix with their tidsets; children combine only those.
  struct Extension {
    TagId tag;
    Count support;
    std::size_t offset;  // into the level's tid buffer
  };
  std::vector<std::vector<Extension>> level(params.max_len + 1);
  std::vector<std::vector<std::uint64_t>> buffer(params.max_len + 1);
  auto tids_of = [&](std::size_t depth, const Extension& e) {
    return std::span<const std::uint64_t>(buffer[depth].data() + e.offset, words);
  };

  auto dfs = [&](auto&& self, std::size_t depth) -> void {
    const auto& exts = level[depth];
    for (std::size_t i = 0; i < exts.size(); ++i) {
      const auto tids = tids_of(depth, exts[i]);
      prefix.push_back(exts[i].tag);
      if (is_closed(tids)) closed.emplace_back(prefix, exts[i].support);
      if (prefix.size() < params.max_len && i + 1 < exts.size()) {
        auto& next = level[depth + 1];
        auto& buf = buffer[depth + 1];
        next.clear();
        buf.clear();
        for (std::size_t j = i + 1; j < exts.size(); ++j) {
          const auto other = index.tids(exts[j].tag);
          const auto offset = buf.size();
          buf.resize(offset + words);
          Count sup = 0;
          for (std::size_t w = 0; w < words; ++w) {
            buf[offset + w] = tids[w] & other[w];
            sup += static_cast<Count>(std::popcount(buf[offset + w]));
          }
          if (sup >= minsup)
            next.push_back({exts[j].tag, sup, offset});
          else
            buf.resize(offset);
        }
        if (!next.empty()) self(self, depth + 1);
      }
      prefix.pop_back();
    }
  };
  for (auto t : items) {
    const auto offset = buffer[0].size();
    const auto tids = index.tids(t);
    buffer[0].insert(buffer[0].end(), tids.begin(), tids.end());
    level[0].push_back({t, index.support(t), offset});
  }
  if (!db.empty()) dfs(dfs, 0);

  return FrequentTagsetCollection(params, minsup, db.size(), std::move(closed));
}

void write_frequent(const FrequentTagsetCollection& f, const Dictionary& vocabulary, std::ostream& out) {
  const auto& p = f.params();
  out << "# closed-tagsets count=" << f.size() << " min_support=" << f.min_support()
      << " minsup=" << p.min_support.to_string() << " max_len=" << p.max_len
      << " closedness=" << (p.closedness == Closedness::kGlobal ? "global" : "bounded")
      << " db_size=" << f.db_size() << '\n';
  for (const auto& [tags, sup] : f.entries()) out << format_tagset(tags, vocabulary) << ':' << sup << '\n';
}

FrequentTagsetCollection read_frequent(std::istream& in, const Dictionary& vocabulary) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# closed-tagsets", 0) != 0)
    throw Error("not a closed-tagset file");
  const auto kv = parse_header(line);
  MiningParams params;
  params.min_support = MinSupport::parse(require(kv, "minsup"));
  params.max_len = std::stoul(require(kv, "max_len"));
  params.closedness = require(kv, "closedness") == "global" ? Closedness::kGlobal : Closedness::kLengthBounded;
  std::vector<std::pair<Tagset, Count>> entries;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto [tags, sup] = parse_count_line(line, vocabulary);
    entries.emplace_back(make_tagset(std::move(tags)), sup);
  }
  return FrequentTagsetCollection(params, std::stoull(require(kv, "min_support")),
                                  std::stoul(require(kv, "db_size")), std::move(entries));
}

void write_cooccurrence(const CooccurrenceIndex& index, const Dictionary& vocabulary, std::ostream& out) {
  out << "# cooccurrence top_m=" << index.top_m() << '\n';
  for (TagId t = 0; t < index.vocabulary_size(); ++t)
    if (index.tag_support(t) > 0) out << vocabulary.label(t) << ':' << index.tag_support(t) << '\n';
  for (TagId t = 0; t < index.vocabulary_size(); ++t)
    for (const auto& c : index.top_list(t))
      out << vocabulary.label(t) << ',' << vocabulary.label(c.tag) << ':' << c.joint << '\n';
}

CooccurrenceIndex read_cooccurrence(std::istream& in, const Dictionary& vocabulary) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# cooccurrence", 0) != 0)
    throw Error("not a co-occurrence file");
  const auto top_m = std::stoul(require(parse_header(line), "top_m"));
  std::vector<Count> supports(vocabulary.size(), 0);
  std::vector<std::vector<Cooccurrence>> lists(vocabulary.size());
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto [tags, count] = parse_count_line(line, vocabulary);
    if (tags.size() == 1)
      supports[tags[0]] = count;
    else if (tags.size() == 2)
      lists[tags[0]].push_back({tags[1], count});
    else
      throw Error("malformed co-occurrence line '" + line + "'");
  }
  return CooccurrenceIndex(top_m, std::move(supports), std::move(lists));
}

}  // namespace tagrec
