#include <charconv>
#include <cstdio>
#include <sstream>

#include "tagrec/eval.hpp"

namespace tagrec {

namespace {

constexpr std::string_view kColumns[] = {"k",  "method", "source", "n_tagsets", "p1",      "p3",     "p5",
                                         "s3", "s5",     "mrr",    "time_ms",   "frac_uk", "frac_ck"};

std::string exact(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

double parse_double(std::string_view text, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError("<report>", line, "bad number '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    out.push_back(line.substr(pos, tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "tsv") return ReportFormat::kTsv;
  if (text == "markdown" || text == "md") return ReportFormat::kMarkdown;
  throw ConfigError("unknown format '" + std::string(text) + "' (expected tsv or markdown)");
}

std::string emit_report(std::span<const MetricsReport> rows, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::kTsv) {
    for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "\t" : "") << kColumns[i];
    out << '\n';
    for (const auto& r : rows) {
      out << r.k << '\t' << r.method << '\t' << r.source << '\t' << exact(r.n_tagsets) << '\t' << exact(r.p(1))
          << '\t' << exact(r.p(3)) << '\t' << exact(r.p(5)) << '\t' << exact(r.s(3)) << '\t' << exact(r.s(5))
          << '\t' << exact(r.mrr) << '\t' << exact(r.time_ms) << '\t' << exact(r.frac_uk) << '\t'
          << exact(r.frac_ck) << '\n';
    }
    return out.str();
  }
  // Quality metrics as percentages, two decimals.
  out << "| k | method | source | #tagsets | P@1 | P@3 | P@5 | S@3 | S@5 | MRR | time (ms) | |D|/|UK| % | |D|/|CK| % |\n";
  out << "|---|---|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    auto pct = [](double v) { return fixed(100.0 * v, 2); };
    out << "| " << r.k << " | " << r.method << " | " << r.source << " | " << fixed(r.n_tagsets, 0) << " | "
        << pct(r.p(1)) << " | " << pct(r.p(3)) << " | " << pct(r.p(5)) << " | " << pct(r.s(3)) << " | "
        << pct(r.s(5)) << " | " << pct(r.mrr) << " | " << fixed(r.time_ms, 3) << " | " << fixed(r.frac_uk, 2)
        << " | " << fixed(r.frac_ck, 2) << " |\n";
  }
  return out.str();
}

std::vector<MetricsReport> parse_report_tsv(std::string_view text) {
  std::vector<MetricsReport> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != std::size(kColumns))
      throw ParseError("<report>", line_no,
                       "expected " + std::to_string(std::size(kColumns)) + " columns, got " +
                           std::to_string(fields.size()));
    if (!header_seen) {
      for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i] != kColumns[i]) throw ParseError("<report>", line_no, "unexpected header");
      header_seen = true;
      continue;
    }
    MetricsReport r;
    r.k = static_cast<std::size_t>(parse_double(fields[0], line_no));
    r.method = fields[1];
    r.source = fields[2];
    r.n_tagsets = parse_double(fields[3], line_no);
    r.p_at[1] = parse_double(fields[4], line_no);
    r.p_at[3] = parse_double(fields[5], line_no);
    r.p_at[5] = parse_double(fields[6], line_no);
    r.s_at[3] = parse_double(fields[7], line_no);
    r.s_at[5] = parse_double(fields[8], line_no);
    r.mrr = parse_double(fields[9], line_no);
    r.time_ms = parse_double(fields[10], line_no);
    r.frac_uk = parse_double(fields[11], line_no);
    r.frac_ck = parse_double(fields[12], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace tagrec
