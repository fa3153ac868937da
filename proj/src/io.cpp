#include "histolearn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace histolearn::io {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

double parse_double(std::string_view text, std::size_t line_no) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("line " + std::to_string(line_no) + ": invalid number '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_count(std::string_view text, std::size_t line_no) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("line " + std::to_string(line_no) + ": invalid count '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

SampleSet read_samples(std::istream& in) {
  std::map<std::string, std::uint64_t> counts;
  std::string line;
  std::size_t line_no = 0;
  int tsv = -1;  // undecided until the first data line
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (skippable(line)) continue;
    if (tsv < 0) tsv = line.find('\t') != std::string::npos ? 1 : 0;
    if (tsv == 1) {
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos) throw Error("line " + std::to_string(line_no) + ": expected label<TAB>count");
      const std::uint64_t c = parse_count(std::string_view(line).substr(tab + 1), line_no);
      if (c == 0) continue;
      counts[line.substr(0, tab)] += c;
    } else {
      ++counts[line];
    }
  }
  return SampleSet(std::move(counts));
}

SampleSet read_samples(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_samples(in);
}

void write_samples(std::ostream& out, const SampleSet& samples) {
  for (const auto& [label, c] : samples.counts()) out << label << '\t' << c << '\n';
}

// ---------------------------------------------------------------------------
// Histograms
// ---------------------------------------------------------------------------

GeneralizedHistogram read_histogram(std::istream& in) {
  std::vector<GeneralizedHistogram::Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (skippable(line)) continue;
    const auto t = trim(line);
    const auto sep = t.find_first_of(" \t");
    if (sep == std::string_view::npos) throw Error("line " + std::to_string(line_no) + ": expected 'x h(x)'");
    entries.push_back({parse_double(t.substr(0, sep), line_no), parse_double(t.substr(sep + 1), line_no)});
  }
  return GeneralizedHistogram(std::move(entries));
}

GeneralizedHistogram read_histogram(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_histogram(in);
}

void write_histogram(std::ostream& out, const GeneralizedHistogram& h) {
  for (const auto& e : h.entries()) out << format_double(e.x) << ' ' << format_double(e.count) << '\n';
}

// ---------------------------------------------------------------------------
// Labeled distributions
// ---------------------------------------------------------------------------

LabeledDistribution read_distribution(std::istream& in) {
  std::vector<LabeledDistribution::Entry> entries;
  double reserve = 0.0;
  std::string line;
  std::size_t line_no = 0;
  constexpr std::string_view kUnseen = "# unseen_mass";
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (std::string_view(line).starts_with(kUnseen)) {
      reserve = parse_double(std::string_view(line).substr(kUnseen.size()), line_no);
      continue;
    }
    if (skippable(line)) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw Error("line " + std::to_string(line_no) + ": expected label<TAB>probability");
    entries.push_back({line.substr(0, tab), parse_double(std::string_view(line).substr(tab + 1), line_no)});
  }
  return LabeledDistribution(std::move(entries), reserve);
}

LabeledDistribution read_distribution(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_distribution(in);
}

void write_distribution(std::ostream& out, const LabeledDistribution& dist) {
  std::vector<const LabeledDistribution::Entry*> order;
  order.reserve(dist.size());
  for (const auto& e : dist.entries()) order.push_back(&e);
  // Entries are label-sorted already, so stable_sort breaks ties by label.
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->probability > b->probability; });
  for (const auto* e : order) out << e->label << '\t' << format_double(e->probability) << '\n';
  out << "# unseen_mass " << format_double(dist.reserved_unseen_mass()) << '\n';
}

}  // namespace histolearn::io
