#include "histolearn/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <boost/math/distributions/poisson.hpp>

namespace histolearn {

// ---------------------------------------------------------------------------
// LabeledDistribution
// ---------------------------------------------------------------------------

LabeledDistribution::LabeledDistribution(std::vector<Entry> entries, double reserved_unseen_mass)
    : entries_(std::move(entries)), reserved_(reserved_unseen_mass) {
  if (!std::isfinite(reserved_) || reserved_ < 0.0 || reserved_ > 1.0) {
    throw Error("reserved unseen mass must lie in [0, 1]");
  }
  if (!std::is_sorted(entries_.begin(), entries_.end(),
                      [](const Entry& a, const Entry& b) { return a.label < b.label; })) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.label < b.label; });
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double p = entries_[i].probability;
    if (!std::isfinite(p) || p <= 0.0 || p > 1.0 + 1e-9) {
      throw Error("probability of '" + entries_[i].label + "' must lie in (0, 1]");
    }
    if (i > 0 && entries_[i - 1].label == entries_[i].label) {
      throw Error("duplicate label '" + entries_[i].label + "'");
    }
  }
  // Kahan summation: ground truths with 10^7 atoms must still sum to 1
  // within 1e-9.
  double sum = 0.0, comp = 0.0;
  for (const auto& e : entries_) {
    const double y = e.probability - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  assigned_ = sum;
}

double LabeledDistribution::probability(std::string_view label) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), label,
                             [](const Entry& e, std::string_view l) { return e.label < l; });
  if (it != entries_.end() && it->label == label) return it->probability;
  return 0.0;
}

bool LabeledDistribution::is_normalized(double tol) const noexcept {
  return std::abs(assigned_ + reserved_ - 1.0) <= tol;
}

// ---------------------------------------------------------------------------
// GeneralizedHistogram
// ---------------------------------------------------------------------------

GeneralizedHistogram::GeneralizedHistogram(std::vector<Entry> entries) {
  for (const auto& e : entries) {
    if (!std::isfinite(e.x) || e.x <= 0.0 || e.x > 1.0 + kMassTolerance) {
      throw Error("histogram probability " + std::to_string(e.x) + " outside (0, 1]");
    }
    if (!std::isfinite(e.count) || e.count < 0.0) {
      throw Error("histogram count must be finite and nonnegative");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.x < b.x; });
  for (const auto& e : entries) {
    if (e.count == 0.0) continue;
    if (!entries_.empty() && entries_.back().x == e.x) {
      entries_.back().count += e.count;
    } else {
      entries_.push_back(e);
    }
  }
}

double GeneralizedHistogram::mass() const noexcept {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.x * e.count;
  return sum;
}

double GeneralizedHistogram::support_size() const noexcept {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.count;
  return sum;
}

bool GeneralizedHistogram::is_integral() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), [](const Entry& e) {
    return std::abs(e.count - std::round(e.count)) <= kIntegralTolerance;
  });
}

double GeneralizedHistogram::min_x() const {
  if (entries_.empty()) throw Error("empty histogram has no support");
  return entries_.front().x;
}

double GeneralizedHistogram::max_x() const {
  if (entries_.empty()) throw Error("empty histogram has no support");
  return entries_.back().x;
}

// ---------------------------------------------------------------------------
// SampleSet / Fingerprint
// ---------------------------------------------------------------------------

SampleSet::SampleSet(std::map<std::string, std::uint64_t> counts) : counts_(std::move(counts)) {
  for (const auto& [label, c] : counts_) {
    if (c == 0) throw Error("sample count for '" + label + "' must be positive");
    n_ += c;
  }
}

SampleSet SampleSet::from_draws(std::span<const std::string> draws) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& d : draws) ++counts[d];
  return SampleSet(std::move(counts));
}

Fingerprint::Fingerprint(std::map<std::uint64_t, std::uint64_t> entries, std::uint64_t n) : n_(n) {
  std::uint64_t total = 0;
  for (const auto& [i, f] : entries) {
    if (i == 0) throw Error("fingerprint index must be positive");
    if (f == 0) continue;
    total += i * f;
    entries_.emplace(i, f);
  }
  if (total != n_) {
    throw Error("fingerprint inconsistent: sum i*F_i = " + std::to_string(total) +
                " but n = " + std::to_string(n_));
  }
}

std::uint64_t Fingerprint::at(std::uint64_t i) const {
  auto it = entries_.find(i);
  return it == entries_.end() ? 0 : it->second;
}

std::uint64_t Fingerprint::distinct() const noexcept {
  std::uint64_t d = 0;
  for (const auto& [i, f] : entries_) d += f;
  return d;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void Config::validate() const {
  if (mode == Mode::paper) {
    if (!(0.1 > B && B > C && C > B / 2 && B / 2 > 0)) {
      throw Error("paper mode requires 0.1 > B > C > B/2 > 0");
    }
  }
  if (!(grid_ratio > 1.0) || !std::isfinite(grid_ratio)) {
    throw Error("grid ratio must exceed 1");
  }
  if (kappa_override && *kappa_override == 0) throw Error("kappa override must be positive");
  if (tau && !(*tau > 0.0 && *tau <= 1.0)) throw Error("tau must lie in (0, 1]");
}

double Config::tau_for(std::uint64_t n) const {
  if (tau) return *tau;
  const double nd = static_cast<double>(n);
  return 1.0 / (nd * std::log(nd));
}

std::string to_string(Mode mode) { return mode == Mode::paper ? "paper" : "practical"; }
std::string to_string(GridKind grid) { return grid == GridKind::linear ? "linear" : "geometric"; }

Mode parse_mode(std::string_view text) {
  if (text == "paper") return Mode::paper;
  if (text == "practical") return Mode::practical;
  throw Error("unknown mode '" + std::string(text) + "'");
}

GridKind parse_grid(std::string_view text) {
  if (text == "linear") return GridKind::linear;
  if (text == "geometric") return GridKind::geometric;
  throw Error("unknown grid '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

double poisson_pmf(double lambda, std::uint64_t j) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("poisson rate must be finite and >= 0");
  if (lambda == 0.0) return j == 0 ? 1.0 : 0.0;
  const boost::math::poisson_distribution<double> d(lambda);
  return boost::math::pdf(d, static_cast<double>(j));
}

Fingerprint build_fingerprint(const SampleSet& samples) {
  std::map<std::uint64_t, std::uint64_t> f;
  for (const auto& [label, c] : samples.counts()) ++f[c];
  return Fingerprint(std::move(f), samples.n());
}

LabeledDistribution empirical_distribution(const SampleSet& samples) {
  if (samples.n() == 0) throw Error("empty input");
  const double n = static_cast<double>(samples.n());
  std::vector<LabeledDistribution::Entry> entries;
  entries.reserve(samples.distinct());
  for (const auto& [label, c] : samples.counts()) {
    entries.push_back({label, static_cast<double>(c) / n});
  }
  return LabeledDistribution(std::move(entries), 0.0);
}

namespace {

// (decimal exponent, 12-digit mantissa) identifying p up to 12 significant
// digits.
std::pair<int, std::int64_t> significant_key(double p) {
  int e = static_cast<int>(std::floor(std::log10(p)));
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double scaled = p * std::pow(10.0, 11 - e);
    const auto m = static_cast<std::int64_t>(std::llround(scaled));
    if (m >= 1000000000000LL) {
      ++e;
    } else if (m < 100000000000LL) {
      --e;
    } else {
      return {e, m};
    }
  }
  // Mantissa rounded up to exactly 10^12: canonical form is 10^11 at e + 1.
  return {e + 1, 100000000000LL};
}

}  // namespace

GeneralizedHistogram histogram_of(const LabeledDistribution& dist) {
  struct Keyed {
    std::pair<int, std::int64_t> key;
    double p;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(dist.size());
  for (const auto& e : dist.entries()) keyed.push_back({significant_key(e.probability), e.probability});
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) { return a.key < b.key; });

  std::vector<GeneralizedHistogram::Entry> out;
  for (std::size_t i = 0; i < keyed.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < keyed.size() && keyed[j].key == keyed[i].key) sum += keyed[j++].p;
    const double count = static_cast<double>(j - i);
    out.push_back({sum / count, count});
    i = j;
  }
  return GeneralizedHistogram(std::move(out));
}

// ---------------------------------------------------------------------------
// Sampling (Vose alias method)
// ---------------------------------------------------------------------------

Sampler::Sampler(std::span<const double> probabilities) {
  const std::size_t m = probabilities.size();
  if (m == 0) throw Error("cannot sample from an empty distribution");
  if (m > std::numeric_limits<std::uint32_t>::max()) throw Error("distribution too large to sample");
  double total = 0.0, comp = 0.0;
  for (double p : probabilities) {
    if (!(p > 0.0)) throw Error("sampling requires positive probabilities");
    const double y = p - comp;
    const double t = total + y;
    comp = (t - total) - y;
    total = t;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("distribution is not normalized");

  accept_.assign(m, 1.0);
  alias_.resize(m);
  std::vector<double> scaled(m);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < m; ++i) {
    scaled[i] = probabilities[i] * static_cast<double>(m) / total;
    alias_[i] = static_cast<std::uint32_t>(i);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto i : small) accept_[i] = 1.0;
  for (auto i : large) accept_[i] = 1.0;
}

namespace {

std::vector<double> probabilities_of(const LabeledDistribution& dist) {
  if (dist.reserved_unseen_mass() != 0.0) throw Error("cannot sample from a distribution with reserved mass");
  std::vector<double> p;
  p.reserve(dist.size());
  for (const auto& e : dist.entries()) p.push_back(e.probability);
  return p;
}

}  // namespace

Sampler::Sampler(const LabeledDistribution& dist) : Sampler(probabilities_of(dist)) {}

std::vector<std::uint64_t> Sampler::draw_counts(std::uint64_t n, std::uint64_t seed) const {
  std::vector<std::uint64_t> counts(accept_.size(), 0);
  Rng rng(seed);
  const std::uint64_t m = accept_.size();
  for (std::uint64_t t = 0; t < n; ++t) {
    const auto i = rng.below(m);
    const double u = rng.uniform();
    ++counts[u < accept_[i] ? i : alias_[i]];
  }
  return counts;
}

SampleSet to_sample_set(const LabeledDistribution& dist, std::span<const std::uint64_t> counts) {
  if (counts.size() != dist.size()) throw Error("count vector does not match distribution size");
  std::map<std::string, std::uint64_t> out;
  const auto entries = dist.entries();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) out.emplace_hint(out.end(), entries[i].label, counts[i]);
  }
  return SampleSet(std::move(out));
}

SampleSet draw_samples(const LabeledDistribution& dist, std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw Error("sample size must be positive");
  const Sampler sampler(dist);
  return to_sample_set(dist, sampler.draw_counts(n, seed));
}

}  // namespace histolearn
