#include "histolearn/label.hpp"

#include <algorithm>
#include <cmath>

#include "histolearn/metrics.hpp"

namespace histolearn {

GeneralizedHistogram fatten(const GeneralizedHistogram& h, std::uint64_t n) {
  if (n < 2) throw Error("fattening needs n >= 2");
  const double nd = static_cast<double>(n);
  const double l = std::log(nd);
  const double l4 = l * l * l * l;
  const std::uint64_t cutoff = median_cutoff(n);

  double added = static_cast<double>(cutoff) / l4;
  double scale = 1.0;
  if (added > 0.5) {
    scale = 0.5 / added;
    added = 0.5;
  }

  std::vector<GeneralizedHistogram::Entry> entries;
  entries.reserve(h.size() + cutoff);
  for (const auto& e : h.entries()) entries.push_back({e.x, e.count * (1.0 - added)});
  for (std::uint64_t j = 1; j <= cutoff; ++j) {
    const double jd = static_cast<double>(j);
    entries.push_back({jd / nd, scale * nd / (jd * l4)});
  }
  return GeneralizedHistogram(std::move(entries));
}

MedianTable median_table(const GeneralizedHistogram& fattened, std::uint64_t n) {
  MedianTable table;
  table.cutoff = median_cutoff(n);
  table.medians.reserve(table.cutoff);
  for (std::uint64_t j = 0; j < table.cutoff; ++j) table.medians.push_back(poisson_median(fattened, j, n));
  return table;
}

LabeledDistribution assign_probabilities(const SampleSet& samples, const MedianTable& medians, std::uint64_t n) {
  if (n == 0) throw Error("n must be positive");
  const double nd = static_cast<double>(n);
  std::vector<LabeledDistribution::Entry> entries;
  entries.reserve(samples.distinct());
  double assigned = 0.0;
  for (const auto& [label, count] : samples.counts()) {
    const double p = count < medians.cutoff && count < medians.medians.size() ? medians.medians[count]
                                                                              : static_cast<double>(count) / nd;
    entries.push_back({label, p});
    assigned += p;
  }
  const double reserve = std::clamp(1.0 - assigned, 0.0, 1.0);
  return LabeledDistribution(std::move(entries), reserve);
}

LearnResult learn_detailed(const SampleSet& samples, const Config& config) {
  const std::uint64_t n = samples.n();
  if (n < 2) throw Error("learning needs at least two samples");
  LearnResult out;
  out.recovery = recover_histogram(build_fingerprint(samples), config);
  out.medians = median_table(fatten(out.recovery.histogram, n), n);
  out.distribution = assign_probabilities(samples, out.medians, n);
  out.excess_mass = std::max(0.0, out.distribution.assigned_mass() - 1.0);
  return out;
}

LabeledDistribution learn(const SampleSet& samples, const Config& config) {
  return learn_detailed(samples, config).distribution;
}

}  // namespace histolearn
