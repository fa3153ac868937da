#include "histolearn/baselines.hpp"

#include <algorithm>

namespace histolearn {

LabeledDistribution good_turing(const SampleSet& samples) {
  if (samples.n() == 0) throw Error("empty input");
  const auto fp = build_fingerprint(samples);
  const double n = static_cast<double>(samples.n());
  std::vector<LabeledDistribution::Entry> entries;
  entries.reserve(samples.distinct());
  for (const auto& [label, i] : samples.counts()) {
    const auto next = fp.at(i + 1);
    const double p = next == 0 ? static_cast<double>(i) / n
                               : static_cast<double>(i + 1) * static_cast<double>(next) /
                                     (n * static_cast<double>(fp.at(i)));
    entries.push_back({label, p});
  }
  const double reserve = std::clamp(static_cast<double>(fp.at(1)) / n, 0.0, 1.0);
  return LabeledDistribution(std::move(entries), reserve);
}

}  // namespace histolearn
