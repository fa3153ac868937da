#include "histolearn/round.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace histolearn {

namespace {

int stage_of(double x) {
  int exponent = 0;
  std::frexp(x, &exponent);
  return std::max(0, -exponent);
}

}  // namespace

GeneralizedHistogram round_histogram(const GeneralizedHistogram& g) {
  std::vector<GeneralizedHistogram::Entry> out;
  std::map<int, std::vector<GeneralizedHistogram::Entry>> stages;
  for (const auto& e : g.entries()) {
    const double nearest = std::round(e.count);
    if (std::abs(e.count - nearest) <= kIntegralTolerance) {
      if (nearest > 0.0) out.push_back({e.x, nearest});
    } else {
      stages[stage_of(e.x)].push_back(e);
    }
  }

  for (auto& [stage, entries] : stages) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.x > b.x; });
    double mass = 0.0;
    for (const auto& e : entries) mass += e.x * e.count;
    double diff = 0.0;
    std::vector<double> rounded(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      rounded[i] = diff <= 0.0 ? std::ceil(e.count) : std::floor(e.count);
      diff += e.x * (rounded[i] - e.count);
    }
    const double factor = mass / (mass + diff);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (rounded[i] > 0.0) out.push_back({entries[i].x * factor, rounded[i]});
    }
  }
  return GeneralizedHistogram(std::move(out));
}

}  // namespace histolearn
