#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "histolearn/core.hpp"

namespace histolearn::io {

/// Samples: one label per line, or `label<TAB>count` when the first
/// non-comment line contains a tab. `#` lines and blank lines are skipped.
SampleSet read_samples(std::istream& in);
SampleSet read_samples(const std::filesystem::path& path);
/// Writes the TSV form.
void write_samples(std::ostream& out, const SampleSet& samples);

/// Histogram: lines `x h(x)`, `#` comments allowed, any order.
GeneralizedHistogram read_histogram(std::istream& in);
GeneralizedHistogram read_histogram(const std::filesystem::path& path);
void write_histogram(std::ostream& out, const GeneralizedHistogram& h);

/// Labeled distribution: `label<TAB>probability` sorted by descending
/// probability, then a final `# unseen_mass <value>` line. Values use 17
/// significant digits so a write/read round trip is lossless.
LabeledDistribution read_distribution(std::istream& in);
LabeledDistribution read_distribution(const std::filesystem::path& path);
void write_distribution(std::ostream& out, const LabeledDistribution& dist);

/// printf-style %.17g; parses back to exactly v.
std::string format_double(double v);

}  // namespace histolearn::io
