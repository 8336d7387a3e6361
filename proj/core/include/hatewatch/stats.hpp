#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hatewatch/corpus.hpp"
#include "hatewatch/lexicon.hpp"
#include "hatewatch/scanner.hpp"
#include "hatewatch/text.hpp"

namespace hatewatch {

// #(c) / T. Throws Error(kUndefinedInput) when total_tokens is zero and
// Error(kInvariantViolation) when corpus_count exceeds it.
double normalized_frequency(std::uint64_t corpus_count, std::uint64_t total_tokens);

// #(m,c) / #(m); nullopt when there are no mentions. Throws
// Error(kInvariantViolation) when co_count > mention_count.
std::optional<double> proportion(std::uint64_t co_count, std::uint64_t mention_count);

// (#(c)/T) * #(m), never rounded.
double expected_count(double relative_frequency, double mention_count);

// actual - expected.
double deviation(double actual, double expected);

struct CategoryStats {
  Category category{};
  std::uint64_t corpus_count = 0;
  std::optional<double> relative_frequency;  // null only when T == 0
};

struct CategoryCell {
  std::uint64_t actual = 0;
  std::optional<double> proportion;
  double expected = 0.0;
  double deviation = 0.0;
};

struct TargetReport {
  std::string target_id;
  std::string display_name;
  std::uint64_t mentions = 0;
  std::array<CategoryCell, kCategoryCount> cells{};
};

struct ReportConfig {
  std::size_t window = 1;
  std::uint64_t lexicon_version = 0;
  std::uint64_t lexicon_hash = 0;
  TokenizerConfig tokenizer;
  std::size_t mwe_count = 0;

  std::string fingerprint(const CorpusStats& stats, const std::vector<Target>& targets) const;
};

struct Report {
  CorpusStats corpus;
  std::vector<CategoryStats> categories;
  std::vector<TargetReport> targets;  // mentions descending, ties by target_id
  ReportConfig config;
  std::string fingerprint;
};

// Assembles all three statistics for every (target, category). Throws
// Error(kConsistency) when the counts were produced under a different
// lexicon version or window than `config`, or with a different T.
Report build_report(const CountsTable& counts, const CorpusStats& corpus_stats,
                    const std::vector<Target>& targets, const ReportConfig& config);

// Fixed-point rendering with negative zero printed as zero.
std::string format_fixed(double value, int decimals);

// Full-precision JSON with fixed key order; byte-stable for equal reports.
std::string report_to_json(const Report& report);
// Display-rounded: proportion 4 decimals, expected and deviation 2.
std::string report_to_csv(const Report& report);
// category, corpus_count, relative_frequency (5 decimals).
std::string categories_to_csv(const Report& report);
// Plot data for the two bar panels: raw #(m,c) and #(m,c)/#(m).
std::string figure_counts_csv(const Report& report);
std::string figure_proportions_csv(const Report& report);

}  // namespace hatewatch
