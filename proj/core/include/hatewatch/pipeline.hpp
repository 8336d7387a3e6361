#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hatewatch/corpus.hpp"
#include "hatewatch/lexicon.hpp"
#include "hatewatch/scanner.hpp"
#include "hatewatch/stats.hpp"
#include "hatewatch/text.hpp"

namespace hatewatch {

// Multiword phrases from the lexicon (underscore-joined terms) plus an
// optional MWE file, normalized with `config`.
MweMerger build_merger(const Lexicon& lexicon, const std::string& mwe_path,
                       const TokenizerConfig& config);

struct ScanConfig {
  std::string corpus_path;
  std::string lexicon_path;
  std::string targets_path;
  std::string mwe_path;  // optional
  std::size_t window = 1;
  TokenizerConfig tokenizer;
  unsigned workers = 1;
};

struct ScanOutputs {
  Report report;
  std::vector<MentionHit> hits;  // document order, then mention order
  std::size_t skipped_lines = 0;
};

// ingest -> tokenize/merge -> scan -> aggregate -> report.
ScanOutputs run_scan(const ScanConfig& config);

// Same, over already-loaded inputs.
ScanOutputs run_scan(const Corpus& corpus, const Lexicon& lexicon, const std::vector<Target>& targets,
                     const MweMerger& merger, const ScanConfig& config);

struct OutputFiles {
  static constexpr const char* kReportJson = "report.json";
  static constexpr const char* kReportCsv = "report.csv";
  static constexpr const char* kCategoriesCsv = "categories.csv";
  static constexpr const char* kFigureCounts = "figure_counts.csv";
  static constexpr const char* kFigureProportions = "figure_proportions.csv";
  static constexpr const char* kHits = "hits.jsonl";
};

void write_scan_outputs(const ScanOutputs& outputs, const std::string& directory);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace hatewatch
