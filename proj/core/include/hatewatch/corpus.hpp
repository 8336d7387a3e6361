#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "hatewatch/text.hpp"

namespace hatewatch {

struct RawDocument {
  std::string id;
  std::string site;
  std::string timestamp;
  std::string text;
};

struct TokenizedDocument {
  std::string id;
  std::string site;
  std::vector<std::string> tokens;
  std::vector<CharSpan> char_spans;
};

struct SiteCounts {
  std::uint64_t docs = 0;
  std::uint64_t tokens = 0;

  friend bool operator==(const SiteCounts&, const SiteCounts&) = default;
};

// T (total_tokens) is counted after MWE merging.
struct CorpusStats {
  std::uint64_t total_tokens = 0;
  std::uint64_t doc_count = 0;
  std::map<std::string, SiteCounts> per_site_counts;

  void add(const TokenizedDocument& doc);
  CorpusStats& operator+=(const CorpusStats& other);
  friend CorpusStats operator+(CorpusStats a, const CorpusStats& b) { return a += b; }
  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

// Malformed-line policy for JSONL ingestion. The fraction check only kicks
// in once enough lines were seen for a percentage to mean something.
struct IngestPolicy {
  double max_malformed_fraction = 0.10;
  std::size_t min_lines_for_fraction = 20;
  std::size_t reported_offenders = 10;
};

struct Corpus {
  std::vector<RawDocument> documents;
  std::size_t lines_read = 0;   // non-blank lines
  std::size_t skipped = 0;
  std::vector<std::size_t> malformed_lines;  // 1-based, first `reported_offenders`

  std::size_t size() const { return documents.size(); }
};

// Streaming reader. Each call to next() yields the next well-formed document
// in file order; malformed lines (bad JSON, missing or non-string fields,
// duplicate ids) are skipped and counted.
class JsonlReader {
 public:
  explicit JsonlReader(std::istream& in, IngestPolicy policy = {});

  bool next(RawDocument& doc);

  std::size_t lines_read() const { return lines_read_; }
  std::size_t skipped() const { return skipped_; }
  const std::vector<std::size_t>& malformed_lines() const { return malformed_lines_; }

  // Throws Error(kFormat) if the malformed fraction exceeds the policy.
  void check_policy() const;

 private:
  std::istream& in_;
  IngestPolicy policy_;
  std::size_t line_no_ = 0;
  std::size_t lines_read_ = 0;
  std::size_t skipped_ = 0;
  std::vector<std::size_t> malformed_lines_;
  std::unordered_map<std::string, std::size_t> seen_ids_;
};

Corpus ingest_jsonl(const std::string& path, IngestPolicy policy = {});
Corpus parse_jsonl(std::istream& in, IngestPolicy policy = {});

void write_jsonl(const std::vector<RawDocument>& docs, std::ostream& out);

// Tokenizes and MWE-merges one document. Merged tokens carry the span from
// the first constituent's start to the last one's end.
TokenizedDocument prepare_document(const RawDocument& doc, const TokenizerConfig& config,
                                   const MweMerger& merger);

std::vector<TokenizedDocument> prepare_corpus(const Corpus& corpus, const TokenizerConfig& config,
                                              const MweMerger& merger);

CorpusStats corpus_stats(const Corpus& corpus, const TokenizerConfig& config,
                         const MweMerger& merger);
CorpusStats corpus_stats(const std::vector<TokenizedDocument>& docs);

}  // namespace hatewatch
