#include "hatewatch/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hatewatch/error.hpp"

namespace hatewatch {

using json = nlohmann::json;

void CorpusStats::add(const TokenizedDocument& doc) {
  const auto n = static_cast<std::uint64_t>(doc.tokens.size());
  total_tokens += n;
  ++doc_count;
  auto& site = per_site_counts[doc.site];
  ++site.docs;
  site.tokens += n;
}

CorpusStats& CorpusStats::operator+=(const CorpusStats& other) {
  total_tokens += other.total_tokens;
  doc_count += other.doc_count;
  for (const auto& [site, counts] : other.per_site_counts) {
    auto& mine = per_site_counts[site];
    mine.docs += counts.docs;
    mine.tokens += counts.tokens;
  }
  return *this;
}

namespace {

bool is_blank(const std::string& line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

// Accepts "YYYY-MM-DD" optionally followed by a time part.
bool looks_like_iso8601(const std::string& ts) {
  if (ts.size() < 10) return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (ts[i] < '0' || ts[i] > '9') return false;
  }
  if (ts[4] != '-' || ts[7] != '-') return false;
  return ts.size() == 10 || ts[10] == 'T' || ts[10] == ' ';
}

bool string_field(const json& obj, const char* name, std::string& out) {
  auto it = obj.find(name);
  if (it == obj.end() || !it->is_string()) return false;
  out = it->get<std::string>();
  return true;
}

}  // namespace

JsonlReader::JsonlReader(std::istream& in, IngestPolicy policy) : in_(in), policy_(policy) {}

bool JsonlReader::next(RawDocument& doc) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (is_blank(line)) continue;
    ++lines_read_;
    bool ok = false;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!obj.is_discarded() && obj.is_object()) {
      RawDocument parsed;
      ok = string_field(obj, "id", parsed.id) && !parsed.id.empty() &&
           string_field(obj, "site", parsed.site) &&
           string_field(obj, "timestamp", parsed.timestamp) &&
           looks_like_iso8601(parsed.timestamp) && string_field(obj, "text", parsed.text) &&
           seen_ids_.emplace(parsed.id, line_no_).second;
      if (ok) {
        doc = std::move(parsed);
        return true;
      }
    }
    ++skipped_;
    if (malformed_lines_.size() < policy_.reported_offenders) malformed_lines_.push_back(line_no_);
  }
  return false;
}

void JsonlReader::check_policy() const {
  if (lines_read_ < policy_.min_lines_for_fraction || skipped_ == 0) return;
  const double fraction = static_cast<double>(skipped_) / static_cast<double>(lines_read_);
  if (fraction <= policy_.max_malformed_fraction) return;
  std::ostringstream msg;
  msg << skipped_ << " of " << lines_read_ << " lines are malformed; first offending lines:";
  for (auto n : malformed_lines_) msg << ' ' << n;
  throw Error(ErrorCode::kFormat, msg.str());
}

Corpus parse_jsonl(std::istream& in, IngestPolicy policy) {
  JsonlReader reader(in, policy);
  Corpus corpus;
  RawDocument doc;
  while (reader.next(doc)) corpus.documents.push_back(std::move(doc));
  if (in.bad()) throw Error(ErrorCode::kIo, "read failure while ingesting corpus");
  reader.check_policy();
  corpus.lines_read = reader.lines_read();
  corpus.skipped = reader.skipped();
  corpus.malformed_lines = reader.malformed_lines();
  return corpus;
}

Corpus ingest_jsonl(const std::string& path, IngestPolicy policy) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus file: " + path);
  return parse_jsonl(in, policy);
}

void write_jsonl(const std::vector<RawDocument>& docs, std::ostream& out) {
  for (const auto& d : docs) {
    nlohmann::ordered_json obj;
    obj["id"] = d.id;
    obj["site"] = d.site;
    obj["timestamp"] = d.timestamp;
    obj["text"] = d.text;
    out << obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

TokenizedDocument prepare_document(const RawDocument& doc, const TokenizerConfig& config,
                                   const MweMerger& merger) {
  TokenSequence seq = merger.merge(tokenize(doc.text, config));
  return TokenizedDocument{doc.id, doc.site, std::move(seq.tokens), std::move(seq.spans)};
}

std::vector<TokenizedDocument> prepare_corpus(const Corpus& corpus, const TokenizerConfig& config,
                                              const MweMerger& merger) {
  std::vector<TokenizedDocument> out;
  out.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) out.push_back(prepare_document(doc, config, merger));
  return out;
}

CorpusStats corpus_stats(const std::vector<TokenizedDocument>& docs) {
  CorpusStats stats;
  for (const auto& d : docs) stats.add(d);
  return stats;
}

CorpusStats corpus_stats(const Corpus& corpus, const TokenizerConfig& config,
                         const MweMerger& merger) {
  CorpusStats stats;
  for (const auto& doc : corpus.documents) stats.add(prepare_document(doc, config, merger));
  return stats;
}

}  // namespace hatewatch
