#include "hatewatch/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "hatewatch/error.hpp"

namespace hatewatch {

namespace fs = std::filesystem;

MweMerger build_merger(const Lexicon& lexicon, const std::string& mwe_path,
                       const TokenizerConfig& config) {
  MweMerger merger = mwe_path.empty() ? MweMerger{} : load_mwe_file(mwe_path, config);
  for (auto c : kAllCategories) {
    for (const auto& term : lexicon.terms(c)) {
      if (term.find('_') == std::string::npos) continue;
      merger.add(tokenize(respace_mwe(term), config).tokens);
    }
  }
  return merger;
}

ScanOutputs run_scan(const Corpus& corpus, const Lexicon& lexicon, const std::vector<Target>& targets,
                     const MweMerger& merger, const ScanConfig& config) {
  const auto docs = prepare_corpus(corpus, config.tokenizer, merger);
  const CorpusStats stats = corpus_stats(docs);
  auto matcher = std::make_shared<const Matcher>(lexicon);
  Scanner scanner(matcher, targets, config.window);
  const auto scans = scanner.scan_all(docs, &corpus.documents, config.workers);
  const CountsTable counts = aggregate(scans, stats, targets, *matcher, config.window);

  ReportConfig rc;
  rc.window = config.window;
  rc.lexicon_version = lexicon.version();
  rc.lexicon_hash = lexicon.content_hash();
  rc.tokenizer = config.tokenizer;
  rc.mwe_count = merger.phrase_count();

  ScanOutputs out;
  out.report = build_report(counts, stats, targets, rc);
  out.skipped_lines = corpus.skipped;
  for (const auto& s : scans) {
    for (const auto& h : s.hits) out.hits.push_back(h);
  }
  return out;
}

ScanOutputs run_scan(const ScanConfig& config) {
  config.tokenizer.validate();
  // Inputs are validated up front so a bad path fails before the long part.
  for (const auto* path : {&config.lexicon_path, &config.targets_path, &config.corpus_path}) {
    if (!fs::exists(*path)) throw Error(ErrorCode::kIo, "input file not found: " + *path);
  }
  const Lexicon lexicon = LexiconFile::load(config.lexicon_path);
  const MweMerger merger = build_merger(lexicon, config.mwe_path, config.tokenizer);
  const auto targets = load_targets(config.targets_path, config.tokenizer, merger);
  const Corpus corpus = ingest_jsonl(config.corpus_path);
  return run_scan(corpus, lexicon, targets, merger, config);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write file: " + path);
  out << contents;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void write_scan_outputs(const ScanOutputs& outputs, const std::string& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + directory + ": " + ec.message());
  const fs::path dir(directory);
  write_file((dir / OutputFiles::kReportJson).string(), report_to_json(outputs.report));
  write_file((dir / OutputFiles::kReportCsv).string(), report_to_csv(outputs.report));
  write_file((dir / OutputFiles::kCategoriesCsv).string(), categories_to_csv(outputs.report));
  write_file((dir / OutputFiles::kFigureCounts).string(), figure_counts_csv(outputs.report));
  write_file((dir / OutputFiles::kFigureProportions).string(), figure_proportions_csv(outputs.report));
  std::string hits;
  for (const auto& h : outputs.hits) {
    hits += mention_hit_to_json(h);
    hits.push_back('\n');
  }
  write_file((dir / OutputFiles::kHits).string(), hits);
}

}  // namespace hatewatch
