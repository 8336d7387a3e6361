#include "cli.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <istream>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hatewatch/corpus.hpp"
#include "hatewatch/embeddings.hpp"
#include "hatewatch/error.hpp"
#include "hatewatch/expansion.hpp"
#include "hatewatch/pipeline.hpp"
#include "hatewatch/service.hpp"

namespace hatewatch::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  ScanConfig scan;
  EmbeddingParams embedding;
  std::string vectors_path;
  std::string output_dir;
  std::string category;
  std::size_t k = kDefaultNeighbors;
  bool interactive = false;
  std::string decider = "analyst";
  std::string host = "127.0.0.1";
  int port = 8080;
  bool allow_remote = false;
};

void add_tokenizer_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--lowercase", o.scan.tokenizer.lowercase, "Fold case before matching")
      ->capture_default_str();
  cmd->add_option("--strip-punctuation", o.scan.tokenizer.strip_punctuation,
                  "Drop punctuation characters")
      ->capture_default_str();
  cmd->add_option("--keep-punctuation-tokens", o.scan.tokenizer.keep_punctuation_tokens,
                  "Emit punctuation as separate tokens")
      ->capture_default_str();
  cmd->add_option("--mwe", o.scan.mwe_path, "File of multiword expressions, one per line");
}

void add_scan_inputs(CLI::App* cmd, Options& o, bool required) {
  auto* corpus = cmd->add_option("--corpus", o.scan.corpus_path, "JSONL corpus");
  auto* lexicon = cmd->add_option("--lexicon", o.scan.lexicon_path, "Lexicon TSV");
  auto* targets = cmd->add_option("--targets", o.scan.targets_path, "Targets TSV");
  if (required) {
    corpus->required();
    lexicon->required();
    targets->required();
  }
  cmd->add_option("--window", o.scan.window, "Context tokens inspected on each side")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--workers", o.scan.workers, "Scan worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_tokenizer_options(cmd, o);
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kIo, std::string(what) + " file not found: " + path);
  }
}

std::vector<std::vector<std::string>> training_sentences(const Options& o) {
  Lexicon lexicon;
  if (!o.scan.lexicon_path.empty()) lexicon = LexiconFile::load(o.scan.lexicon_path);
  const MweMerger merger = build_merger(lexicon, o.scan.mwe_path, o.scan.tokenizer);
  const Corpus corpus = ingest_jsonl(o.scan.corpus_path);
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    sentences.push_back(prepare_document(doc, o.scan.tokenizer, merger).tokens);
  }
  return sentences;
}

int cmd_ingest_stats(const Options& o, std::ostream& out) {
  require_file(o.scan.corpus_path, "corpus");
  Lexicon lexicon;
  if (!o.scan.lexicon_path.empty()) {
    require_file(o.scan.lexicon_path, "lexicon");
    lexicon = LexiconFile::load(o.scan.lexicon_path);
  }
  o.scan.tokenizer.validate();
  const MweMerger merger = build_merger(lexicon, o.scan.mwe_path, o.scan.tokenizer);
  const Corpus corpus = ingest_jsonl(o.scan.corpus_path);
  const CorpusStats stats = corpus_stats(corpus, o.scan.tokenizer, merger);

  nlohmann::ordered_json j;
  j["total_tokens"] = stats.total_tokens;
  j["doc_count"] = stats.doc_count;
  j["lines_read"] = corpus.lines_read;
  j["skipped_lines"] = corpus.skipped;
  j["malformed_lines"] = corpus.malformed_lines;
  nlohmann::ordered_json sites = nlohmann::ordered_json::object();
  for (const auto& [site, c] : stats.per_site_counts) {
    sites[site] = {{"docs", c.docs}, {"tokens", c.tokens}};
  }
  j["per_site"] = std::move(sites);
  out << j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  return kExitOk;
}

int cmd_train(Options o, std::ostream& out, std::ostream& err) {
  require_file(o.scan.corpus_path, "corpus");
  if (!o.scan.lexicon_path.empty()) require_file(o.scan.lexicon_path, "lexicon");
  o.scan.tokenizer.validate();
  o.embedding.validate();
  if (o.vectors_path.empty()) {
    if (o.output_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "--vectors or --output-dir is required");
    fs::create_directories(o.output_dir);
    o.vectors_path = (fs::path(o.output_dir) / "vectors.txt").string();
  }
  const auto sentences = training_sentences(o);
  const TrainingResult result = train_cbow(sentences, o.embedding);
  save_vectors(result.store, o.vectors_path);
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    err << "epoch " << (e + 1) << " loss " << result.epoch_losses[e] << '\n';
  }
  out << "wrote " << result.store.size() << " vectors of dimension " << result.store.dimension()
      << " to " << o.vectors_path << '\n';
  return kExitOk;
}

int cmd_suggest(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  require_file(o.scan.lexicon_path, "lexicon");
  require_file(o.vectors_path, "vectors");
  const auto category = parse_category(o.category);
  if (!category) throw Error(ErrorCode::kInvalidArgument, "unknown category \"" + o.category + "\"");

  Lexicon lexicon = LexiconFile::load(o.scan.lexicon_path);
  const std::string rejects_path = o.scan.lexicon_path + ".rejects.json";
  RejectMemory rejects = RejectMemory::load(rejects_path);
  const VectorStore store = load_vectors(o.vectors_path);

  std::string session_id = "session-cli";
  std::unique_ptr<SessionStore> sessions;
  if (!o.output_dir.empty()) {
    sessions = std::make_unique<SessionStore>((fs::path(o.output_dir) / "sessions").string());
    session_id = sessions->next_id();
  }
  Session session = open_session(lexicon, *category, store, o.k, rejects, session_id);
  for (const auto& seed : session.oov_seeds) err << "seed not in vocabulary: " << seed << '\n';

  if (!o.interactive) {
    for (const auto& s : next_suggestions(session, o.k)) out << s.term << '\t' << s.score << '\n';
    return kExitOk;
  }

  const std::vector<Suggestion> pending = session.queue;
  bool quit = false;
  for (const auto& s : pending) {
    if (quit) break;
    for (;;) {
      out << s.term << " (" << s.score << ", near " << s.source_term
          << ") [a]ccept / [r]eject / [s]kip / [q]uit: " << std::flush;
      std::string answer;
      if (!std::getline(in, answer)) {
        quit = true;
        break;
      }
      const char c = answer.empty() ? '\0' : static_cast<char>(std::tolower(static_cast<unsigned char>(answer[0])));
      if (c == 'a' || c == 'r') {
        decide(session, s.term, c == 'a' ? Verdict::kAccept : Verdict::kReject, o.decider,
               utc_now_iso8601());
        break;
      }
      if (c == 's') break;
      if (c == 'q') {
        quit = true;
        break;
      }
    }
  }
  const std::uint64_t version = commit(session, lexicon, rejects);
  LexiconFile::save(lexicon, o.scan.lexicon_path);
  rejects.save(rejects_path);
  if (sessions) sessions->save(session);
  out << '\n'
      << "accepted " << session.accepted_count() << " of " << session.decisions.size()
      << " decisions; lexicon version " << version << '\n';
  return kExitOk;
}

int cmd_scan(const Options& o, std::ostream& out, std::ostream& err) {
  const ScanOutputs outputs = run_scan(o.scan);
  write_scan_outputs(outputs, o.output_dir);
  if (outputs.skipped_lines > 0) err << "skipped " << outputs.skipped_lines << " malformed lines\n";
  out << "scanned " << outputs.report.corpus.doc_count << " documents ("
      << outputs.report.corpus.total_tokens << " tokens), " << outputs.hits.size()
      << " mentions; report written to " << o.output_dir << '\n';
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
  ServiceOptions so;
  so.scan = o.scan;
  so.output_dir = o.output_dir;
  so.vectors_path = o.vectors_path;
  Service service(so);
  HttpServer server(service);
  const int port = server.bind(o.host, o.port, o.allow_remote);
  out << "listening on http://" << o.host << ':' << port << '\n' << std::flush;
  server.listen();
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvariantViolation:
    case ErrorCode::kConsistency:
      return kExitInternal;
    default:
      return kExitUsage;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app{"Target-directed hate speech counting and lexicon expansion"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  const char* env_config = std::getenv(kConfigEnv);
  app.set_config("--config", env_config ? env_config : "",
                 std::string("INI/TOML config file; defaults to $") + kConfigEnv);

  auto* ingest = app.add_subcommand("ingest-stats", "Corpus size and per-site token counts");
  ingest->add_option("--corpus", o.scan.corpus_path, "JSONL corpus")->required();
  ingest->add_option("--lexicon", o.scan.lexicon_path, "Lexicon TSV (for multiword merging)");
  add_tokenizer_options(ingest, o);

  auto* train = app.add_subcommand("train", "Train CBOW word vectors on a corpus");
  train->add_option("--corpus", o.scan.corpus_path, "JSONL corpus")->required();
  train->add_option("--lexicon", o.scan.lexicon_path, "Lexicon TSV (for multiword merging)");
  train->add_option("--vectors", o.vectors_path, "Output vectors file");
  train->add_option("--output-dir", o.output_dir, "Directory for vectors.txt when --vectors is absent");
  train->add_option("--dimension", o.embedding.dimension)->capture_default_str();
  train->add_option("--embedding-window", o.embedding.window, "Context tokens on each side")
      ->capture_default_str();
  train->add_option("--min-count", o.embedding.min_count)->capture_default_str();
  train->add_option("--negative-samples", o.embedding.negative_samples)->capture_default_str();
  train->add_option("--epochs", o.embedding.epochs)->capture_default_str();
  train->add_option("--initial-learning-rate", o.embedding.initial_learning_rate)->capture_default_str();
  train->add_option("--subsample-threshold", o.embedding.subsample_threshold)->capture_default_str();
  train->add_option("--seed", o.embedding.seed)->capture_default_str();
  train->add_option("--workers", o.embedding.workers, "Training threads; only 1 is reproducible")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_tokenizer_options(train, o);

  auto* suggest = app.add_subcommand("suggest", "Suggest lexicon terms from word-vector neighbours");
  suggest->add_option("--lexicon", o.scan.lexicon_path, "Lexicon TSV")->required();
  suggest->add_option("--vectors", o.vectors_path, "Vectors file")->required();
  suggest->add_option("--category", o.category, "Category to expand")->required();
  suggest->add_option("--k", o.k, "Neighbours per seed")->capture_default_str()->check(CLI::PositiveNumber);
  suggest->add_flag("--interactive", o.interactive, "Prompt accept/reject and commit the result");
  suggest->add_option("--decider", o.decider, "Name recorded in the decision ledger")->capture_default_str();
  suggest->add_option("--output-dir", o.output_dir, "Directory for the session ledger");

  auto* scan = app.add_subcommand("scan", "Count category terms around target mentions");
  add_scan_inputs(scan, o, true);
  scan->add_option("--output-dir", o.output_dir, "Report directory")->required();

  auto* serve = app.add_subcommand("serve", "Serve reports and expansion sessions over HTTP");
  add_scan_inputs(serve, o, false);
  serve->add_option("--output-dir", o.output_dir, "Scan output directory")->required();
  serve->add_option("--vectors", o.vectors_path, "Vectors file for expansion sessions");
  serve->add_option("--host", o.host)->capture_default_str();
  serve->add_option("--port", o.port)->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_flag("--allow-remote", o.allow_remote, "Permit binding to a non-loopback address");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest_stats(o, out);
    if (*train) return cmd_train(o, out, err);
    if (*suggest) return cmd_suggest(o, in, out, err);
    if (*scan) return cmd_scan(o, out, err);
    if (*serve) return cmd_serve(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace hatewatch::cli
