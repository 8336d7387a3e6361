#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "hatewatch/embeddings.hpp"
#include "hatewatch/expansion.hpp"
#include "hatewatch/pipeline.hpp"

namespace hatewatch {

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;
};

// {"status":..,"code":..,"message":..} with the given status.
HttpResponse api_error(int status, std::string_view code, std::string_view message);

struct ServiceOptions {
  ScanConfig scan;            // corpus/lexicon/targets; may be partially empty
  std::string output_dir;     // report.json + hits.jsonl are read from / written here
  std::string vectors_path;   // needed for expansion sessions
  std::string sessions_dir;   // defaults to <output_dir>/sessions
  std::string rejects_path;   // defaults to <lexicon>.rejects.json
};

// JSON API over the scan, report and expansion modules. Routing is plain
// function dispatch so tests can drive it without sockets; serve() binds it
// to an HTTP listener.
//
// Reports and hits are served verbatim from the scan outputs. The lexicon is
// only mutated through session commit, serialized by one writer lock, and
// re-read from disk before each commit so external edits surface as stale
// sessions.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(const HttpRequest& request);

  // Blocks until every background job has finished.
  void wait_for_jobs();

 private:
  struct Job {
    std::string id;
    std::string status = "queued";  // queued|running|succeeded|failed
    std::string error;
  };

  HttpResponse get_report();
  HttpResponse get_mentions(const std::string& target_id, const HttpRequest& req);
  HttpResponse create_session(const HttpRequest& req);
  HttpResponse get_session(const std::string& id);
  HttpResponse next(const std::string& id, const HttpRequest& req);
  HttpResponse post_decision(const std::string& id, const HttpRequest& req);
  HttpResponse post_commit(const std::string& id);
  HttpResponse post_abandon(const std::string& id);
  HttpResponse get_ledger(const std::string& id);
  HttpResponse start_scan();
  HttpResponse get_job(const std::string& id);

  bool scan_configured() const;
  void load_outputs_from_disk();
  void install_outputs(const ScanOutputs& outputs);
  const VectorStore& vectors();
  SessionStore& sessions();

  ServiceOptions options_;

  std::shared_mutex state_mutex_;  // report, hits
  std::optional<std::string> report_json_;
  std::string fingerprint_;
  std::vector<std::string> target_ids_;
  std::map<std::string, std::vector<MentionHit>> hits_by_target_;

  std::mutex lexicon_mutex_;  // single writer for lexicon, rejects, sessions
  std::unique_ptr<VectorStore> vectors_;
  std::unique_ptr<SessionStore> sessions_;

  std::mutex jobs_mutex_;
  std::map<std::string, Job> jobs_;
  std::vector<std::jthread> job_threads_;
  std::uint64_t next_job_ = 1;
};

// HTTP listener for a Service. bind() refuses non-loopback hosts unless
// allow_remote is set; port 0 picks a free port.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  int bind(const std::string& host, int port, bool allow_remote);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

bool is_loopback_host(const std::string& host);

}  // namespace hatewatch
