#include "hatewatch/service.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "hatewatch/error.hpp"

namespace hatewatch {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string dump(const ojson& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

HttpResponse json_response(int status, std::string body) {
  HttpResponse r;
  r.status = status;
  r.body = std::move(body);
  return r;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kState:
    case ErrorCode::kStaleSession:
      return 409;
    case ErrorCode::kDuplicateDecision:
    case ErrorCode::kNotInQueue:
    case ErrorCode::kEmptySeed:
    case ErrorCode::kOovSeed:
      return 422;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kFormat:
    case ErrorCode::kOutOfVocabulary:
      return 400;
    default:
      return 500;
  }
}

std::string code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kState:
      return "session_closed";
    case ErrorCode::kStaleSession:
      return "stale_session";
    case ErrorCode::kDuplicateDecision:
      return "duplicate_decision";
    case ErrorCode::kNotInQueue:
      return "not_in_queue";
    case ErrorCode::kEmptySeed:
      return "empty_seed";
    case ErrorCode::kOovSeed:
      return "oov_seed";
    case ErrorCode::kNotFound:
      return "not_found";
    default:
      return std::string(to_string(code));
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

std::size_t query_size(const HttpRequest& req, const std::string& name, std::size_t fallback) {
  auto it = req.query.find(name);
  if (it == req.query.end() || it->second.empty()) return fallback;
  std::size_t value = 0;
  const auto* first = it->second.data();
  const auto* last = first + it->second.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::kInvalidArgument, "query parameter " + name + " must be a non-negative integer");
  }
  return value;
}

ojson parse_body(const HttpRequest& req) {
  if (req.body.empty()) return ojson::object();
  ojson j = ojson::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  }
  return j;
}

std::string body_string(const ojson& body, const char* key, bool required) {
  auto it = body.find(key);
  if (it == body.end()) {
    if (required) throw Error(ErrorCode::kInvalidArgument, std::string("missing field \"") + key + "\"");
    return {};
  }
  if (!it->is_string()) throw Error(ErrorCode::kInvalidArgument, std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

Category require_category(const std::string& name) {
  auto c = parse_category(name);
  if (!c) throw Error(ErrorCode::kInvalidArgument, "unknown category \"" + name + "\"");
  return *c;
}

HttpResponse session_response(int status, const Session& s) {
  return json_response(status, session_to_json(s));
}

}  // namespace

HttpResponse api_error(int status, std::string_view code, std::string_view message) {
  ojson j;
  j["status"] = status;
  j["code"] = std::string(code);
  j["message"] = std::string(message);
  return json_response(status, dump(j));
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.sessions_dir.empty() && !options_.output_dir.empty()) {
    options_.sessions_dir = (fs::path(options_.output_dir) / "sessions").string();
  }
  if (options_.rejects_path.empty() && !options_.scan.lexicon_path.empty()) {
    options_.rejects_path = options_.scan.lexicon_path + ".rejects.json";
  }
  if (!options_.output_dir.empty() &&
      fs::exists(fs::path(options_.output_dir) / OutputFiles::kReportJson)) {
    load_outputs_from_disk();
  }
}

Service::~Service() { wait_for_jobs(); }

void Service::wait_for_jobs() {
  std::vector<std::jthread> threads;
  {
    std::lock_guard lock(jobs_mutex_);
    threads.swap(job_threads_);
  }
  for (auto& t : threads) {
    if (t.joinable()) t.join();
  }
}

bool Service::scan_configured() const {
  return !options_.scan.corpus_path.empty() && !options_.scan.lexicon_path.empty() &&
         !options_.scan.targets_path.empty();
}

void Service::load_outputs_from_disk() {
  const fs::path dir(options_.output_dir);
  std::string report = read_file((dir / OutputFiles::kReportJson).string());
  const auto parsed = nlohmann::json::parse(report, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::kFormat, "report file is not valid JSON");
  }
  std::vector<std::string> ids;
  for (const auto& t : parsed.value("targets", nlohmann::json::array())) {
    ids.push_back(t.value("target_id", std::string()));
  }
  std::map<std::string, std::vector<MentionHit>> by_target;
  const fs::path hits_path = dir / OutputFiles::kHits;
  if (fs::exists(hits_path)) {
    std::istringstream in(read_file(hits_path.string()));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      MentionHit h = mention_hit_from_json(line);
      by_target[h.mention.target_id].push_back(std::move(h));
    }
  }
  for (auto& [id, hits] : by_target) {
    std::stable_sort(hits.begin(), hits.end(), [](const MentionHit& a, const MentionHit& b) {
      if (a.mention.doc_id != b.mention.doc_id) return a.mention.doc_id < b.mention.doc_id;
      return a.mention.start < b.mention.start;
    });
  }
  std::unique_lock lock(state_mutex_);
  report_json_ = std::move(report);
  fingerprint_ = parsed.value("fingerprint", std::string());
  target_ids_ = std::move(ids);
  hits_by_target_ = std::move(by_target);
}

void Service::install_outputs(const ScanOutputs& outputs) {
  if (options_.output_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "service has no output directory configured");
  }
  write_scan_outputs(outputs, options_.output_dir);
  load_outputs_from_disk();
}

const VectorStore& Service::vectors() {
  if (!vectors_) {
    if (options_.vectors_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "service has no vectors file configured");
    }
    vectors_ = std::make_unique<VectorStore>(load_vectors(options_.vectors_path));
  }
  return *vectors_;
}

SessionStore& Service::sessions() {
  if (!sessions_) {
    if (options_.sessions_dir.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "service has no session directory configured");
    }
    sessions_ = std::make_unique<SessionStore>(options_.sessions_dir);
  }
  return *sessions_;
}

HttpResponse Service::handle(const HttpRequest& req) {
  try {
    const auto parts = split_path(req.path);
    const std::size_t n = parts.size();
    if (n < 2 || parts[0] != "api") return api_error(404, "not_found", "no route for " + req.path);
    const std::string& head = parts[1];
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";

    if (head == "health" && n == 2 && get) return json_response(200, R"({"status":"ok"})");
    if (head == "report" && n == 2 && get) {
      HttpResponse r = get_report();
      if (r.status == 200) {
        auto inm = req.headers.find("if-none-match");
        if (inm != req.headers.end() && inm->second == r.headers["ETag"]) {
          r.status = 304;
          r.body.clear();
        }
      }
      return r;
    }
    if (head == "targets" && n == 4 && parts[3] == "mentions" && get) {
      return get_mentions(parts[2], req);
    }
    if (head == "scan" && n == 2 && post) return start_scan();
    if (head == "jobs" && n == 3 && get) return get_job(parts[2]);
    if (head == "sessions") {
      if (n == 2 && post) return create_session(req);
      if (n == 3 && get) return get_session(parts[2]);
      if (n == 4) {
        const std::string& id = parts[2];
        const std::string& action = parts[3];
        if (action == "next" && get) return next(id, req);
        if (action == "decisions" && post) return post_decision(id, req);
        if (action == "commit" && post) return post_commit(id);
        if (action == "abandon" && post) return post_abandon(id);
        if (action == "ledger" && get) return get_ledger(id);
      }
    }
    return api_error(404, "not_found", "no route for " + req.method + " " + req.path);
  } catch (const Error& e) {
    return api_error(status_for(e.code()), code_for(e.code()), e.what());
  } catch (const std::exception& e) {
    return api_error(500, "internal", e.what());
  }
}

HttpResponse Service::get_report() {
  bool have = false;
  {
    std::shared_lock lock(state_mutex_);
    have = report_json_.has_value();
  }
  if (!have) {
    if (!scan_configured() || options_.output_dir.empty()) {
      return api_error(409, "no_report", "no scan output available and no corpus configured");
    }
    std::lock_guard writer(lexicon_mutex_);
    std::shared_lock check(state_mutex_);
    if (!report_json_) {
      check.unlock();
      install_outputs(run_scan(options_.scan));
    }
  }
  std::shared_lock lock(state_mutex_);
  HttpResponse r = json_response(200, *report_json_);
  r.headers["ETag"] = "\"" + fingerprint_ + "\"";
  return r;
}

HttpResponse Service::get_mentions(const std::string& target_id, const HttpRequest& req) {
  std::optional<Category> filter;
  if (auto it = req.query.find("category"); it != req.query.end() && !it->second.empty()) {
    filter = require_category(it->second);
  }
  const std::size_t offset = query_size(req, "offset", 0);
  const std::size_t limit = query_size(req, "limit", 50);

  std::shared_lock lock(state_mutex_);
  if (!report_json_) return api_error(409, "no_report", "no scan output available");
  if (std::find(target_ids_.begin(), target_ids_.end(), target_id) == target_ids_.end()) {
    return api_error(404, "unknown_target", "unknown target \"" + target_id + "\"");
  }
  std::vector<const MentionHit*> selected;
  if (auto it = hits_by_target_.find(target_id); it != hits_by_target_.end()) {
    for (const auto& h : it->second) {
      if (!filter || h.hits.count(*filter)) selected.push_back(&h);
    }
  }
  ojson out;
  out["target_id"] = target_id;
  out["category"] = filter ? ojson(std::string(category_name(*filter))) : ojson(nullptr);
  out["total"] = selected.size();
  out["offset"] = offset;
  out["limit"] = limit;
  ojson items = ojson::array();
  for (std::size_t i = offset; i < selected.size() && i - offset < limit; ++i) {
    items.push_back(ojson::parse(mention_hit_to_json(*selected[i])));
  }
  out["mentions"] = std::move(items);
  return json_response(200, dump(out));
}

HttpResponse Service::create_session(const HttpRequest& req) {
  const ojson body = parse_body(req);
  const Category category = require_category(body_string(body, "category", true));
  std::size_t k = kDefaultNeighbors;
  if (auto it = body.find("k"); it != body.end()) {
    if (!it->is_number_unsigned() || it->get<std::size_t>() == 0) {
      throw Error(ErrorCode::kInvalidArgument, "field \"k\" must be a positive integer");
    }
    k = it->get<std::size_t>();
  }
  if (options_.scan.lexicon_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "service has no lexicon configured");
  }
  std::lock_guard lock(lexicon_mutex_);
  const Lexicon lexicon = LexiconFile::load(options_.scan.lexicon_path);
  const RejectMemory rejects = RejectMemory::load(options_.rejects_path);
  auto& store = sessions();
  Session s = open_session(lexicon, category, vectors(), k, rejects, store.next_id());
  store.save(s);
  return session_response(201, s);
}

namespace {

Session load_session(SessionStore& store, const std::string& id) {
  auto s = store.load(id);
  if (!s) throw Error(ErrorCode::kNotFound, "unknown session \"" + id + "\"");
  return std::move(*s);
}

}  // namespace

HttpResponse Service::get_session(const std::string& id) {
  std::lock_guard lock(lexicon_mutex_);
  return session_response(200, load_session(sessions(), id));
}

HttpResponse Service::next(const std::string& id, const HttpRequest& req) {
  const std::size_t n = query_size(req, "n", 10);
  std::lock_guard lock(lexicon_mutex_);
  const Session s = load_session(sessions(), id);
  ojson out;
  out["session_id"] = s.id;
  out["pending"] = s.queue.size();
  ojson items = ojson::array();
  for (const auto& sug : next_suggestions(s, n)) {
    items.push_back({{"term", sug.term},
                     {"source_term", sug.source_term},
                     {"score", sug.score},
                     {"category", std::string(category_name(sug.category))}});
  }
  out["suggestions"] = std::move(items);
  return json_response(200, dump(out));
}

HttpResponse Service::post_decision(const std::string& id, const HttpRequest& req) {
  const ojson body = parse_body(req);
  const std::string term = body_string(body, "term", true);
  const std::string verdict_text = body_string(body, "verdict", true);
  const auto verdict = parse_verdict(verdict_text);
  if (!verdict) throw Error(ErrorCode::kInvalidArgument, "verdict must be \"accept\" or \"reject\"");
  std::string decider = body_string(body, "decider", false);
  if (decider.empty()) decider = "analyst";

  std::lock_guard lock(lexicon_mutex_);
  auto& store = sessions();
  Session s = load_session(store, id);
  decide(s, term, *verdict, decider, utc_now_iso8601());
  store.save(s);
  return session_response(201, s);
}

HttpResponse Service::post_commit(const std::string& id) {
  if (options_.scan.lexicon_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "service has no lexicon configured");
  }
  std::lock_guard lock(lexicon_mutex_);
  auto& store = sessions();
  Session s = load_session(store, id);
  Lexicon lexicon = LexiconFile::load(options_.scan.lexicon_path);
  RejectMemory rejects = RejectMemory::load(options_.rejects_path);
  const std::uint64_t version = commit(s, lexicon, rejects);
  LexiconFile::save(lexicon, options_.scan.lexicon_path);
  rejects.save(options_.rejects_path);
  store.save(s);
  ojson out;
  out["session_id"] = s.id;
  out["lexicon_version"] = version;
  out["accepted"] = s.accepted_count();
  out["status"] = std::string(status_name(s.status));
  return json_response(200, dump(out));
}

HttpResponse Service::post_abandon(const std::string& id) {
  std::lock_guard lock(lexicon_mutex_);
  auto& store = sessions();
  Session s = load_session(store, id);
  abandon(s);
  store.save(s);
  return session_response(200, s);
}

HttpResponse Service::get_ledger(const std::string& id) {
  std::lock_guard lock(lexicon_mutex_);
  HttpResponse r = json_response(200, ledger_to_csv(load_session(sessions(), id)));
  r.content_type = "text/csv";
  return r;
}

HttpResponse Service::start_scan() {
  if (!scan_configured() || options_.output_dir.empty()) {
    return api_error(409, "scan_not_configured", "corpus, lexicon, targets and output directory are required");
  }
  std::lock_guard lock(jobs_mutex_);
  const std::string id = "job-" + std::to_string(next_job_++);
  jobs_[id] = Job{id, "queued", {}};
  job_threads_.emplace_back([this, id] {
    {
      std::lock_guard l(jobs_mutex_);
      jobs_[id].status = "running";
    }
    std::string status = "succeeded";
    std::string error;
    try {
      std::lock_guard writer(lexicon_mutex_);
      install_outputs(run_scan(options_.scan));
    } catch (const std::exception& e) {
      status = "failed";
      error = e.what();
    }
    std::lock_guard l(jobs_mutex_);
    jobs_[id].status = status;
    jobs_[id].error = error;
  });
  ojson out;
  out["job_id"] = id;
  out["status"] = "queued";
  HttpResponse r = json_response(202, dump(out));
  r.headers["Location"] = "/api/jobs/" + id;
  return r;
}

HttpResponse Service::get_job(const std::string& id) {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return api_error(404, "unknown_job", "unknown job \"" + id + "\"");
  ojson out;
  out["job_id"] = it->second.id;
  out["status"] = it->second.status;
  out["error"] = it->second.error.empty() ? ojson(nullptr) : ojson(it->second.error);
  return json_response(200, dump(out));
}

bool is_loopback_host(const std::string& host) {
  return host == "127.0.0.1" || host == "localhost" || host == "::1" || host.rfind("127.", 0) == 0;
}

}  // namespace hatewatch
