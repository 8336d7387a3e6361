#include "hatewatch/expansion.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hatewatch/digest.hpp"
#include "hatewatch/error.hpp"

namespace hatewatch {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view verdict_name(Verdict v) { return v == Verdict::kAccept ? "accept" : "reject"; }

std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "accept") return Verdict::kAccept;
  if (s == "reject") return Verdict::kReject;
  return std::nullopt;
}

std::string_view status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::kOpen: return "open";
    case SessionStatus::kCommitted: return "committed";
    case SessionStatus::kAbandoned: return "abandoned";
  }
  return "open";
}

namespace {

std::optional<SessionStatus> parse_status(std::string_view s) {
  if (s == "open") return SessionStatus::kOpen;
  if (s == "committed") return SessionStatus::kCommitted;
  if (s == "abandoned") return SessionStatus::kAbandoned;
  return std::nullopt;
}

void require_open(const Session& session) {
  if (session.status != SessionStatus::kOpen) {
    throw Error(ErrorCode::kState, "session " + session.id + " is " +
                                       std::string(status_name(session.status)));
  }
}

}  // namespace

bool RejectMemory::contains(Category c, const std::string& term) const {
  return rejected_[index_of(c)].contains(term);
}

void RejectMemory::add(Category c, const std::string& term) { rejected_[index_of(c)].insert(term); }

RejectMemory RejectMemory::load(const std::string& path) {
  RejectMemory mem;
  std::ifstream in(path);
  if (!in) return mem;
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kFormat, "malformed reject memory: " + path);
  }
  for (const auto& [label, terms] : doc.items()) {
    auto c = parse_category(label);
    if (!c || !terms.is_array()) throw Error(ErrorCode::kFormat, "malformed reject memory: " + path);
    for (const auto& t : terms) mem.add(*c, t.get<std::string>());
  }
  return mem;
}

void RejectMemory::save(const std::string& path) const {
  ojson doc = ojson::object();
  for (auto c : kAllCategories) doc[std::string(category_name(c))] = terms(c);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write reject memory: " + path);
  out << doc.dump(2) << '\n';
}

std::size_t Session::accepted_count() const {
  return static_cast<std::size_t>(std::count_if(decisions.begin(), decisions.end(), [](const Decision& d) {
    return d.verdict == Verdict::kAccept;
  }));
}

Session open_session(const Lexicon& lexicon, Category category, const VectorStore& store,
                     std::size_t k, const RejectMemory& rejects, std::string id) {
  const auto& seeds = lexicon.terms(category);
  if (seeds.empty()) {
    throw Error(ErrorCode::kEmptySeed,
                "category " + std::string(category_name(category)) + " has no seed terms");
  }
  Session session;
  session.id = std::move(id);
  session.category = category;
  session.lexicon_version_at_open = lexicon.version();
  session.lexicon_hash_at_open = lexicon.content_hash();
  session.k = k;

  std::map<std::string, Suggestion> best;
  for (const auto& seed : seeds) {
    if (!store.contains(seed)) {
      session.oov_seeds.push_back(seed);
      continue;
    }
    for (auto& nb : nearest_neighbors(store, seed, k)) {
      if (lexicon.contains(category, nb.token) || rejects.contains(category, nb.token)) continue;
      auto it = best.find(nb.token);
      // Seeds iterate in sorted order, so on equal scores the first seed stays.
      if (it == best.end() || nb.score > it->second.score) {
        best[nb.token] = Suggestion{nb.token, seed, nb.score, category};
      }
    }
  }
  if (session.oov_seeds.size() == seeds.size()) {
    std::string list;
    for (const auto& s : session.oov_seeds) list += (list.empty() ? "" : ", ") + s;
    throw Error(ErrorCode::kOovSeed, "no seed term of " + std::string(category_name(category)) +
                                         " is in the vocabulary: " + list);
  }
  for (auto& [term, s] : best) session.queue.push_back(std::move(s));
  std::sort(session.queue.begin(), session.queue.end(), [](const Suggestion& a, const Suggestion& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
  return session;
}

std::vector<Suggestion> next_suggestions(const Session& session, std::size_t n) {
  require_open(session);
  const std::size_t take = std::min(n, session.queue.size());
  return {session.queue.begin(), session.queue.begin() + static_cast<std::ptrdiff_t>(take)};
}

const Decision& decide(Session& session, const std::string& term, Verdict verdict,
                       const std::string& decider, const std::string& timestamp) {
  require_open(session);
  for (const auto& d : session.decisions) {
    if (d.term == term) {
      throw Error(ErrorCode::kDuplicateDecision, "term \"" + term + "\" was already decided");
    }
  }
  auto it = std::find_if(session.queue.begin(), session.queue.end(),
                         [&](const Suggestion& s) { return s.term == term; });
  if (it == session.queue.end()) {
    throw Error(ErrorCode::kNotInQueue, "term \"" + term + "\" is not in the session queue");
  }
  session.decisions.push_back(Decision{term, verdict, timestamp, decider, it->source_term, it->score});
  session.queue.erase(it);
  return session.decisions.back();
}

namespace {

std::vector<TermAddition> accepted_additions(const Session& session) {
  std::vector<TermAddition> out;
  for (const auto& d : session.decisions) {
    if (d.verdict != Verdict::kAccept) continue;
    out.push_back(TermAddition{session.category, d.term,
                               Provenance{TermOrigin::kSuggested, d.decider, d.timestamp}});
  }
  return out;
}

}  // namespace

std::uint64_t commit(Session& session, Lexicon& lexicon, RejectMemory& rejects) {
  require_open(session);
  if (lexicon.version() != session.lexicon_version_at_open ||
      lexicon.content_hash() != session.lexicon_hash_at_open) {
    throw Error(ErrorCode::kStaleSession,
                "lexicon changed since session " + session.id + " opened (version " +
                    std::to_string(session.lexicon_version_at_open) + " -> " +
                    std::to_string(lexicon.version()) + "); reopen the session");
  }
  lexicon.add_batch(accepted_additions(session));
  for (const auto& d : session.decisions) {
    if (d.verdict == Verdict::kReject) rejects.add(session.category, d.term);
  }
  session.status = SessionStatus::kCommitted;
  return lexicon.version();
}

void abandon(Session& session) {
  require_open(session);
  session.status = SessionStatus::kAbandoned;
}

Lexicon replay_ledger(const Lexicon& opening, const Session& session) {
  if (opening.version() != session.lexicon_version_at_open ||
      opening.content_hash() != session.lexicon_hash_at_open) {
    throw Error(ErrorCode::kConsistency, "replay requires the lexicon the session opened on");
  }
  Lexicon out = opening;
  out.add_batch(accepted_additions(session));
  return out;
}

std::string session_to_json(const Session& session) {
  ojson j;
  j["id"] = session.id;
  j["category"] = category_name(session.category);
  j["lexicon_version"] = session.lexicon_version_at_open;
  j["lexicon_hash"] = to_hex(session.lexicon_hash_at_open);
  j["k"] = session.k;
  j["status"] = status_name(session.status);
  auto queue = ojson::array();
  for (const auto& s : session.queue) {
    queue.push_back({{"term", s.term}, {"source_term", s.source_term}, {"score", s.score}});
  }
  j["queue"] = std::move(queue);
  auto ledger = ojson::array();
  for (const auto& d : session.decisions) {
    ledger.push_back({{"term", d.term},
                      {"verdict", verdict_name(d.verdict)},
                      {"timestamp", d.timestamp},
                      {"decider", d.decider},
                      {"source_term", d.source_term},
                      {"score", d.score}});
  }
  j["ledger"] = std::move(ledger);
  j["oov_seeds"] = session.oov_seeds;
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

Session session_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kFormat, "malformed session file");
  try {
    Session s;
    s.id = j.at("id").get<std::string>();
    auto c = parse_category(j.at("category").get<std::string>());
    auto st = parse_status(j.at("status").get<std::string>());
    if (!c || !st) throw Error(ErrorCode::kFormat, "malformed session file");
    s.category = *c;
    s.status = *st;
    s.lexicon_version_at_open = j.at("lexicon_version").get<std::uint64_t>();
    s.lexicon_hash_at_open = std::stoull(j.at("lexicon_hash").get<std::string>(), nullptr, 16);
    s.k = j.value("k", kDefaultNeighbors);
    for (const auto& q : j.at("queue")) {
      s.queue.push_back(Suggestion{q.at("term").get<std::string>(), q.at("source_term").get<std::string>(),
                                   q.at("score").get<double>(), s.category});
    }
    for (const auto& d : j.at("ledger")) {
      auto v = parse_verdict(d.at("verdict").get<std::string>());
      if (!v) throw Error(ErrorCode::kFormat, "malformed verdict in session file");
      s.decisions.push_back(Decision{d.at("term").get<std::string>(), *v,
                                     d.at("timestamp").get<std::string>(),
                                     d.at("decider").get<std::string>(),
                                     d.value("source_term", ""), d.value("score", 0.0)});
    }
    s.oov_seeds = j.value("oov_seeds", std::vector<std::string>{});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed session file: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed session file: ") + e.what());
  }
}

std::string ledger_to_csv(const Session& session) {
  std::ostringstream out;
  out << "term,verdict,timestamp,decider,source_term,score\n";
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q.push_back('"');
      q.push_back(c);
    }
    return q + "\"";
  };
  for (const auto& d : session.decisions) {
    char score[32];
    std::snprintf(score, sizeof(score), "%.6f", d.score);
    out << field(d.term) << ',' << verdict_name(d.verdict) << ',' << field(d.timestamp) << ','
        << field(d.decider) << ',' << field(d.source_term) << ',' << score << '\n';
  }
  return out.str();
}

namespace {

bool valid_session_id(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
           c == '_';
  });
}

}  // namespace

SessionStore::SessionStore(std::string directory) : dir_(std::move(directory)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create session directory " + dir_ + ": " + ec.message());
}

std::string SessionStore::path_for(const std::string& id) const {
  if (!valid_session_id(id)) throw Error(ErrorCode::kNotFound, "invalid session id \"" + id + "\"");
  return (fs::path(dir_) / (id + ".json")).string();
}

std::vector<std::string> SessionStore::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string SessionStore::next_id() const {
  std::size_t max_seen = 0;
  for (const auto& id : list()) {
    if (id.rfind("session-", 0) == 0) {
      try {
        max_seen = std::max<std::size_t>(max_seen, std::stoull(id.substr(8)));
      } catch (const std::exception&) {
      }
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "session-%04zu", max_seen + 1);
  return buf;
}

void SessionStore::save(const Session& session) const {
  const std::string path = path_for(session.id);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write session file: " + path);
    out << session_to_json(session);
  }
  fs::rename(tmp, path);
}

std::optional<Session> SessionStore::load(const std::string& id) const {
  if (!valid_session_id(id)) return std::nullopt;
  std::ifstream in(path_for(id));
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  return session_from_json(buf.str());
}

std::string utc_now_iso8601() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace hatewatch
