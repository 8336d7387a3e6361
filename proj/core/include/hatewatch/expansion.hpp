#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hatewatch/embeddings.hpp"
#include "hatewatch/lexicon.hpp"

namespace hatewatch {

enum class Verdict { kAccept, kReject };
std::string_view verdict_name(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

enum class SessionStatus { kOpen, kCommitted, kAbandoned };
std::string_view status_name(SessionStatus s);

struct Suggestion {
  std::string term;
  std::string source_term;
  double score = 0.0;
  Category category{};

  friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

struct Decision {
  std::string term;
  Verdict verdict{};
  std::string timestamp;
  std::string decider;
  std::string source_term;
  double score = 0.0;

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Terms an expert rejected, per category. Persisted so later rounds do not
// re-suggest them. Rejections in one category do not affect others.
class RejectMemory {
 public:
  bool contains(Category c, const std::string& term) const;
  void add(Category c, const std::string& term);
  const std::set<std::string>& terms(Category c) const { return rejected_[index_of(c)]; }

  static RejectMemory load(const std::string& path);  // missing file -> empty
  void save(const std::string& path) const;

  friend bool operator==(const RejectMemory&, const RejectMemory&) = default;

 private:
  std::array<std::set<std::string>, kCategoryCount> rejected_{};
};

// One expansion round for one category. The decision ledger is append-only:
// replaying it on the lexicon version the session was opened against
// reproduces the committed lexicon.
struct Session {
  std::string id;
  Category category{};
  std::uint64_t lexicon_version_at_open = 0;
  std::uint64_t lexicon_hash_at_open = 0;  // catches edits that leave the version unchanged
  std::size_t k = 15;
  std::vector<Suggestion> queue;  // pending, rank order
  std::vector<Decision> decisions;
  std::vector<std::string> oov_seeds;
  SessionStatus status = SessionStatus::kOpen;

  std::size_t accepted_count() const;
};

inline constexpr std::size_t kDefaultNeighbors = 15;

// Queue: union of each in-vocabulary seed's k nearest neighbours, minus
// terms already in lexicon[category] and previously rejected for it,
// deduplicated by max score, ordered by score descending then term.
// Throws Error(kEmptySeed) for an empty category and Error(kOovSeed) when no
// seed is in the vocabulary.
Session open_session(const Lexicon& lexicon, Category category, const VectorStore& store,
                     std::size_t k = kDefaultNeighbors, const RejectMemory& rejects = {},
                     std::string id = {});

// First n pending suggestions; does not modify the session. Throws
// Error(kState) when the session is not open.
std::vector<Suggestion> next_suggestions(const Session& session, std::size_t n);

// Throws Error(kState), Error(kDuplicateDecision) or Error(kNotInQueue).
const Decision& decide(Session& session, const std::string& term, Verdict verdict,
                       const std::string& decider, const std::string& timestamp);

// Adds accepted terms to lexicon[category] (origin suggested) as one
// mutation and records rejections. Throws Error(kStaleSession) when the
// lexicon's version or content changed since the session opened. Returns the
// new version.
std::uint64_t commit(Session& session, Lexicon& lexicon, RejectMemory& rejects);

void abandon(Session& session);

// Applies the ledger to a copy of the opening lexicon.
Lexicon replay_ledger(const Lexicon& opening, const Session& session);

std::string session_to_json(const Session& session);
Session session_from_json(const std::string& text);
// term,verdict,timestamp,decider,source_term,score
std::string ledger_to_csv(const Session& session);

// Sessions persisted one JSON file per session under a directory.
class SessionStore {
 public:
  explicit SessionStore(std::string directory);

  std::string next_id() const;
  void save(const Session& session) const;
  std::optional<Session> load(const std::string& id) const;
  std::vector<std::string> list() const;
  const std::string& directory() const { return dir_; }

 private:
  std::string path_for(const std::string& id) const;
  std::string dir_;
};

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now_iso8601();

}  // namespace hatewatch
