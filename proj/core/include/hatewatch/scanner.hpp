#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hatewatch/corpus.hpp"
#include "hatewatch/lexicon.hpp"
#include "hatewatch/text.hpp"

namespace hatewatch {

using CategoryCounts = std::array<std::uint64_t, kCategoryCount>;

struct Target {
  std::string id;
  std::vector<std::string> full_name;  // normalized tokens
  std::string display_name;
  std::vector<std::vector<std::string>> aliases;
};

// Targets file: "id<TAB>full name<TAB>display name[<TAB>alias;alias...]".
// Names are normalized with the corpus tokenizer config and MWE merger so
// they compare equal to corpus tokens.
std::vector<Target> load_targets(const std::string& path, const TokenizerConfig& config,
                                 const MweMerger& merger);
std::vector<Target> parse_targets(std::istream& in, const TokenizerConfig& config,
                                  const MweMerger& merger,
                                  const std::string& source_name = "<stream>");

struct Mention {
  std::string doc_id;
  std::string target_id;
  std::size_t start = 0;  // token index of first name token
  std::size_t end = 0;    // one past the last name token

  friend bool operator==(const Mention&, const Mention&) = default;
};

// (token index, term)
using HitSet = std::set<std::pair<std::size_t, std::string>>;

struct Kwic {
  std::vector<std::string> left;
  std::vector<std::string> match;
  std::vector<std::string> right;
  std::string text;  // source excerpt covering left..right, when available

  friend bool operator==(const Kwic&, const Kwic&) = default;
};

inline constexpr std::size_t kKwicWidth = 10;

struct MentionHit {
  Mention mention;
  std::map<Category, HitSet> hits;
  Kwic kwic;

  CategorySet categories() const;
  friend bool operator==(const MentionHit&, const MentionHit&) = default;
};

// Token-level trie over target names; longest name wins at each position.
class NameIndex {
 public:
  NameIndex() = default;
  // Throws Error(kFormat) if two targets share a name sequence.
  explicit NameIndex(const std::vector<Target>& targets);

  std::vector<Mention> find(std::span<const std::string> tokens, std::string_view doc_id = {}) const;

  const std::vector<Target>& targets() const { return targets_; }

 private:
  struct Node {
    std::unordered_map<std::string, std::uint32_t> next;
    std::int32_t target = -1;
  };
  void add(const std::vector<std::string>& name, std::size_t target_index);

  std::vector<Target> targets_;
  std::vector<Node> nodes_{1};
};

std::vector<Mention> find_mentions(std::span<const std::string> tokens,
                                   const std::vector<Target>& targets);

// Per-document scan output: the mention hits plus this document's share of
// the corpus-wide category counts, tagged with the inputs that produced it.
struct DocumentScan {
  std::string doc_id;
  std::vector<MentionHit> hits;
  CategoryCounts category_counts{};
  std::uint64_t token_count = 0;
  std::uint64_t lexicon_version = 0;
  std::size_t window = 0;
};

class Scanner {
 public:
  Scanner(std::shared_ptr<const Matcher> matcher, const std::vector<Target>& targets,
          std::size_t window);

  // `source_text` is the original document text; when non-empty the KWIC
  // snippet also carries the matching source excerpt.
  DocumentScan scan(const TokenizedDocument& doc, std::string_view source_text = {}) const;

  // Scans documents on `workers` threads; output is in input order.
  std::vector<DocumentScan> scan_all(const std::vector<TokenizedDocument>& docs,
                                     const std::vector<RawDocument>* sources = nullptr,
                                     unsigned workers = 1) const;

  const Matcher& matcher() const { return *matcher_; }
  const NameIndex& names() const { return names_; }
  std::size_t window() const { return window_; }

 private:
  std::shared_ptr<const Matcher> matcher_;
  NameIndex names_;
  std::size_t window_;
};

std::vector<MentionHit> scan_document(const TokenizedDocument& doc, const Matcher& matcher,
                                      const std::vector<Target>& targets, std::size_t window);

CategoryCounts category_corpus_counts(const std::vector<TokenizedDocument>& docs,
                                      const Matcher& matcher);

// #(m), #(m,c), #(c) and T for one lexicon version and one window.
struct CountsTable {
  std::uint64_t lexicon_version = 0;
  std::size_t window = 0;
  std::map<std::string, std::uint64_t> mentions;
  std::map<std::string, CategoryCounts> co_counts;
  CategoryCounts category_counts{};
  std::uint64_t total_tokens = 0;

  // Throws Error(kConsistency) on differing lexicon version or window.
  CountsTable& operator+=(const CountsTable& other);
  friend CountsTable operator+(CountsTable a, const CountsTable& b) { return a += b; }
  friend bool operator==(const CountsTable&, const CountsTable&) = default;
};

// Every target appears in the table, including zero-mention ones. Throws
// Error(kConsistency) if any scan came from a different lexicon version than
// `matcher` or a different window than `window`.
CountsTable aggregate(const std::vector<DocumentScan>& scans, const CorpusStats& stats,
                      const std::vector<Target>& targets, const Matcher& matcher,
                      std::size_t window);

std::string mention_hit_to_json(const MentionHit& hit);
MentionHit mention_hit_from_json(std::string_view line);

}  // namespace hatewatch
