#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hatewatch {

enum class Category : std::uint8_t {
  kSwearword = 0,
  kAnger,
  kNaughtiness,
  kGeneralThreat,
  kDeathThreat,
  kSexism,
};

inline constexpr std::size_t kCategoryCount = 6;
inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::kSwearword,     Category::kAnger,       Category::kNaughtiness,
    Category::kGeneralThreat, Category::kDeathThreat, Category::kSexism,
};

// Bit-exact labels used in every file format and API payload.
std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view name);

constexpr std::size_t index_of(Category c) { return static_cast<std::size_t>(c); }

// Small value set of categories, one bit per label.
class CategorySet {
 public:
  constexpr CategorySet() = default;
  constexpr explicit CategorySet(std::uint8_t bits) : bits_(bits) {}

  constexpr bool contains(Category c) const { return (bits_ >> index_of(c)) & 1u; }
  constexpr void insert(Category c) { bits_ |= static_cast<std::uint8_t>(1u << index_of(c)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  std::size_t size() const;
  std::vector<Category> to_vector() const;

  friend constexpr bool operator==(CategorySet, CategorySet) = default;

 private:
  std::uint8_t bits_ = 0;
};

enum class TermOrigin { kSeed, kSuggested };
std::string_view origin_name(TermOrigin o);

struct Provenance {
  TermOrigin origin = TermOrigin::kSeed;
  std::string decided_by;
  std::string decided_at;  // ISO-8601
};

struct TermAddition {
  Category category;
  std::string term;
  Provenance provenance;
};

// Category -> term dictionaries with per-term provenance.
//
// Terms are lowercase with no internal whitespace; multiword expressions are
// stored underscore-joined. The version increases by one on every mutation;
// a batch of additions counts as one mutation.
class Lexicon {
 public:
  using TermSet = std::set<std::string>;

  Lexicon() = default;

  const TermSet& terms(Category c) const { return entries_[index_of(c)]; }
  bool contains(Category c, const std::string& term) const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  std::uint64_t version() const { return version_; }

  // Each call that changes the entries bumps the version; no-ops do not.
  bool add(Category c, const std::string& term, Provenance provenance = {});
  bool remove(Category c, const std::string& term);
  // Applies all additions as one mutation (exactly one version increment).
  std::size_t add_batch(const std::vector<TermAddition>& additions);

  const Provenance* provenance(Category c, const std::string& term) const;

  // Used by persistence layers; does not count as a mutation.
  void restore_version(std::uint64_t v) { version_ = v; }

  // Order-independent digest of the entries (not provenance, not version).
  std::uint64_t content_hash() const;

  // Entry equality only.
  bool same_entries(const Lexicon& other) const { return entries_ == other.entries_; }

 private:
  bool insert(Category c, const std::string& term, Provenance provenance);

  std::array<TermSet, kCategoryCount> entries_{};
  std::map<std::pair<Category, std::string>, Provenance> provenance_;
  std::uint64_t version_ = 0;
};

// Lowercases, trims and joins whitespace-separated parts with '_'.
std::string normalize_term(std::string_view raw);

// TSV "category<TAB>term" per line; blank lines and '#' comments skipped.
Lexicon load_lexicon(const std::string& path);
Lexicon parse_lexicon(std::istream& in, const std::string& source_name = "<stream>");
// Writes lines sorted by (category, term) with MWE underscores re-spaced.
void save_lexicon(const Lexicon& lexicon, const std::string& path);
void write_lexicon(const Lexicon& lexicon, std::ostream& out);

// TSV plus a sidecar "<path>.meta.json" holding the version counter,
// provenance, and the content hash at last save. A TSV edited outside the
// tool is detected by hash mismatch and reported with a bumped version, so
// optimistic concurrency survives process restarts and hand edits.
struct LexiconFile {
  static std::string meta_path(const std::string& tsv_path) { return tsv_path + ".meta.json"; }
  static Lexicon load(const std::string& tsv_path);
  static void save(const Lexicon& lexicon, const std::string& tsv_path);
};

// Immutable token -> categories lookup built from one lexicon version.
class Matcher {
 public:
  Matcher() = default;
  explicit Matcher(const Lexicon& lexicon);

  CategorySet match(std::string_view token) const;
  std::uint64_t lexicon_version() const { return version_; }
  std::size_t term_count() const { return table_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::unordered_map<std::string, CategorySet, Hash, std::equal_to<>> table_;
  std::uint64_t version_ = 0;
};

inline CategorySet match_token(const Matcher& matcher, std::string_view token) {
  return matcher.match(token);
}

}  // namespace hatewatch
