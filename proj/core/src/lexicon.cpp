#include "hatewatch/lexicon.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hatewatch/digest.hpp"
#include "hatewatch/error.hpp"
#include "hatewatch/text.hpp"

namespace hatewatch {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "swearword", "anger", "naughtiness", "general_threat", "death_threat", "sexism",
};

}  // namespace

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string Fnv1a::hex() const { return to_hex(state_); }

std::string_view category_name(Category c) { return kCategoryNames[index_of(c)]; }

std::optional<Category> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  return std::nullopt;
}

std::size_t CategorySet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<Category> CategorySet::to_vector() const {
  std::vector<Category> out;
  for (auto c : kAllCategories) {
    if (contains(c)) out.push_back(c);
  }
  return out;
}

std::string_view origin_name(TermOrigin o) {
  return o == TermOrigin::kSeed ? "seed" : "suggested";
}

bool Lexicon::contains(Category c, const std::string& term) const {
  return entries_[index_of(c)].contains(term);
}

std::size_t Lexicon::size() const {
  std::size_t n = 0;
  for (const auto& set : entries_) n += set.size();
  return n;
}

bool Lexicon::insert(Category c, const std::string& term, Provenance provenance) {
  if (term.empty()) throw Error(ErrorCode::kInvalidArgument, "empty lexicon term");
  if (!entries_[index_of(c)].insert(term).second) return false;
  provenance_[{c, term}] = std::move(provenance);
  return true;
}

bool Lexicon::add(Category c, const std::string& term, Provenance provenance) {
  const bool added = insert(c, term, std::move(provenance));
  if (added) ++version_;
  return added;
}

bool Lexicon::remove(Category c, const std::string& term) {
  if (entries_[index_of(c)].erase(term) == 0) return false;
  provenance_.erase({c, term});
  ++version_;
  return true;
}

std::size_t Lexicon::add_batch(const std::vector<TermAddition>& additions) {
  std::size_t added = 0;
  for (const auto& a : additions) added += insert(a.category, a.term, a.provenance) ? 1 : 0;
  ++version_;
  return added;
}

const Provenance* Lexicon::provenance(Category c, const std::string& term) const {
  auto it = provenance_.find({c, term});
  return it == provenance_.end() ? nullptr : &it->second;
}

std::uint64_t Lexicon::content_hash() const {
  Fnv1a h;
  for (auto c : kAllCategories) {
    h.field(category_name(c));
    for (const auto& t : terms(c)) h.field(t);
  }
  return h.value();
}

std::string normalize_term(std::string_view raw) {
  std::string out;
  bool pending_sep = false;
  std::size_t pos = 0;
  std::string lowered = fold_case(raw);
  std::string_view text(lowered);
  while (pos < text.size()) {
    const std::size_t begin = pos;
    const char32_t cp = decode_utf8(text, pos);
    if (is_space_char(cp)) {
      pending_sep = !out.empty();
      continue;
    }
    if (pending_sep) {
      out.push_back('_');
      pending_sep = false;
    }
    out.append(text.substr(begin, pos - begin));
  }
  return out;
}

Lexicon parse_lexicon(std::istream& in, const std::string& source_name) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kFormat, where + ": expected \"category<TAB>term\"");
    }
    const std::string label = line.substr(0, tab);
    const auto category = parse_category(label);
    if (!category) {
      throw Error(ErrorCode::kFormat, where + ": unknown category \"" + label + "\"");
    }
    const std::string term = normalize_term(std::string_view(line).substr(tab + 1));
    if (term.empty()) throw Error(ErrorCode::kFormat, where + ": empty term");
    lex.add(*category, term, Provenance{TermOrigin::kSeed, "file", ""});
  }
  lex.restore_version(0);
  return lex;
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open lexicon file: " + path);
  return parse_lexicon(in, path);
}

void write_lexicon(const Lexicon& lexicon, std::ostream& out) {
  // Category order is the enum order; within a category std::set is sorted.
  for (auto c : kAllCategories) {
    for (const auto& term : lexicon.terms(c)) {
      out << category_name(c) << '\t' << respace_mwe(term) << '\n';
    }
  }
}

namespace {

void write_file_atomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write file: " + path);
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace file: " + path + ": " + ec.message());
}

}  // namespace

void save_lexicon(const Lexicon& lexicon, const std::string& path) {
  std::ostringstream out;
  write_lexicon(lexicon, out);
  write_file_atomically(path, out.str());
}

Lexicon LexiconFile::load(const std::string& tsv_path) {
  Lexicon lex = load_lexicon(tsv_path);
  const std::string meta = meta_path(tsv_path);
  std::ifstream in(meta);
  if (!in) return lex;

  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kFormat, "malformed lexicon metadata: " + meta);
  }
  // Re-attach provenance for every term still present.
  Lexicon restored;
  std::map<std::pair<Category, std::string>, Provenance> saved;
  for (const auto& p : doc.value("provenance", nlohmann::json::array())) {
    auto c = parse_category(p.value("category", ""));
    if (!c) continue;
    Provenance prov;
    prov.origin = p.value("origin", "seed") == "suggested" ? TermOrigin::kSuggested : TermOrigin::kSeed;
    prov.decided_by = p.value("decided_by", "");
    prov.decided_at = p.value("decided_at", "");
    saved[{*c, p.value("term", "")}] = std::move(prov);
  }
  for (auto c : kAllCategories) {
    for (const auto& t : lex.terms(c)) {
      auto it = saved.find({c, t});
      restored.add(c, t, it != saved.end() ? it->second : *lex.provenance(c, t));
    }
  }
  const std::uint64_t version = doc.value("version", std::uint64_t{0});
  const std::string hash = doc.value("content_hash", "");
  restored.restore_version(hash == to_hex(restored.content_hash()) ? version : version + 1);
  return restored;
}

void LexiconFile::save(const Lexicon& lexicon, const std::string& tsv_path) {
  save_lexicon(lexicon, tsv_path);
  nlohmann::ordered_json doc;
  doc["version"] = lexicon.version();
  doc["content_hash"] = to_hex(lexicon.content_hash());
  auto prov = nlohmann::ordered_json::array();
  for (auto c : kAllCategories) {
    for (const auto& t : lexicon.terms(c)) {
      const Provenance* p = lexicon.provenance(c, t);
      nlohmann::ordered_json row;
      row["category"] = category_name(c);
      row["term"] = t;
      row["origin"] = origin_name(p ? p->origin : TermOrigin::kSeed);
      row["decided_by"] = p ? p->decided_by : "";
      row["decided_at"] = p ? p->decided_at : "";
      prov.push_back(std::move(row));
    }
  }
  doc["provenance"] = std::move(prov);
  write_file_atomically(meta_path(tsv_path), doc.dump(2) + "\n");
}

Matcher::Matcher(const Lexicon& lexicon) : version_(lexicon.version()) {
  for (auto c : kAllCategories) {
    for (const auto& term : lexicon.terms(c)) table_[term].insert(c);
  }
}

CategorySet Matcher::match(std::string_view token) const {
  auto it = table_.find(token);
  return it == table_.end() ? CategorySet{} : it->second;
}

}  // namespace hatewatch
