#include "hatewatch/scanner.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "hatewatch/error.hpp"

namespace hatewatch {

namespace {

std::vector<std::string> normalize_name(std::string_view raw, const TokenizerConfig& config,
                                        const MweMerger& merger) {
  return merger.merge(tokenize(raw, config).tokens);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t begin = 0;
  while (true) {
    const auto pos = s.find(sep, begin);
    parts.push_back(s.substr(begin, pos == std::string::npos ? std::string::npos : pos - begin));
    if (pos == std::string::npos) break;
    begin = pos + 1;
  }
  return parts;
}

}  // namespace

std::vector<Target> parse_targets(std::istream& in, const TokenizerConfig& config,
                                  const MweMerger& merger, const std::string& source_name) {
  std::vector<Target> targets;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    auto fields = split(line, '\t');
    if (fields.size() < 3 || fields.size() > 4) {
      throw Error(ErrorCode::kFormat,
                  where + ": expected \"id<TAB>full name<TAB>display name[<TAB>aliases]\"");
    }
    Target t;
    t.id = fields[0];
    if (t.id.empty()) throw Error(ErrorCode::kFormat, where + ": empty target id");
    if (!ids.insert(t.id).second) {
      throw Error(ErrorCode::kFormat, where + ": duplicate target id \"" + t.id + "\"");
    }
    t.full_name = normalize_name(fields[1], config, merger);
    if (t.full_name.empty()) throw Error(ErrorCode::kFormat, where + ": empty full name");
    t.display_name = fields[2].empty() ? fields[1] : fields[2];
    if (fields.size() == 4) {
      for (const auto& alias : split(fields[3], ';')) {
        auto tokens = normalize_name(alias, config, merger);
        if (!tokens.empty()) t.aliases.push_back(std::move(tokens));
      }
    }
    targets.push_back(std::move(t));
  }
  return targets;
}

std::vector<Target> load_targets(const std::string& path, const TokenizerConfig& config,
                                 const MweMerger& merger) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open targets file: " + path);
  return parse_targets(in, config, merger, path);
}

CategorySet MentionHit::categories() const {
  CategorySet set;
  for (const auto& [c, terms] : hits) {
    if (!terms.empty()) set.insert(c);
  }
  return set;
}

NameIndex::NameIndex(const std::vector<Target>& targets) : targets_(targets) {
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    add(targets_[i].full_name, i);
    for (const auto& alias : targets_[i].aliases) add(alias, i);
  }
}

void NameIndex::add(const std::vector<std::string>& name, std::size_t target_index) {
  if (name.empty()) return;
  std::uint32_t node = 0;
  for (const auto& tok : name) {
    auto it = nodes_[node].next.find(tok);
    if (it == nodes_[node].next.end()) {
      const auto child = static_cast<std::uint32_t>(nodes_.size());
      nodes_[node].next.emplace(tok, child);
      nodes_.emplace_back();
      node = child;
    } else {
      node = it->second;
    }
  }
  const auto idx = static_cast<std::int32_t>(target_index);
  if (nodes_[node].target >= 0 && nodes_[node].target != idx) {
    throw Error(ErrorCode::kFormat, "targets \"" + targets_[nodes_[node].target].id + "\" and \"" +
                                        targets_[target_index].id + "\" share a name");
  }
  nodes_[node].target = idx;
}

std::vector<Mention> NameIndex::find(std::span<const std::string> tokens,
                                     std::string_view doc_id) const {
  std::vector<Mention> out;
  const auto& root = nodes_[0].next;
  if (root.empty()) return out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    auto first = root.find(tokens[i]);
    if (first == root.end()) {
      ++i;
      continue;
    }
    std::uint32_t node = first->second;
    std::size_t best_len = 0;
    std::int32_t best_target = -1;
    if (nodes_[node].target >= 0) {
      best_len = 1;
      best_target = nodes_[node].target;
    }
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      const auto& next = nodes_[node].next;
      auto it = next.find(tokens[j]);
      if (it == next.end()) break;
      node = it->second;
      if (nodes_[node].target >= 0) {
        best_len = j - i + 1;
        best_target = nodes_[node].target;
      }
    }
    if (best_target < 0) {
      ++i;
      continue;
    }
    out.push_back(Mention{std::string(doc_id), targets_[best_target].id, i, i + best_len});
    i += best_len;
  }
  return out;
}

std::vector<Mention> find_mentions(std::span<const std::string> tokens,
                                   const std::vector<Target>& targets) {
  return NameIndex(targets).find(tokens);
}

Scanner::Scanner(std::shared_ptr<const Matcher> matcher, const std::vector<Target>& targets,
                 std::size_t window)
    : matcher_(std::move(matcher)), names_(targets), window_(window) {
  if (!matcher_) throw Error(ErrorCode::kInvalidArgument, "scanner requires a matcher");
}

namespace {

Kwic make_kwic(const TokenizedDocument& doc, const Mention& m, std::string_view source) {
  Kwic k;
  const std::size_t left = m.start >= kKwicWidth ? m.start - kKwicWidth : 0;
  const std::size_t right = std::min(doc.tokens.size(), m.end + kKwicWidth);
  k.left.assign(doc.tokens.begin() + left, doc.tokens.begin() + m.start);
  k.match.assign(doc.tokens.begin() + m.start, doc.tokens.begin() + m.end);
  k.right.assign(doc.tokens.begin() + m.end, doc.tokens.begin() + right);
  if (!source.empty() && right > left && doc.char_spans.size() == doc.tokens.size()) {
    const auto from = doc.char_spans[left].start;
    const auto to = doc.char_spans[right - 1].end;
    if (from <= to && to <= source.size()) k.text = std::string(source.substr(from, to - from));
  }
  return k;
}

}  // namespace

DocumentScan Scanner::scan(const TokenizedDocument& doc, std::string_view source_text) const {
  DocumentScan out;
  out.doc_id = doc.id;
  out.token_count = doc.tokens.size();
  out.lexicon_version = matcher_->lexicon_version();
  out.window = window_;

  for (const auto& tok : doc.tokens) {
    const CategorySet cats = matcher_->match(tok);
    if (cats.empty()) continue;
    for (auto c : kAllCategories) {
      if (cats.contains(c)) ++out.category_counts[index_of(c)];
    }
  }

  const auto mentions = names_.find(doc.tokens, doc.id);
  out.hits.reserve(mentions.size());
  const std::size_t n = doc.tokens.size();
  for (const auto& m : mentions) {
    MentionHit hit;
    hit.mention = m;
    auto inspect = [&](std::size_t pos) {
      const CategorySet cats = matcher_->match(doc.tokens[pos]);
      for (auto c : kAllCategories) {
        if (cats.contains(c)) hit.hits[c].emplace(pos, doc.tokens[pos]);
      }
    };
    const std::size_t left = m.start >= window_ ? m.start - window_ : 0;
    for (std::size_t p = left; p < m.start; ++p) inspect(p);
    const std::size_t right = std::min(n, m.end + window_);
    for (std::size_t p = m.end; p < right; ++p) inspect(p);
    hit.kwic = make_kwic(doc, m, source_text);
    out.hits.push_back(std::move(hit));
  }
  return out;
}

std::vector<DocumentScan> Scanner::scan_all(const std::vector<TokenizedDocument>& docs,
                                            const std::vector<RawDocument>* sources,
                                            unsigned workers) const {
  std::vector<DocumentScan> out(docs.size());
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::string_view text;
      if (sources && i < sources->size()) text = (*sources)[i].text;
      out[i] = scan(docs[i], text);
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1 || docs.size() < 2 * workers) {
    run(0, docs.size());
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (docs.size() + workers - 1) / workers;
  for (std::size_t begin = 0; begin < docs.size(); begin += chunk) {
    pool.emplace_back(run, begin, std::min(docs.size(), begin + chunk));
  }
  return out;
}

std::vector<MentionHit> scan_document(const TokenizedDocument& doc, const Matcher& matcher,
                                      const std::vector<Target>& targets, std::size_t window) {
  // Non-owning shared_ptr; the scanner does not outlive this call.
  Scanner scanner(std::shared_ptr<const Matcher>(&matcher, [](const Matcher*) {}), targets, window);
  return scanner.scan(doc).hits;
}

CategoryCounts category_corpus_counts(const std::vector<TokenizedDocument>& docs,
                                      const Matcher& matcher) {
  CategoryCounts counts{};
  for (const auto& doc : docs) {
    for (const auto& tok : doc.tokens) {
      const CategorySet cats = matcher.match(tok);
      for (auto c : kAllCategories) {
        if (cats.contains(c)) ++counts[index_of(c)];
      }
    }
  }
  return counts;
}

CountsTable& CountsTable::operator+=(const CountsTable& other) {
  if (other.lexicon_version != lexicon_version || other.window != window) {
    throw Error(ErrorCode::kConsistency,
                "cannot merge counts from different lexicon versions or windows");
  }
  for (const auto& [id, n] : other.mentions) mentions[id] += n;
  for (const auto& [id, row] : other.co_counts) {
    auto& mine = co_counts[id];
    for (std::size_t c = 0; c < kCategoryCount; ++c) mine[c] += row[c];
  }
  for (std::size_t c = 0; c < kCategoryCount; ++c) category_counts[c] += other.category_counts[c];
  total_tokens += other.total_tokens;
  return *this;
}

CountsTable aggregate(const std::vector<DocumentScan>& scans, const CorpusStats& stats,
                      const std::vector<Target>& targets, const Matcher& matcher,
                      std::size_t window) {
  CountsTable table;
  table.lexicon_version = matcher.lexicon_version();
  table.window = window;
  table.total_tokens = stats.total_tokens;
  for (const auto& t : targets) {
    table.mentions[t.id] = 0;
    table.co_counts[t.id] = CategoryCounts{};
  }
  for (const auto& scan : scans) {
    if (scan.lexicon_version != table.lexicon_version) {
      throw Error(ErrorCode::kConsistency,
                  "scan of document \"" + scan.doc_id + "\" used lexicon version " +
                      std::to_string(scan.lexicon_version) + ", expected " +
                      std::to_string(table.lexicon_version));
    }
    if (scan.window != window) {
      throw Error(ErrorCode::kConsistency,
                  "scan of document \"" + scan.doc_id + "\" used a different window");
    }
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      table.category_counts[c] += scan.category_counts[c];
    }
    for (const auto& hit : scan.hits) {
      const auto& id = hit.mention.target_id;
      ++table.mentions[id];
      auto& row = table.co_counts[id];
      const CategorySet cats = hit.categories();
      for (auto c : kAllCategories) {
        if (cats.contains(c)) ++row[index_of(c)];
      }
    }
  }
  return table;
}

std::string mention_hit_to_json(const MentionHit& hit) {
  nlohmann::ordered_json j;
  j["doc_id"] = hit.mention.doc_id;
  j["target_id"] = hit.mention.target_id;
  j["start"] = hit.mention.start;
  j["end"] = hit.mention.end;
  auto hits = nlohmann::ordered_json::array();
  for (const auto& [c, set] : hit.hits) {
    for (const auto& [pos, term] : set) {
      nlohmann::ordered_json h;
      h["category"] = category_name(c);
      h["token_index"] = pos;
      h["term"] = term;
      hits.push_back(std::move(h));
    }
  }
  j["hits"] = std::move(hits);
  nlohmann::ordered_json k;
  k["left"] = hit.kwic.left;
  k["match"] = hit.kwic.match;
  k["right"] = hit.kwic.right;
  k["text"] = hit.kwic.text;
  j["kwic"] = std::move(k);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

MentionHit mention_hit_from_json(std::string_view line) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kFormat, "malformed hit record");
  }
  try {
    MentionHit hit;
    hit.mention.doc_id = j.at("doc_id").get<std::string>();
    hit.mention.target_id = j.at("target_id").get<std::string>();
    hit.mention.start = j.at("start").get<std::size_t>();
    hit.mention.end = j.at("end").get<std::size_t>();
    for (const auto& h : j.at("hits")) {
      auto c = parse_category(h.at("category").get<std::string>());
      if (!c) throw Error(ErrorCode::kFormat, "unknown category in hit record");
      hit.hits[*c].emplace(h.at("token_index").get<std::size_t>(), h.at("term").get<std::string>());
    }
    const auto& k = j.at("kwic");
    hit.kwic.left = k.at("left").get<std::vector<std::string>>();
    hit.kwic.match = k.at("match").get<std::vector<std::string>>();
    hit.kwic.right = k.at("right").get<std::vector<std::string>>();
    hit.kwic.text = k.value("text", "");
    return hit;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed hit record: ") + e.what());
  }
}

}  // namespace hatewatch
