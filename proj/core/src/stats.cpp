#include "hatewatch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hatewatch/digest.hpp"
#include "hatewatch/error.hpp"

namespace hatewatch {

double normalized_frequency(std::uint64_t corpus_count, std::uint64_t total_tokens) {
  if (total_tokens == 0) {
    throw Error(ErrorCode::kUndefinedInput, "relative frequency undefined for an empty corpus");
  }
  if (corpus_count > total_tokens) {
    throw Error(ErrorCode::kInvariantViolation, "category count exceeds total token count");
  }
  return static_cast<double>(corpus_count) / static_cast<double>(total_tokens);
}

std::optional<double> proportion(std::uint64_t co_count, std::uint64_t mention_count) {
  if (co_count > mention_count) {
    throw Error(ErrorCode::kInvariantViolation,
                "co-occurrence count " + std::to_string(co_count) + " exceeds mention count " +
                    std::to_string(mention_count));
  }
  if (mention_count == 0) return std::nullopt;
  return static_cast<double>(co_count) / static_cast<double>(mention_count);
}

double expected_count(double relative_frequency, double mention_count) {
  if (relative_frequency < 0.0 || mention_count < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "expected count inputs must be non-negative");
  }
  return relative_frequency * mention_count;
}

double deviation(double actual, double expected) { return actual - expected; }

std::string ReportConfig::fingerprint(const CorpusStats& stats,
                                      const std::vector<Target>& targets) const {
  Fnv1a h;
  h.field("hatewatch-report-v1");
  h.field(std::to_string(window));
  h.field(std::to_string(lexicon_version));
  h.field(to_hex(lexicon_hash));
  h.field(tokenizer.describe());
  h.field(std::to_string(mwe_count));
  h.field(std::to_string(stats.total_tokens));
  h.field(std::to_string(stats.doc_count));
  for (const auto& t : targets) {
    h.field(t.id);
    h.field(join_mwe(t.full_name));
    for (const auto& alias : t.aliases) h.field("alias:" + join_mwe(alias));
  }
  return h.hex();
}

Report build_report(const CountsTable& counts, const CorpusStats& corpus_stats,
                    const std::vector<Target>& targets, const ReportConfig& config) {
  if (counts.lexicon_version != config.lexicon_version) {
    throw Error(ErrorCode::kConsistency, "counts were produced under lexicon version " +
                                             std::to_string(counts.lexicon_version) +
                                             ", report expects " +
                                             std::to_string(config.lexicon_version));
  }
  if (counts.window != config.window) {
    throw Error(ErrorCode::kConsistency, "counts were produced with a different window");
  }
  if (counts.total_tokens != corpus_stats.total_tokens) {
    throw Error(ErrorCode::kConsistency, "counts and corpus stats disagree on total tokens");
  }

  Report report;
  report.corpus = corpus_stats;
  report.config = config;
  report.fingerprint = config.fingerprint(corpus_stats, targets);

  const std::uint64_t total = corpus_stats.total_tokens;
  std::array<double, kCategoryCount> freq{};
  for (auto c : kAllCategories) {
    CategoryStats cs;
    cs.category = c;
    cs.corpus_count = counts.category_counts[index_of(c)];
    if (total > 0) {
      cs.relative_frequency = normalized_frequency(cs.corpus_count, total);
      freq[index_of(c)] = *cs.relative_frequency;
    }
    report.categories.push_back(cs);
  }

  for (const auto& t : targets) {
    TargetReport tr;
    tr.target_id = t.id;
    tr.display_name = t.display_name;
    auto m = counts.mentions.find(t.id);
    tr.mentions = m == counts.mentions.end() ? 0 : m->second;
    auto row = counts.co_counts.find(t.id);
    for (auto c : kAllCategories) {
      auto& cell = tr.cells[index_of(c)];
      cell.actual = row == counts.co_counts.end() ? 0 : row->second[index_of(c)];
      cell.proportion = proportion(cell.actual, tr.mentions);
      cell.expected = expected_count(freq[index_of(c)], static_cast<double>(tr.mentions));
      cell.deviation = deviation(static_cast<double>(cell.actual), cell.expected);
    }
    report.targets.push_back(std::move(tr));
  }
  std::stable_sort(report.targets.begin(), report.targets.end(),
                   [](const TargetReport& a, const TargetReport& b) {
                     if (a.mentions != b.mentions) return a.mentions > b.mentions;
                     return a.target_id < b.target_id;
                   });
  return report;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson optional_number(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string report_to_json(const Report& report) {
  ojson j;
  j["fingerprint"] = report.fingerprint;
  ojson cfg;
  cfg["window"] = report.config.window;
  cfg["lexicon_version"] = report.config.lexicon_version;
  cfg["lexicon_hash"] = to_hex(report.config.lexicon_hash);
  cfg["tokenizer"] = {{"lowercase", report.config.tokenizer.lowercase},
                      {"strip_punctuation", report.config.tokenizer.strip_punctuation},
                      {"keep_punctuation_tokens", report.config.tokenizer.keep_punctuation_tokens}};
  cfg["mwe_count"] = report.config.mwe_count;
  j["config"] = std::move(cfg);

  ojson corpus;
  corpus["total_tokens"] = report.corpus.total_tokens;
  corpus["doc_count"] = report.corpus.doc_count;
  ojson sites = ojson::object();
  for (const auto& [site, c] : report.corpus.per_site_counts) {
    sites[site] = {{"docs", c.docs}, {"tokens", c.tokens}};
  }
  corpus["per_site"] = std::move(sites);
  j["corpus"] = std::move(corpus);

  ojson cats = ojson::array();
  for (const auto& cs : report.categories) {
    ojson row;
    row["category"] = category_name(cs.category);
    row["corpus_count"] = cs.corpus_count;
    row["relative_frequency"] = optional_number(cs.relative_frequency);
    cats.push_back(std::move(row));
  }
  j["categories"] = std::move(cats);

  ojson targets = ojson::array();
  for (const auto& t : report.targets) {
    ojson row;
    row["target_id"] = t.target_id;
    row["display_name"] = t.display_name;
    row["mentions"] = t.mentions;
    ojson per = ojson::object();
    for (auto c : kAllCategories) {
      const auto& cell = t.cells[index_of(c)];
      per[std::string(category_name(c))] = {{"actual", cell.actual},
                                            {"proportion", optional_number(cell.proportion)},
                                            {"expected", cell.expected},
                                            {"deviation", cell.deviation}};
    }
    row["categories"] = std::move(per);
    targets.push_back(std::move(row));
  }
  j["targets"] = std::move(targets);
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

std::string report_to_csv(const Report& report) {
  std::ostringstream out;
  out << "target,mentions";
  for (auto c : kAllCategories) {
    const auto name = category_name(c);
    out << ',' << name << "_actual," << name << "_proportion," << name << "_expected," << name
        << "_deviation";
  }
  out << '\n';
  for (const auto& t : report.targets) {
    out << csv_field(t.target_id) << ',' << t.mentions;
    for (auto c : kAllCategories) {
      const auto& cell = t.cells[index_of(c)];
      out << ',' << cell.actual << ',' << (cell.proportion ? format_fixed(*cell.proportion, 4) : "")
          << ',' << format_fixed(cell.expected, 2) << ',' << format_fixed(cell.deviation, 2);
    }
    out << '\n';
  }
  return out.str();
}

std::string categories_to_csv(const Report& report) {
  std::ostringstream out;
  out << "category,corpus_count,relative_frequency\n";
  for (const auto& cs : report.categories) {
    out << category_name(cs.category) << ',' << cs.corpus_count << ','
        << (cs.relative_frequency ? format_fixed(*cs.relative_frequency, 5) : "") << '\n';
  }
  return out.str();
}

namespace {

template <typename CellFn>
std::string figure_csv(const Report& report, CellFn cell_text) {
  std::ostringstream out;
  out << "target";
  for (auto c : kAllCategories) out << ',' << category_name(c);
  out << '\n';
  for (const auto& t : report.targets) {
    out << csv_field(t.display_name);
    for (auto c : kAllCategories) out << ',' << cell_text(t.cells[index_of(c)]);
    out << '\n';
  }
  return out.str();
}

}  // namespace

std::string figure_counts_csv(const Report& report) {
  return figure_csv(report, [](const CategoryCell& cell) { return std::to_string(cell.actual); });
}

std::string figure_proportions_csv(const Report& report) {
  return figure_csv(report, [](const CategoryCell& cell) {
    return cell.proportion ? format_fixed(*cell.proportion, 6) : std::string();
  });
}

}  // namespace hatewatch
