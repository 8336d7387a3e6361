#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hatewatch/corpus.hpp"
#include "hatewatch/error.hpp"
#include "temp_dir.hpp"

using namespace hatewatch;

namespace {

std::string line(const std::string& id, const std::string& text, const std::string& site = "a.se") {
  return R"({"id":")" + id + R"(","site":")" + site + R"(","timestamp":"2017-01-01T00:00:00Z","text":")" +
         text + "\"}\n";
}

Corpus parse(const std::string& s, IngestPolicy policy = {}) {
  std::istringstream in(s);
  return parse_jsonl(in, policy);
}

}  // namespace

TEST(Ingest, ThreeValidLines) {
  const auto c = parse(line("1", "a") + line("2", "b") + line("3", "c"));
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c.skipped, 0u);
  EXPECT_EQ(c.documents[1].id, "2");
}

TEST(Ingest, MalformedLineSkipped) {
  const auto c = parse(line("1", "a") + "{not json\n" + line("2", "b"));
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.skipped, 1u);
  EXPECT_EQ(c.malformed_lines, (std::vector<std::size_t>{2}));
}

TEST(Ingest, EmptyInput) {
  const auto c = parse("");
  EXPECT_EQ(c.size(), 0u);
  EXPECT_EQ(c.skipped, 0u);
}

TEST(Ingest, BlankLinesIgnored) {
  const auto c = parse("\n" + line("1", "a") + "   \n\n");
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.lines_read, 1u);
  EXPECT_EQ(c.skipped, 0u);
}

TEST(Ingest, SchemaViolationsAreMalformed) {
  const std::string bad =
      R"({"id":"1","site":"s","text":"no timestamp"})" "\n"
      R"({"id":2,"site":"s","timestamp":"2017-01-01","text":"numeric id"})" "\n"
      R"({"id":"3","site":"s","timestamp":"yesterday","text":"bad date"})" "\n"
      R"(["array"])" "\n"
      R"({"id":"","site":"s","timestamp":"2017-01-01","text":"empty id"})" "\n";
  const auto c = parse(bad + line("ok", "fine"));
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.skipped, 5u);
}

TEST(Ingest, DuplicateIdIsMalformed) {
  const auto c = parse(line("1", "a") + line("1", "b"));
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.documents[0].text, "a");
  EXPECT_EQ(c.skipped, 1u);
}

TEST(Ingest, TooManyMalformedLinesIsFormatError) {
  std::string s;
  for (int i = 0; i < 18; ++i) s += line(std::to_string(i), "ok");
  for (int i = 0; i < 12; ++i) s += "garbage\n";
  try {
    parse(s);
    FAIL() << "expected a format error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("19"), std::string::npos);
    EXPECT_NE(msg.find("28"), std::string::npos);
    EXPECT_EQ(msg.find(" 29"), std::string::npos) << "only the first ten offenders are listed";
  }
}

TEST(Ingest, TenPercentMalformedIsTolerated) {
  std::string s;
  for (int i = 0; i < 27; ++i) s += line(std::to_string(i), "ok");
  for (int i = 0; i < 3; ++i) s += "garbage\n";
  EXPECT_EQ(parse(s).skipped, 3u);
}

TEST(Ingest, MissingFileIsIoError) {
  try {
    ingest_jsonl("/nonexistent/corpus.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Ingest, WriteThenReadRoundTrips) {
  testutil::TempDir dir;
  std::vector<RawDocument> docs = {{"1", "a.se", "2017-01-01", "Hej \"där\"\nny rad"},
                                   {"2", "b.se", "2017-01-02T10:00:00Z", "åäö"}};
  {
    std::ofstream out(dir.file("c.jsonl"));
    write_jsonl(docs, out);
  }
  const auto c = ingest_jsonl(dir.file("c.jsonl"));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.documents[0].text, docs[0].text);
  EXPECT_EQ(c.documents[1].timestamp, docs[1].timestamp);
}

TEST(CorpusStats, TotalsAreAdditive) {
  Corpus c;
  c.documents = {{"1", "a", "2017-01-01", "ett två tre fyra fem"},
                 {"2", "b", "2017-01-01", "ett två tre fyra fem sex sju"}};
  const auto s = corpus_stats(c, {}, MweMerger{});
  EXPECT_EQ(s.total_tokens, 12u);
  EXPECT_EQ(s.doc_count, 2u);
  EXPECT_EQ(s.per_site_counts.at("a").tokens, 5u);
  EXPECT_EQ(s.per_site_counts.at("b").tokens, 7u);
}

TEST(CorpusStats, MergedPhraseCountsAsOneToken) {
  Corpus c;
  c.documents = {{"1", "a", "2017-01-01", "han borde dödas nu"}};
  EXPECT_EQ(corpus_stats(c, {}, MweMerger(std::vector<std::vector<std::string>>{{"borde", "dödas"}})).total_tokens, 3u);
}

TEST(CorpusStats, SiteWordCountsSum) {
  CorpusStats total;
  const std::pair<const char*, std::uint64_t> sites[] = {{"avpixlat.info", 99472281},
                                                         {"nordfront.se", 3125218},
                                                         {"nyatider.nu", 124949},
                                                         {"motgift.nu", 68992},
                                                         {"nordiskungdom.com", 6530}};
  for (const auto& [site, words] : sites) {
    CorpusStats s;
    s.total_tokens = words;
    s.doc_count = 1;
    s.per_site_counts[site] = {1, words};
    total += s;
  }
  EXPECT_EQ(total.total_tokens, 102797970u);
  EXPECT_EQ(total.per_site_counts.size(), 5u);
}

TEST(CorpusStats, ShardSumEqualsWhole) {
  Corpus a, b, whole;
  a.documents = {{"1", "x", "2017-01-01", "ett två"}, {"2", "y", "2017-01-01", "tre"}};
  b.documents = {{"3", "x", "2017-01-01", "fyra fem sex"}};
  whole.documents = a.documents;
  whole.documents.insert(whole.documents.end(), b.documents.begin(), b.documents.end());
  const MweMerger m;
  EXPECT_EQ(corpus_stats(a, {}, m) + corpus_stats(b, {}, m), corpus_stats(whole, {}, m));
}
