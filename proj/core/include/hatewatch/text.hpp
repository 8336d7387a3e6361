#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hatewatch {

// Tokenizer behaviour. The default is "aggressive" tokenization: lowercase
// word tokens with all punctuation removed.
struct TokenizerConfig {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool keep_punctuation_tokens = false;

  // Throws Error(kInvalidArgument) when both punctuation modes are enabled.
  void validate() const;

  // Stable one-word description used in report fingerprints.
  std::string describe() const;

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

// Half-open byte range [start, end) into the source text.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<CharSpan> spans;
};

// Unicode-aware word tokenization over UTF-8 input.
//
// Word characters are letters, digits and combining marks. Whitespace always
// separates tokens. Punctuation and symbols are handled per config:
//   strip_punctuation        punctuation separates tokens and is dropped
//   keep_punctuation_tokens  every punctuation code point becomes a token
//   neither                  tokens are whitespace-delimited chunks
// Invalid UTF-8 bytes are treated as punctuation.
TokenSequence tokenize(std::string_view text, const TokenizerConfig& config);

// Lowercases the scripts we can fold without ICU: Latin (ASCII, Latin-1,
// Extended-A), Greek and Cyrillic. Other code points pass through.
std::string fold_case(std::string_view text);

// Decodes one code point starting at text[pos]; advances pos. Returns
// 0xFFFD and advances by one byte on malformed input.
char32_t decode_utf8(std::string_view text, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

bool is_word_char(char32_t cp);
bool is_space_char(char32_t cp);

// Joins MWE tokens with '_' and splits them back.
std::string join_mwe(std::span<const std::string> tokens);
std::string respace_mwe(std::string_view term);

// Replaces every leftmost-longest occurrence of a multiword phrase with a
// single underscore-joined token. Built once, applied to many documents.
class MweMerger {
 public:
  MweMerger() = default;
  // Phrases with fewer than two tokens are ignored.
  explicit MweMerger(const std::vector<std::vector<std::string>>& phrases);

  void add(std::span<const std::string> phrase);

  std::vector<std::string> merge(std::span<const std::string> tokens) const;

  // Merges tokens and also collapses each merged run's spans into one.
  TokenSequence merge(const TokenSequence& seq) const;

  std::size_t phrase_count() const { return phrase_count_; }
  bool empty() const { return phrase_count_ == 0; }

 private:
  struct Node {
    std::unordered_map<std::string, std::uint32_t> next;
    bool terminal = false;
  };

  // Length of the longest phrase starting at tokens[pos], or 0.
  std::size_t longest_match(std::span<const std::string> tokens, std::size_t pos) const;

  std::vector<Node> nodes_{1};
  std::size_t phrase_count_ = 0;
};

// Convenience wrapper for the free-function form.
std::vector<std::string> merge_mwes(std::span<const std::string> tokens, const MweMerger& merger);

// Reads an MWE file: one phrase per line, tokens separated by spaces. Each
// phrase is normalized with the given tokenizer config.
MweMerger load_mwe_file(const std::string& path, const TokenizerConfig& config);

}  // namespace hatewatch
