#include "hatewatch/text.hpp"

#include <fstream>

#include "hatewatch/error.hpp"

namespace hatewatch {

void TokenizerConfig::validate() const {
  if (strip_punctuation && keep_punctuation_tokens) {
    throw Error(ErrorCode::kInvalidArgument,
                "strip_punctuation and keep_punctuation_tokens are mutually exclusive");
  }
}

std::string TokenizerConfig::describe() const {
  std::string out = lowercase ? "lower" : "cased";
  if (strip_punctuation) {
    out += "+strip";
  } else if (keep_punctuation_tokens) {
    out += "+punct";
  } else {
    out += "+raw";
  }
  return out;
}

char32_t decode_utf8(std::string_view text, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(text[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + len > text.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(text[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  // Overlong encodings and surrogates.
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return 0xFFFD;
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space_char(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000: case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200B;
  }
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA || cp == 0xB2 || cp == 0xB3 || cp == 0xB9;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp < 0x370) return true;  // Latin, IPA, modifiers, combining marks
  if (cp < 0x2000) {
    // Scattered punctuation inside letter blocks.
    switch (cp) {
      case 0x37E: case 0x387: case 0x55A: case 0x55B: case 0x55C: case 0x55D:
      case 0x55E: case 0x55F: case 0x589: case 0x58A: case 0x5BE: case 0x5C0:
      case 0x5C3: case 0x5C6: case 0x5F3: case 0x5F4: case 0x60C: case 0x60D:
      case 0x61B: case 0x61E: case 0x61F: case 0x66A: case 0x66B: case 0x66C:
      case 0x66D: case 0x6D4: case 0x964: case 0x965: case 0x970: case 0xE4F:
      case 0xE5A: case 0xE5B: case 0x10FB: case 0x1361: case 0x1362: case 0x1363:
      case 0x1364: case 0x1365: case 0x1366: case 0x1367: case 0x1368:
        return false;
      default:
        return true;
    }
  }
  if (cp < 0x2C00) return cp >= 0x2070 && cp <= 0x209F && cp != 0x207A && cp != 0x207B;
  if (cp < 0x2E00) return true;        // Glagolitic, Coptic, Georgian supplement, ...
  if (cp < 0x3040) return cp == 0x3005 || cp == 0x3006 || cp == 0x3007;
  if (cp < 0xA000) return cp != 0x30FB;  // Kana, CJK
  if (cp < 0xD800) return true;
  if (cp < 0xF900) return false;       // surrogates, private use
  if (cp < 0xFE00) return true;
  if (cp < 0xFE70) return false;       // variation selectors..small forms
  if (cp < 0xFF00) return cp != 0xFEFF;
  if (cp < 0xFFF0) {
    return (cp >= 0xFF10 && cp <= 0xFF19) || (cp >= 0xFF21 && cp <= 0xFF3A) ||
           (cp >= 0xFF41 && cp <= 0xFF5A) || (cp >= 0xFF66 && cp <= 0xFFDC);
  }
  if (cp < 0x10000) return false;
  return cp < 0x1F000 || (cp >= 0x20000 && cp < 0x40000);
}

namespace {

char32_t lower_code_point(char32_t cp) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return 'i';
    if (cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    if (cp == 0x178) return 0xFF;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
      return (cp % 2 == 1) ? cp + 1 : cp;
    }
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 0x25;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if ((cp >= 0x460 && cp <= 0x481) || (cp >= 0x48A && cp <= 0x4BF)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  return cp;
}

bool is_ascii(std::string_view s) {
  for (char c : s) {
    if (static_cast<unsigned char>(c) >= 0x80) return false;
  }
  return true;
}

void emit_token(TokenSequence& out, std::string_view text, std::size_t start, std::size_t end,
                bool lowercase) {
  if (start >= end) return;
  auto piece = text.substr(start, end - start);
  out.tokens.push_back(lowercase ? fold_case(piece) : std::string(piece));
  out.spans.push_back({start, end});
}

}  // namespace

std::string fold_case(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  if (is_ascii(text)) {
    for (char c : text) out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c + 0x20) : c);
    return out;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t begin = pos;
    const char32_t cp = decode_utf8(text, pos);
    if (cp == 0xFFFD && pos - begin == 1 && static_cast<unsigned char>(text[begin]) >= 0x80) {
      out.push_back(text[begin]);  // keep malformed bytes as-is
      continue;
    }
    append_utf8(out, lower_code_point(cp));
  }
  return out;
}

TokenSequence tokenize(std::string_view text, const TokenizerConfig& config) {
  config.validate();
  TokenSequence out;
  const bool by_chunk = !config.strip_punctuation && !config.keep_punctuation_tokens;

  std::size_t pos = 0;
  std::size_t token_start = 0;
  bool in_token = false;
  while (pos < text.size()) {
    const std::size_t cp_start = pos;
    const char32_t cp = decode_utf8(text, pos);
    const bool space = is_space_char(cp);
    const bool word = !space && (by_chunk || is_word_char(cp));
    if (word) {
      if (!in_token) {
        token_start = cp_start;
        in_token = true;
      }
      continue;
    }
    if (in_token) {
      emit_token(out, text, token_start, cp_start, config.lowercase);
      in_token = false;
    }
    if (!space && config.keep_punctuation_tokens) {
      emit_token(out, text, cp_start, pos, false);
    }
  }
  if (in_token) emit_token(out, text, token_start, text.size(), config.lowercase);
  return out;
}

std::string join_mwe(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back('_');
    out += tokens[i];
  }
  return out;
}

std::string respace_mwe(std::string_view term) {
  std::string out(term);
  for (char& c : out) {
    if (c == '_') c = ' ';
  }
  return out;
}

MweMerger::MweMerger(const std::vector<std::vector<std::string>>& phrases) {
  for (const auto& p : phrases) add(p);
}

void MweMerger::add(std::span<const std::string> phrase) {
  if (phrase.size() < 2) return;
  std::uint32_t node = 0;
  for (const auto& tok : phrase) {
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
  if (!nodes_[node].terminal) {
    nodes_[node].terminal = true;
    ++phrase_count_;
  }
}

std::size_t MweMerger::longest_match(std::span<const std::string> tokens, std::size_t pos) const {
  std::size_t best = 0;
  std::uint32_t node = 0;
  for (std::size_t i = pos; i < tokens.size(); ++i) {
    const auto& next = nodes_[node].next;
    auto it = next.find(tokens[i]);
    if (it == next.end()) break;
    node = it->second;
    if (nodes_[node].terminal) best = i - pos + 1;
  }
  return best;
}

std::vector<std::string> MweMerger::merge(std::span<const std::string> tokens) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::size_t len = empty() ? 0 : longest_match(tokens, i);
    if (len >= 2) {
      out.push_back(join_mwe(tokens.subspan(i, len)));
      i += len;
    } else {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  return out;
}

TokenSequence MweMerger::merge(const TokenSequence& seq) const {
  if (empty()) return seq;
  TokenSequence out;
  out.tokens.reserve(seq.tokens.size());
  out.spans.reserve(seq.spans.size());
  const std::span<const std::string> tokens(seq.tokens);
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::size_t len = longest_match(tokens, i);
    if (len >= 2) {
      out.tokens.push_back(join_mwe(tokens.subspan(i, len)));
      out.spans.push_back({seq.spans[i].start, seq.spans[i + len - 1].end});
      i += len;
    } else {
      out.tokens.push_back(tokens[i]);
      out.spans.push_back(seq.spans[i]);
      ++i;
    }
  }
  return out;
}

std::vector<std::string> merge_mwes(std::span<const std::string> tokens, const MweMerger& merger) {
  return merger.merge(tokens);
}

MweMerger load_mwe_file(const std::string& path, const TokenizerConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open MWE file: " + path);
  MweMerger merger;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    merger.add(tokenize(line, config).tokens);
  }
  return merger;
}

}  // namespace hatewatch
