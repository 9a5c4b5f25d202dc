#include "talechat/textproc.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace talechat::text {
namespace {

enum class CharClass { word, mark, other };

CharClass classify_code_point(UChar32 c) {
  if (c < 0) return CharClass::other;
  const auto mask = U_GET_GC_MASK(c);
  if (mask & (U_GC_L_MASK | U_GC_ND_MASK)) return CharClass::word;
  if (mask & U_GC_M_MASK) return CharClass::mark;
  return CharClass::other;
}

const icu::Normalizer2& nfd() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw std::runtime_error("ICU NFD normalizer unavailable");
  return *n;
}

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw std::runtime_error("ICU NFC normalizer unavailable");
  return *n;
}

// Returns an empty string when nothing but marks remains.
std::string fold(std::string_view term) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(term.data(), static_cast<int32_t>(term.size())));
  s.toLower(icu::Locale::getRoot());

  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString decomposed = nfd().normalize(s, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFD normalization failed");

  icu::UnicodeString stripped;
  for (int32_t i = 0; i < decomposed.length();) {
    const UChar32 c = decomposed.char32At(i);
    if (!(U_GET_GC_MASK(c) & U_GC_MN_MASK)) stripped.append(c);
    i += U16_LENGTH(c);
  }

  icu::UnicodeString composed = nfc().normalize(stripped, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");

  std::string out;
  composed.toUTF8String(out);
  return out;
}

bool is_space_byte(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Characters allowed to trail a terminator inside the same sentence.
bool is_closer(UChar32 c) {
  switch (c) {
    case '"':
    case '\'':
    case ')':
    case ']':
    case 0x00BB:  // »
    case 0x2019:  // ’
    case 0x201D:  // ”
      return true;
    default:
      return false;
  }
}

bool is_terminator(UChar32 c) { return c == '.' || c == '!' || c == '?' || c == 0x2026; }

// Unicode whitespace, decoded.
bool is_space_cp(UChar32 c) { return c >= 0 && u_isUWhiteSpace(c); }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());

  int32_t i = 0;
  int32_t start = -1;
  auto flush = [&](int32_t end) {
    if (start < 0) return;
    std::string_view surface = text.substr(static_cast<std::size_t>(start),
                                           static_cast<std::size_t>(end - start));
    std::string folded = fold(surface);
    if (!folded.empty()) {
      tokens.push_back(Token{std::string(surface), std::move(folded), static_cast<std::size_t>(start)});
    }
    start = -1;
  };

  while (i < length) {
    const int32_t here = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    switch (classify_code_point(c)) {
      case CharClass::word:
        if (start < 0) start = here;
        break;
      case CharClass::mark:
        break;  // extends a running token, ignored otherwise
      case CharClass::other:
        flush(here);
        break;
    }
  }
  flush(length);
  return tokens;
}

std::string normalize(std::string_view term) {
  if (term.empty()) throw std::invalid_argument("normalize: empty term");
  std::string out = fold(term);
  if (out.empty()) throw std::invalid_argument("normalize: term has no base characters");
  return out;
}

std::vector<std::string> normalized_terms(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.normalized));
  return out;
}

std::string normalized_phrase(std::string_view text) {
  std::string out;
  for (const auto& t : tokenize(text)) {
    if (!out.empty()) out.push_back(' ');
    out += t.normalized;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> sentence_spans(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());

  int32_t i = 0;
  int32_t start = -1;
  while (i < length) {
    const int32_t here = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (start < 0) {
      if (is_space_cp(c)) continue;
      start = here;
    }
    if (!is_terminator(c)) continue;

    // Swallow the rest of the terminator run and any closing quotes.
    int32_t end = i;
    while (end < length) {
      int32_t probe = end;
      UChar32 next = 0;
      U8_NEXT(bytes, probe, length, next);
      if (!is_terminator(next) && !is_closer(next)) break;
      end = probe;
    }
    // A terminator only ends a sentence before whitespace or end of text.
    bool boundary = end >= length;
    if (!boundary) {
      int32_t probe = end;
      UChar32 next = 0;
      U8_NEXT(bytes, probe, length, next);
      boundary = is_space_cp(next);
    }
    i = end;
    if (boundary) {
      spans.emplace_back(static_cast<std::size_t>(start), static_cast<std::size_t>(end));
      start = -1;
    }
  }
  if (start >= 0) {
    std::size_t end = text.size();
    while (end > static_cast<std::size_t>(start) && is_space_byte(text[end - 1])) --end;
    spans.emplace_back(static_cast<std::size_t>(start), end);
  }
  return spans;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (auto [b, e] : sentence_spans(text)) out.emplace_back(text.substr(b, e - b));
  return out;
}

StopwordList::StopwordList(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    if (!w.empty()) words_.insert(normalize(w));
  }
}

StopwordList StopwordList::parse(std::string_view contents) {
  std::vector<std::string> words;
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (auto& t : tokenize(line)) words.push_back(std::move(t.normalized));
  }
  return StopwordList(words);
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open stopword file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool StopwordList::contains(std::string_view normalized) const {
  return words_.find(std::string(normalized)) != words_.end();
}

std::vector<std::string> content_terms(std::string_view text, const StopwordList& stopwords) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) {
    if (!stopwords.contains(t.normalized)) out.push_back(std::move(t.normalized));
  }
  return out;
}

}  // namespace talechat::text
