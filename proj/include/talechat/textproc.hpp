#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace talechat::text {

struct Token {
  std::string surface;
  std::string normalized;
  std::size_t offset = 0;  // byte offset of surface in the input

  bool operator==(const Token&) const = default;
};

/// Splits UTF-8 text into runs of letters and digits. Combining marks that
/// follow a letter stay attached to it. Invalid UTF-8 bytes act as
/// separators.
std::vector<Token> tokenize(std::string_view text);

/// Lowercases, folds diacritics and recomposes to NFC. Throws
/// std::invalid_argument on empty input or when nothing survives folding.
std::string normalize(std::string_view term);

/// Normalized tokens only, in order.
std::vector<std::string> normalized_terms(std::string_view text);

/// Normalized tokens joined by single spaces. Used for phrase matching.
std::string normalized_phrase(std::string_view text);

/// Byte ranges [begin, end) of each sentence. Only whitespace lies between
/// consecutive ranges and before the first / after the last one.
std::vector<std::pair<std::size_t, std::size_t>> sentence_spans(std::string_view text);

/// Sentences without the surrounding whitespace. Terminators are
/// '.', '!', '?' and U+2026, and stay with their sentence.
std::vector<std::string> split_sentences(std::string_view text);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(const std::vector<std::string>& words);

  /// One word per line, '#' starts a comment.
  static StopwordList load(const std::filesystem::path& path);
  static StopwordList parse(std::string_view contents);

  bool contains(std::string_view normalized) const;
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Normalized terms of `text` minus stopwords.
std::vector<std::string> content_terms(std::string_view text, const StopwordList& stopwords);

}  // namespace talechat::text
