#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "talechat/taxonomy.hpp"

namespace talechat {

enum class TaleStatus { approved, pending, rejected };

std::string_view status_name(TaleStatus s);
std::optional<TaleStatus> parse_status(std::string_view s);

struct Tale {
  std::string id;
  std::string title;
  std::string body;
  std::set<Emotion> emotions;
  std::set<ThemeId> themes;
  std::optional<std::string> source_url;
  std::optional<int> min_age;
  TaleStatus status = TaleStatus::pending;
  std::optional<std::string> submitted_by;

  bool operator==(const Tale&) const = default;

  /// Absent min_age means suitable for everyone.
  bool suitable_for_age(int age) const { return !min_age || age >= *min_age; }
};

struct Quote {
  std::string id;
  std::string text;
  std::set<Emotion> emotions;

  bool operator==(const Quote&) const = default;
};

/// One invariant violation, attributed to the offending record.
struct Violation {
  std::string subject;  // tale/quote id, "emotions.xml", ...
  std::string message;

  std::string to_string() const { return subject + ": " + message; }
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

struct TaleDraft {
  std::string title;
  std::string body;
  std::optional<std::string> source_url;
  std::optional<int> min_age;
  std::optional<std::string> submitted_by;
};

struct ReviewDecision {
  bool approve = false;
  std::set<Emotion> emotions;
  std::set<ThemeId> themes;

  static ReviewDecision approved(std::set<Emotion> e, std::set<ThemeId> t) {
    return ReviewDecision{true, std::move(e), std::move(t)};
  }
  static ReviewDecision rejected() { return ReviewDecision{}; }
};

struct StatusCounts {
  std::size_t approved = 0;
  std::size_t pending = 0;
  std::size_t rejected = 0;
};

/// Tales, quotes, emotion cards and the theme registry.
///
/// Approved and rejected tales are terminal; the only mutations are
/// submit() and review() on pending tales. Callers serialize mutation.
class Corpus {
 public:
  std::vector<Tale> tales;
  std::vector<Quote> quotes;
  std::vector<EmotionCard> cards;
  std::vector<ThemeId> themes;

  bool operator==(const Corpus&) const = default;

  const Tale* find_tale(std::string_view id) const;
  const EmotionCard* card(Emotion e) const;
  bool has_theme(const ThemeId& theme) const;
  StatusCounts counts() const;

  std::vector<const Tale*> approved_tales() const;

  /// Every invariant violation, in file order. Empty when valid.
  std::vector<Violation> validate() const;

  /// Stores the draft as pending and returns its new id. Throws
  /// std::invalid_argument for an empty title or body.
  std::string submit(TaleDraft draft);

  /// pending -> approved (with tags) or pending -> rejected.
  const Tale& review(std::string_view id, const ReviewDecision& decision);

 private:
  Tale* find_mutable(std::string_view id);
};

/// Loads a corpus directory (tales.xml, quotes.xml, emotions.xml,
/// themes.txt) or a single exported corpus file, then validates it.
/// Throws xml::ParseError or ValidationError.
Corpus load_corpus(const std::filesystem::path& path);

/// Tale documents only, in `tales.xml` layout.
std::vector<Tale> read_tales_file(const std::filesystem::path& path);
std::string serialize_tales(const std::vector<Tale>& tales);

/// Single-file dump that load_corpus accepts. Deterministic.
std::string serialize_corpus(const Corpus& corpus);
void export_corpus(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace talechat
