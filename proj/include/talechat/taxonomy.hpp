#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace talechat {

enum class Valence : std::uint8_t { positive, negative };

// The 30-emotion taxonomy. Positive emotions come first, then negative ones,
// each group in its canonical listing order.
enum class Emotion : std::uint8_t {
  joy,
  desire,
  certainty,
  strength,
  enthusiasm,
  calm,
  pleasure,
  love,
  courage,
  fun,
  liking,
  compassion,
  satisfaction,
  tension,
  phobia,
  boredom,
  humiliation,
  discomfort,
  sadness,
  apathy,
  doubt,
  pain,
  frustration,
  hatred,
  exhaustion,
  emotional_dependency,
  attachment,
  fear,
  arrogance,
  anger,
};

inline constexpr std::size_t kEmotionCount = 30;

const std::array<Emotion, kEmotionCount>& all_emotions();

/// Canonical lowercase identifier, e.g. "emotional_dependency".
std::string_view emotion_name(Emotion e);

/// Human-readable English name, e.g. "emotional dependency".
std::string_view emotion_display_name(Emotion e);

Valence emotion_valence(Emotion e);

/// Accepts the canonical identifier or the display name, in any case and
/// with or without diacritics.
std::optional<Emotion> parse_emotion(std::string_view name);

inline std::size_t emotion_index(Emotion e) { return static_cast<std::size_t>(e); }

std::string_view valence_name(Valence v);

struct EmotionCard {
  Emotion emotion{};
  std::string definition;
  std::vector<std::string> related_terms;
  std::vector<std::string> video_urls;

  bool operator==(const EmotionCard&) const = default;
};

/// A psychological theme such as "resilience". Names are normalized and use
/// '_' in place of spaces.
class ThemeId {
 public:
  ThemeId() = default;
  explicit ThemeId(std::string name);

  const std::string& name() const { return name_; }

  auto operator<=>(const ThemeId&) const = default;

 private:
  std::string name_;
};

/// The APA topics used when no theme file overrides them.
const std::vector<std::string>& default_theme_names();

}  // namespace talechat
