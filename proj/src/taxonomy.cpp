#include "talechat/taxonomy.hpp"

#include <algorithm>
#include <stdexcept>

#include "talechat/textproc.hpp"

namespace talechat {
namespace {

struct EmotionInfo {
  Emotion emotion;
  std::string_view name;
  std::string_view display;
  Valence valence;
};

constexpr std::array<EmotionInfo, kEmotionCount> kEmotions{{
    {Emotion::joy, "joy", "joy", Valence::positive},
    {Emotion::desire, "desire", "desire", Valence::positive},
    {Emotion::certainty, "certainty", "certainty", Valence::positive},
    {Emotion::strength, "strength", "strength", Valence::positive},
    {Emotion::enthusiasm, "enthusiasm", "enthusiasm", Valence::positive},
    {Emotion::calm, "calm", "calm", Valence::positive},
    {Emotion::pleasure, "pleasure", "pleasure", Valence::positive},
    {Emotion::love, "love", "love", Valence::positive},
    {Emotion::courage, "courage", "courage", Valence::positive},
    {Emotion::fun, "fun", "fun", Valence::positive},
    {Emotion::liking, "liking", "liking", Valence::positive},
    {Emotion::compassion, "compassion", "compassion", Valence::positive},
    {Emotion::satisfaction, "satisfaction", "satisfaction", Valence::positive},
    {Emotion::tension, "tension", "tension", Valence::negative},
    {Emotion::phobia, "phobia", "phobia", Valence::negative},
    {Emotion::boredom, "boredom", "boredom", Valence::negative},
    {Emotion::humiliation, "humiliation", "humiliation", Valence::negative},
    {Emotion::discomfort, "discomfort", "discomfort", Valence::negative},
    {Emotion::sadness, "sadness", "sadness", Valence::negative},
    {Emotion::apathy, "apathy", "apathy", Valence::negative},
    {Emotion::doubt, "doubt", "doubt", Valence::negative},
    {Emotion::pain, "pain", "pain", Valence::negative},
    {Emotion::frustration, "frustration", "frustration", Valence::negative},
    {Emotion::hatred, "hatred", "hatred", Valence::negative},
    {Emotion::exhaustion, "exhaustion", "exhaustion", Valence::negative},
    {Emotion::emotional_dependency, "emotional_dependency", "emotional dependency", Valence::negative},
    {Emotion::attachment, "attachment", "attachment", Valence::negative},
    {Emotion::fear, "fear", "fear", Valence::negative},
    {Emotion::arrogance, "arrogance", "arrogance", Valence::negative},
    {Emotion::anger, "anger", "anger", Valence::negative},
}};

static_assert([] {
  for (std::size_t i = 0; i < kEmotions.size(); ++i) {
    if (static_cast<std::size_t>(kEmotions[i].emotion) != i) return false;
  }
  return true;
}());

const EmotionInfo& info(Emotion e) { return kEmotions.at(emotion_index(e)); }

std::string theme_key(std::string_view name) {
  std::string key;
  for (const auto& t : text::tokenize(name)) {
    if (!key.empty()) key.push_back('_');
    key += t.normalized;
  }
  return key;
}

}  // namespace

const std::array<Emotion, kEmotionCount>& all_emotions() {
  static const auto all = [] {
    std::array<Emotion, kEmotionCount> out{};
    for (std::size_t i = 0; i < kEmotionCount; ++i) out[i] = kEmotions[i].emotion;
    return out;
  }();
  return all;
}

std::string_view emotion_name(Emotion e) { return info(e).name; }
std::string_view emotion_display_name(Emotion e) { return info(e).display; }
Valence emotion_valence(Emotion e) { return info(e).valence; }

std::string_view valence_name(Valence v) { return v == Valence::positive ? "positive" : "negative"; }

std::optional<Emotion> parse_emotion(std::string_view name) {
  // "Emotional dependency", "emotional_dependency" and "EMOTIONAL-DEPENDENCY"
  // all reduce to the same key.
  const std::string key = theme_key(name);
  if (key.empty()) return std::nullopt;
  for (const auto& e : kEmotions) {
    if (e.name == key) return e.emotion;
  }
  return std::nullopt;
}

ThemeId::ThemeId(std::string name) : name_(theme_key(name)) {
  if (name_.empty()) throw std::invalid_argument("empty theme name");
}

const std::vector<std::string>& default_theme_names() {
  static const std::vector<std::string> names{
      "depression", "resilience", "stress", "addiction", "abortion", "sex", "adolescence", "bullying",
  };
  return names;
}

}  // namespace talechat
