#include <gtest/gtest.h>

#include <set>

#include "talechat/taxonomy.hpp"

namespace talechat {
namespace {

const std::vector<std::string> kPositive = {"joy",     "desire",     "certainty", "strength", "enthusiasm",
                                            "calm",    "pleasure",   "love",      "courage",  "fun",
                                            "liking",  "compassion", "satisfaction"};
const std::vector<std::string> kNegative = {
    "tension", "phobia",      "boredom", "humiliation", "discomfort", "sadness",
    "apathy",  "doubt",       "pain",    "frustration", "hatred",     "exhaustion",
    "emotional_dependency",   "attachment", "fear",     "arrogance",  "anger"};

TEST(Taxonomy, ThirtyEmotionsInListingOrder) {
  std::vector<std::string> positive, negative;
  for (auto e : all_emotions()) {
    (emotion_valence(e) == Valence::positive ? positive : negative).emplace_back(emotion_name(e));
  }
  EXPECT_EQ(positive, kPositive);
  EXPECT_EQ(negative, kNegative);
  EXPECT_EQ(all_emotions().size(), 30u);
}

TEST(Taxonomy, IndexMatchesPosition) {
  for (std::size_t i = 0; i < all_emotions().size(); ++i) EXPECT_EQ(emotion_index(all_emotions()[i]), i);
}

TEST(Taxonomy, ParseAcceptsIdentifiersAndDisplayNames) {
  for (auto e : all_emotions()) {
    EXPECT_EQ(parse_emotion(emotion_name(e)), e);
    EXPECT_EQ(parse_emotion(emotion_display_name(e)), e);
  }
  EXPECT_EQ(parse_emotion("Emotional Dependency"), Emotion::emotional_dependency);
  EXPECT_EQ(parse_emotion("TENSIÓN"), Emotion::tension);
  EXPECT_EQ(parse_emotion("Sadnéss"), Emotion::sadness);
  EXPECT_EQ(parse_emotion("happiness"), std::nullopt);
  EXPECT_EQ(parse_emotion(""), std::nullopt);
}

TEST(Taxonomy, DisplayNamesAreDistinct) {
  std::set<std::string_view> seen;
  for (auto e : all_emotions()) EXPECT_TRUE(seen.insert(emotion_display_name(e)).second);
  EXPECT_EQ(emotion_display_name(Emotion::emotional_dependency), "emotional dependency");
}

TEST(Taxonomy, ThemeIdsAreNormalized) {
  EXPECT_EQ(ThemeId("Mental Health").name(), "mental_health");
  EXPECT_EQ(ThemeId("resilience"), ThemeId("Resilience"));
  EXPECT_FALSE(default_theme_names().empty());
}

}  // namespace
}  // namespace talechat
