#include "talechat/questions.hpp"

#include <algorithm>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace talechat::dialogue {
namespace {

const text::StopwordList& builtin_common_words() {
  static const text::StopwordList words(std::vector<std::string>{
      "i",       "mr",      "mrs",      "ms",       "dr",     "god",      "ok",       "monday",  "tuesday",
      "wednesday", "thursday", "friday", "saturday", "sunday", "january",  "february", "march",   "april",
      "may",     "june",    "july",     "august",   "september", "october", "november", "december",
  });
  return words;
}

bool starts_upper(std::string_view s) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  int32_t i = 0;
  UChar32 c = 0;
  U8_NEXT(bytes, i, static_cast<int32_t>(s.size()), c);
  return c >= 0 && u_isupper(c);
}

// Opening quotes or a colon right before a word start reported speech,
// where capitals are not names.
bool follows_opener(std::string_view sentence, std::size_t offset) {
  while (offset > 0 && sentence[offset - 1] == ' ') --offset;
  if (offset == 0) return false;
  const char prev = sentence[offset - 1];
  if (prev == '"' || prev == '\'' || prev == '(' || prev == ':') return true;
  // U+201C and U+2018 end in 0x9C / 0x98 after E2 80.
  if (offset >= 3 && static_cast<unsigned char>(sentence[offset - 3]) == 0xE2 &&
      static_cast<unsigned char>(sentence[offset - 2]) == 0x80) {
    const auto last = static_cast<unsigned char>(prev);
    return last == 0x9C || last == 0x98;
  }
  return false;
}

std::string strip_terminal(std::string_view s) {
  static constexpr std::string_view kTrailing = ".!?\"')]";
  while (!s.empty()) {
    if (kTrailing.find(s.back()) != std::string_view::npos || s.back() == ' ') {
      s.remove_suffix(1);
    } else if (s.size() >= 3 && static_cast<unsigned char>(s[s.size() - 3]) == 0xE2 &&
               static_cast<unsigned char>(s[s.size() - 2]) == 0x80) {
      s.remove_suffix(3);  // …, ’, ” and friends
    } else {
      break;
    }
  }
  return std::string(s);
}

}  // namespace

std::string_view followup_rule_name(FollowupRule r) {
  switch (r) {
    case FollowupRule::ask_emotions_if_negative: return "ask_emotions_if_negative";
    case FollowupRule::confirm_salient_emotion: return "confirm_salient_emotion";
    case FollowupRule::active_listening: return "active_listening";
    case FollowupRule::contrast_answer: return "contrast_answer";
    case FollowupRule::compare_summary: return "compare_summary";
    case FollowupRule::check_entity: return "check_entity";
    case FollowupRule::acknowledge: return "acknowledge";
  }
  return "acknowledge";
}

std::optional<FollowupRule> parse_followup_rule(std::string_view s) {
  for (auto r : {FollowupRule::ask_emotions_if_negative, FollowupRule::confirm_salient_emotion,
                 FollowupRule::active_listening, FollowupRule::contrast_answer, FollowupRule::compare_summary,
                 FollowupRule::check_entity, FollowupRule::acknowledge}) {
    if (followup_rule_name(r) == s) return r;
  }
  return std::nullopt;
}

const std::vector<OpenQuestion>& default_open_questions() {
  static const std::vector<OpenQuestion> questions{
      {"What are your feelings after reading the tale?", FollowupRule::confirm_salient_emotion},
      {"Who would you recommend this tale to?", FollowupRule::active_listening},
      {"Tell me if you would have done the same or something similar?", FollowupRule::active_listening},
      {"What part of the tale did you like the most?", FollowupRule::contrast_answer},
      {"Could you summarize the tale in a few sentences?", FollowupRule::compare_summary},
  };
  return questions;
}

std::string join_emotions(const std::set<Emotion>& emotions) {
  std::vector<std::string> names;
  for (auto e : emotions) names.emplace_back(emotion_display_name(e));
  std::sort(names.begin(), names.end());
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += (i + 1 == names.size()) ? " and " : ", ";
    out += names[i];
  }
  return out;
}

std::vector<std::string> detect_person_names(std::string_view body, const text::StopwordList& common_words) {
  std::vector<std::string> names;
  for (auto [b, e] : text::sentence_spans(body)) {
    const auto sentence = body.substr(b, e - b);
    const auto tokens = text::tokenize(sentence);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto& t = tokens[i];
      if (!starts_upper(t.surface)) continue;
      if (common_words.contains(t.normalized) || builtin_common_words().contains(t.normalized)) continue;
      if (follows_opener(sentence, t.offset)) continue;
      if (std::find(names.begin(), names.end(), t.surface) == names.end()) names.push_back(t.surface);
    }
  }
  return names;
}

std::vector<Question> generate_tale_questions(const Tale& tale, const std::vector<OpenQuestion>& open_questions,
                                              const text::StopwordList& common_words) {
  std::vector<Question> out;
  if (!tale.emotions.empty()) {
    out.push_back(Question{QuestionKind::closed_emotion,
                           "Do you think that this tale deals with '" + join_emotions(tale.emotions) + "' emotions?",
                           FollowupRule::ask_emotions_if_negative, {}});
  }
  for (const auto& q : open_questions) out.push_back(Question{QuestionKind::open_fixed, q.text, q.followup, {}});

  const auto names = detect_person_names(tale.body, common_words);
  for (auto [b, e] : text::sentence_spans(tale.body)) {
    const auto sentence = tale.body.substr(b, e - b);
    const auto tokens = text::tokenize(sentence);
    if (tokens.size() < 3) continue;
    const auto& subject = tokens.front();
    if (subject.offset != 0) continue;
    if (std::find(names.begin(), names.end(), subject.surface) == names.end()) continue;
    const auto rest = strip_terminal(sentence.substr(subject.surface.size()));
    Question q{QuestionKind::entity, "Who" + rest + "?", FollowupRule::check_entity, subject.surface};
    if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(std::move(q));
  }
  return out;
}

}  // namespace talechat::dialogue
