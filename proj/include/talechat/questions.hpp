#pragma once

#include <set>
#include <string>
#include <vector>

#include "talechat/corpus.hpp"
#include "talechat/textproc.hpp"

namespace talechat::dialogue {

enum class QuestionKind { closed_emotion, open_fixed, entity, generated };

/// What the dialogue does with the user's answer.
enum class FollowupRule {
  ask_emotions_if_negative,  // closed emotion question
  confirm_salient_emotion,   // classify the answer, ask for confirmation
  active_listening,          // empathetic paraphrase
  contrast_answer,           // show the generation service's own answer
  compare_summary,           // show a summary next to the user's
  check_entity,              // compare with the name that was replaced
  acknowledge,
};

std::string_view followup_rule_name(FollowupRule r);
std::optional<FollowupRule> parse_followup_rule(std::string_view s);

struct Question {
  QuestionKind kind = QuestionKind::open_fixed;
  std::string text;
  FollowupRule followup = FollowupRule::acknowledge;
  std::string expected;  // the replaced name, for entity questions

  bool operator==(const Question&) const = default;
};

struct OpenQuestion {
  std::string text;
  FollowupRule followup = FollowupRule::acknowledge;
};

const std::vector<OpenQuestion>& default_open_questions();

/// Display names in alphabetical order: "frustration and strength",
/// "calm, fear and joy".
std::string join_emotions(const std::set<Emotion>& emotions);

/// Capitalized tokens that do not start a sentence and are not common
/// words, in order of first appearance.
std::vector<std::string> detect_person_names(std::string_view body, const text::StopwordList& common_words);

/// Closed emotion question, then the open set, then one "Who ...?"
/// question per sentence whose first token is a detected name.
std::vector<Question> generate_tale_questions(const Tale& tale, const std::vector<OpenQuestion>& open_questions,
                                              const text::StopwordList& common_words);

}  // namespace talechat::dialogue
