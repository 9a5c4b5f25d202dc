#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "talechat/corpus.hpp"

namespace talechat::dialogue {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// External text-generation service: plain-text prompt in, plain text out.
/// Implementations throw GenerationError on failure or timeout.
class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual std::string generate(const std::string& prompt, std::chrono::milliseconds timeout) = 0;
};

/// POSTs the prompt as text/plain to an http:// endpoint and returns the
/// response body.
std::shared_ptr<TextGenerator> make_http_generator(const std::string& endpoint);

struct GenClient {
  std::string endpoint;
  std::chrono::milliseconds timeout{5000};
  bool enabled = false;
  std::shared_ptr<TextGenerator> backend;

  bool usable() const { return enabled && backend != nullptr; }

  /// nullopt when disabled, on failure, or on an empty response.
  std::optional<std::string> ask(const std::string& prompt) const;
};

inline constexpr std::string_view kParaphrasePrompt = "Paraphrase the following sentence showing empathy: ";
inline constexpr std::string_view kFeelingPrompt = "How do you feel about this sentence: ";
inline constexpr std::string_view kSummarizePrompt = "Summarize this tale in quotes '";

std::string paraphrase_prompt(std::string_view answer);
std::string feeling_prompt(std::string_view answer);
std::string summarize_prompt(const Tale& tale);
/// "<question> of this tale in quotes '<body>'"
std::string tale_question_prompt(std::string_view question, const Tale& tale);

/// Reflects the answer back as a confirmation question. Tries the
/// paraphrase prompt, then the feeling prompt; falls back to
/// "You said: '<answer>'. Did I understand you correctly?".
std::string active_listen(const GenClient& client, std::string_view answer);

/// Service summary of the tale, or its first two sentences.
std::string summarize_tale(const GenClient& client, const Tale& tale);

}  // namespace talechat::dialogue
