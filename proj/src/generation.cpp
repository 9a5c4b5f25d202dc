#include "talechat/generation.hpp"

#include <httplib.h>

#include "talechat/textproc.hpp"

namespace talechat::dialogue {
namespace {

std::string trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return std::string(s);
}

class HttpGenerator final : public TextGenerator {
 public:
  explicit HttpGenerator(const std::string& endpoint) {
    const auto scheme = endpoint.find("://");
    if (scheme == std::string::npos || endpoint.substr(0, scheme) != "http") {
      throw std::invalid_argument("generation endpoint must be an http:// URL: " + endpoint);
    }
    const auto path = endpoint.find('/', scheme + 3);
    base_ = endpoint.substr(0, path);
    path_ = path == std::string::npos ? "/" : endpoint.substr(path);
  }

  std::string generate(const std::string& prompt, std::chrono::milliseconds timeout) override {
    httplib::Client client(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path_, prompt, "text/plain; charset=utf-8");
    if (!res) throw GenerationError("generation request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw GenerationError("generation service returned HTTP " + std::to_string(res->status));
    return res->body;
  }

 private:
  std::string base_;
  std::string path_;
};

}  // namespace

std::shared_ptr<TextGenerator> make_http_generator(const std::string& endpoint) {
  return std::make_shared<HttpGenerator>(endpoint);
}

std::optional<std::string> GenClient::ask(const std::string& prompt) const {
  if (!usable()) return std::nullopt;
  try {
    auto out = trim(backend->generate(prompt, timeout));
    if (out.empty()) return std::nullopt;
    return out;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string paraphrase_prompt(std::string_view answer) { return std::string(kParaphrasePrompt) + std::string(answer); }
std::string feeling_prompt(std::string_view answer) { return std::string(kFeelingPrompt) + std::string(answer); }
std::string summarize_prompt(const Tale& tale) { return std::string(kSummarizePrompt) + tale.body + "'"; }

std::string tale_question_prompt(std::string_view question, const Tale& tale) {
  return std::string(question) + " of this tale in quotes '" + tale.body + "'";
}

std::string active_listen(const GenClient& client, std::string_view answer) {
  const std::string trimmed = trim(answer);
  auto reply = client.ask(paraphrase_prompt(trimmed));
  if (!reply) reply = client.ask(feeling_prompt(trimmed));
  if (!reply) return "You said: '" + trimmed + "'. Did I understand you correctly?";
  if (reply->back() != '?') *reply += " Have I got that right?";
  return *reply;
}

std::string summarize_tale(const GenClient& client, const Tale& tale) {
  if (auto summary = client.ask(summarize_prompt(tale))) return *summary;
  const auto sentences = text::split_sentences(tale.body);
  std::string out;
  for (std::size_t i = 0; i < sentences.size() && i < 2; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += sentences[i];
  }
  return out;
}

}  // namespace talechat::dialogue
