#include "talechat/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace talechat {
namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return {};
  std::filesystem::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

Config Config::parse(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  Config c;
  try {
    c.corpus_dir = resolve(base_dir, get_or<std::string>(j, "corpus_dir", ""));
    c.emotion_lexicon_dir = resolve(base_dir, get_or<std::string>(j, "emotion_lexicon_dir", ""));
    c.intent_lexicon_dir = resolve(base_dir, get_or<std::string>(j, "intent_lexicon_dir", ""));
    c.risk_lexicon = resolve(base_dir, get_or<std::string>(j, "risk_lexicon", ""));
    c.retrieval_stopwords = resolve(base_dir, get_or<std::string>(j, "retrieval_stopwords", ""));
    c.common_words = resolve(base_dir, get_or<std::string>(j, "common_words", ""));
    c.data_dir = resolve(base_dir, get_or<std::string>(j, "data_dir", "var"));

    c.dfr_c = get_or(j, "dfr_c", c.dfr_c);
    c.alpha = get_or(j, "alpha", c.alpha);
    if (j.contains("emotion_threshold") && !j["emotion_threshold"].is_null()) {
      c.emotion_threshold = j["emotion_threshold"].get<double>();
    }
    c.intent_threshold = get_or(j, "intent_threshold", c.intent_threshold);

    if (j.contains("generation")) {
      const auto& g = j["generation"];
      c.generation_endpoint = get_or<std::string>(g, "endpoint", "");
      c.generation_timeout = std::chrono::milliseconds(get_or<long long>(g, "timeout_ms", 5000));
      c.generation_enabled = get_or(g, "enabled", false);
    }
    if (j.contains("listen")) {
      c.host = get_or<std::string>(j["listen"], "host", c.host);
      c.port = get_or(j["listen"], "port", c.port);
    }
    c.supervisor_token = get_or<std::string>(j, "supervisor_token", "");

    if (j.contains("open_questions")) {
      c.open_questions.clear();
      for (const auto& q : j["open_questions"]) {
        const auto rule_name = get_or<std::string>(q, "followup", "acknowledge");
        auto rule = dialogue::parse_followup_rule(rule_name);
        if (!rule) throw ConfigError("unknown followup rule '" + rule_name + "'");
        c.open_questions.push_back({q.at("text").get<std::string>(), *rule});
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }

  if (c.corpus_dir.empty()) throw ConfigError("config: corpus_dir is required");
  if (c.emotion_lexicon_dir.empty()) throw ConfigError("config: emotion_lexicon_dir is required");
  if (c.intent_lexicon_dir.empty()) throw ConfigError("config: intent_lexicon_dir is required");
  if (c.risk_lexicon.empty()) throw ConfigError("config: risk_lexicon is required");
  if (!(c.dfr_c > 0)) throw ConfigError("config: dfr_c must be > 0");
  if (!(c.alpha > 0)) throw ConfigError("config: alpha must be > 0");
  if (c.emotion_threshold && !(*c.emotion_threshold > 0 && *c.emotion_threshold < 1)) {
    throw ConfigError("config: emotion_threshold must be in (0, 1)");
  }
  if (!(c.intent_threshold > 0 && c.intent_threshold < 1)) {
    throw ConfigError("config: intent_threshold must be in (0, 1)");
  }
  if (c.generation_timeout.count() <= 0) throw ConfigError("config: generation.timeout_ms must be > 0");
  if (c.port < 0 || c.port > 65535) throw ConfigError("config: listen.port out of range");
  for (const auto& q : c.open_questions) {
    if (q.text.empty() || q.text.back() != '?') throw ConfigError("config: open question must end with '?'");
  }
  return c;
}

Config Config::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto c = parse(ss.str(), std::filesystem::absolute(file).parent_path());
  c.source = file;
  return c;
}

std::filesystem::path Config::locate(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("TALECHAT_CONFIG"); env && *env) return env;
  throw ConfigError("no config file: pass --config or set TALECHAT_CONFIG");
}

void Config::check_paths() const {
  for (const auto* p : {&corpus_dir, &emotion_lexicon_dir, &intent_lexicon_dir, &risk_lexicon}) {
    if (!std::filesystem::exists(*p)) throw ConfigError("path does not exist: " + p->string());
  }
  for (const auto* p : {&retrieval_stopwords, &common_words}) {
    if (!p->empty() && !std::filesystem::exists(*p)) throw ConfigError("path does not exist: " + p->string());
  }
}

}  // namespace talechat
