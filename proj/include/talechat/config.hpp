#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "talechat/questions.hpp"

namespace talechat {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Service and CLI settings, read from a JSON file. Relative paths are
/// resolved against the directory holding the file.
struct Config {
  std::filesystem::path source;  // the file this was read from

  std::filesystem::path corpus_dir;
  std::filesystem::path emotion_lexicon_dir;
  std::filesystem::path intent_lexicon_dir;
  std::filesystem::path risk_lexicon;
  std::filesystem::path retrieval_stopwords;  // optional
  std::filesystem::path common_words;         // optional; not names for entity questions
  std::filesystem::path data_dir;             // created when missing

  double dfr_c = 1.0;
  double alpha = 1.0;
  std::optional<double> emotion_threshold;  // default 1.5 / |classes|
  double intent_threshold = 0.5;

  std::string generation_endpoint;
  std::chrono::milliseconds generation_timeout{5000};
  bool generation_enabled = false;

  std::string host = "127.0.0.1";
  int port = 8080;

  std::string supervisor_token;
  std::vector<dialogue::OpenQuestion> open_questions = dialogue::default_open_questions();

  std::filesystem::path models_dir() const { return data_dir / "models"; }
  std::filesystem::path users_file() const { return data_dir / "users.json"; }
  std::filesystem::path events_file() const { return data_dir / "events.csv"; }
  std::filesystem::path reads_file() const { return data_dir / "reads.csv"; }
  std::filesystem::path conversations_dir() const { return data_dir / "conversations"; }
  std::filesystem::path submissions_file() const { return data_dir / "submissions.xml"; }
  std::filesystem::path session_counter_file() const { return data_dir / "next_session"; }

  /// Parses and checks ranges. Paths are resolved but not checked.
  static Config parse(std::string_view json, const std::filesystem::path& base_dir);
  static Config load(const std::filesystem::path& file);

  /// `--config` when given, else $TALECHAT_CONFIG. Throws ConfigError when
  /// neither is set.
  static std::filesystem::path locate(const std::optional<std::string>& flag);

  /// Throws ConfigError naming the first referenced path that is missing.
  void check_paths() const;
};

}  // namespace talechat
