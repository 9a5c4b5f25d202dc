#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "talechat/classify.hpp"
#include "talechat/clock.hpp"
#include "talechat/corpus.hpp"
#include "talechat/dialogue.hpp"
#include "talechat/library.hpp"
#include "talechat/monitor.hpp"
#include "talechat/service.hpp"

namespace talechat::testing {

inline std::filesystem::path fixture_dir() { return TALECHAT_FIXTURE_DIR; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, std::string_view contents) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << contents;
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto pattern = (std::filesystem::temp_directory_path() / "talechat-XXXXXX").string();
    if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// The fixture config with data_dir pointed at `data_dir`.
inline Config fixture_config(const std::filesystem::path& data_dir) {
  auto c = Config::load(fixture_dir() / "config.json");
  c.data_dir = data_dir;
  return c;
}

/// Fixture models, trained once per process.
inline const classify::BayesModel& fixture_emotion_model() {
  static const auto model = classify::train(
      classify::build_training_set(service::emotion_class_names(), fixture_dir() / "lexicons/emotions"), 1.0,
      service::emotion_class_names());
  return model;
}

inline const classify::BayesModel& fixture_intent_model() {
  static const auto model = classify::train(
      classify::build_training_set(classify::expressed_intent_names(), fixture_dir() / "lexicons/intents"), 1.0,
      classify::expressed_intent_names());
  return model;
}

/// A discourse manager over the fixture corpus with in-memory registries,
/// a manual clock and no generation service.
struct Harness {
  explicit Harness(std::shared_ptr<dialogue::TextGenerator> generator = nullptr,
                   std::filesystem::path log_root = {})
      : clock(make_instant(2023, 5, 25, 14, 41, 0)),
        library(load_corpus(fixture_dir() / "corpus"),
                text::StopwordList::load(fixture_dir() / "stopwords.txt")),
        risk(monitor::RiskLexicon::load(fixture_dir() / "risk.toml")) {
    dialogue::Services s;
    s.library = &library;
    s.emotion_model = &fixture_emotion_model();
    s.intent_model = &fixture_intent_model();
    s.risk = &risk;
    s.users = &users;
    s.events = &events;
    s.reads = &reads;
    s.clock = &clock;
    s.log_root = std::move(log_root);
    s.common_words = text::StopwordList::load(fixture_dir() / "common_words.txt");
    s.generator.enabled = generator != nullptr;
    s.generator.backend = std::move(generator);
    manager = std::make_unique<dialogue::DiscourseManager>(std::move(s));
  }

  ManualClock clock;
  TaleLibrary library;
  monitor::RiskLexicon risk;
  monitor::UserRegistry users;
  monitor::EventLog events;
  monitor::ReadLog reads;
  std::unique_ptr<dialogue::DiscourseManager> manager;
};

/// Records every prompt and answers with a canned reply.
class RecordingGenerator : public dialogue::TextGenerator {
 public:
  explicit RecordingGenerator(std::string reply = "stub reply") : reply_(std::move(reply)) {}

  std::string generate(const std::string& prompt, std::chrono::milliseconds) override {
    prompts.push_back(prompt);
    if (fail) throw dialogue::GenerationError("stub failure");
    return reply_;
  }

  std::vector<std::string> prompts;
  bool fail = false;

 private:
  std::string reply_;
};

}  // namespace talechat::testing
