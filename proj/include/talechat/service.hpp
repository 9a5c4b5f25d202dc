#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "talechat/classify.hpp"
#include "talechat/clock.hpp"
#include "talechat/config.hpp"
#include "talechat/dialogue.hpp"
#include "talechat/library.hpp"
#include "talechat/monitor.hpp"

namespace talechat::service {

/// Canonical names of the 30 emotions, the emotion classifier's classes.
std::vector<std::string> emotion_class_names();

/// Reads the snapshot at `file` unless it is missing or older than a
/// lexicon file, in which case the model is trained and the snapshot
/// rewritten.
classify::BayesModel load_or_train(const std::vector<std::string>& classes, const std::filesystem::path& lexicon_dir,
                                   const std::filesystem::path& file, double alpha);

/// Everything a running service holds. Construction is all-or-nothing: any
/// failure to load the corpus, lexicons or models throws.
class Application {
 public:
  Application(Config config, Clock& clock, std::shared_ptr<dialogue::TextGenerator> generator = nullptr);
  ~Application();

  const Config& config() const { return config_; }
  Clock& clock() { return clock_; }
  TaleLibrary& library() { return *library_; }
  const classify::BayesModel& emotion_model() const { return emotion_model_; }
  const classify::BayesModel& intent_model() const { return intent_model_; }
  monitor::UserRegistry& users() { return *users_; }
  monitor::EventLog& events() { return *events_; }
  monitor::ReadLog& reads() { return *reads_; }
  dialogue::DiscourseManager& dialogue() { return *dialogue_; }

 private:
  Config config_;
  Clock& clock_;
  std::unique_ptr<TaleLibrary> library_;
  classify::BayesModel emotion_model_;
  classify::BayesModel intent_model_;
  monitor::RiskLexicon risk_;
  std::unique_ptr<monitor::UserRegistry> users_;
  std::unique_ptr<monitor::EventLog> events_;
  std::unique_ptr<monitor::ReadLog> reads_;
  std::unique_ptr<dialogue::DiscourseManager> dialogue_;
};

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;  // JSON
  std::map<std::string, std::string> headers;
};

inline constexpr const char* kSupervisorHeader = "x-supervisor-token";

/// The JSON API, independent of the HTTP transport.
class Api {
 public:
  explicit Api(Application& app) : app_(app) {}

  Response handle(const Request& request);

 private:
  Application& app_;
};

/// cpp-httplib front end for Api.
class HttpServer {
 public:
  explicit HttpServer(Application& app);
  ~HttpServer();

  /// Binds `host`:`port`; port 0 picks a free one. Returns the bound port,
  /// or -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  bool run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace talechat::service
