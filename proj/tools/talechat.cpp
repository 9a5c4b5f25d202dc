// Operator CLI: corpus validation, indexing, training, evaluation, reports
// and the HTTP service.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "talechat/classify.hpp"
#include "talechat/config.hpp"
#include "talechat/corpus.hpp"
#include "talechat/monitor.hpp"
#include "talechat/retrieval.hpp"
#include "talechat/service.hpp"
#include "talechat/xml.hpp"

namespace {

using nlohmann::json;
using namespace talechat;

struct Options {
  std::optional<std::string> config;
  bool json = false;
};

Config load_config(const Options& o) { return Config::load(Config::locate(o.config)); }

void emit(const Options& o, const json& j, const std::string& text) {
  if (o.json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

int validate_corpus(const Options& o, const std::string& path_arg) {
  std::filesystem::path path = path_arg.empty() ? load_config(o).corpus_dir : std::filesystem::path(path_arg);
  try {
    const auto corpus = load_corpus(path);
    const auto c = corpus.counts();
    char line[256];
    std::snprintf(line, sizeof line, "ok: %zu approved, %zu pending, %zu rejected tales; %zu quotes; %zu cards\n",
                  c.approved, c.pending, c.rejected, corpus.quotes.size(), corpus.cards.size());
    emit(o,
         {{"valid", true},
          {"approved", c.approved},
          {"pending", c.pending},
          {"rejected", c.rejected},
          {"quotes", corpus.quotes.size()},
          {"cards", corpus.cards.size()}},
         line);
    return 0;
  } catch (const ValidationError& e) {
    json list = json::array();
    std::string text;
    for (const auto& v : e.violations()) {
      list.push_back({{"subject", v.subject}, {"message", v.message}});
      text += "violation: " + v.to_string() + "\n";
    }
    emit(o, {{"valid", false}, {"violations", list}}, text);
    return 1;
  } catch (const xml::ParseError& e) {
    emit(o, {{"valid", false}, {"error", e.what()}}, std::string("parse error: ") + e.what() + "\n");
    return 1;
  }
}

int index_command(const Options& o) {
  const auto config = load_config(o);
  text::StopwordList stopwords;
  if (!config.retrieval_stopwords.empty()) stopwords = text::StopwordList::load(config.retrieval_stopwords);
  const auto corpus = load_corpus(config.corpus_dir);
  const auto tales = retrieval::TaleIndex::build(retrieval::tale_documents(corpus), stopwords);
  const auto quotes = retrieval::TaleIndex::build(retrieval::quote_documents(corpus), stopwords);
  char line[256];
  std::snprintf(line, sizeof line, "tales: N=%zu avgdl=%.4f vocabulary=%zu\nquotes: N=%zu avgdl=%.4f vocabulary=%zu\n",
                tales.document_count(), tales.average_length(), tales.vocabulary_size(), quotes.document_count(),
                quotes.average_length(), quotes.vocabulary_size());
  emit(o,
       {{"tales", {{"N", tales.document_count()}, {"avgdl", tales.average_length()}, {"vocabulary", tales.vocabulary_size()}}},
        {"quotes",
         {{"N", quotes.document_count()}, {"avgdl", quotes.average_length()}, {"vocabulary", quotes.vocabulary_size()}}}},
       line);
  return 0;
}

struct Target {
  std::vector<std::string> classes;
  std::filesystem::path lexicon_dir;
  std::filesystem::path model_file;
};

Target target_for(const Config& config, const std::string& which) {
  if (which == "emotions") {
    return {service::emotion_class_names(), config.emotion_lexicon_dir, config.models_dir() / "emotions.model"};
  }
  if (which == "intents") {
    return {classify::expressed_intent_names(), config.intent_lexicon_dir, config.models_dir() / "intents.model"};
  }
  throw CLI::ValidationError("target", "expected 'emotions' or 'intents'");
}

int train_command(const Options& o, const std::string& which) {
  const auto config = load_config(o);
  const auto t = target_for(config, which);
  const auto docs = classify::build_training_set(t.classes, t.lexicon_dir);
  const auto model = classify::train(docs, config.alpha, t.classes);
  std::filesystem::create_directories(t.model_file.parent_path());
  model.save(t.model_file);
  emit(o,
       {{"model", t.model_file.string()},
        {"classes", model.classes().size()},
        {"vocabulary", model.vocabulary_size()},
        {"documents", docs.size()}},
       "trained " + which + ": " + std::to_string(model.classes().size()) + " classes, " +
           std::to_string(model.vocabulary_size()) + " terms, " + std::to_string(docs.size()) + " documents -> " +
           t.model_file.string() + "\n");
  return 0;
}

int eval_command(const Options& o, const std::string& which, double fraction, unsigned seed) {
  const auto config = load_config(o);
  const auto t = target_for(config, which);
  const auto docs = classify::build_training_set(t.classes, t.lexicon_dir);
  const auto split = classify::stratified_split(docs, fraction, seed);
  const auto model = classify::train(split.train, config.alpha, t.classes);
  const auto ev = classify::evaluate(model, split.test);
  char line[128];
  std::snprintf(line, sizeof line, "accuracy: %.2f (%zu/%zu held out, seed %u)\n", ev.accuracy, ev.correct, ev.total,
                seed);
  emit(o,
       {{"target", which},
        {"accuracy", std::round(ev.accuracy * 100.0) / 100.0},
        {"correct", ev.correct},
        {"total", ev.total},
        {"train_documents", split.train.size()},
        {"seed", seed}},
       line);
  return 0;
}

int stats_command(const Options& o, const std::string& segment_text) {
  const auto config = load_config(o);
  const auto segment = monitor::parse_segment(segment_text.empty() ? "any" : segment_text);
  const monitor::UserRegistry users(config.users_file());
  const monitor::EventLog events(config.events_file());
  const auto stats = monitor::emotion_stats(events.events(), segment, [&](std::string_view id) { return users.find(id); });
  const auto split = monitor::valence_split(stats);

  json rows = json::array();
  std::string text;
  char line[128];
  for (auto e : all_emotions()) {
    const auto i = emotion_index(e);
    rows.push_back({{"emotion", std::string(emotion_name(e))}, {"count", stats.counts[i]}, {"percent", stats.percent[i]}});
    std::snprintf(line, sizeof line, "%-22s %6zu %7.2f%%\n", std::string(emotion_name(e)).c_str(), stats.counts[i],
                  stats.percent[i]);
    text += line;
  }
  std::snprintf(line, sizeof line, "total %zu%s\npositive %.2f%%  negative %.2f%%\n", stats.total,
                stats.empty ? " (empty segment)" : "", split.positive, split.negative);
  text += line;
  emit(o,
       {{"segment", segment_text.empty() ? "any" : segment_text},
        {"total", stats.total},
        {"empty", stats.empty},
        {"emotions", rows},
        {"valence", {{"positive", split.positive}, {"negative", split.negative}}}},
       text);
  return 0;
}

int export_command(const Options& o, const std::string& out) {
  const auto config = load_config(o);
  auto corpus = load_corpus(config.corpus_dir);
  if (std::filesystem::exists(config.submissions_file())) {
    for (auto& t : read_tales_file(config.submissions_file())) corpus.tales.push_back(std::move(t));
  }
  export_corpus(corpus, out);
  emit(o, {{"path", out}, {"tales", corpus.tales.size()}}, "exported " + std::to_string(corpus.tales.size()) +
                                                             " tales to " + out + "\n");
  return 0;
}

int serve_command(const Options& o) {
  const auto config = load_config(o);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  SystemClock clock;
  service::Application app(config, clock);
  service::HttpServer server(app);
  const int port = server.bind(config.host, config.port);
  if (port < 0) {
    std::cerr << "cannot bind " << config.host << ":" << config.port << "\n";
    return 1;
  }
  std::cerr << "listening on " << config.host << ":" << port << "\n";

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  const bool ok = server.run();
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  app.dialogue().close_all();
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"talechat: emotion-tagged tale chatbot engine"};
  app.require_subcommand(1);
  Options opts;
  app.add_option("--config", opts.config, "Config file (default: $TALECHAT_CONFIG)");
  app.add_flag("--json", opts.json, "Machine-readable output");

  std::string corpus_path;
  auto* validate = app.add_subcommand("validate-corpus", "Load and validate a corpus");
  validate->add_option("path", corpus_path, "Corpus directory or exported file (default: config corpus_dir)");

  auto* index = app.add_subcommand("index", "Build the tale and quote indexes and print their statistics");

  std::string train_target;
  auto* train = app.add_subcommand("train", "Train a classifier and save its snapshot");
  train->add_option("target", train_target, "emotions | intents")->required()->check(
      CLI::IsMember({"emotions", "intents"}));

  std::string eval_target = "emotions";
  double fraction = 0.2;
  unsigned seed = 42;
  auto* eval = app.add_subcommand("eval", "Held-out accuracy on a stratified split");
  eval->add_option("target", eval_target, "emotions | intents")->check(CLI::IsMember({"emotions", "intents"}));
  eval->add_option("--test-fraction", fraction, "Held-out share per class")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--seed", seed, "Shuffle seed");

  std::string segment;
  auto* stats = app.add_subcommand("stats", "Per-emotion selection percentages");
  stats->add_option("--segment", segment, "gender:age_bucket, e.g. female:18-23");

  std::string out_path;
  auto* exp = app.add_subcommand("export-corpus", "Write the corpus as one XML file");
  exp->add_option("output", out_path, "Output file")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*validate) return validate_corpus(opts, corpus_path);
    if (*index) return index_command(opts);
    if (*train) return train_command(opts, train_target);
    if (*eval) return eval_command(opts, eval_target, fraction, seed);
    if (*stats) return stats_command(opts, segment);
    if (*exp) return export_command(opts, out_path);
    if (*serve) return serve_command(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
