#include "talechat/service.hpp"

#include <algorithm>
#include <charconv>
#include <iostream>

#include <httplib.h>
#include <json.hpp>

#include "talechat/retrieval.hpp"

namespace talechat::service {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::file_time_type newest_file(const fs::path& dir) {
  fs::file_time_type newest{};
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) newest = std::max(newest, entry.last_write_time());
  }
  return newest;
}

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& message) : std::runtime_error(message), status(status) {}
  int status;
};

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const auto j = path.find('/', i);
    const auto end = j == std::string_view::npos ? path.size() : j;
    if (end > i) parts.emplace_back(path.substr(i, end - i));
    i = end;
  }
  return parts;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= s.size()) {
    const auto j = std::min(s.find(',', i), s.size());
    auto item = s.substr(i, j - i);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    i = j + 1;
  }
  return out;
}

json body_of(const Request& r) {
  if (r.body.empty()) return json::object();
  try {
    auto j = json::parse(r.body);
    if (!j.is_object()) throw HttpError(400, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error&) {
    throw HttpError(400, "request body is not valid JSON");
  }
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw HttpError(400, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw HttpError(400, std::string("bad field '") + key + "'");
  }
}

Emotion emotion_arg(const std::string& name) {
  auto e = parse_emotion(name);
  if (!e) throw HttpError(400, "unknown emotion '" + name + "'");
  return *e;
}

json names(const std::set<Emotion>& emotions) {
  json out = json::array();
  for (auto e : emotions) out.push_back(std::string(emotion_name(e)));
  return out;
}

json names(const std::set<ThemeId>& themes) {
  json out = json::array();
  for (const auto& t : themes) out.push_back(t.name());
  return out;
}

json tale_json(const Tale& t) {
  json j{{"id", t.id},
         {"title", t.title},
         {"body", t.body},
         {"emotions", names(t.emotions)},
         {"themes", names(t.themes)},
         {"status", std::string(status_name(t.status))}};
  if (t.source_url) j["source_url"] = *t.source_url;
  if (t.min_age) j["min_age"] = *t.min_age;
  if (t.submitted_by) j["submitted_by"] = *t.submitted_by;
  return j;
}

json flag_json(const monitor::RiskFlag& f) {
  return json{{"category", std::string(monitor::risk_category_name(f.category))},
              {"phrase", f.phrase},
              {"timestamp", format_iso_timestamp(f.timestamp)}};
}

json turn_json(const dialogue::Turn& t) {
  return json{{"replies", t.replies}, {"mode", std::string(dialogue::mode_name(t.mode))}};
}

std::chrono::seconds parse_window(const std::string& s) {
  if (s.empty()) return std::chrono::hours(24);
  long long n = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc{} || n <= 0) throw HttpError(400, "bad window '" + s + "'");
  const std::string_view unit(end, static_cast<std::size_t>(s.data() + s.size() - end));
  if (unit.empty() || unit == "s") return std::chrono::seconds(n);
  if (unit == "m") return std::chrono::minutes(n);
  if (unit == "h") return std::chrono::hours(n);
  if (unit == "d") return std::chrono::hours(24 * n);
  throw HttpError(400, "bad window '" + s + "'");
}

std::string query_param(const Request& r, const char* key) {
  auto it = r.query.find(key);
  return it == r.query.end() ? std::string() : it->second;
}

Response json_response(int status, const json& body) {
  return Response{status, body.dump(), {}};
}

}  // namespace

std::vector<std::string> emotion_class_names() {
  std::vector<std::string> out;
  for (auto e : all_emotions()) out.emplace_back(emotion_name(e));
  return out;
}

classify::BayesModel load_or_train(const std::vector<std::string>& classes, const fs::path& lexicon_dir,
                                   const fs::path& file, double alpha) {
  if (fs::exists(file) && fs::last_write_time(file) >= newest_file(lexicon_dir)) {
    auto model = classify::BayesModel::load(file);
    if (model.classes() == classes && model.alpha() == alpha) return model;
  }
  auto model = classify::train(classify::build_training_set(classes, lexicon_dir), alpha, classes);
  fs::create_directories(file.parent_path());
  model.save(file);
  return model;
}

Application::Application(Config config, Clock& clock, std::shared_ptr<dialogue::TextGenerator> generator)
    : config_(std::move(config)), clock_(clock) {
  config_.check_paths();
  fs::create_directories(config_.data_dir);

  text::StopwordList stopwords;
  if (!config_.retrieval_stopwords.empty()) stopwords = text::StopwordList::load(config_.retrieval_stopwords);
  library_ = std::make_unique<TaleLibrary>(load_corpus(config_.corpus_dir), std::move(stopwords),
                                           config_.submissions_file());

  emotion_model_ = load_or_train(emotion_class_names(), config_.emotion_lexicon_dir,
                                 config_.models_dir() / "emotions.model", config_.alpha);
  intent_model_ = load_or_train(classify::expressed_intent_names(), config_.intent_lexicon_dir,
                                config_.models_dir() / "intents.model", config_.alpha);
  risk_ = monitor::RiskLexicon::load(config_.risk_lexicon);

  users_ = std::make_unique<monitor::UserRegistry>(config_.users_file());
  events_ = std::make_unique<monitor::EventLog>(config_.events_file());
  reads_ = std::make_unique<monitor::ReadLog>(config_.reads_file());

  dialogue::Services s;
  s.library = library_.get();
  s.emotion_model = &emotion_model_;
  s.intent_model = &intent_model_;
  s.emotion_threshold = config_.emotion_threshold;
  s.intent_threshold = config_.intent_threshold;
  s.dfr_c = config_.dfr_c;
  s.generator.endpoint = config_.generation_endpoint;
  s.generator.timeout = config_.generation_timeout;
  s.generator.enabled = config_.generation_enabled;
  if (generator) {
    s.generator.backend = std::move(generator);
  } else if (config_.generation_enabled && !config_.generation_endpoint.empty()) {
    s.generator.backend = dialogue::make_http_generator(config_.generation_endpoint);
  }
  s.risk = &risk_;
  s.users = users_.get();
  s.events = events_.get();
  s.reads = reads_.get();
  s.clock = &clock_;
  s.log_root = config_.conversations_dir();
  s.session_counter = config_.session_counter_file();
  if (!config_.common_words.empty()) s.common_words = text::StopwordList::load(config_.common_words);
  s.open_questions = config_.open_questions;
  dialogue_ = std::make_unique<dialogue::DiscourseManager>(std::move(s));
}

Application::~Application() = default;

Response Api::handle(const Request& request) {
  const auto parts = split_path(request.path);
  const auto& m = request.method;
  const auto n = parts.size();
  auto is = [&](std::size_t i, std::string_view s) { return i < n && parts[i] == s; };

  auto require_supervisor = [&] {
    const auto& token = app_.config().supervisor_token;
    auto it = request.headers.find(kSupervisorHeader);
    if (token.empty() || it == request.headers.end() || it->second != token) {
      throw HttpError(403, "supervisor token required");
    }
  };

  try {
    if (m == "GET" && n == 1 && is(0, "health")) {
      const auto snap = app_.library().snapshot();
      return json_response(200, {{"status", "ready"}, {"approved_tales", snap->corpus.counts().approved}});
    }

    if (m == "POST" && n == 1 && is(0, "register")) {
      const auto b = body_of(request);
      const auto gender_name = b.contains("gender") ? field<std::string>(b, "gender") : std::string("unspecified");
      const auto gender = monitor::parse_gender(gender_name);
      if (!gender) throw HttpError(400, "unknown gender '" + gender_name + "'");
      const bool visible = b.contains("visible_to_supervisor") && field<bool>(b, "visible_to_supervisor");
      try {
        const auto profile = app_.users().register_user(field<int>(b, "age"), *gender, visible);
        return json_response(201, {{"user_id", profile.id}});
      } catch (const std::invalid_argument& e) {
        throw HttpError(400, e.what());
      }
    }

    if (m == "POST" && n == 1 && is(0, "session")) {
      const auto b = body_of(request);
      std::optional<std::string> user;
      if (b.contains("user_id") && !b["user_id"].is_null()) user = field<std::string>(b, "user_id");
      dialogue::DiscourseManager::Opened opened;
      try {
        opened = app_.dialogue().open_session(user);
      } catch (const std::invalid_argument& e) {
        throw HttpError(404, e.what());
      }
      json alarms = json::array();
      if (opened.alarm) alarms.push_back(flag_json(*opened.alarm));
      auto res = json_response(201, {{"session_id", opened.session}, {"replies", opened.replies}, {"alarms", alarms}});
      res.headers["X-Session-Id"] = opened.session;
      return res;
    }

    if (n >= 2 && is(0, "session")) {
      const auto& id = parts[1];
      try {
        if (m == "GET" && n == 2) {
          const auto s = app_.dialogue().session(id);
          return json_response(200, {{"session_id", s.id},
                                     {"user_id", s.user},
                                     {"mode", std::string(dialogue::mode_name(s.mode))},
                                     {"interactions", s.transcript.size()}});
        }
        if (m == "POST" && n == 3 && is(2, "message")) {
          const auto b = body_of(request);
          const auto text = field<std::string>(b, "text");
          if (text.empty()) throw HttpError(400, "empty message");
          return json_response(200, turn_json(app_.dialogue().handle_post(id, text)));
        }
        if (m == "POST" && n == 3 && is(2, "command")) {
          const auto b = body_of(request);
          const auto cmd = field<std::string>(b, "command");
          return json_response(200, turn_json(app_.dialogue().command(id, cmd)));
        }
      } catch (const dialogue::UnknownSession& e) {
        throw HttpError(404, e.what());
      } catch (const dialogue::SessionClosed& e) {
        throw HttpError(409, e.what());
      }
    }

    if (m == "GET" && n == 1 && is(0, "tales")) {
      const auto snap = app_.library().snapshot();
      auto query = retrieval::parse_query(query_param(request, "query"), snap->tales.stopwords(), snap->corpus.themes);
      if (const auto e = query_param(request, "emotions"); !e.empty()) {
        std::set<Emotion> filter = query.emotion_filter.value_or(std::set<Emotion>{});
        for (const auto& name : split_list(e)) filter.insert(emotion_arg(name));
        query.emotion_filter = filter;
      }
      if (const auto t = query_param(request, "themes"); !t.empty()) {
        std::set<ThemeId> filter = query.theme_filter.value_or(std::set<ThemeId>{});
        for (const auto& name : split_list(t)) {
          ThemeId theme(name);
          if (!snap->corpus.has_theme(theme)) throw HttpError(400, "unknown theme '" + name + "'");
          filter.insert(theme);
        }
        query.theme_filter = filter;
      }
      std::vector<retrieval::SearchResult> results;
      if (query.empty()) {
        for (const auto& d : snap->tales.documents()) results.push_back({d.id, 0.0, d.emotions, d.themes});
      } else {
        results = retrieval::search(snap->tales, query, app_.config().dfr_c);
      }
      json out = json::array();
      for (const auto& r : results) {
        const auto* t = snap->corpus.find_tale(r.id);
        json item{{"id", r.id}, {"score", r.score}, {"emotions", names(r.emotions)}, {"themes", names(r.themes)}};
        if (t) item["title"] = t->title;
        if (t && t->min_age) item["min_age"] = *t->min_age;
        out.push_back(std::move(item));
      }
      return json_response(200, {{"results", out}});
    }

    if (m == "POST" && n == 1 && is(0, "tales")) {
      const auto b = body_of(request);
      TaleDraft draft;
      draft.title = b.contains("title") ? field<std::string>(b, "title") : std::string();
      draft.body = b.contains("body") ? field<std::string>(b, "body") : std::string();
      if (b.contains("source_url")) draft.source_url = field<std::string>(b, "source_url");
      if (b.contains("min_age")) draft.min_age = field<int>(b, "min_age");
      if (b.contains("submitted_by")) draft.submitted_by = field<std::string>(b, "submitted_by");
      try {
        const auto id = app_.library().submit(std::move(draft));
        return json_response(201, {{"id", id}, {"status", "pending"}});
      } catch (const std::invalid_argument& e) {
        throw HttpError(400, e.what());
      }
    }

    if (m == "GET" && n == 2 && is(0, "tales")) {
      const auto snap = app_.library().snapshot();
      const Tale* t = snap->corpus.find_tale(parts[1]);
      if (t && t->status != TaleStatus::approved) {
        auto it = request.headers.find(kSupervisorHeader);
        const auto& token = app_.config().supervisor_token;
        if (token.empty() || it == request.headers.end() || it->second != token) t = nullptr;
      }
      if (!t) throw HttpError(404, "unknown tale '" + parts[1] + "'");
      return json_response(200, tale_json(*t));
    }

    if (m == "POST" && n == 3 && is(0, "tales") && is(2, "review")) {
      require_supervisor();
      const auto b = body_of(request);
      const auto decision = field<std::string>(b, "decision");
      ReviewDecision d;
      if (decision == "approve") {
        std::set<Emotion> emotions;
        std::set<ThemeId> themes;
        if (b.contains("emotions")) {
          for (const auto& e : field<std::vector<std::string>>(b, "emotions")) emotions.insert(emotion_arg(e));
        }
        if (b.contains("themes")) {
          for (const auto& t : field<std::vector<std::string>>(b, "themes")) themes.insert(ThemeId(t));
        }
        d = ReviewDecision::approved(std::move(emotions), std::move(themes));
      } else if (decision == "reject") {
        d = ReviewDecision::rejected();
      } else {
        throw HttpError(400, "decision must be 'approve' or 'reject'");
      }
      if (!app_.library().snapshot()->corpus.find_tale(parts[1])) {
        throw HttpError(404, "unknown tale '" + parts[1] + "'");
      }
      try {
        return json_response(200, tale_json(app_.library().review(parts[1], d)));
      } catch (const std::invalid_argument& e) {
        throw HttpError(400, e.what());
      } catch (const std::logic_error& e) {
        throw HttpError(409, e.what());
      }
    }

    if (m == "GET" && n == 1 && is(0, "emotions")) {
      const auto snap = app_.library().snapshot();
      json out = json::array();
      for (auto e : all_emotions()) {
        const auto* card = snap->corpus.card(e);
        json item{{"name", std::string(emotion_name(e))},
                  {"display_name", std::string(emotion_display_name(e))},
                  {"valence", std::string(valence_name(emotion_valence(e)))}};
        if (card) {
          item["definition"] = card->definition;
          item["related_terms"] = card->related_terms;
          item["video_urls"] = card->video_urls;
        }
        out.push_back(std::move(item));
      }
      return json_response(200, {{"emotions", out}});
    }

    if (m == "GET" && n == 1 && is(0, "stats")) {
      monitor::Segment segment;
      if (const auto g = query_param(request, "gender"); !g.empty() && g != "any") {
        segment.gender = monitor::parse_gender(g);
        if (!segment.gender) throw HttpError(400, "unknown gender '" + g + "'");
      }
      if (const auto a = query_param(request, "age_bucket"); !a.empty() && a != "any") {
        segment.age = monitor::parse_age_bucket(a);
        if (!segment.age) throw HttpError(400, "unknown age bucket '" + a + "'");
      }
      auto& users = app_.users();
      const auto stats = monitor::emotion_stats(app_.events().events(), segment,
                                                [&](std::string_view id) { return users.find(id); });
      const auto split = monitor::valence_split(stats);
      json rows = json::array();
      for (auto e : all_emotions()) {
        const auto i = emotion_index(e);
        rows.push_back({{"emotion", std::string(emotion_name(e))}, {"count", stats.counts[i]}, {"percent", stats.percent[i]}});
      }
      return json_response(200, {{"total", stats.total},
                                 {"empty", stats.empty},
                                 {"emotions", rows},
                                 {"valence", {{"positive", split.positive}, {"negative", split.negative}}}});
    }

    if (n == 4 && is(0, "users") && is(2, "alarm") && is(3, "ack") && m == "POST") {
      require_supervisor();
      if (!app_.users().is_registered(parts[1])) throw HttpError(404, "unknown user '" + parts[1] + "'");
      return json_response(200, {{"acknowledged", app_.users().acknowledge(parts[1])}});
    }

    if (m == "GET" && n == 3 && is(0, "users") && is(2, "timeline")) {
      require_supervisor();
      const auto profile = app_.users().find(parts[1]);
      if (profile && !profile->visible_to_supervisor) throw HttpError(404, "unknown user '" + parts[1] + "'");
      std::vector<monitor::TimelineBucket> buckets;
      try {
        buckets = monitor::timeline(app_.events().events(), app_.users(), parts[1],
                                    parse_window(query_param(request, "window")));
      } catch (const std::invalid_argument& e) {
        throw HttpError(404, e.what());
      }
      json out = json::array();
      for (const auto& b : buckets) {
        json counts = json::object();
        for (auto e : all_emotions()) {
          if (b.counts[emotion_index(e)] > 0) counts[std::string(emotion_name(e))] = b.counts[emotion_index(e)];
        }
        out.push_back({{"start", format_iso_timestamp(b.start)}, {"total", b.total}, {"counts", counts}});
      }
      return json_response(200, {{"user_id", parts[1]}, {"buckets", out}});
    }

    if (m == "GET" && n == 2 && is(0, "supervisor") && is(1, "alerts")) {
      require_supervisor();
      json out = json::array();
      for (const auto& u : app_.users().all()) {
        if (!u.visible_to_supervisor) continue;
        if (auto flag = monitor::pending_alarm(u)) {
          auto item = flag_json(*flag);
          item["user_id"] = u.id;
          out.push_back(std::move(item));
        }
      }
      return json_response(200, {{"alerts", out}});
    }

    if (m == "GET" && n == 2 && is(0, "supervisor") && is(1, "pending")) {
      require_supervisor();
      const auto snap = app_.library().snapshot();
      json out = json::array();
      for (const auto& t : snap->corpus.tales) {
        if (t.status == TaleStatus::pending) out.push_back(tale_json(t));
      }
      return json_response(200, {{"tales", out}});
    }

    throw HttpError(404, "no route for " + m + " " + request.path);
  } catch (const HttpError& e) {
    return json_response(e.status, {{"error", e.what()}});
  } catch (const std::exception& e) {
    std::cerr << m << " " << request.path << ": " << e.what() << "\n";
    return json_response(500, {{"error", "internal error"}});
  }
}

struct HttpServer::Impl {
  explicit Impl(Application& app) : api(app) {}
  Api api;
  httplib::Server server;
};

HttpServer::HttpServer(Application& app) : impl_(std::make_unique<Impl>(app)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    for (const auto& [k, v] : req.headers) {
      std::string key = k;
      std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
      r.headers[key] = v;
    }
    auto out = impl_->api.handle(r);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    res.set_content(out.body, "application/json");
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::run() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace talechat::service
