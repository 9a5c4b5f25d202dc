#include "talechat/dialogue.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "talechat/xml.hpp"

namespace talechat::dialogue {
namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool contains_any(const std::vector<std::string>& terms, std::initializer_list<std::string_view> words) {
  return std::any_of(terms.begin(), terms.end(), [&](const std::string& t) {
    return std::find(words.begin(), words.end(), t) != words.end();
  });
}

bool is_negative(std::string_view answer) {
  return contains_any(text::normalized_terms(answer),
                      {"no", "not", "nope", "nah", "never", "don", "doesn", "didn", "disagree"});
}

// Words that turn a follow-up search into a refinement of the last list.
bool is_refinement(std::string_view text) {
  return contains_any(text::normalized_terms(text), {"only", "just", "refine", "narrow", "among", "those", "these"});
}

std::optional<std::size_t> parse_choice(std::string_view text) {
  const auto t = trim(text);
  std::size_t n = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), n);
  if (t.empty() || ec != std::errc{} || end != t.data() + t.size()) return std::nullopt;
  return n;
}

std::string theme_display(const ThemeId& t) {
  auto s = t.name();
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

std::string tale_line(const Tale& tale) {
  std::vector<std::string> emotions;
  for (auto e : tale.emotions) emotions.emplace_back(emotion_display_name(e));
  std::vector<std::string> themes;
  for (const auto& t : tale.themes) themes.push_back(theme_display(t));
  return tale.title + " (" + join(emotions, ", ") + ") (" + join(themes, ", ") + ") [" + tale.id + "]";
}

std::string render_list(std::string_view heading, const Corpus& corpus,
                        const std::vector<retrieval::SearchResult>& results) {
  std::string out(heading);
  for (std::size_t i = 0; i < results.size(); ++i) {
    out += "\n" + std::to_string(i + 1) + ". ";
    if (const auto* t = corpus.find_tale(results[i].id)) out += tale_line(*t);
  }
  out += "\nType the number of a tale to read it.";
  return out;
}

}  // namespace

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::idle: return "idle";
    case Mode::searching: return "searching";
    case Mode::reading: return "reading";
    case Mode::chatting: return "chatting";
    case Mode::adding: return "adding";
    case Mode::closed: return "closed";
  }
  return "idle";
}

bool age_allows(const Tale& tale, std::optional<int> age) {
  if (!tale.min_age || *tale.min_age <= 0) return true;
  return age && tale.suitable_for_age(*age);
}

std::vector<Recommendation> recommend_tales(const Corpus& corpus, const std::map<Emotion, std::size_t>& detected,
                                            const std::set<std::string>& read, std::optional<int> age) {
  std::vector<Recommendation> out;
  for (const Tale* tale : corpus.approved_tales()) {
    if (read.count(tale->id) || !age_allows(*tale, age)) continue;
    Recommendation r{tale->id, 0, {}};
    for (auto [emotion, count] : detected) {
      if (count > 0 && tale->emotions.count(emotion)) {
        r.score += count;
        r.matched.insert(emotion);
      }
    }
    if (!r.matched.empty()) out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    return a.score != b.score ? a.score > b.score : a.tale < b.tale;
  });
  return out;
}

DiscourseManager::DiscourseManager(Services services) : services_(std::move(services)) {
  if (!services_.library || !services_.emotion_model || !services_.intent_model || !services_.clock) {
    throw std::invalid_argument("discourse manager needs a library, both models and a clock");
  }
  if (!services_.session_counter.empty() && std::filesystem::exists(services_.session_counter)) {
    std::ifstream in(services_.session_counter);
    std::size_t n = 0;
    if (in >> n && n > 0) next_session_ = n;
  }
}

DiscourseManager::~DiscourseManager() {
  try {
    close_all();
  } catch (const std::exception& e) {
    std::cerr << "closing sessions: " << e.what() << "\n";
  }
}

std::string DiscourseManager::next_session_id() {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%06zu", next_session_++);
  if (!services_.session_counter.empty()) {
    xml::write_file_atomically(services_.session_counter, std::to_string(next_session_) + "\n");
  }
  return buf;
}

DiscourseManager::Opened DiscourseManager::open_session(const std::optional<std::string>& user) {
  auto slot = std::make_shared<Slot>();
  Session& s = slot->session;
  Opened opened;
  if (user && !user->empty()) {
    auto profile = services_.users ? services_.users->find(*user) : std::nullopt;
    if (!profile) throw std::invalid_argument("unknown user '" + *user + "'");
    s.user = profile->id;
    s.age = profile->age;
    opened.alarm = services_.users->check_alarm(profile->id);
  }
  {
    std::lock_guard lock(sessions_mutex_);
    s.id = next_session_id();
    sessions_.emplace(s.id, slot);
  }
  if (!services_.log_root.empty()) {
    slot->log = std::make_unique<monitor::ConversationLog>(services_.log_root, s.user, s.id);
  }
  s.pending = {std::string(kGreeting)};
  opened.session = s.id;
  opened.replies = s.pending;
  return opened;
}

std::shared_ptr<DiscourseManager::Slot> DiscourseManager::slot(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession("unknown session '" + id + "'");
  return it->second;
}

Session DiscourseManager::session(const std::string& id) const {
  auto sl = slot(id);
  std::lock_guard lock(sl->mutex);
  return sl->session;
}

Turn DiscourseManager::handle_post(const std::string& session, const std::string& text) {
  auto sl = slot(session);
  std::lock_guard lock(sl->mutex);
  Session& s = sl->session;
  if (s.mode == Mode::closed) throw SessionClosed("session '" + session + "' is closed");
  check_risk(s, text);
  auto replies = route(s, text);
  return finish(*sl, text, std::move(replies));
}

Turn DiscourseManager::command(const std::string& session, const std::string& command) {
  auto sl = slot(session);
  std::lock_guard lock(sl->mutex);
  Session& s = sl->session;
  if (s.mode == Mode::closed) throw SessionClosed("session '" + session + "' is closed");

  const auto cmd = trim(command);
  const auto space = cmd.find(' ');
  const auto verb = cmd.substr(0, space);
  const auto arg = space == std::string::npos ? std::string() : trim(cmd.substr(space + 1));
  if (verb != "/open") s.draft_title.reset();

  std::vector<std::string> replies;
  if (verb == "/search") {
    s.mode = Mode::searching;
    replies = {std::string(kAskSearch)};
  } else if (verb == "/chat") {
    replies = start_chat(s);
  } else if (verb == "/recommend") {
    replies = recommend(s);
  } else if (verb == "/exit") {
    s.mode = Mode::closed;
    replies = {std::string(kGoodbye)};
  } else if (verb == "/open" && !arg.empty()) {
    replies = open_tale(s, arg);
  } else {
    replies = {std::string(kHelp)};
  }
  return finish(*sl, cmd, std::move(replies));
}

Turn DiscourseManager::finish(Slot& slot, const std::string& answer, std::vector<std::string> replies) {
  Session& s = slot.session;
  monitor::Interaction record{services_.clock->now(), s.user, join(s.pending, "\n"), answer};
  s.transcript.push_back(record);
  if (slot.log) {
    try {
      slot.log->append(record);
    } catch (const std::exception& e) {
      std::cerr << "conversation log " << slot.log->path() << ": " << e.what() << "\n";
    }
  }
  s.pending = replies;
  if (s.mode == Mode::closed) close(slot);
  return Turn{std::move(replies), s.mode};
}

void DiscourseManager::close(Slot& slot) {
  Session& s = slot.session;
  s.mode = Mode::closed;
  if (!s.pending.empty()) {
    monitor::Interaction record{services_.clock->now(), s.user, join(s.pending, "\n"), ""};
    s.transcript.push_back(record);
    s.pending.clear();
    if (slot.log) {
      try {
        slot.log->append(record);
      } catch (const std::exception& e) {
        std::cerr << "conversation log " << slot.log->path() << ": " << e.what() << "\n";
      }
    }
  }
  if (slot.log && !slot.log->closed()) slot.log->close();
}

void DiscourseManager::close_all() {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::lock_guard lock(sessions_mutex_);
    for (auto& [id, sl] : sessions_) slots.push_back(sl);
  }
  for (auto& sl : slots) {
    std::lock_guard lock(sl->mutex);
    if (sl->session.mode != Mode::closed || (sl->log && !sl->log->closed())) close(*sl);
  }
}

std::vector<std::string> DiscourseManager::route(Session& s, const std::string& text) {
  if (s.mode == Mode::adding) return adding_step(s, text);

  if (s.mode == Mode::searching) {
    if (auto choice = parse_choice(text)) {
      if (*choice >= 1 && *choice <= s.last_results.size()) return open_tale(s, s.last_results[*choice - 1].id);
      return {"Please type a number between 1 and " + std::to_string(s.last_results.size()) + "."};
    }
  }

  const auto intent = classify::classify_intent(*services_.intent_model, text, services_.intent_threshold);
  switch (intent) {
    case classify::Intent::exit:
      s.mode = Mode::closed;
      return {std::string(kGoodbye)};
    case classify::Intent::chat_emotions:
      if (s.mode == Mode::chatting) return {chat_turn(s, text)};
      return start_chat(s);
    case classify::Intent::search_tales:
      if (s.mode == Mode::chatting) return recommend(s);
      s.mode = Mode::searching;
      return run_search(s, text);
    case classify::Intent::add_tale:
      s.mode = Mode::adding;
      s.draft_title.reset();
      return {std::string(kAskTitle)};
    case classify::Intent::no_intention:
      break;
  }
  switch (s.mode) {
    case Mode::searching: return run_search(s, text);
    case Mode::reading: return reading_answer(s, text);
    case Mode::chatting: return {chat_turn(s, text)};
    default: return {std::string(kHelp)};
  }
}

std::vector<std::string> DiscourseManager::run_search(Session& s, const std::string& text) {
  const auto snap = services_.library->snapshot();
  auto query = retrieval::parse_query(text, snap->tales.stopwords(), snap->corpus.themes);
  if (query.empty()) return {std::string(kAskSearch)};
  if (!s.last_results.empty() && is_refinement(text)) query = retrieval::refine(s.last_results, std::move(query));

  auto results = retrieval::search(snap->tales, query, services_.dfr_c);
  std::erase_if(results, [&](const retrieval::SearchResult& r) {
    const auto* t = snap->corpus.find_tale(r.id);
    return t == nullptr || !age_allows(*t, s.age);
  });
  if (query.emotion_filter) {
    for (auto e : *query.emotion_filter) record_event(s, e, monitor::EventContext::search_filter);
  }
  s.last_results = results;
  if (results.empty()) return {std::string(kNoResults)};
  return {render_list("These are the tales I found:", snap->corpus, results)};
}

std::vector<std::string> DiscourseManager::open_tale(Session& s, const std::string& tale_id) {
  const auto snap = services_.library->snapshot();
  const Tale* tale = snap->corpus.find_tale(tale_id);
  if (tale == nullptr || tale->status != TaleStatus::approved) return {"Sorry, that tale is not available."};
  if (!age_allows(*tale, s.age)) return {"Sorry, that tale is not suitable for your age. Please choose another one."};

  if (s.registered() && services_.users) {
    services_.users->mark_read(s.user, tale->id);
  } else {
    s.session_reads.insert(tale->id);
  }
  if (services_.reads) services_.reads->record(monitor::ReadEvent{services_.clock->now(), s.user, tale->id});

  s.mode = Mode::reading;
  s.tale = tale->id;
  s.questions = generate_tale_questions(*tale, services_.open_questions, services_.common_words);
  s.cursor = 0;
  s.awaiting_followup = false;

  std::string text = tale->title + "\n\n" + tale->body;
  if (tale->source_url) text += "\n\n" + *tale->source_url;
  std::vector<std::string> replies{std::move(text)};
  if (!s.questions.empty()) {
    replies.push_back(s.questions.front().text);
  } else {
    replies.emplace_back(kLoopFinished);
    s.mode = Mode::idle;
  }
  return replies;
}

std::vector<std::string> DiscourseManager::reading_answer(Session& s, const std::string& text) {
  std::vector<std::string> out;
  if (s.cursor >= s.questions.size()) {
    s.mode = Mode::idle;
    return {std::string(kLoopFinished)};
  }
  if (s.awaiting_followup) {
    s.awaiting_followup = false;
    out.emplace_back("Thank you for your answer.");
  } else {
    auto reply = answer_followup(s, s.questions[s.cursor], text);
    out.push_back(std::move(reply.text));
    if (reply.awaits_answer) {
      s.awaiting_followup = true;
      return out;
    }
  }
  if (++s.cursor < s.questions.size()) {
    out.push_back(s.questions[s.cursor].text);
  } else {
    out.emplace_back(kLoopFinished);
    s.mode = Mode::idle;
  }
  return out;
}

FollowupReply DiscourseManager::answer_followup(Session& s, const Question& q, const std::string& answer) {
  const auto snap = services_.library->snapshot();
  const Tale* tale = snap->corpus.find_tale(s.tale);

  switch (q.followup) {
    case FollowupRule::ask_emotions_if_negative:
      if (is_negative(answer)) return {std::string(kAskWhichEmotions), true};
      return {"I agree, this tale deals with those emotions.", false};
    case FollowupRule::confirm_salient_emotion: {
      const auto c = classify::classify(*services_.emotion_model, answer, services_.emotion_threshold);
      const auto e = c.salient ? parse_emotion(*c.salient) : std::nullopt;
      if (!e) return {std::string(kNeutralAck), false};
      record_event(s, *e, monitor::EventContext::detection);
      return {"I guess that your feelings are related to '" + std::string(emotion_display_name(*e)) +
                  "', am I right?",
              true};
    }
    case FollowupRule::active_listening:
      return {active_listen(services_.generator, answer), true};
    case FollowupRule::contrast_answer:
      if (tale != nullptr) {
        if (auto own = services_.generator.ask(tale_question_prompt(q.text, *tale))) {
          return {"This is what I would answer: '" + *own + "'. Do you see it the same way?", true};
        }
      }
      return {std::string(kNeutralAck), false};
    case FollowupRule::compare_summary:
      if (tale == nullptr) return {std::string(kNeutralAck), false};
      return {"This is my summary of the tale: '" + summarize_tale(services_.generator, *tale) +
                  "'. How does it compare with yours?",
              true};
    case FollowupRule::check_entity: {
      const auto terms = text::normalized_terms(answer);
      const auto expected = text::normalized_terms(q.expected);
      const bool hit = !expected.empty() && std::search(terms.begin(), terms.end(), expected.begin(),
                                                        expected.end()) != terms.end();
      return {(hit ? "That's right, it was " : "Not quite, it was ") + q.expected + ".", false};
    }
    case FollowupRule::acknowledge:
      break;
  }
  return {std::string(kNeutralAck), false};
}

std::vector<std::string> DiscourseManager::start_chat(Session& s) {
  s.mode = Mode::chatting;
  s.detected.clear();
  return {std::string(kChatOpening)};
}

std::string DiscourseManager::chat_turn(Session& s, const std::string& text) {
  const auto c = classify::classify(*services_.emotion_model, text, services_.emotion_threshold);
  const auto e = c.salient ? parse_emotion(*c.salient) : std::nullopt;
  if (!e) return std::string(kChatPrompting);

  const auto count = ++s.detected[*e];
  record_event(s, *e, monitor::EventContext::detection);

  const auto snap = services_.library->snapshot();
  std::string reply = "Do you know that the emotion '" + std::string(emotion_display_name(*e)) + "' is defined as: '";
  if (const auto* card = snap->corpus.card(*e)) reply += card->definition;
  reply += "'? Do you think that your current emotional state is identified with this emotion?";
  const auto quotes = retrieval::tagged_with(snap->quotes, *e);
  if (!quotes.empty()) {
    reply += " An interesting quote to reflect on: '" + quotes[(count - 1) % quotes.size()]->text + "'";
  }
  return reply;
}

std::vector<std::string> DiscourseManager::recommend(Session& s) {
  s.mode = Mode::searching;
  if (s.detected.empty()) return {std::string(kNothingDetected)};
  const auto snap = services_.library->snapshot();
  const auto recs = recommend_tales(snap->corpus, s.detected, read_set(s), s.age);
  s.last_results.clear();
  if (recs.empty()) return {std::string(kNothingToRecommend)};
  for (const auto& r : recs) {
    for (auto e : r.matched) record_event(s, e, monitor::EventContext::recommendation);
    const auto* t = snap->corpus.find_tale(r.tale);
    s.last_results.push_back(retrieval::SearchResult{r.tale, static_cast<double>(r.score), t->emotions, t->themes});
  }
  return {render_list("Based on our conversation, I recommend these tales:", snap->corpus, s.last_results)};
}

std::vector<std::string> DiscourseManager::adding_step(Session& s, const std::string& text) {
  const auto value = trim(text);
  if (value.empty()) return {"Please write something, or type /search to leave."};
  if (!s.draft_title) {
    s.draft_title = value;
    return {std::string(kAskBody)};
  }
  TaleDraft draft{*s.draft_title, value, std::nullopt, std::nullopt, std::nullopt};
  if (s.registered()) draft.submitted_by = s.user;
  const auto title = *s.draft_title;
  services_.library->submit(std::move(draft));
  s.draft_title.reset();
  s.mode = Mode::idle;
  return {"Thank you! Your tale '" + title + "' will be reviewed by our psychologists before it can be read."};
}

std::set<std::string> DiscourseManager::read_set(const Session& s) const {
  std::set<std::string> read = s.session_reads;
  if (s.registered() && services_.users) {
    if (auto p = services_.users->find(s.user)) read.insert(p->read_tales.begin(), p->read_tales.end());
  }
  return read;
}

void DiscourseManager::record_event(const Session& s, Emotion e, monitor::EventContext context) {
  if (!s.registered() || !services_.events) return;
  services_.events->record(monitor::SelectionEvent{services_.clock->now(), s.user, e, context});
}

void DiscourseManager::check_risk(const Session& s, const std::string& text) {
  if (!s.registered() || !services_.risk || !services_.users) return;
  if (auto flag = services_.risk->detect(text, services_.clock->now())) services_.users->add_flag(s.user, *flag);
}

}  // namespace talechat::dialogue
