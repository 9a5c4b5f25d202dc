#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "talechat/classify.hpp"
#include "talechat/clock.hpp"
#include "talechat/generation.hpp"
#include "talechat/library.hpp"
#include "talechat/monitor.hpp"
#include "talechat/questions.hpp"
#include "talechat/retrieval.hpp"

namespace talechat::dialogue {

using classify::BayesModel;

inline constexpr std::string_view kGreeting =
    "Hello! I can help you search for tales, chat about emotions or add a new tale. What would you like to do?";
inline constexpr std::string_view kChatOpening =
    "Hello, how are you today? Please, let's talk about whatever you want. The more we chat, the better I can "
    "recommend a tale that's right for you";
inline constexpr std::string_view kChatPrompting =
    "Tell me a bit more about how you feel or about something that happened to you today.";
inline constexpr std::string_view kAskWhichEmotions = "OK, then tell me which emotions you think that tale deals with";
inline constexpr std::string_view kNeutralAck = "Thank you for sharing that with me.";
inline constexpr std::string_view kAskSearch =
    "What kind of tale would you like to read? You can name an emotion, a theme or any word.";
inline constexpr std::string_view kNoResults = "I could not find any tale for that search. Try other words.";
inline constexpr std::string_view kNothingDetected =
    "We have not talked about emotions yet, so I cannot recommend a tale. Tell me how you feel today.";
inline constexpr std::string_view kNothingToRecommend =
    "I could not find a new tale for the emotions we talked about. You can search for one instead.";
inline constexpr std::string_view kLoopFinished =
    "We have finished the questions about this tale. You can search for another tale or we can chat about "
    "emotions.";
inline constexpr std::string_view kAskTitle = "Great! What is the title of your tale?";
inline constexpr std::string_view kAskBody = "Now write the text of the tale, please.";
inline constexpr std::string_view kGoodbye = "Goodbye! I hope to see you again soon.";
inline constexpr std::string_view kHelp =
    "I did not understand that. You can ask me to search for tales, to chat about emotions or to add a tale. "
    "Commands: /search, /chat, /recommend, /exit.";

enum class Mode { idle, searching, reading, chatting, adding, closed };
std::string_view mode_name(Mode m);

class SessionClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownSession : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Session {
  std::string id;
  std::string user = std::string(monitor::kUnregisteredUser);
  std::optional<int> age;  // unknown for unregistered users
  Mode mode = Mode::idle;

  // reading
  std::string tale;
  std::vector<Question> questions;
  std::size_t cursor = 0;
  bool awaiting_followup = false;

  // chatting; counts per emotion for the current episode
  std::map<Emotion, std::size_t> detected;

  // searching
  std::vector<retrieval::SearchResult> last_results;

  // adding
  std::optional<std::string> draft_title;

  std::set<std::string> session_reads;     // reads of an unregistered user
  std::vector<std::string> pending;        // replies not yet paired with an answer
  std::vector<monitor::Interaction> transcript;

  bool registered() const { return user != monitor::kUnregisteredUser; }
};

struct Recommendation {
  std::string tale;
  std::size_t score = 0;
  std::set<Emotion> matched;
};

/// Approved tales sharing an emotion with `detected`, minus `read` and
/// tales above `age` (an unknown age excludes every tale with an age
/// floor). Score is the summed detection count of the shared emotions;
/// ties go to the lower id.
std::vector<Recommendation> recommend_tales(const Corpus& corpus, const std::map<Emotion, std::size_t>& detected,
                                            const std::set<std::string>& read, std::optional<int> age);

/// Whether a tale may be opened by a user of `age`.
bool age_allows(const Tale& tale, std::optional<int> age);

struct FollowupReply {
  std::string text;
  bool awaits_answer = false;
};

/// Everything the discourse manager reads or writes besides sessions.
struct Services {
  TaleLibrary* library = nullptr;
  const BayesModel* emotion_model = nullptr;
  const BayesModel* intent_model = nullptr;
  std::optional<double> emotion_threshold;
  double intent_threshold = 0.5;
  double dfr_c = 1.0;
  GenClient generator;
  const monitor::RiskLexicon* risk = nullptr;
  monitor::UserRegistry* users = nullptr;
  monitor::EventLog* events = nullptr;
  monitor::ReadLog* reads = nullptr;
  Clock* clock = nullptr;
  std::filesystem::path log_root;          // conversation files; none when empty
  std::filesystem::path session_counter;   // persisted next session number
  text::StopwordList common_words;         // not names, for entity questions
  std::vector<OpenQuestion> open_questions = default_open_questions();
};

struct Turn {
  std::vector<std::string> replies;
  Mode mode = Mode::idle;
};

/// Routes each post by intent and runs the search, reading, chatting and
/// adding loops. Turns within one session are serialized; distinct
/// sessions run independently.
class DiscourseManager {
 public:
  explicit DiscourseManager(Services services);
  ~DiscourseManager();

  DiscourseManager(const DiscourseManager&) = delete;
  DiscourseManager& operator=(const DiscourseManager&) = delete;

  struct Opened {
    std::string session;
    std::vector<std::string> replies;
    std::optional<monitor::RiskFlag> alarm;
  };

  /// An absent or empty `user` opens a non-registered session; an unknown
  /// id throws std::invalid_argument.
  Opened open_session(const std::optional<std::string>& user);

  /// Throws UnknownSession or SessionClosed.
  Turn handle_post(const std::string& session, const std::string& text);
  /// "/search", "/chat", "/recommend", "/exit" or "/open <tale id>".
  Turn command(const std::string& session, const std::string& command);

  Session session(const std::string& id) const;

  /// Closes every open session, flushing their logs.
  void close_all();

  // Single-step operations on a session the caller owns; exposed for tests.
  std::vector<std::string> open_tale(Session& s, const std::string& tale_id);
  FollowupReply answer_followup(Session& s, const Question& q, const std::string& answer);
  std::string chat_turn(Session& s, const std::string& text);
  std::vector<std::string> recommend(Session& s);
  std::vector<std::string> run_search(Session& s, const std::string& text);

 private:
  struct Slot {
    std::mutex mutex;
    Session session;
    std::unique_ptr<monitor::ConversationLog> log;
  };

  std::shared_ptr<Slot> slot(const std::string& id) const;
  std::string next_session_id();
  Turn finish(Slot& slot, const std::string& answer, std::vector<std::string> replies);
  void close(Slot& slot);
  std::vector<std::string> route(Session& s, const std::string& text);
  std::vector<std::string> reading_answer(Session& s, const std::string& text);
  std::vector<std::string> adding_step(Session& s, const std::string& text);
  std::vector<std::string> start_chat(Session& s);
  std::set<std::string> read_set(const Session& s) const;
  void record_event(const Session& s, Emotion e, monitor::EventContext context);
  void check_risk(const Session& s, const std::string& text);

  Services services_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>, std::less<>> sessions_;
  std::size_t next_session_ = 1;
};

}  // namespace talechat::dialogue
