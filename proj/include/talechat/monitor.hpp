#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "talechat/clock.hpp"
#include "talechat/taxonomy.hpp"

namespace talechat::monitor {

inline constexpr std::string_view kUnregisteredUser = "non-registered user";

enum class Gender { male, female, unspecified };
std::string_view gender_name(Gender g);
std::optional<Gender> parse_gender(std::string_view s);

enum class AgeBucket { under_18, from_18_to_23, over_23 };
AgeBucket age_bucket(int age);
std::string_view age_bucket_name(AgeBucket b);  // "under18", "18-23", "over23"
std::optional<AgeBucket> parse_age_bucket(std::string_view s);

// ---------------------------------------------------------------------------
// Risk detection
// ---------------------------------------------------------------------------

/// Declaration order is severity order, highest first.
enum class RiskCategory { suicide_self_harm, depression, bullying };
std::string_view risk_category_name(RiskCategory c);
std::optional<RiskCategory> parse_risk_category(std::string_view s);

struct RiskFlag {
  RiskCategory category = RiskCategory::bullying;
  std::string phrase;
  Instant timestamp{};
  bool acknowledged = false;

  bool operator==(const RiskFlag&) const = default;
};

/// Normalized phrases per category, matched on token boundaries.
///
/// File format:
///   [suicide_self_harm]
///   tired of living
///   # comment
class RiskLexicon {
 public:
  /// Throws std::runtime_error on unknown sections or when no phrase is
  /// defined at all.
  static RiskLexicon parse(std::string_view contents);
  static RiskLexicon load(const std::filesystem::path& path);

  /// Highest-severity category with a phrase occurring in `text`.
  std::optional<RiskFlag> detect(std::string_view text, Instant when) const;

  std::size_t size() const;

 private:
  std::map<RiskCategory, std::vector<std::string>> phrases_;
};

// ---------------------------------------------------------------------------
// Users
// ---------------------------------------------------------------------------

struct UserProfile {
  std::string id;
  int age = 0;
  Gender gender = Gender::unspecified;
  bool registered = false;
  bool visible_to_supervisor = false;
  std::set<std::string> read_tales;
  std::vector<RiskFlag> flags;  // full history, oldest first

  bool operator==(const UserProfile&) const = default;

  /// A session-scoped profile for someone who did not register.
  static UserProfile unregistered();
};

/// Highest-severity unacknowledged flag; earliest wins a tie.
std::optional<RiskFlag> pending_alarm(const UserProfile& profile);

/// Registered users, persisted as JSON after every mutation. Only the
/// pseudonym, age, gender, visibility flag, read set and risk flags are
/// stored.
class UserRegistry {
 public:
  /// In-memory registry when `file` is empty.
  explicit UserRegistry(std::filesystem::path file = {});

  /// Throws std::invalid_argument for age outside [5, 120].
  UserProfile register_user(int age, Gender gender, bool visible_to_supervisor);

  std::optional<UserProfile> find(std::string_view id) const;
  bool is_registered(std::string_view id) const;
  std::vector<UserProfile> all() const;

  /// No-ops for unknown ids; return whether anything changed.
  bool mark_read(std::string_view id, const std::string& tale_id);
  bool add_flag(std::string_view id, RiskFlag flag);

  std::optional<RiskFlag> check_alarm(std::string_view id) const;
  /// Marks every pending flag acknowledged. History is kept.
  bool acknowledge(std::string_view id);

 private:
  void persist() const;
  void restore();

  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::map<std::string, UserProfile, std::less<>> users_;
  std::size_t next_id_ = 1;
};

// ---------------------------------------------------------------------------
// Conversation logs
// ---------------------------------------------------------------------------

struct Interaction {
  Instant date{};
  std::string user;
  std::string prompt;  // chatbot text
  std::string answer;  // user text

  bool operator==(const Interaction&) const = default;
};

/// `<interaction><date>..</date><user>..</user><CuentosIE>..</CuentosIE>
/// <answer>..</answer></interaction>` on one line, no trailing newline.
std::string serialize_interaction(const Interaction& i);

std::string conversation_header(std::string_view user, std::string_view session);
inline constexpr std::string_view kConversationFooter = "</conversation>\n";

/// Parses a conversation file. A missing closing tag (session still open)
/// is tolerated.
std::vector<Interaction> parse_conversation(std::string_view contents, const std::string& filename = "<memory>");

/// Append-only writer for one (user, session) conversation file.
class ConversationLog {
 public:
  ConversationLog(const std::filesystem::path& root, std::string user, std::string session);

  void append(const Interaction& interaction);
  /// Writes the closing tag. Further appends throw.
  void close();

  const std::filesystem::path& path() const { return path_; }
  bool closed() const { return closed_; }

  /// Directory-safe form of a user id.
  static std::string user_directory(std::string_view user);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  bool closed_ = false;
};

// ---------------------------------------------------------------------------
// Emotion events
// ---------------------------------------------------------------------------

enum class EventContext { search_filter, recommendation, detection };
std::string_view event_context_name(EventContext c);
std::optional<EventContext> parse_event_context(std::string_view s);

struct SelectionEvent {
  Instant timestamp{};
  std::string user;
  Emotion emotion{};
  EventContext context = EventContext::search_filter;

  bool operator==(const SelectionEvent&) const = default;
};

/// Throws std::invalid_argument for a name outside the taxonomy.
SelectionEvent make_event(Instant when, std::string user, std::string_view emotion, EventContext context);

/// `timestamp,user,emotion,context` with an ISO-8601 UTC timestamp.
std::string serialize_event(const SelectionEvent& e);
SelectionEvent parse_event(std::string_view line);

/// Append-only CSV log of emotion events. In-memory when `file` is empty.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path file = {});

  void record(const SelectionEvent& e);
  std::vector<SelectionEvent> events() const;
  std::size_t size() const;

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::vector<SelectionEvent> events_;
};

struct ReadEvent {
  Instant timestamp{};
  std::string user;
  std::string tale;

  bool operator==(const ReadEvent&) const = default;
};

/// Append-only CSV of tale openings, `timestamp,user,tale`.
class ReadLog {
 public:
  explicit ReadLog(std::filesystem::path file = {});

  void record(const ReadEvent& e);
  std::vector<ReadEvent> events() const;

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::vector<ReadEvent> events_;
};

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct Segment {
  std::optional<Gender> gender;
  std::optional<AgeBucket> age;

  bool unrestricted() const { return !gender && !age; }
};

/// Parses "female:18-23", "male", "under18", "any:over23".
Segment parse_segment(std::string_view s);

struct EmotionStats {
  std::array<std::size_t, kEmotionCount> counts{};
  std::array<double, kEmotionCount> percent{};
  std::size_t total = 0;
  bool empty = true;
};

/// Per-emotion percentages among the events whose user falls in `segment`.
/// A restricted segment only counts users found by `lookup`.
EmotionStats emotion_stats(const std::vector<SelectionEvent>& events, const Segment& segment,
                           const std::function<std::optional<UserProfile>(std::string_view)>& lookup);

struct ValenceSplit {
  double positive = 0.0;
  double negative = 0.0;
};

ValenceSplit valence_split(const EmotionStats& stats);

struct TimelineBucket {
  Instant start{};
  std::array<std::size_t, kEmotionCount> counts{};
  std::size_t total = 0;
};

/// Buckets a registered user's events into epoch-aligned windows, oldest
/// first; empty windows are omitted. Throws std::invalid_argument for an
/// unregistered user or a non-positive window.
std::vector<TimelineBucket> timeline(const std::vector<SelectionEvent>& events, const UserRegistry& users,
                                     std::string_view user, std::chrono::seconds window);

}  // namespace talechat::monitor
