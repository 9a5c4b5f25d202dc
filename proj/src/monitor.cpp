#include "talechat/monitor.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "talechat/textproc.hpp"
#include "talechat/xml.hpp"

namespace talechat::monitor {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  return fields;
}

constexpr std::string_view kEventHeader = "timestamp,user,emotion,context";
constexpr std::string_view kReadHeader = "timestamp,user,tale";

}  // namespace

std::string_view gender_name(Gender g) {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::unspecified: return "unspecified";
  }
  return "unspecified";
}

std::optional<Gender> parse_gender(std::string_view s) {
  for (auto g : {Gender::male, Gender::female, Gender::unspecified}) {
    if (gender_name(g) == s) return g;
  }
  return std::nullopt;
}

AgeBucket age_bucket(int age) {
  if (age < 18) return AgeBucket::under_18;
  if (age <= 23) return AgeBucket::from_18_to_23;
  return AgeBucket::over_23;
}

std::string_view age_bucket_name(AgeBucket b) {
  switch (b) {
    case AgeBucket::under_18: return "under18";
    case AgeBucket::from_18_to_23: return "18-23";
    case AgeBucket::over_23: return "over23";
  }
  return "under18";
}

std::optional<AgeBucket> parse_age_bucket(std::string_view s) {
  for (auto b : {AgeBucket::under_18, AgeBucket::from_18_to_23, AgeBucket::over_23}) {
    if (age_bucket_name(b) == s) return b;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::string_view risk_category_name(RiskCategory c) {
  switch (c) {
    case RiskCategory::suicide_self_harm: return "suicide_self_harm";
    case RiskCategory::depression: return "depression";
    case RiskCategory::bullying: return "bullying";
  }
  return "bullying";
}

std::optional<RiskCategory> parse_risk_category(std::string_view s) {
  for (auto c : {RiskCategory::suicide_self_harm, RiskCategory::depression, RiskCategory::bullying}) {
    if (risk_category_name(c) == s) return c;
  }
  return std::nullopt;
}

RiskLexicon RiskLexicon::parse(std::string_view contents) {
  RiskLexicon lex;
  std::optional<RiskCategory> section;
  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error("risk lexicon line " + std::to_string(line_no) + ": bad section");
      const auto name = trim(std::string_view(line).substr(1, line.size() - 2));
      section = parse_risk_category(name);
      if (!section) throw std::runtime_error("risk lexicon line " + std::to_string(line_no) + ": unknown category '" + name + "'");
      continue;
    }
    if (!section) throw std::runtime_error("risk lexicon line " + std::to_string(line_no) + ": phrase outside a section");
    auto phrase = text::normalized_phrase(line);
    if (!phrase.empty()) lex.phrases_[*section].push_back(std::move(phrase));
  }
  if (lex.size() == 0) throw std::runtime_error("risk lexicon defines no phrases");
  return lex;
}

RiskLexicon RiskLexicon::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw std::runtime_error("risk lexicon not found: " + path.string());
  return parse(read_all(path));
}

std::size_t RiskLexicon::size() const {
  std::size_t n = 0;
  for (const auto& [_, list] : phrases_) n += list.size();
  return n;
}

std::optional<RiskFlag> RiskLexicon::detect(std::string_view text, Instant when) const {
  const std::string haystack = " " + text::normalized_phrase(text) + " ";
  // std::map iterates in enum order, which is severity order.
  for (const auto& [category, list] : phrases_) {
    for (const auto& phrase : list) {
      if (haystack.find(" " + phrase + " ") != std::string::npos) {
        return RiskFlag{category, phrase, when, false};
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

UserProfile UserProfile::unregistered() {
  UserProfile p;
  p.id = std::string(kUnregisteredUser);
  return p;
}

std::optional<RiskFlag> pending_alarm(const UserProfile& profile) {
  std::optional<RiskFlag> best;
  for (const auto& f : profile.flags) {
    if (f.acknowledged) continue;
    if (!best || f.category < best->category) best = f;
  }
  return best;
}

UserRegistry::UserRegistry(std::filesystem::path file) : file_(std::move(file)) {
  if (!file_.empty() && std::filesystem::exists(file_)) restore();
}

void UserRegistry::restore() {
  const auto doc = nlohmann::json::parse(read_all(file_));
  next_id_ = doc.at("next_id").get<std::size_t>();
  for (const auto& u : doc.at("users")) {
    UserProfile p;
    p.id = u.at("id").get<std::string>();
    p.age = u.at("age").get<int>();
    p.gender = parse_gender(u.at("gender").get<std::string>()).value_or(Gender::unspecified);
    p.registered = true;
    p.visible_to_supervisor = u.at("visible_to_supervisor").get<bool>();
    for (const auto& t : u.at("read_tales")) p.read_tales.insert(t.get<std::string>());
    for (const auto& f : u.at("flags")) {
      RiskFlag flag;
      flag.category = parse_risk_category(f.at("category").get<std::string>()).value_or(RiskCategory::bullying);
      flag.phrase = f.at("phrase").get<std::string>();
      flag.timestamp = parse_iso_timestamp(f.at("timestamp").get<std::string>()).value_or(Instant{});
      flag.acknowledged = f.at("acknowledged").get<bool>();
      p.flags.push_back(std::move(flag));
    }
    users_.emplace(p.id, std::move(p));
  }
}

void UserRegistry::persist() const {
  if (file_.empty()) return;
  nlohmann::json users = nlohmann::json::array();
  for (const auto& [id, p] : users_) {
    nlohmann::json flags = nlohmann::json::array();
    for (const auto& f : p.flags) {
      flags.push_back({{"category", risk_category_name(f.category)},
                       {"phrase", f.phrase},
                       {"timestamp", format_iso_timestamp(f.timestamp)},
                       {"acknowledged", f.acknowledged}});
    }
    users.push_back({{"id", p.id},
                     {"age", p.age},
                     {"gender", gender_name(p.gender)},
                     {"visible_to_supervisor", p.visible_to_supervisor},
                     {"read_tales", p.read_tales},
                     {"flags", std::move(flags)}});
  }
  const nlohmann::json doc{{"next_id", next_id_}, {"users", std::move(users)}};
  xml::write_file_atomically(file_, doc.dump(2) + "\n");
}

UserProfile UserRegistry::register_user(int age, Gender gender, bool visible_to_supervisor) {
  if (age < 5 || age > 120) throw std::invalid_argument("age must lie in [5, 120]");
  std::lock_guard lock(mutex_);
  UserProfile p;
  std::string id;
  do {
    char buf[16];
    std::snprintf(buf, sizeof buf, "u%04zu", next_id_++);
    id = buf;
  } while (users_.count(id));
  p.id = id;
  p.age = age;
  p.gender = gender;
  p.registered = true;
  p.visible_to_supervisor = visible_to_supervisor;
  users_.emplace(id, p);
  persist();
  return p;
}

std::optional<UserProfile> UserRegistry::find(std::string_view id) const {
  std::lock_guard lock(mutex_);
  auto it = users_.find(id);
  if (it == users_.end()) return std::nullopt;
  return it->second;
}

bool UserRegistry::is_registered(std::string_view id) const {
  std::lock_guard lock(mutex_);
  return users_.find(id) != users_.end();
}

std::vector<UserProfile> UserRegistry::all() const {
  std::lock_guard lock(mutex_);
  std::vector<UserProfile> out;
  for (const auto& [_, p] : users_) out.push_back(p);
  return out;
}

bool UserRegistry::mark_read(std::string_view id, const std::string& tale_id) {
  std::lock_guard lock(mutex_);
  auto it = users_.find(id);
  if (it == users_.end()) return false;
  if (!it->second.read_tales.insert(tale_id).second) return false;
  persist();
  return true;
}

bool UserRegistry::add_flag(std::string_view id, RiskFlag flag) {
  if (flag.phrase.empty()) throw std::invalid_argument("risk flag needs a matched phrase");
  std::lock_guard lock(mutex_);
  auto it = users_.find(id);
  if (it == users_.end()) return false;
  it->second.flags.push_back(std::move(flag));
  persist();
  return true;
}

std::optional<RiskFlag> UserRegistry::check_alarm(std::string_view id) const {
  std::lock_guard lock(mutex_);
  auto it = users_.find(id);
  if (it == users_.end()) return std::nullopt;
  return pending_alarm(it->second);
}

bool UserRegistry::acknowledge(std::string_view id) {
  std::lock_guard lock(mutex_);
  auto it = users_.find(id);
  if (it == users_.end()) return false;
  bool changed = false;
  for (auto& f : it->second.flags) {
    if (!f.acknowledged) {
      f.acknowledged = true;
      changed = true;
    }
  }
  if (changed) persist();
  return changed;
}

// ---------------------------------------------------------------------------

std::string serialize_interaction(const Interaction& i) {
  std::string out = "<interaction><date>";
  out += format_log_timestamp(i.date);
  out += "</date><user>";
  out += xml::escape(i.user);
  out += "</user><CuentosIE>";
  out += xml::escape(i.prompt);
  out += "</CuentosIE><answer>";
  out += xml::escape(i.answer);
  out += "</answer></interaction>";
  return out;
}

std::string conversation_header(std::string_view user, std::string_view session) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<conversation user=\"" + xml::escape(user) + "\" session=\"" +
         xml::escape(session) + "\">\n";
}

std::vector<Interaction> parse_conversation(std::string_view contents, const std::string& filename) {
  std::string doc(contents);
  if (doc.find("</conversation>") == std::string::npos) doc += kConversationFooter;
  const auto tree = xml::parse(doc, filename);
  auto root = tree.get_child_optional("conversation");
  if (!root) throw xml::ParseError(filename, 1, "missing <conversation> root");

  std::vector<Interaction> out;
  for (const auto& [key, node] : *root) {
    if (key != "interaction") continue;
    Interaction i;
    const auto date = node.get<std::string>("date", "");
    auto when = parse_log_timestamp(date);
    if (!when) throw xml::ParseError(filename, 0, "bad interaction date '" + date + "'");
    i.date = *when;
    i.user = node.get<std::string>("user", "");
    i.prompt = node.get<std::string>("CuentosIE", "");
    i.answer = node.get<std::string>("answer", "");
    out.push_back(std::move(i));
  }
  return out;
}

std::string ConversationLog::user_directory(std::string_view user) {
  std::string out;
  for (char c : user) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    out.push_back(safe ? c : '-');
  }
  return out.empty() ? std::string("-") : out;
}

ConversationLog::ConversationLog(const std::filesystem::path& root, std::string user, std::string session) {
  const auto dir = root / user_directory(user);
  std::filesystem::create_directories(dir);
  path_ = dir / (user_directory(session) + ".xml");
  const bool fresh = !std::filesystem::exists(path_);
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw std::runtime_error("cannot open conversation log " + path_.string());
  if (fresh) {
    out_ << conversation_header(user, session);
    out_.flush();
  }
}

void ConversationLog::append(const Interaction& interaction) {
  if (closed_) throw std::logic_error("conversation log already closed");
  out_ << serialize_interaction(interaction) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write failed on " + path_.string());
}

void ConversationLog::close() {
  if (closed_) return;
  out_ << kConversationFooter;
  out_.flush();
  out_.close();
  closed_ = true;
}

// ---------------------------------------------------------------------------

std::string_view event_context_name(EventContext c) {
  switch (c) {
    case EventContext::search_filter: return "search_filter";
    case EventContext::recommendation: return "recommendation";
    case EventContext::detection: return "detection";
  }
  return "search_filter";
}

std::optional<EventContext> parse_event_context(std::string_view s) {
  for (auto c : {EventContext::search_filter, EventContext::recommendation, EventContext::detection}) {
    if (event_context_name(c) == s) return c;
  }
  return std::nullopt;
}

SelectionEvent make_event(Instant when, std::string user, std::string_view emotion, EventContext context) {
  auto e = parse_emotion(emotion);
  if (!e) throw std::invalid_argument("unknown emotion '" + std::string(emotion) + "'");
  return SelectionEvent{when, std::move(user), *e, context};
}

std::string serialize_event(const SelectionEvent& e) {
  return format_iso_timestamp(e.timestamp) + "," + csv_field(e.user) + "," + std::string(emotion_name(e.emotion)) +
         "," + std::string(event_context_name(e.context));
}

SelectionEvent parse_event(std::string_view line) {
  const auto f = csv_split(line);
  if (f.size() != 4) throw std::runtime_error("event line needs 4 fields: '" + std::string(line) + "'");
  auto when = parse_iso_timestamp(f[0]);
  if (!when) throw std::runtime_error("bad event timestamp '" + f[0] + "'");
  auto context = parse_event_context(f[3]);
  if (!context) throw std::runtime_error("bad event context '" + f[3] + "'");
  return make_event(*when, f[1], f[2], *context);
}

EventLog::EventLog(std::filesystem::path file) : file_(std::move(file)) {
  if (file_.empty() || !std::filesystem::exists(file_)) return;
  std::istringstream in(read_all(file_));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == kEventHeader) continue;
    events_.push_back(parse_event(line));
  }
}

void EventLog::record(const SelectionEvent& e) {
  std::lock_guard lock(mutex_);
  if (!file_.empty()) {
    const bool fresh = !std::filesystem::exists(file_);
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot append to " + file_.string());
    if (fresh) out << kEventHeader << '\n';
    out << serialize_event(e) << '\n';
    if (!out.flush()) throw std::runtime_error("write failed on " + file_.string());
  }
  events_.push_back(e);
}

std::vector<SelectionEvent> EventLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

ReadLog::ReadLog(std::filesystem::path file) : file_(std::move(file)) {
  if (file_.empty() || !std::filesystem::exists(file_)) return;
  std::istringstream in(read_all(file_));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == kReadHeader) continue;
    const auto f = csv_split(line);
    auto when = f.size() == 3 ? parse_iso_timestamp(f[0]) : std::nullopt;
    if (!when) throw std::runtime_error("bad read-log line '" + line + "'");
    events_.push_back(ReadEvent{*when, f[1], f[2]});
  }
}

void ReadLog::record(const ReadEvent& e) {
  std::lock_guard lock(mutex_);
  if (!file_.empty()) {
    const bool fresh = !std::filesystem::exists(file_);
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot append to " + file_.string());
    if (fresh) out << kReadHeader << '\n';
    out << format_iso_timestamp(e.timestamp) << ',' << csv_field(e.user) << ',' << csv_field(e.tale) << '\n';
    if (!out.flush()) throw std::runtime_error("write failed on " + file_.string());
  }
  events_.push_back(e);
}

std::vector<ReadEvent> ReadLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

// ---------------------------------------------------------------------------

Segment parse_segment(std::string_view s) {
  Segment seg;
  auto apply = [&](std::string_view part) {
    if (part.empty() || part == "any" || part == "all") return;
    if (auto g = parse_gender(part)) {
      seg.gender = g;
    } else if (auto b = parse_age_bucket(part)) {
      seg.age = b;
    } else {
      throw std::invalid_argument("unknown segment component '" + std::string(part) + "'");
    }
  };
  const auto colon = s.find(':');
  apply(s.substr(0, colon));
  if (colon != std::string_view::npos) apply(s.substr(colon + 1));
  return seg;
}

EmotionStats emotion_stats(const std::vector<SelectionEvent>& events, const Segment& segment,
                           const std::function<std::optional<UserProfile>(std::string_view)>& lookup) {
  EmotionStats stats;
  for (const auto& e : events) {
    if (!segment.unrestricted()) {
      auto profile = lookup ? lookup(e.user) : std::nullopt;
      if (!profile) continue;
      if (segment.gender && profile->gender != *segment.gender) continue;
      if (segment.age && age_bucket(profile->age) != *segment.age) continue;
    }
    ++stats.counts[emotion_index(e.emotion)];
    ++stats.total;
  }
  stats.empty = stats.total == 0;
  if (!stats.empty) {
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
      stats.percent[i] = 100.0 * static_cast<double>(stats.counts[i]) / static_cast<double>(stats.total);
    }
  }
  return stats;
}

ValenceSplit valence_split(const EmotionStats& stats) {
  if (stats.total == 0) return {};
  std::size_t positive = 0;
  for (auto e : all_emotions()) {
    if (emotion_valence(e) == Valence::positive) positive += stats.counts[emotion_index(e)];
  }
  const double total = static_cast<double>(stats.total);
  return ValenceSplit{100.0 * static_cast<double>(positive) / total,
                      100.0 * static_cast<double>(stats.total - positive) / total};
}

std::vector<TimelineBucket> timeline(const std::vector<SelectionEvent>& events, const UserRegistry& users,
                                     std::string_view user, std::chrono::seconds window) {
  if (!users.is_registered(user)) {
    throw std::invalid_argument("monitoring is only available for registered users");
  }
  if (window.count() <= 0) throw std::invalid_argument("timeline window must be positive");

  std::map<long long, TimelineBucket> buckets;
  const long long w = window.count();
  for (const auto& e : events) {
    if (e.user != user) continue;
    const long long t = e.timestamp.time_since_epoch().count();
    long long start = t / w * w;
    if (t < 0 && t % w != 0) start -= w;
    auto& b = buckets[start];
    b.start = Instant{std::chrono::seconds{start}};
    ++b.counts[emotion_index(e.emotion)];
    ++b.total;
  }
  std::vector<TimelineBucket> out;
  for (auto& [_, b] : buckets) out.push_back(b);
  return out;
}

}  // namespace talechat::monitor
