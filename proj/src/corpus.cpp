#include "talechat/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "talechat/textproc.hpp"
#include "talechat/xml.hpp"

namespace talechat {
namespace {

std::string trim(std::string_view s) {
  const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::string child_text(const xml::Tree& node, const std::string& key) {
  auto child = node.get_child_optional(key);
  return child ? trim(child->data()) : std::string{};
}

// Collects name-resolution problems while reading; they are reported
// together with the structural invariants.
struct Reader {
  std::string file;
  std::vector<Violation> problems;

  std::set<Emotion> emotions(const xml::Tree& node, const std::string& owner) {
    std::set<Emotion> out;
    auto list = node.get_child_optional("emotions");
    if (!list) return out;
    for (const auto& [key, child] : *list) {
      if (key != "e") continue;
      const auto name = trim(child.data());
      if (auto e = parse_emotion(name)) {
        out.insert(*e);
      } else {
        problems.push_back({owner, "unknown emotion '" + name + "'"});
      }
    }
    return out;
  }

  std::set<ThemeId> themes(const xml::Tree& node, const std::string& owner) {
    std::set<ThemeId> out;
    auto list = node.get_child_optional("themes");
    if (!list) return out;
    for (const auto& [key, child] : *list) {
      if (key != "t") continue;
      const auto name = trim(child.data());
      try {
        out.insert(ThemeId(name));
      } catch (const std::invalid_argument&) {
        problems.push_back({owner, "empty theme name"});
      }
    }
    return out;
  }

  Tale tale(const xml::Tree& node) {
    Tale t;
    t.id = trim(xml::attribute(node, "id"));
    const std::string owner = t.id.empty() ? file + ": tale without id" : t.id;

    const auto status = xml::attribute(node, "status");
    if (auto s = parse_status(status)) {
      t.status = *s;
    } else {
      problems.push_back({owner, "invalid status '" + status + "'"});
    }

    if (auto age = trim(xml::attribute(node, "min_age")); !age.empty()) {
      int value = 0;
      auto [ptr, ec] = std::from_chars(age.data(), age.data() + age.size(), value);
      if (ec != std::errc{} || ptr != age.data() + age.size()) {
        problems.push_back({owner, "min_age is not an integer: '" + age + "'"});
      } else {
        t.min_age = value;
      }
    }
    if (auto by = xml::attribute(node, "submitted_by"); !by.empty()) t.submitted_by = by;

    t.title = child_text(node, "title");
    t.body = child_text(node, "body");
    if (auto url = child_text(node, "source_url"); !url.empty()) t.source_url = url;
    t.emotions = emotions(node, owner);
    t.themes = themes(node, owner);
    return t;
  }

  Quote quote(const xml::Tree& node) {
    Quote q;
    q.id = trim(xml::attribute(node, "id"));
    q.text = child_text(node, "text");
    q.emotions = emotions(node, q.id.empty() ? file + ": quote without id" : q.id);
    return q;
  }

  std::optional<EmotionCard> card(const xml::Tree& node) {
    const auto name = xml::attribute(node, "name");
    auto e = parse_emotion(name);
    if (!e) {
      problems.push_back({file, "card for unknown emotion '" + name + "'"});
      return std::nullopt;
    }
    EmotionCard c;
    c.emotion = *e;
    c.definition = child_text(node, "definition");
    if (auto terms = node.get_child_optional("terms")) {
      for (const auto& [key, child] : *terms) {
        if (key == "term") c.related_terms.push_back(trim(child.data()));
      }
    }
    if (auto videos = node.get_child_optional("videos")) {
      for (const auto& [key, child] : *videos) {
        if (key == "url") c.video_urls.push_back(trim(child.data()));
      }
    }
    return c;
  }
};

const xml::Tree& root_child(const xml::Tree& doc, const std::string& name, const std::string& file) {
  auto root = doc.get_child_optional(name);
  if (!root) throw xml::ParseError(file, 1, "missing <" + name + "> root element");
  return *root;
}

void read_tales(const xml::Tree& root, Reader& reader, std::vector<Tale>& out) {
  for (const auto& [key, node] : root) {
    if (key == "tale") out.push_back(reader.tale(node));
  }
}

void read_quotes(const xml::Tree& root, Reader& reader, std::vector<Quote>& out) {
  for (const auto& [key, node] : root) {
    if (key == "quote") out.push_back(reader.quote(node));
  }
}

void read_cards(const xml::Tree& root, Reader& reader, std::vector<EmotionCard>& out) {
  for (const auto& [key, node] : root) {
    if (key != "emotion") continue;
    if (auto c = reader.card(node)) out.push_back(std::move(*c));
  }
}

void add_theme(std::vector<ThemeId>& themes, const std::string& name) {
  ThemeId id(name);
  if (std::find(themes.begin(), themes.end(), id) == themes.end()) themes.push_back(std::move(id));
}

std::vector<ThemeId> read_theme_file(const std::filesystem::path& path) {
  std::vector<ThemeId> themes;
  for (const auto& name : default_theme_names()) add_theme(themes, name);
  std::ifstream in(path);
  if (!in) return themes;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (!line.empty()) add_theme(themes, line);
  }
  return themes;
}

struct ReadResult {
  Corpus corpus;
  std::vector<Violation> problems;
};

ReadResult read_any(const std::filesystem::path& path) {
  ReadResult result;
  Corpus& c = result.corpus;

  if (std::filesystem::is_directory(path)) {
    Reader tales{(path / "tales.xml").string(), {}};
    read_tales(root_child(xml::parse_file(path / "tales.xml"), "tales", tales.file), tales, c.tales);

    Reader quotes{(path / "quotes.xml").string(), {}};
    read_quotes(root_child(xml::parse_file(path / "quotes.xml"), "quotes", quotes.file), quotes, c.quotes);

    Reader cards{(path / "emotions.xml").string(), {}};
    read_cards(root_child(xml::parse_file(path / "emotions.xml"), "emotions", cards.file), cards, c.cards);

    c.themes = read_theme_file(path / "themes.txt");
    for (auto* r : {&tales, &quotes, &cards}) {
      result.problems.insert(result.problems.end(), r->problems.begin(), r->problems.end());
    }
    return result;
  }

  if (!std::filesystem::exists(path)) throw xml::ParseError(path.string(), 0, "no such corpus path");

  Reader reader{path.string(), {}};
  const auto tree = xml::parse_file(path);
  const auto& root = root_child(tree, "corpus", reader.file);
  if (auto themes = root.get_child_optional("themes")) {
    for (const auto& [key, node] : *themes) {
      if (key == "t") add_theme(c.themes, trim(node.data()));
    }
  }
  if (auto cards = root.get_child_optional("emotions")) read_cards(*cards, reader, c.cards);
  if (auto tales = root.get_child_optional("tales")) read_tales(*tales, reader, c.tales);
  if (auto quotes = root.get_child_optional("quotes")) read_quotes(*quotes, reader, c.quotes);
  result.problems = std::move(reader.problems);
  return result;
}

std::string join_violations(const std::vector<Violation>& v) {
  std::string out = "corpus validation failed";
  for (const auto& item : v) out += "\n  " + item.to_string();
  return out;
}

void write_emotion_list(std::ostringstream& out, const std::set<Emotion>& emotions, const char* indent) {
  out << indent << "<emotions>";
  for (auto e : emotions) out << "<e>" << emotion_name(e) << "</e>";
  out << "</emotions>\n";
}

void write_tale(std::ostringstream& out, const Tale& t, const char* indent) {
  const std::string inner = std::string(indent) + "  ";
  out << indent << "<tale id=\"" << xml::escape(t.id) << "\" status=\"" << status_name(t.status) << "\"";
  if (t.min_age) out << " min_age=\"" << *t.min_age << "\"";
  if (t.submitted_by) out << " submitted_by=\"" << xml::escape(*t.submitted_by) << "\"";
  out << ">\n";
  out << inner << "<title>" << xml::escape(t.title) << "</title>\n";
  out << inner << "<body>" << xml::escape(t.body) << "</body>\n";
  write_emotion_list(out, t.emotions, inner.c_str());
  out << inner << "<themes>";
  for (const auto& th : t.themes) out << "<t>" << xml::escape(th.name()) << "</t>";
  out << "</themes>\n";
  if (t.source_url) out << inner << "<source_url>" << xml::escape(*t.source_url) << "</source_url>\n";
  out << indent << "</tale>\n";
}

}  // namespace

std::string_view status_name(TaleStatus s) {
  switch (s) {
    case TaleStatus::approved: return "approved";
    case TaleStatus::pending: return "pending";
    case TaleStatus::rejected: return "rejected";
  }
  return "pending";
}

std::optional<TaleStatus> parse_status(std::string_view s) {
  if (s == "approved") return TaleStatus::approved;
  if (s == "pending") return TaleStatus::pending;
  if (s == "rejected") return TaleStatus::rejected;
  return std::nullopt;
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

const Tale* Corpus::find_tale(std::string_view id) const {
  auto it = std::find_if(tales.begin(), tales.end(), [&](const Tale& t) { return t.id == id; });
  return it == tales.end() ? nullptr : &*it;
}

Tale* Corpus::find_mutable(std::string_view id) {
  auto it = std::find_if(tales.begin(), tales.end(), [&](const Tale& t) { return t.id == id; });
  return it == tales.end() ? nullptr : &*it;
}

const EmotionCard* Corpus::card(Emotion e) const {
  auto it = std::find_if(cards.begin(), cards.end(), [&](const EmotionCard& c) { return c.emotion == e; });
  return it == cards.end() ? nullptr : &*it;
}

bool Corpus::has_theme(const ThemeId& theme) const {
  return std::find(themes.begin(), themes.end(), theme) != themes.end();
}

StatusCounts Corpus::counts() const {
  StatusCounts c;
  for (const auto& t : tales) {
    switch (t.status) {
      case TaleStatus::approved: ++c.approved; break;
      case TaleStatus::pending: ++c.pending; break;
      case TaleStatus::rejected: ++c.rejected; break;
    }
  }
  return c;
}

std::vector<const Tale*> Corpus::approved_tales() const {
  std::vector<const Tale*> out;
  for (const auto& t : tales) {
    if (t.status == TaleStatus::approved) out.push_back(&t);
  }
  return out;
}

std::vector<Violation> Corpus::validate() const {
  std::vector<Violation> v;

  if (themes.empty()) v.push_back({"themes", "theme registry is empty"});

  std::map<Emotion, int> card_count;
  for (const auto& c : cards) {
    const std::string subject = "card " + std::string(emotion_name(c.emotion));
    if (++card_count[c.emotion] == 2) v.push_back({subject, "duplicate emotion card"});
    if (c.definition.empty()) v.push_back({subject, "empty definition"});
    if (c.related_terms.empty()) v.push_back({subject, "no related terms"});
  }
  for (auto e : all_emotions()) {
    if (!card_count.count(e)) v.push_back({"emotions", "missing emotion card for '" + std::string(emotion_name(e)) + "'"});
  }

  std::set<std::string> ids;
  for (const auto& t : tales) {
    const std::string& s = t.id.empty() ? std::string("<tale without id>") : t.id;
    if (t.id.empty()) v.push_back({s, "missing id"});
    if (!ids.insert(t.id).second) v.push_back({s, "duplicate tale id"});
    if (t.title.empty()) v.push_back({s, "empty title"});
    if (t.body.empty()) v.push_back({s, "empty body"});
    if (t.min_age && (*t.min_age < 0 || *t.min_age > 120)) {
      v.push_back({s, "min_age " + std::to_string(*t.min_age) + " outside [0, 120]"});
    }
    if (t.status == TaleStatus::approved) {
      if (t.emotions.empty()) v.push_back({s, "approved tale has no emotions"});
      if (t.themes.empty()) v.push_back({s, "approved tale has no themes"});
    }
    for (const auto& th : t.themes) {
      if (!has_theme(th)) v.push_back({s, "unknown theme '" + th.name() + "'"});
    }
  }

  std::set<std::string> quote_ids;
  for (const auto& q : quotes) {
    const std::string& s = q.id.empty() ? std::string("<quote without id>") : q.id;
    if (q.id.empty()) v.push_back({s, "missing id"});
    if (!quote_ids.insert(q.id).second) v.push_back({s, "duplicate quote id"});
    if (q.text.empty()) v.push_back({s, "empty text"});
    if (q.emotions.empty()) v.push_back({s, "quote has no emotions"});
  }
  return v;
}

std::string Corpus::submit(TaleDraft draft) {
  Tale t;
  t.title = trim(draft.title);
  t.body = trim(draft.body);
  if (t.title.empty()) throw std::invalid_argument("tale title must not be empty");
  if (t.body.empty()) throw std::invalid_argument("tale body must not be empty");
  if (draft.min_age && (*draft.min_age < 0 || *draft.min_age > 120)) {
    throw std::invalid_argument("min_age outside [0, 120]");
  }
  t.source_url = std::move(draft.source_url);
  t.min_age = draft.min_age;
  t.submitted_by = std::move(draft.submitted_by);
  t.status = TaleStatus::pending;

  std::size_t n = 1;
  for (const auto& existing : tales) {
    if (existing.id.rfind("sub-", 0) == 0) ++n;
  }
  do {
    std::ostringstream id;
    id << "sub-" << std::string(n < 10 ? "00" : n < 100 ? "0" : "") << n;
    t.id = id.str();
    ++n;
  } while (find_tale(t.id) != nullptr);

  tales.push_back(std::move(t));
  return tales.back().id;
}

const Tale& Corpus::review(std::string_view id, const ReviewDecision& decision) {
  Tale* t = find_mutable(id);
  if (t == nullptr) throw std::invalid_argument("unknown tale id '" + std::string(id) + "'");
  if (t->status != TaleStatus::pending) {
    throw std::logic_error("tale '" + t->id + "' is " + std::string(status_name(t->status)) +
                           "; only pending tales can be reviewed");
  }
  if (!decision.approve) {
    t->status = TaleStatus::rejected;
    return *t;
  }
  if (decision.emotions.empty()) throw std::invalid_argument("approval requires at least one emotion");
  if (decision.themes.empty()) throw std::invalid_argument("approval requires at least one theme");
  for (const auto& th : decision.themes) {
    if (!has_theme(th)) throw std::invalid_argument("unknown theme '" + th.name() + "'");
  }
  t->emotions = decision.emotions;
  t->themes = decision.themes;
  t->status = TaleStatus::approved;
  return *t;
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto [corpus, problems] = read_any(path);
  auto invariants = corpus.validate();
  problems.insert(problems.end(), invariants.begin(), invariants.end());
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return corpus;
}

std::vector<Tale> read_tales_file(const std::filesystem::path& path) {
  Reader reader{path.string(), {}};
  std::vector<Tale> tales;
  read_tales(root_child(xml::parse_file(path), "tales", reader.file), reader, tales);
  if (!reader.problems.empty()) throw ValidationError(std::move(reader.problems));
  return tales;
}

std::string serialize_tales(const std::vector<Tale>& tales) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<tales>\n";
  for (const auto& t : tales) write_tale(out, t, "  ");
  out << "</tales>\n";
  return out.str();
}

std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<corpus>\n";

  out << "  <themes>\n";
  for (const auto& th : corpus.themes) out << "    <t>" << xml::escape(th.name()) << "</t>\n";
  out << "  </themes>\n";

  out << "  <emotions>\n";
  for (const auto& c : corpus.cards) {
    out << "    <emotion name=\"" << emotion_name(c.emotion) << "\">\n";
    out << "      <definition>" << xml::escape(c.definition) << "</definition>\n";
    out << "      <terms>";
    for (const auto& term : c.related_terms) out << "<term>" << xml::escape(term) << "</term>";
    out << "</terms>\n";
    out << "      <videos>";
    for (const auto& url : c.video_urls) out << "<url>" << xml::escape(url) << "</url>";
    out << "</videos>\n";
    out << "    </emotion>\n";
  }
  out << "  </emotions>\n";

  out << "  <tales>\n";
  for (const auto& t : corpus.tales) write_tale(out, t, "    ");
  out << "  </tales>\n";

  out << "  <quotes>\n";
  for (const auto& q : corpus.quotes) {
    out << "    <quote id=\"" << xml::escape(q.id) << "\">\n";
    out << "      <text>" << xml::escape(q.text) << "</text>\n";
    write_emotion_list(out, q.emotions, "      ");
    out << "    </quote>\n";
  }
  out << "  </quotes>\n";
  out << "</corpus>\n";
  return out.str();
}

void export_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  xml::write_file_atomically(path, serialize_corpus(corpus));
}

}  // namespace talechat
