#include "talechat/classify.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "talechat/xml.hpp"

namespace talechat::classify {
namespace {

constexpr std::string_view kModelMagic = "talechat-bayes";
constexpr int kModelVersion = 1;

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("model file: bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double log_sum_exp(const std::vector<double>& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

}  // namespace

std::string_view source_name(Source s) {
  switch (s) {
    case Source::term_lexicon: return "term_lexicon";
    case Source::encyclopedia: return "encyclopedia";
    case Source::definition: return "definition";
    case Source::synonym: return "synonym";
    case Source::manual: return "manual";
  }
  return "manual";
}

std::vector<LabeledDoc> parse_lexicon(std::string_view contents, const std::string& label) {
  std::vector<std::vector<std::string>> blocks(1);
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty() && line.front() == '#') continue;
    if (line.empty()) {
      if (!blocks.back().empty()) blocks.emplace_back();
      continue;
    }
    blocks.back().push_back(line);
  }

  std::vector<LabeledDoc> docs;
  bool first = true;
  for (auto& block : blocks) {
    if (block.empty()) continue;
    std::optional<Source> tagged;
    if (block.front().front() == '@') {
      const auto tag = block.front().substr(1);
      if (tag == "terms") tagged = Source::term_lexicon;
      else if (tag == "synonym") tagged = Source::synonym;
      else if (tag == "definition") tagged = Source::definition;
      else if (tag == "encyclopedia") tagged = Source::encyclopedia;
      else throw std::runtime_error("lexicon " + label + ": unknown block tag '" + block.front() + "'");
      block.erase(block.begin());
    }
    const Source source = tagged.value_or(first ? Source::term_lexicon : Source::encyclopedia);
    first = false;

    if (source == Source::term_lexicon || source == Source::synonym) {
      for (auto& l : block) docs.push_back(LabeledDoc{l, label, source});
      continue;
    }
    std::string paragraph;
    for (const auto& l : block) {
      if (!paragraph.empty()) paragraph.push_back(' ');
      paragraph += l;
    }
    for (auto& sentence : text::split_sentences(paragraph)) {
      docs.push_back(LabeledDoc{std::move(sentence), label, source});
    }
  }
  return docs;
}

std::vector<LabeledDoc> build_training_set(const std::vector<std::string>& classes,
                                           const std::filesystem::path& lexicon_dir) {
  std::vector<LabeledDoc> out;
  for (const auto& cls : classes) {
    std::ifstream in(lexicon_dir / (cls + ".txt"), std::ios::binary);
    std::vector<LabeledDoc> docs;
    if (in) {
      std::ostringstream buf;
      buf << in.rdbuf();
      docs = parse_lexicon(buf.str(), cls);
    }
    if (docs.empty()) {
      throw std::runtime_error("no lexicon material for class '" + cls + "' in " + lexicon_dir.string());
    }
    out.insert(out.end(), std::make_move_iterator(docs.begin()), std::make_move_iterator(docs.end()));
  }
  return out;
}

std::optional<std::size_t> BayesModel::class_index(std::string_view name) const {
  auto it = std::find(classes_.begin(), classes_.end(), name);
  if (it == classes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes_.begin());
}

std::optional<std::size_t> BayesModel::term_index(std::string_view term) const {
  auto it = vocab_.find(std::string(term));
  if (it == vocab_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> BayesModel::log_likelihood(std::size_t cls, std::string_view term) const {
  auto t = term_index(term);
  if (!t) return std::nullopt;
  return log_likelihood_at(cls, *t);
}

BayesModel train(const std::vector<LabeledDoc>& docs, double alpha, const std::vector<std::string>& classes) {
  if (!(alpha > 0.0)) throw std::invalid_argument("smoothing alpha must be > 0");

  BayesModel m;
  m.alpha_ = alpha;
  if (classes.empty()) {
    std::set<std::string> labels;
    for (const auto& d : docs) labels.insert(d.label);
    m.classes_.assign(labels.begin(), labels.end());
  } else {
    m.classes_ = classes;
  }
  if (m.classes_.size() < 2) throw std::invalid_argument("training needs at least two classes");

  const std::size_t k = m.classes_.size();
  std::vector<std::size_t> doc_count(k, 0);
  std::vector<std::vector<std::string>> doc_terms(docs.size());
  std::vector<std::size_t> doc_class(docs.size());
  std::set<std::string> vocab;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto c = m.class_index(docs[i].label);
    if (!c) throw std::invalid_argument("label '" + docs[i].label + "' is not a registered class");
    doc_class[i] = *c;
    ++doc_count[*c];
    doc_terms[i] = text::normalized_terms(docs[i].text);
    vocab.insert(doc_terms[i].begin(), doc_terms[i].end());
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (doc_count[c] == 0) throw std::invalid_argument("class '" + m.classes_[c] + "' has no training documents");
  }

  m.terms_.assign(vocab.begin(), vocab.end());
  for (std::size_t t = 0; t < m.terms_.size(); ++t) m.vocab_.emplace(m.terms_[t], t);
  const std::size_t v = m.terms_.size();

  std::vector<double> counts(k * v, 0.0);
  std::vector<double> totals(k, 0.0);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (const auto& term : doc_terms[i]) {
      counts[doc_class[i] * v + m.vocab_.at(term)] += 1.0;
      totals[doc_class[i]] += 1.0;
    }
  }

  m.log_prior_.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    m.log_prior_[c] = std::log(static_cast<double>(doc_count[c]) / static_cast<double>(docs.size()));
  }
  m.log_likelihood_.resize(k * v);
  for (std::size_t c = 0; c < k; ++c) {
    const double denom = totals[c] + alpha * static_cast<double>(v);
    for (std::size_t t = 0; t < v; ++t) {
      m.log_likelihood_[c * v + t] = std::log((counts[c * v + t] + alpha) / denom);
    }
  }
  return m;
}

std::string BayesModel::serialize() const {
  std::ostringstream out;
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "alpha " << format_double(alpha_) << '\n';
  out << "classes " << classes_.size() << '\n';
  out << "vocab " << terms_.size() << '\n';
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    out << "class " << classes_[c] << ' ' << format_double(log_prior_[c]) << '\n';
  }
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    out << "term " << terms_[t];
    for (std::size_t c = 0; c < classes_.size(); ++c) out << ' ' << format_double(log_likelihood_at(c, t));
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

BayesModel BayesModel::deserialize(std::string_view contents) {
  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](std::string_view expect) {
    if (!std::getline(in, line)) throw std::runtime_error("model file: truncated before '" + std::string(expect) + "'");
    ++line_no;
    std::vector<std::string> f;
    for (auto field : split_fields(line)) f.emplace_back(field);
    if (f.empty() || f[0] != expect) {
      throw std::runtime_error("model file line " + std::to_string(line_no) + ": expected '" + std::string(expect) + "'");
    }
    return f;
  };
  auto count = [](std::string_view s) {
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::runtime_error("model file: bad count");
    return n;
  };

  auto header = next(kModelMagic);
  if (header.size() != 2 || header[1] != std::to_string(kModelVersion)) {
    throw std::runtime_error("model file: unsupported version");
  }
  BayesModel m;
  auto alpha = next("alpha");
  if (alpha.size() != 2) throw std::runtime_error("model file: bad alpha line");
  m.alpha_ = parse_double(alpha[1]);
  auto classes = next("classes");
  auto vocab = next("vocab");
  if (classes.size() != 2 || vocab.size() != 2) throw std::runtime_error("model file: bad header");
  const std::size_t k = count(classes[1]);
  const std::size_t v = count(vocab[1]);

  for (std::size_t c = 0; c < k; ++c) {
    auto f = next("class");
    if (f.size() != 3) throw std::runtime_error("model file line " + std::to_string(line_no) + ": bad class line");
    m.classes_.emplace_back(f[1]);
    m.log_prior_.push_back(parse_double(f[2]));
  }
  m.log_likelihood_.resize(k * v);
  for (std::size_t t = 0; t < v; ++t) {
    auto f = next("term");
    if (f.size() != k + 2) throw std::runtime_error("model file line " + std::to_string(line_no) + ": bad term line");
    m.terms_.emplace_back(f[1]);
    m.vocab_.emplace(m.terms_.back(), t);
    for (std::size_t c = 0; c < k; ++c) m.log_likelihood_[c * v + t] = parse_double(f[c + 2]);
  }
  next("end");
  return m;
}

void BayesModel::save(const std::filesystem::path& path) const {
  xml::write_file_atomically(path, serialize());
}

BayesModel BayesModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

double Classification::probability(std::string_view cls) const {
  for (const auto& [name, p] : ranked) {
    if (name == cls) return p;
  }
  return 0.0;
}

double default_threshold(std::size_t class_count) {
  return class_count == 0 ? 1.0 : 1.5 / static_cast<double>(class_count);
}

Classification classify_terms(const BayesModel& model, const std::vector<std::string>& terms,
                              std::optional<double> threshold) {
  const std::size_t k = model.classes().size();
  std::vector<double> scores = model.log_priors();
  Classification out;
  for (const auto& term : terms) {
    auto t = model.term_index(term);
    if (!t) continue;
    ++out.known_tokens;
    for (std::size_t c = 0; c < k; ++c) scores[c] += model.log_likelihood_at(c, *t);
  }

  const double z = log_sum_exp(scores);
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> posterior(k);
  for (std::size_t c = 0; c < k; ++c) posterior[c] = std::exp(scores[c] - z);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return posterior[a] > posterior[b]; });
  for (auto c : order) out.ranked.emplace_back(model.classes()[c], posterior[c]);

  const double theta = threshold.value_or(default_threshold(k));
  if (out.known_tokens > 0 && !out.ranked.empty() && out.ranked.front().second >= theta) {
    out.salient = out.ranked.front().first;
  }
  return out;
}

Classification classify(const BayesModel& model, std::string_view text, std::optional<double> threshold) {
  return classify_terms(model, text::normalized_terms(text), threshold);
}

std::string_view intent_name(Intent i) {
  switch (i) {
    case Intent::search_tales: return "search_tales";
    case Intent::chat_emotions: return "chat_emotions";
    case Intent::add_tale: return "add_tale";
    case Intent::exit: return "exit";
    case Intent::no_intention: return "no_intention";
  }
  return "no_intention";
}

std::optional<Intent> parse_intent(std::string_view name) {
  for (auto i : {Intent::search_tales, Intent::chat_emotions, Intent::add_tale, Intent::exit, Intent::no_intention}) {
    if (intent_name(i) == name) return i;
  }
  return std::nullopt;
}

const std::vector<std::string>& expressed_intent_names() {
  static const std::vector<std::string> names{"search_tales", "chat_emotions", "add_tale", "exit"};
  return names;
}

Intent classify_intent(const BayesModel& model, std::string_view text, double threshold) {
  auto result = classify(model, text, threshold);
  if (!result.salient) return Intent::no_intention;
  return parse_intent(*result.salient).value_or(Intent::no_intention);
}

Evaluation evaluate(const BayesModel& model, const std::vector<LabeledDoc>& docs) {
  if (docs.empty()) throw std::invalid_argument("evaluation set is empty");
  Evaluation e;
  e.classes = model.classes();
  const std::size_t k = e.classes.size();
  e.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (const auto& d : docs) {
    auto actual = model.class_index(d.label);
    if (!actual) throw std::invalid_argument("label '" + d.label + "' is not one of the model's classes");
    auto result = classify(model, d.text);
    const auto predicted = *model.class_index(result.ranked.front().first);
    ++e.confusion[*actual][predicted];
    ++e.total;
    if (predicted == *actual) ++e.correct;
  }
  e.accuracy = static_cast<double>(e.correct) / static_cast<double>(e.total);
  return e;
}

Split stratified_split(const std::vector<LabeledDoc>& docs, double test_fraction, std::uint32_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) throw std::invalid_argument("test fraction must lie in [0, 1)");
  std::vector<std::string> labels;
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!by_label.count(docs[i].label)) labels.push_back(docs[i].label);
    by_label[docs[i].label].push_back(i);
  }

  // mt19937 output is fixed by the standard; the distribution step is done
  // by hand so the split is identical on every standard library.
  std::mt19937 rng(seed);
  Split split;
  for (const auto& label : labels) {
    auto& idx = by_label[label];
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[rng() % i]);
    }
    auto held = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(idx.size())));
    held = std::min(held, idx.size() - 1);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      (j < held ? split.test : split.train).push_back(docs[idx[j]]);
    }
  }
  return split;
}

}  // namespace talechat::classify
