#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "talechat/textproc.hpp"

namespace talechat::classify {

enum class Source { term_lexicon, encyclopedia, definition, synonym, manual };

std::string_view source_name(Source s);

struct LabeledDoc {
  std::string text;
  std::string label;
  Source source = Source::manual;

  bool operator==(const LabeledDoc&) const = default;
};

/// Reads `<dir>/<class>.txt` for every class, in registry order.
///
/// File layout: blocks separated by blank lines. The first block lists
/// terms or phrases, one document per line. Later blocks are paragraphs,
/// each becoming one document per sentence. A block whose first line is
/// `@definition`, `@encyclopedia`, `@synonym` or `@terms` takes that source;
/// an untagged paragraph counts as encyclopedia text. Lines starting with
/// '#' are comments.
///
/// Throws std::runtime_error naming the first class with no material.
std::vector<LabeledDoc> build_training_set(const std::vector<std::string>& classes,
                                           const std::filesystem::path& lexicon_dir);

/// Parses one lexicon file's contents; exposed for tests.
std::vector<LabeledDoc> parse_lexicon(std::string_view contents, const std::string& label);

/// Multinomial naive Bayes with additive smoothing.
class BayesModel {
 public:
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<double>& log_priors() const { return log_prior_; }
  double alpha() const { return alpha_; }
  std::size_t vocabulary_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocabulary() const { return terms_; }

  std::optional<std::size_t> class_index(std::string_view name) const;
  std::optional<std::size_t> term_index(std::string_view term) const;

  /// log P(term | class); nullopt for out-of-vocabulary terms.
  std::optional<double> log_likelihood(std::size_t cls, std::string_view term) const;
  double log_likelihood_at(std::size_t cls, std::size_t term) const {
    return log_likelihood_[cls * terms_.size() + term];
  }

  /// Versioned flat text format, see docs/model-format.md.
  std::string serialize() const;
  static BayesModel deserialize(std::string_view contents);
  void save(const std::filesystem::path& path) const;
  static BayesModel load(const std::filesystem::path& path);

  bool operator==(const BayesModel&) const = default;

 private:
  friend BayesModel train(const std::vector<LabeledDoc>&, double, const std::vector<std::string>&);

  std::vector<std::string> classes_;
  std::vector<double> log_prior_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<double> log_likelihood_;  // row-major [class][term]
  double alpha_ = 1.0;
};

/// Trains on `docs`. When `classes` is empty the class list is the sorted
/// set of labels; otherwise it fixes the order and every label must belong
/// to it. Throws std::invalid_argument for fewer than two classes, a class
/// without documents, a foreign label or alpha <= 0.
BayesModel train(const std::vector<LabeledDoc>& docs, double alpha = 1.0,
                 const std::vector<std::string>& classes = {});

struct Classification {
  std::vector<std::pair<std::string, double>> ranked;  // posterior, non-increasing
  std::optional<std::string> salient;
  std::size_t known_tokens = 0;

  double top_probability() const { return ranked.empty() ? 0.0 : ranked.front().second; }
  double probability(std::string_view cls) const;
};

/// Default salience threshold: 1.5 times the uniform prior.
double default_threshold(std::size_t class_count);

/// Posterior over classes for the bag of tokens in `text`. Unknown tokens
/// are skipped. With no known tokens the posterior equals the prior and
/// nothing is salient. Otherwise the top class is salient when its
/// posterior reaches `threshold` (default_threshold when absent).
Classification classify(const BayesModel& model, std::string_view text,
                        std::optional<double> threshold = std::nullopt);

/// Same, over already-normalized terms.
Classification classify_terms(const BayesModel& model, const std::vector<std::string>& terms,
                              std::optional<double> threshold = std::nullopt);

enum class Intent { search_tales, chat_emotions, add_tale, exit, no_intention };

inline constexpr std::size_t kIntentCount = 5;

std::string_view intent_name(Intent i);
std::optional<Intent> parse_intent(std::string_view name);

/// The four intents a user can express; no_intention is what is left.
const std::vector<std::string>& expressed_intent_names();

/// Top class of an intent model, or no_intention when its posterior is
/// below `threshold`.
Intent classify_intent(const BayesModel& model, std::string_view text, double threshold = 0.5);

struct Evaluation {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [actual][predicted]
};

/// Predicts the top class of each doc. Throws std::invalid_argument on an
/// empty set or a label outside the model's classes.
Evaluation evaluate(const BayesModel& model, const std::vector<LabeledDoc>& docs);

struct Split {
  std::vector<LabeledDoc> train;
  std::vector<LabeledDoc> test;
};

/// Per-class split: shuffles each class's docs with a seeded mt19937 and
/// holds out round(fraction * n) of them, keeping at least one for
/// training.
Split stratified_split(const std::vector<LabeledDoc>& docs, double test_fraction, std::uint32_t seed);

}  // namespace talechat::classify
