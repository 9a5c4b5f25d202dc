#pragma once

// Reference implementations written directly from the formulas, sharing no
// code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace talechat::oracle {

inline std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

struct ScoredDoc {
  std::string id;
  double score = 0.0;
};

/// Brute-force InL2 over lowercase, space-separated documents: every query
/// term is scored against every document from raw counts.
inline std::vector<ScoredDoc> inl2_rank(const std::vector<std::pair<std::string, std::string>>& docs,
                                        const std::vector<std::string>& query, double c) {
  const double n = static_cast<double>(docs.size());
  std::vector<std::vector<std::string>> words;
  double total = 0.0;
  for (const auto& d : docs) {
    words.push_back(split_words(d.second));
    total += static_cast<double>(words.back().size());
  }
  const double avgdl = total / n;

  std::vector<ScoredDoc> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    double score = 0.0;
    bool any = false;
    for (const auto& q : query) {
      double df = 0.0;
      for (const auto& w : words) df += std::count(w.begin(), w.end(), q) > 0 ? 1.0 : 0.0;
      const double tf = static_cast<double>(std::count(words[i].begin(), words[i].end(), q));
      if (tf == 0.0) continue;
      any = true;
      const double dl = static_cast<double>(words[i].size());
      const double tfn = tf * std::log2(1.0 + c * avgdl / dl);
      score += tfn / (tfn + 1.0) * std::log2((n + 1.0) / (df + 0.5));
    }
    if (any && score > 0.0) out.push_back({docs[i].first, score});
  }
  std::sort(out.begin(), out.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  return out;
}

/// Five short documents over a small shared vocabulary, with lengths and
/// term repeats varied enough to separate the ranking.
inline const std::vector<std::pair<std::string, std::string>>& mini_corpus() {
  static const std::vector<std::pair<std::string, std::string>> docs = {
      {"d1", "fear night dark fear shadow"},
      {"d2", "friend coffee doubt friend"},
      {"d3", "night sleep worry night night exam"},
      {"d4", "cake grandmother kitchen cake frustration cake strength"},
      {"d5", "dark fog sadness friend"},
  };
  return docs;
}

inline const std::vector<std::vector<std::string>>& mini_queries() {
  static const std::vector<std::vector<std::string>> queries = {
      {"fear"},           {"night"},          {"friend", "doubt"}, {"cake", "cake"},     {"dark", "night"},
      {"sleep", "exam"},  {"fog", "fear"},    {"kitchen"},         {"absent"},           {"friend", "night", "dark"},
  };
  return queries;
}

/// Posterior P(class | doc) by enumerating the joint P(class) * prod P(w | class)
/// for every class and normalizing. Training docs are (label, words).
/// Words of `doc` outside the training vocabulary are ignored.
inline std::map<std::string, long double> nb_posterior(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& training, double alpha,
    const std::vector<std::string>& doc) {
  std::set<std::string> vocab;
  std::map<std::string, std::size_t> docs_per_class;
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  std::map<std::string, std::size_t> totals;
  for (const auto& [label, words] : training) {
    ++docs_per_class[label];
    for (const auto& w : words) {
      vocab.insert(w);
      ++counts[label][w];
      ++totals[label];
    }
  }
  std::map<std::string, long double> joint;
  long double evidence = 0.0L;
  for (const auto& [label, ndocs] : docs_per_class) {
    long double p = static_cast<long double>(ndocs) / static_cast<long double>(training.size());
    for (const auto& w : doc) {
      if (!vocab.count(w)) continue;
      const long double num = static_cast<long double>(counts[label][w]) + alpha;
      const long double den = static_cast<long double>(totals[label]) + alpha * static_cast<long double>(vocab.size());
      p *= num / den;
    }
    joint[label] = p;
    evidence += p;
  }
  for (auto& [label, p] : joint) p /= evidence;
  return joint;
}

/// All multisets of size 1..max_len over `vocab`, as word lists.
inline std::vector<std::vector<std::string>> all_bags(const std::vector<std::string>& vocab, std::size_t max_len) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> current;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (!current.empty()) out.push_back(current);
    if (current.size() == max_len) return;
    for (std::size_t i = start; i < vocab.size(); ++i) {
      current.push_back(vocab[i]);
      self(self, i);
      current.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

/// Positive share of a valence-tagged event list, in percent.
inline double positive_percent(std::size_t positive, std::size_t negative) {
  return 100.0 * static_cast<double>(positive) / static_cast<double>(positive + negative);
}

}  // namespace talechat::oracle
