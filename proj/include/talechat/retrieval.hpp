#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "talechat/corpus.hpp"
#include "talechat/taxonomy.hpp"
#include "talechat/textproc.hpp"

namespace talechat::retrieval {

/// An indexable unit: an approved tale (title + body) or a quote.
struct Document {
  std::string id;
  std::string text;
  std::set<Emotion> emotions;
  std::set<ThemeId> themes;
};

std::vector<Document> tale_documents(const Corpus& corpus);
std::vector<Document> quote_documents(const Corpus& corpus);

struct Posting {
  std::uint32_t doc = 0;  // index into TaleIndex::documents()
  std::uint32_t tf = 0;
};

/// Inverted index with the collection statistics the DFR scorer needs.
/// Documents are stored sorted by id, so the index does not depend on input
/// order.
class TaleIndex {
 public:
  TaleIndex() = default;

  static TaleIndex build(std::vector<Document> docs, const text::StopwordList& stopwords = {});

  std::size_t document_count() const { return docs_.size(); }
  double average_length() const { return avgdl_; }
  std::size_t vocabulary_size() const { return postings_.size(); }

  const std::vector<Document>& documents() const { return docs_; }
  const Document* find(std::string_view id) const;
  std::optional<std::uint32_t> position(std::string_view id) const;

  std::uint32_t document_length(std::uint32_t doc) const { return lengths_.at(doc); }
  std::size_t document_frequency(std::string_view term) const;
  std::uint32_t term_frequency(std::string_view term, std::uint32_t doc) const;
  const std::vector<Posting>* postings(std::string_view term) const;

  const text::StopwordList& stopwords() const { return stopwords_; }

  bool operator==(const TaleIndex& other) const;

 private:
  std::vector<Document> docs_;
  std::vector<std::uint32_t> lengths_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avgdl_ = 0.0;
  text::StopwordList stopwords_;
};

/// InL2 term weight:
///   tfn = tf * log2(1 + c * avgdl / dl)
///   w   = tfn / (tfn + 1) * log2((N + 1) / (df + 0.5))
/// Throws std::domain_error unless 1 <= df <= N, dl > 0, avgdl > 0, c > 0
/// and tf >= 0.
double dfr_weight(double tf, double df, double dl, double n, double avgdl, double c);

struct Query {
  std::vector<std::string> terms;  // normalized; repeats count as qtf
  std::optional<std::set<Emotion>> emotion_filter;
  std::optional<std::set<ThemeId>> theme_filter;
  std::optional<std::set<std::string>> restrict_to;

  bool empty() const {
    return terms.empty() && !emotion_filter && !theme_filter;
  }
};

/// Builds a query from free text: content terms (stopwords removed) plus
/// emotion/theme filters for every term or adjacent term pair that names a
/// registry entry. `themes` is the theme registry.
Query parse_query(std::string_view text, const text::StopwordList& stopwords,
                  const std::vector<ThemeId>& themes);

struct SearchResult {
  std::string id;
  double score = 0.0;
  std::set<Emotion> emotions;
  std::set<ThemeId> themes;
};

/// Scores every candidate as sum over query terms of qtf * dfr_weight.
/// Filters are hard constraints: a document passes the emotion (theme)
/// filter when it carries at least one listed emotion (theme). A query with
/// terms returns only documents with a positive score; a filter-only query
/// returns every document that passes. Results are
/// ordered by score descending, then id ascending.
std::vector<SearchResult> search(const TaleIndex& index, const Query& query, double c = 1.0);

/// A follow-up query that only looks inside the previous result set.
Query refine(const std::vector<SearchResult>& previous_results, Query followup);

/// Documents tagged with `emotion`, ordered by id.
std::vector<const Document*> tagged_with(const TaleIndex& index, Emotion emotion);

}  // namespace talechat::retrieval
