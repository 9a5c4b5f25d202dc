#include "talechat/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace talechat::retrieval {

std::vector<Document> tale_documents(const Corpus& corpus) {
  std::vector<Document> docs;
  for (const Tale* t : corpus.approved_tales()) {
    docs.push_back(Document{t->id, t->title + "\n" + t->body, t->emotions, t->themes});
  }
  return docs;
}

std::vector<Document> quote_documents(const Corpus& corpus) {
  std::vector<Document> docs;
  for (const auto& q : corpus.quotes) docs.push_back(Document{q.id, q.text, q.emotions, {}});
  return docs;
}

TaleIndex TaleIndex::build(std::vector<Document> docs, const text::StopwordList& stopwords) {
  std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].id == docs[i - 1].id) throw std::invalid_argument("duplicate document id '" + docs[i].id + "'");
  }

  TaleIndex index;
  index.stopwords_ = stopwords;
  index.lengths_.reserve(docs.size());
  std::uint64_t total = 0;
  for (std::uint32_t d = 0; d < docs.size(); ++d) {
    std::map<std::string, std::uint32_t> counts;
    std::uint32_t length = 0;
    for (auto& term : text::content_terms(docs[d].text, stopwords)) {
      ++counts[std::move(term)];
      ++length;
    }
    // Postings end up in doc order because d only grows.
    for (auto& [term, tf] : counts) index.postings_[term].push_back(Posting{d, tf});
    index.lengths_.push_back(length);
    total += length;
  }
  index.docs_ = std::move(docs);
  index.avgdl_ = index.docs_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(index.docs_.size());
  return index;
}

const Document* TaleIndex::find(std::string_view id) const {
  auto pos = position(id);
  return pos ? &docs_[*pos] : nullptr;
}

std::optional<std::uint32_t> TaleIndex::position(std::string_view id) const {
  auto it = std::lower_bound(docs_.begin(), docs_.end(), id,
                             [](const Document& d, std::string_view key) { return d.id < key; });
  if (it == docs_.end() || it->id != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - docs_.begin());
}

const std::vector<Posting>* TaleIndex::postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  return it == postings_.end() ? nullptr : &it->second;
}

std::size_t TaleIndex::document_frequency(std::string_view term) const {
  const auto* p = postings(term);
  return p ? p->size() : 0;
}

std::uint32_t TaleIndex::term_frequency(std::string_view term, std::uint32_t doc) const {
  const auto* p = postings(term);
  if (!p) return 0;
  auto it = std::lower_bound(p->begin(), p->end(), doc, [](const Posting& x, std::uint32_t d) { return x.doc < d; });
  return (it != p->end() && it->doc == doc) ? it->tf : 0;
}

bool TaleIndex::operator==(const TaleIndex& other) const {
  if (docs_.size() != other.docs_.size() || lengths_ != other.lengths_ || avgdl_ != other.avgdl_) return false;
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    const auto& a = docs_[i];
    const auto& b = other.docs_[i];
    if (a.id != b.id || a.text != b.text || a.emotions != b.emotions || a.themes != b.themes) return false;
  }
  if (postings_.size() != other.postings_.size()) return false;
  for (const auto& [term, list] : postings_) {
    const auto* theirs = other.postings(term);
    if (!theirs || theirs->size() != list.size()) return false;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].doc != (*theirs)[i].doc || list[i].tf != (*theirs)[i].tf) return false;
    }
  }
  return true;
}

double dfr_weight(double tf, double df, double dl, double n, double avgdl, double c) {
  if (!(tf >= 0.0)) throw std::domain_error("dfr_weight: tf must be >= 0");
  if (!(df >= 1.0) || df > n) throw std::domain_error("dfr_weight: df must lie in [1, N]");
  if (!(dl > 0.0)) throw std::domain_error("dfr_weight: dl must be > 0");
  if (!(avgdl > 0.0)) throw std::domain_error("dfr_weight: avgdl must be > 0");
  if (!(c > 0.0)) throw std::domain_error("dfr_weight: c must be > 0");
  const double tfn = tf * std::log2(1.0 + c * avgdl / dl);
  return tfn / (tfn + 1.0) * std::log2((n + 1.0) / (df + 0.5));
}

Query parse_query(std::string_view text, const text::StopwordList& stopwords, const std::vector<ThemeId>& themes) {
  Query q;
  std::set<Emotion> emotions;
  std::set<ThemeId> matched_themes;

  auto match = [&](const std::string& key) {
    if (auto e = parse_emotion(key)) {
      emotions.insert(*e);
      return;
    }
    for (const auto& th : themes) {
      if (th.name() == key) matched_themes.insert(th);
    }
  };

  const auto tokens = text::tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& term = tokens[i].normalized;
    match(term);
    if (i + 1 < tokens.size()) match(term + "_" + tokens[i + 1].normalized);
    if (!stopwords.contains(term)) q.terms.push_back(term);
  }
  if (!emotions.empty()) q.emotion_filter = std::move(emotions);
  if (!matched_themes.empty()) q.theme_filter = std::move(matched_themes);
  return q;
}

std::vector<SearchResult> search(const TaleIndex& index, const Query& query, double c) {
  std::vector<SearchResult> results;
  if (query.empty() || index.document_count() == 0) return results;

  std::map<std::string, std::uint32_t> qtf;
  for (const auto& t : query.terms) ++qtf[t];

  const auto& docs = index.documents();
  std::vector<double> scores(docs.size(), 0.0);
  const double n = static_cast<double>(index.document_count());
  for (const auto& [term, count] : qtf) {
    const auto* list = index.postings(term);
    if (!list) continue;
    const double df = static_cast<double>(list->size());
    for (const auto& p : *list) {
      const double dl = index.document_length(p.doc);
      scores[p.doc] += count * dfr_weight(p.tf, df, dl, n, index.average_length(), c);
    }
  }

  const bool filtered = query.emotion_filter || query.theme_filter;
  auto overlaps = [](const auto& tags, const auto& wanted) {
    return std::any_of(wanted.begin(), wanted.end(), [&](const auto& w) { return tags.count(w) > 0; });
  };

  for (std::uint32_t d = 0; d < docs.size(); ++d) {
    const auto& doc = docs[d];
    if (query.restrict_to && !query.restrict_to->count(doc.id)) continue;
    if (query.emotion_filter && !overlaps(doc.emotions, *query.emotion_filter)) continue;
    if (query.theme_filter && !overlaps(doc.themes, *query.theme_filter)) continue;
    if ((!filtered || !qtf.empty()) && !(scores[d] > 0.0)) continue;
    results.push_back(SearchResult{doc.id, scores[d], doc.emotions, doc.themes});
  }
  std::sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return results;
}

Query refine(const std::vector<SearchResult>& previous_results, Query followup) {
  std::set<std::string> ids;
  for (const auto& r : previous_results) ids.insert(r.id);
  if (followup.restrict_to) {
    std::set<std::string> both;
    for (const auto& id : ids) {
      if (followup.restrict_to->count(id)) both.insert(id);
    }
    ids = std::move(both);
  }
  followup.restrict_to = std::move(ids);
  return followup;
}

std::vector<const Document*> tagged_with(const TaleIndex& index, Emotion emotion) {
  std::vector<const Document*> out;
  for (const auto& d : index.documents()) {
    if (d.emotions.count(emotion)) out.push_back(&d);
  }
  return out;
}

}  // namespace talechat::retrieval
