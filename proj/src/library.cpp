#include "talechat/library.hpp"

#include "talechat/xml.hpp"

namespace talechat {
namespace {

bool is_submission(const Tale& t) { return t.id.rfind("sub-", 0) == 0; }

}  // namespace

TaleLibrary::TaleLibrary(Corpus corpus, text::StopwordList stopwords, std::filesystem::path submissions_file)
    : stopwords_(std::move(stopwords)), submissions_file_(std::move(submissions_file)) {
  if (!submissions_file_.empty() && std::filesystem::exists(submissions_file_)) {
    for (auto& t : read_tales_file(submissions_file_)) {
      if (corpus.find_tale(t.id) != nullptr) {
        throw ValidationError({{t.id, "submitted tale id collides with a corpus tale"}});
      }
      corpus.tales.push_back(std::move(t));
    }
    if (auto problems = corpus.validate(); !problems.empty()) throw ValidationError(std::move(problems));
  }
  publish(std::move(corpus));
}

std::shared_ptr<const TaleLibrary::Snapshot> TaleLibrary::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return current_;
}

void TaleLibrary::publish(Corpus corpus) {
  auto next = std::make_shared<Snapshot>();
  next->tales = retrieval::TaleIndex::build(retrieval::tale_documents(corpus), stopwords_);
  next->quotes = retrieval::TaleIndex::build(retrieval::quote_documents(corpus), stopwords_);
  next->corpus = std::move(corpus);
  std::lock_guard lock(snapshot_mutex_);
  current_ = std::move(next);
}

void TaleLibrary::persist_submissions(const Corpus& corpus) const {
  if (submissions_file_.empty()) return;
  std::vector<Tale> submitted;
  for (const auto& t : corpus.tales) {
    if (is_submission(t)) submitted.push_back(t);
  }
  xml::write_file_atomically(submissions_file_, serialize_tales(submitted));
}

std::string TaleLibrary::submit(TaleDraft draft) {
  std::lock_guard lock(write_mutex_);
  Corpus next = snapshot()->corpus;
  auto id = next.submit(std::move(draft));
  persist_submissions(next);
  publish(std::move(next));
  return id;
}

Tale TaleLibrary::review(std::string_view id, const ReviewDecision& decision) {
  std::lock_guard lock(write_mutex_);
  Corpus next = snapshot()->corpus;
  Tale reviewed = next.review(id, decision);
  persist_submissions(next);
  publish(std::move(next));
  return reviewed;
}

}  // namespace talechat
