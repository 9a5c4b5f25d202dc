#pragma once

#include <filesystem>
#include <memory>
#include <mutex>

#include "talechat/corpus.hpp"
#include "talechat/retrieval.hpp"
#include "talechat/textproc.hpp"

namespace talechat {

/// The corpus together with its tale and quote indexes. Readers take an
/// immutable snapshot; submissions and reviews build a new snapshot and
/// swap it in.
class TaleLibrary {
 public:
  struct Snapshot {
    Corpus corpus;
    retrieval::TaleIndex tales;
    retrieval::TaleIndex quotes;
  };

  /// `submissions_file`, when set, holds user-submitted tales in tales.xml
  /// layout; it is merged at construction and rewritten on every change.
  TaleLibrary(Corpus corpus, text::StopwordList stopwords, std::filesystem::path submissions_file = {});

  std::shared_ptr<const Snapshot> snapshot() const;

  std::string submit(TaleDraft draft);
  Tale review(std::string_view id, const ReviewDecision& decision);

 private:
  void publish(Corpus corpus);
  void persist_submissions(const Corpus& corpus) const;

  text::StopwordList stopwords_;
  std::filesystem::path submissions_file_;
  std::mutex write_mutex_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> current_;
};

}  // namespace talechat
