#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rrpipe/corpus.hpp"
#include "rrpipe/tokenizer.hpp"

namespace rrpipe {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  bool operator==(const Bm25Params&) const = default;
};

enum class Provenance { initial_retrieval, reranked };

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

struct RankedList {
  std::string query_id;
  std::vector<ScoredDoc> entries;
  Provenance provenance = Provenance::initial_retrieval;

  std::vector<std::string> doc_ids() const;
  bool operator==(const RankedList&) const = default;
};

/// Lucene-style non-negative IDF: ln((N - df + 0.5) / (df + 0.5) + 1).
double bm25_idf(std::size_t doc_count, std::size_t doc_freq);

struct PostingList {
  std::vector<std::uint32_t> docs;   // strictly increasing ordinals
  std::vector<std::uint32_t> freqs;  // parallel to docs
};

/// In-memory BM25 inverted index. Immutable after build, so concurrent
/// searches are safe.
class Bm25Index {
 public:
  static constexpr std::string_view kSnapshotMagic = "RRPIPE-IDX";
  static constexpr std::uint32_t kSnapshotVersion = 1;

  /// Throws EmptyCorpus. Documents whose token list is empty stay in the
  /// index with length 0.
  static Bm25Index build(const Corpus& corpus, Bm25Params params = {},
                         AnalyzerOptions analyzer = {});

  /// Top-`n` documents by BM25 score, ties by doc_id ascending. Documents
  /// with no query term are excluded. Repeated query terms count once each.
  RankedList search(std::span<const std::string> query_terms, std::size_t n,
                    std::string query_id = {}) const;

  /// Tokenizes `text` with the index's analyzer, then searches.
  RankedList search_text(std::string_view text, std::size_t n, std::string query_id = {}) const;

  std::size_t doc_count() const { return doc_ids_.size(); }
  std::size_t term_count() const { return terms_.size(); }
  double avg_doc_length() const { return avg_doc_length_; }
  const Bm25Params& params() const { return params_; }
  const AnalyzerOptions& analyzer() const { return analyzer_; }
  const std::string& doc_id(std::uint32_t ordinal) const { return doc_ids_[ordinal]; }
  std::span<const std::uint32_t> doc_lengths() const { return doc_lengths_; }
  std::span<const std::string> terms() const { return terms_; }

  /// nullptr for terms absent from the corpus.
  const PostingList* postings(std::string_view term) const;
  std::size_t doc_freq(std::string_view term) const;
  double idf(std::string_view term) const;

  void write(std::ostream& out) const;
  static Bm25Index read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Bm25Index load(const std::filesystem::path& path);

 private:
  Bm25Index() = default;
  void finalize();

  Bm25Params params_;
  AnalyzerOptions analyzer_;
  std::vector<std::string> doc_ids_;
  std::vector<std::uint32_t> doc_lengths_;
  double avg_doc_length_ = 0.0;
  std::vector<std::string> terms_;
  std::vector<PostingList> postings_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<double> length_norms_;
};

}  // namespace rrpipe
