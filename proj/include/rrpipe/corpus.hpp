#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rrpipe/error.hpp"

namespace rrpipe {

struct Document {
  std::string doc_id;
  std::string subset;
  std::string text;

  bool operator==(const Document&) const = default;
};

struct Query {
  std::string query_id;
  std::string subset;
  std::string text;

  bool operator==(const Query&) const = default;
};

/// Ordered, id-addressable, immutable collection of records. Iteration order
/// is insertion (file) order.
template <typename Record, std::string Record::*Id, typename DuplicateError>
class KeyedCollection {
 public:
  KeyedCollection() = default;

  explicit KeyedCollection(std::vector<Record> records) : records_(std::move(records)) {
    by_id_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (!by_id_.emplace(records_[i].*Id, i).second) throw DuplicateError(records_[i].*Id);
    }
  }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const Record& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }
  const std::vector<Record>& records() const { return records_; }

  const Record* find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
  }

  std::optional<std::size_t> position(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const KeyedCollection& other) const { return records_ == other.records_; }

 private:
  std::vector<Record> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

using Corpus = KeyedCollection<Document, &Document::doc_id, DuplicateDocId>;
using QuerySet = KeyedCollection<Query, &Query::query_id, DuplicateQueryId>;

/// doc_id -> relevance grade for one query.
using Judgments = std::map<std::string, int, std::less<>>;

class Qrels {
 public:
  Qrels() = default;
  explicit Qrels(std::map<std::string, Judgments, std::less<>> judgments);

  /// Empty judgments when the query has none.
  const Judgments& judgments_for(std::string_view query_id) const;
  const std::map<std::string, Judgments, std::less<>>& all() const { return judgments_; }
  std::size_t query_count() const { return judgments_.size(); }

  void set(const std::string& query_id, const std::string& doc_id, int grade);

  bool operator==(const Qrels&) const = default;

 private:
  std::map<std::string, Judgments, std::less<>> judgments_;
};

struct QrelsLoad {
  Qrels qrels;
  std::vector<std::string> warnings;
};

Corpus load_corpus(const std::filesystem::path& path);
QuerySet load_queries(const std::filesystem::path& path);

/// Accepts `query_id doc_id grade` and the four-column trec form
/// `query_id iteration doc_id grade`. Records naming a query absent from
/// `queries` are skipped and reported in `warnings`.
QrelsLoad load_qrels(const std::filesystem::path& path, const QuerySet& queries);

void write_corpus(const std::filesystem::path& path, const Corpus& corpus);
void write_queries(const std::filesystem::path& path, const QuerySet& queries);
void write_qrels(const std::filesystem::path& path, const Qrels& qrels);

Corpus filter_subset(const Corpus& corpus, std::string_view subset);
QuerySet filter_subset(const QuerySet& queries, std::string_view subset);

/// Converts one BRIGHT subset (documents with `id`/`content`, examples with
/// `id`/`query`/`gold_ids`) into the toolkit's formats. Documents with blank
/// content are dropped and counted in `warnings`.
struct BrightImport {
  Corpus corpus;
  QuerySet queries;
  Qrels qrels;
  std::vector<std::string> warnings;
};

BrightImport import_bright(const std::filesystem::path& documents_path,
                           const std::filesystem::path& examples_path, const std::string& subset);

}  // namespace rrpipe
