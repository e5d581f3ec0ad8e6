#pragma once

#include <map>
#include <string>

#include "rrpipe/corpus.hpp"

namespace rrpipe {

/// Small deterministic dataset for smoke runs and tests: 50 documents, 10
/// queries, graded judgments. Every document shares the term "memory", so
/// BM25 returns the whole corpus for every query. Per query, one relevant
/// document matches the query's words; two more relevant ones match only
/// through a hidden term and sit near the bottom of the BM25 ranking
/// (ranks 31-50), reachable by a deep re-ranking pool or by an expansion
/// that names the hidden term.
struct SyntheticDataset {
  Corpus corpus;
  QuerySet queries;
  Qrels qrels;
  /// query_id -> an expansion text that mentions the hidden term.
  std::map<std::string, std::string> expansion_hints;
};

SyntheticDataset make_desk_dataset();

}  // namespace rrpipe
