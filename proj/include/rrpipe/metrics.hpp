#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrpipe/bm25_index.hpp"
#include "rrpipe/corpus.hpp"
#include "rrpipe/money.hpp"

namespace rrpipe {

enum class Gain { linear, exponential };

bool has_relevant(const Judgments& judgments);

/// DCG@k / IDCG@k with gain grade (linear) or 2^grade - 1 (exponential) and
/// discount log2(rank + 1). 0 when nothing is relevant.
double ndcg_at_k(std::span<const std::string> ranked, const Judgments& judgments, std::size_t k,
                 Gain gain = Gain::linear);
double ndcg_at_k(const RankedList& ranked, const Judgments& judgments, std::size_t k, Gain gain = Gain::linear);

/// Fraction of relevant (grade > 0) documents within the top k; nullopt when
/// the query has no relevant document and must be excluded.
std::optional<double> recall_at_k(std::span<const std::string> ranked, const Judgments& judgments, std::size_t k);
std::optional<double> recall_at_k(const RankedList& ranked, const Judgments& judgments, std::size_t k);

struct QueryResult {
  std::string query_id;
  std::string subset;
  double ndcg_at_10 = 0.0;
  double recall_at_10 = 0.0;
  Money cost;
  double latency_s = 0.0;
  bool degraded = false;
  bool excluded = false;  // no relevant documents; left out of means
  std::int64_t qe_input_tokens = 0;
  std::int64_t qe_output_tokens = 0;
  std::int64_t rr_input_tokens = 0;
  std::int64_t rr_output_tokens = 0;
  std::size_t rr_calls = 0;

  bool operator==(const QueryResult&) const = default;
};

/// Means over non-excluded results. Metrics are scaled to 0-100.
struct AggregateRow {
  double ndcg_at_10 = 0.0;
  double recall_at_10 = 0.0;
  double mean_cost_usd = 0.0;
  Money total_cost;
  double mean_latency_s = 0.0;
  std::size_t count = 0;
  std::size_t degraded_count = 0;
  std::size_t excluded_count = 0;

  bool operator==(const AggregateRow&) const = default;
};

/// Throws EmptyResults when no result is evaluable.
AggregateRow aggregate(std::span<const QueryResult> results);

nlohmann::json to_json(const QueryResult& r);
QueryResult query_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AggregateRow& a);
AggregateRow aggregate_from_json(const nlohmann::json& j);

}  // namespace rrpipe
