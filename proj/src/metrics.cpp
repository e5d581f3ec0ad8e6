#include "rrpipe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_set>

#include "rrpipe/error.hpp"

namespace rrpipe {

namespace {

double gain_of(int grade, Gain gain) {
  if (grade <= 0) return 0.0;
  return gain == Gain::linear ? static_cast<double>(grade) : std::exp2(static_cast<double>(grade)) - 1.0;
}

int grade_of(const Judgments& judgments, const std::string& doc_id) {
  auto it = judgments.find(doc_id);
  return it == judgments.end() ? 0 : it->second;
}

}  // namespace

bool has_relevant(const Judgments& judgments) {
  return std::any_of(judgments.begin(), judgments.end(), [](const auto& kv) { return kv.second > 0; });
}

double ndcg_at_k(std::span<const std::string> ranked, const Judgments& judgments, std::size_t k, Gain gain) {
  std::vector<int> grades;
  for (const auto& [doc, grade] : judgments)
    if (grade > 0) grades.push_back(grade);
  if (grades.empty() || k == 0) return 0.0;
  std::sort(grades.begin(), grades.end(), std::greater<>());

  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(k, grades.size()); ++i)
    ideal += gain_of(grades[i], gain) / std::log2(static_cast<double>(i) + 2.0);

  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i)
    dcg += gain_of(grade_of(judgments, ranked[i]), gain) / std::log2(static_cast<double>(i) + 2.0);
  return dcg / ideal;
}

double ndcg_at_k(const RankedList& ranked, const Judgments& judgments, std::size_t k, Gain gain) {
  auto ids = ranked.doc_ids();
  return ndcg_at_k(ids, judgments, k, gain);
}

std::optional<double> recall_at_k(std::span<const std::string> ranked, const Judgments& judgments, std::size_t k) {
  std::size_t relevant = 0;
  for (const auto& [doc, grade] : judgments)
    if (grade > 0) ++relevant;
  if (relevant == 0) return std::nullopt;
  std::size_t hits = 0;
  std::unordered_set<std::string_view> counted;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (grade_of(judgments, ranked[i]) > 0 && counted.insert(ranked[i]).second) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(relevant);
}

std::optional<double> recall_at_k(const RankedList& ranked, const Judgments& judgments, std::size_t k) {
  auto ids = ranked.doc_ids();
  return recall_at_k(ids, judgments, k);
}

AggregateRow aggregate(std::span<const QueryResult> results) {
  AggregateRow row;
  double ndcg = 0.0;
  double recall = 0.0;
  double latency = 0.0;
  for (const auto& r : results) {
    if (r.excluded) {
      ++row.excluded_count;
      continue;
    }
    ++row.count;
    ndcg += r.ndcg_at_10;
    recall += r.recall_at_10;
    latency += r.latency_s;
    row.total_cost += r.cost;
    if (r.degraded) ++row.degraded_count;
  }
  if (row.count == 0) throw EmptyResults();
  const double n = static_cast<double>(row.count);
  row.ndcg_at_10 = ndcg / n * 100.0;
  row.recall_at_10 = recall / n * 100.0;
  row.mean_latency_s = latency / n;
  row.mean_cost_usd = static_cast<double>(row.total_cost.picodollars()) / n / 1e12;
  return row;
}

nlohmann::json to_json(const QueryResult& r) {
  return {{"query_id", r.query_id},
          {"subset", r.subset},
          {"ndcg_at_10", r.ndcg_at_10},
          {"recall_at_10", r.recall_at_10},
          {"cost_usd", r.cost.to_string()},
          {"cost_picodollars", r.cost.picodollars()},
          {"latency_s", r.latency_s},
          {"degraded", r.degraded},
          {"excluded", r.excluded},
          {"qe_input_tokens", r.qe_input_tokens},
          {"qe_output_tokens", r.qe_output_tokens},
          {"rr_input_tokens", r.rr_input_tokens},
          {"rr_output_tokens", r.rr_output_tokens},
          {"rr_calls", r.rr_calls}};
}

QueryResult query_result_from_json(const nlohmann::json& j) {
  QueryResult r;
  r.query_id = j.at("query_id").get<std::string>();
  r.subset = j.value("subset", std::string{});
  r.ndcg_at_10 = j.at("ndcg_at_10").get<double>();
  r.recall_at_10 = j.at("recall_at_10").get<double>();
  r.cost = Money::from_picodollars(j.at("cost_picodollars").get<std::int64_t>());
  r.latency_s = j.at("latency_s").get<double>();
  r.degraded = j.value("degraded", false);
  r.excluded = j.value("excluded", false);
  r.qe_input_tokens = j.value("qe_input_tokens", std::int64_t{0});
  r.qe_output_tokens = j.value("qe_output_tokens", std::int64_t{0});
  r.rr_input_tokens = j.value("rr_input_tokens", std::int64_t{0});
  r.rr_output_tokens = j.value("rr_output_tokens", std::int64_t{0});
  r.rr_calls = j.value("rr_calls", std::size_t{0});
  if (r.ndcg_at_10 < 0 || r.ndcg_at_10 > 1 || r.recall_at_10 < 0 || r.recall_at_10 > 1 || r.latency_s < 0 ||
      r.cost.picodollars() < 0)
    throw ValidationError("query result " + r.query_id + " has out-of-range values");
  return r;
}

nlohmann::json to_json(const AggregateRow& a) {
  return {{"ndcg_at_10", a.ndcg_at_10},
          {"recall_at_10", a.recall_at_10},
          {"mean_cost_usd", a.mean_cost_usd},
          {"total_cost_picodollars", a.total_cost.picodollars()},
          {"mean_latency_s", a.mean_latency_s},
          {"count", a.count},
          {"degraded_count", a.degraded_count},
          {"excluded_count", a.excluded_count}};
}

AggregateRow aggregate_from_json(const nlohmann::json& j) {
  AggregateRow a;
  a.ndcg_at_10 = j.at("ndcg_at_10").get<double>();
  a.recall_at_10 = j.at("recall_at_10").get<double>();
  a.mean_cost_usd = j.at("mean_cost_usd").get<double>();
  a.total_cost = Money::from_picodollars(j.at("total_cost_picodollars").get<std::int64_t>());
  a.mean_latency_s = j.at("mean_latency_s").get<double>();
  a.count = j.at("count").get<std::size_t>();
  a.degraded_count = j.at("degraded_count").get<std::size_t>();
  a.excluded_count = j.at("excluded_count").get<std::size_t>();
  return a;
}

}  // namespace rrpipe
