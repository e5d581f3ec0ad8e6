#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rrpipe/metrics.hpp"

using namespace rrpipe;

namespace {

using Ids = std::vector<std::string>;

struct Instance {
  Ids ranked;
  Judgments judgments;
};

Instance random_instance(std::mt19937_64& rng) {
  Instance inst;
  const std::size_t n = 1 + rng() % 8;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "d" + std::to_string(i);
    if (rng() % 4 != 0) inst.judgments[id] = static_cast<int>(rng() % 4);
    inst.ranked.push_back(id);
  }
  std::shuffle(inst.ranked.begin(), inst.ranked.end(), rng);
  if (rng() % 3 == 0) inst.ranked.resize(rng() % (n + 1));
  return inst;
}

}  // namespace

TEST_CASE("ndcg examples") {
  Judgments j{{"d1", 1}};
  Ids ranked{"d2", "d1"};
  CHECK(ndcg_at_k(ranked, j, 10) == doctest::Approx(0.6309).epsilon(1e-4));

  Judgments graded{{"a", 3}, {"b", 2}, {"c", 1}, {"d", 0}};
  Ids ideal{"a", "b", "c", "d"};
  CHECK(ndcg_at_k(ideal, graded, 10) == 1.0);
  CHECK(ndcg_at_k(Ids{}, graded, 10) == 0.0);
  CHECK(ndcg_at_k(ranked, Judgments{}, 10) == 0.0);
}

TEST_CASE("exponential gain is available") {
  Judgments j{{"a", 1}, {"b", 3}};
  Ids ranked{"a", "b"};
  const double lin = (1.0 + 3.0 / std::log2(3.0)) / (3.0 + 1.0 / std::log2(3.0));
  const double exp = (1.0 + 7.0 / std::log2(3.0)) / (7.0 + 1.0 / std::log2(3.0));
  CHECK(ndcg_at_k(ranked, j, 10) == doctest::Approx(lin).epsilon(1e-12));
  CHECK(ndcg_at_k(ranked, j, 10, Gain::exponential) == doctest::Approx(exp).epsilon(1e-12));
}

TEST_CASE("recall examples") {
  Judgments j{{"a", 1}, {"b", 2}, {"c", 0}};
  CHECK(recall_at_k(Ids{"b", "x", "a"}, j, 10) == 1.0);
  CHECK(recall_at_k(Ids{"b", "x"}, j, 10) == 0.5);
  CHECK(recall_at_k(Ids{"x", "a"}, j, 1) == 0.0);
  CHECK_FALSE(recall_at_k(Ids{"a"}, Judgments{{"a", 0}}, 10).has_value());
  CHECK_FALSE(has_relevant(Judgments{{"a", 0}}));
}

TEST_CASE("metrics match brute-force oracles") {
  std::mt19937_64 rng(424242);
  for (int i = 0; i < 2000; ++i) {
    auto inst = random_instance(rng);
    const std::size_t k = 1 + rng() % 10;
    REQUIRE(std::fabs(ndcg_at_k(inst.ranked, inst.judgments, k) - oracle::brute_ndcg(inst.ranked, inst.judgments, k)) <
            1e-9);
    auto r = recall_at_k(inst.ranked, inst.judgments, k);
    if (has_relevant(inst.judgments)) {
      REQUIRE(r.has_value());
      REQUIRE(*r == oracle::set_recall(inst.ranked, inst.judgments, k));
    } else {
      REQUIRE_FALSE(r.has_value());
    }
  }
}

TEST_CASE("ndcg is bounded and grade-descending orderings score one") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    auto inst = random_instance(rng);
    const double v = ndcg_at_k(inst.ranked, inst.judgments, 10);
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0 + 1e-12);
    if (!has_relevant(inst.judgments)) continue;
    Ids ideal;
    for (const auto& [d, g] : inst.judgments) ideal.push_back(d);
    std::stable_sort(ideal.begin(), ideal.end(),
                     [&](const auto& a, const auto& b) { return inst.judgments.at(a) > inst.judgments.at(b); });
    REQUIRE(ndcg_at_k(ideal, inst.judgments, 10) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("swapping an inversion never lowers ndcg") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 2000; ++i) {
    auto inst = random_instance(rng);
    if (inst.ranked.size() < 2) continue;
    const std::size_t pos = rng() % (inst.ranked.size() - 1);
    auto grade = [&](const std::string& d) {
      auto it = inst.judgments.find(d);
      return it == inst.judgments.end() ? 0 : it->second;
    };
    if (grade(inst.ranked[pos]) >= grade(inst.ranked[pos + 1])) continue;
    const std::size_t k = 1 + rng() % 10;
    const double before = ndcg_at_k(inst.ranked, inst.judgments, k);
    std::swap(inst.ranked[pos], inst.ranked[pos + 1]);
    REQUIRE(ndcg_at_k(inst.ranked, inst.judgments, k) >= before);
  }
}

TEST_CASE("recall is monotone in k and permutation-invariant within the cutoff") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    auto inst = random_instance(rng);
    if (!has_relevant(inst.judgments)) continue;
    double prev = 0;
    for (std::size_t k = 1; k <= 10; ++k) {
      double r = *recall_at_k(inst.ranked, inst.judgments, k);
      REQUIRE(r >= prev);
      prev = r;
    }
    Ids all;
    for (const auto& [d, g] : inst.judgments) all.push_back(d);
    REQUIRE(*recall_at_k(all, inst.judgments, all.size()) == 1.0);
    auto shuffled = inst.ranked;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    REQUIRE(*recall_at_k(shuffled, inst.judgments, 10) == *recall_at_k(inst.ranked, inst.judgments, 10));
  }
}

TEST_CASE("aggregate examples") {
  QueryResult a;
  a.query_id = "a";
  a.ndcg_at_10 = 0.5;
  a.recall_at_10 = 0.5;
  auto row = aggregate(std::vector<QueryResult>{a});
  CHECK(row.ndcg_at_10 == 50.0);
  CHECK(row.recall_at_10 == 50.0);
  CHECK(row.count == 1);

  QueryResult z, o;
  z.query_id = "z";
  o.query_id = "o";
  o.ndcg_at_10 = 1.0;
  o.cost = Money::from_picodollars(3'000'000'000);
  o.latency_s = 2.0;
  o.degraded = true;
  QueryResult ex;
  ex.query_id = "ex";
  ex.excluded = true;
  ex.ndcg_at_10 = 0.9;
  auto two = aggregate(std::vector<QueryResult>{z, o, ex});
  CHECK(two.ndcg_at_10 == 50.0);
  CHECK(two.count == 2);
  CHECK(two.excluded_count == 1);
  CHECK(two.degraded_count == 1);
  CHECK(two.total_cost == Money::from_picodollars(3'000'000'000));
  CHECK(two.mean_cost_usd == doctest::Approx(0.0015));
  CHECK(two.mean_latency_s == 1.0);

  CHECK_THROWS_AS(aggregate(std::vector<QueryResult>{}), EmptyResults);
  CHECK_THROWS_AS(aggregate(std::vector<QueryResult>{ex}), EmptyResults);
}

TEST_CASE("query results and aggregates round trip through json") {
  QueryResult r;
  r.query_id = "q7";
  r.subset = "biology";
  r.ndcg_at_10 = 0.123456789012345;
  r.recall_at_10 = 1.0 / 3.0;
  r.cost = Money::from_picodollars(123456789);
  r.latency_s = 0.25;
  r.rr_calls = 9;
  r.qe_input_tokens = 11;
  CHECK(query_result_from_json(to_json(r)) == r);
  auto a = aggregate(std::vector<QueryResult>{r});
  CHECK(aggregate_from_json(to_json(a)) == a);
}
