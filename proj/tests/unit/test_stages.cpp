#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "rrpipe/stages.hpp"
#include "rrpipe/templates.hpp"
#include "support.hpp"

using namespace rrpipe;

namespace {

const Query kIntern{"q1", "", "What task can I assign to the summer intern?"};

std::vector<Candidate> candidates(std::size_t k, std::size_t words = 5) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < k; ++i) {
    std::string text;
    for (std::size_t w = 0; w < words; ++w) text += (w ? " " : "") + std::string("word");
    out.push_back({"d" + std::to_string(i + 1), text});
  }
  return out;
}

std::string random_garbage(std::mt19937_64& rng, std::size_t k) {
  static const std::string alphabet = "[]>0123456789 ,-abc\n\t";
  std::string s;
  const std::size_t len = rng() % 200;
  for (std::size_t i = 0; i < len; ++i) {
    switch (rng() % 4) {
      case 0: s += "[" + std::to_string(rng() % (k + 5)) + "]"; break;
      case 1: s += " > "; break;
      case 2: s += std::to_string(rng() % (2 * k + 3)); break;
      default: s += alphabet[rng() % alphabet.size()]; break;
    }
  }
  if (rng() % 10 == 0) s += std::string(1, static_cast<char>(rng() % 256));
  return s;
}

}  // namespace

TEST_CASE("expansion mode off makes no call") {
  auto prices = testing::mock_prices();
  Gateway gw(prices);
  auto fixed = std::make_shared<testing::FixedProvider>("never");
  gw.set_override(fixed);
  auto e = expand_query(kIntern, nullptr, ExpansionMode::off, gw);
  CHECK(e.retrieval_text == kIntern.text);
  CHECK_FALSE(e.usage.has_value());
  CHECK(fixed->calls == 0);
  auto e2 = expand_query(kIntern, &prices.at("pro"), ExpansionMode::off, gw);
  CHECK(e2.retrieval_text == kIntern.text);
  CHECK(fixed->calls == 0);
}

TEST_CASE("scripted expansion is concatenated") {
  auto prices = testing::mock_prices();
  Gateway gw(prices);
  const std::string exp = "internship suitable starter project no security clearance flexible timeline";
  auto scripted = std::make_shared<ScriptedProvider>();
  scripted->add(prompt_hash(build_expansion_prompt(kIntern)), exp);
  gw.set_override(scripted);
  auto e = expand_query(kIntern, &prices.at("flash-lite"), ExpansionMode::concat, gw);
  CHECK(e.retrieval_text == kIntern.text + " " + exp);
  CHECK(e.expansion_text == exp);
  REQUIRE(e.usage.has_value());
  CHECK(e.usage->stage == Stage::qe);
  CHECK_FALSE(e.degraded);

  auto r = expand_query(kIntern, &prices.at("flash-lite"), ExpansionMode::replace, gw);
  CHECK(r.retrieval_text == exp);
}

TEST_CASE("failing provider degrades expansion to the original text") {
  auto prices = testing::mock_prices();
  Gateway gw(prices);
  gw.set_override(std::make_shared<testing::FailingProvider>());
  auto e = expand_query(kIntern, &prices.at("pro"), ExpansionMode::concat, gw);
  CHECK(e.retrieval_text == kIntern.text);
  CHECK(e.degraded);
}

TEST_CASE("expansion prompt comes from the versioned template") {
  auto prompt = build_expansion_prompt(kIntern);
  CHECK(prompt.find(kIntern.text) != std::string::npos);
  CHECK(prompt.find("{query}") == std::string::npos);
  CHECK(expansion_template().id == "qe-v1");
  CHECK(ranking_template().id == "rr-v1");
  auto hashes = template_hashes();
  CHECK(hashes.size() == 2);
  CHECK(hashes.at("qe-v1") != hashes.at("rr-v1"));
  CHECK(render("{a}-{b}-{c}", {{"a", "{b}"}, {"b", "2"}}) == "{b}-2-{c}");
  CHECK_THROWS_AS(parse_expansion_mode("both"), ValidationError);
  CHECK(parse_expansion_mode("concat") == ExpansionMode::concat);
}

TEST_CASE("parse_permutation examples") {
  auto clean = parse_permutation("[2] > [1] > [3]", 3);
  CHECK(clean.order == std::vector<std::size_t>{1, 0, 2});
  CHECK_FALSE(clean.repaired);

  auto fixed = parse_permutation("[2] > [2] > [9]", 3);
  CHECK(fixed.order == std::vector<std::size_t>{1, 0, 2});
  CHECK(fixed.repaired);

  auto empty = parse_permutation("", 4);
  CHECK(empty.order == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(empty.repaired);

  CHECK(parse_permutation("[0] > [1]", 2).repaired);
  CHECK(parse_permutation("Ranking: [3] > [1] > [2]", 3).order == std::vector<std::size_t>{2, 0, 1});
}

TEST_CASE("parse_permutation is total on fuzzed input") {
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 12000; ++i) {
    const std::size_t k = 1 + rng() % 100;
    auto p = parse_permutation(random_garbage(rng, k), k);
    REQUIRE(p.order.size() == k);
    REQUIRE(is_valid_permutation(p.order, k));
  }
}

TEST_CASE("permutation validity helper") {
  std::vector<std::size_t> ok{2, 0, 1}, dup{0, 0, 1}, gap{0, 1, 3}, shortp{0, 1};
  CHECK(is_valid_permutation(ok, 3));
  CHECK_FALSE(is_valid_permutation(dup, 3));
  CHECK_FALSE(is_valid_permutation(gap, 3));
  CHECK_FALSE(is_valid_permutation(shortp, 3));
  CHECK(identity_permutation(3).order == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("window count matches enumeration for every k up to 200") {
  for (std::size_t k = 0; k <= 200; ++k)
    for (std::size_t window = 1; window <= 30; ++window)
      for (std::size_t stride = 1; stride <= window; ++stride) {
        const auto want = oracle::enumerate_windows(k, window, stride);
        REQUIRE(window_count(k, window, stride) == want);
        REQUIRE(plan_windows(k, window, stride).size() == want);
      }
  CHECK(window_count(100, 20, 10) == 9);
  CHECK_THROWS_AS(plan_windows(10, 5, 6), ValidationError);
  CHECK_THROWS_AS(plan_windows(10, 5, 0), ValidationError);
}

TEST_CASE("windows cover every candidate and end at the head") {
  for (std::size_t k = 1; k <= 120; ++k)
    for (auto [window, stride] : {std::pair<std::size_t, std::size_t>{20, 10}, {7, 3}, {5, 5}, {4, 1}}) {
      auto ws = plan_windows(k, window, stride);
      std::vector<bool> seen(k, false);
      for (const auto& w : ws) {
        REQUIRE(w.begin < w.end);
        REQUIRE(w.end <= k);
        REQUIRE(w.end - w.begin <= window);
        for (auto i = w.begin; i < w.end; ++i) seen[i] = true;
      }
      REQUIRE(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
      REQUIRE(ws.back().begin == 0);
      REQUIRE(ws.front().end == k);
    }
}

TEST_CASE("rerank k=100 makes nine calls") {
  auto prices = testing::mock_prices();
  Gateway gw(prices);
  gw.set_override(std::make_shared<IdentityProvider>());
  auto c = candidates(100);
  auto out = rerank_listwise(kIntern, c, prices.at("pro"), RerankOptions{}, gw);
  CHECK(out.calls == 9);
  CHECK(out.usage.size() == 9);
  CHECK(out.permutation == identity_permutation(100));
  CHECK_FALSE(out.degraded);
}

TEST_CASE("rerank of a single candidate short-circuits") {
  auto prices = testing::mock_prices();
  Gateway gw(prices);
  auto fixed = std::make_shared<testing::FixedProvider>("[1]");
  gw.set_override(fixed);
  auto c = candidates(1);
  auto out = rerank_listwise(kIntern, c, prices.at("pro"), RerankOptions{}, gw);
  CHECK(out.permutation.order == std::vector<std::size_t>{0});
  CHECK(out.calls == 0);
  CHECK(fixed->calls == 0);
}

TEST_CASE("oracle reranker promotes the relevant candidate") {
  auto prices = testing::mock_prices();
  Gateway gw(prices);
  auto qrels = std::make_shared<Qrels>();
  qrels->set("q1", "d1", 0);
  qrels->set("q1", "d2", 0);
  qrels->set("q1", "d3", 1);
  gw.set_override(std::make_shared<OracleRerankProvider>(qrels));
  auto c = candidates(3);
  auto out = rerank_listwise(kIntern, c, prices.at("pro"), RerankOptions{}, gw);
  CHECK(out.permutation.order == std::vector<std::size_t>{2, 0, 1});
}

TEST_CASE("oracle reranker sorts deep pools through sliding windows") {
  auto prices = testing::mock_prices();
  Gateway gw(prices);
  auto qrels = std::make_shared<Qrels>();
  // Relevant documents sit at the tail of a 100-deep pool.
  for (int i = 91; i <= 100; ++i) qrels->set("q1", "d" + std::to_string(i), i % 3 + 1);
  gw.set_override(std::make_shared<OracleRerankProvider>(qrels));
  auto c = candidates(100);
  auto out = rerank_listwise(kIntern, c, prices.at("pro"), RerankOptions{}, gw);
  std::set<std::string> top;
  for (std::size_t i = 0; i < 10; ++i) top.insert(c[out.permutation.order[i]].doc_id);
  for (int i = 91; i <= 100; ++i) CHECK(top.count("d" + std::to_string(i)) == 1);
}

TEST_CASE("reranking preserves the candidate set") {
  auto prices = testing::mock_prices();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Gateway gw(prices);
    gw.set_override(std::make_shared<testing::ShuffleProvider>(seed));
    const std::size_t k = 1 + seed * 2;
    auto c = candidates(k);
    auto out = rerank_listwise(kIntern, c, prices.at("pro"), RerankOptions{}, gw);
    REQUIRE(is_valid_permutation(out.permutation.order, k));
  }
}

TEST_CASE("rerank degrades to identity when the provider is down") {
  auto prices = testing::mock_prices();
  Gateway gw(prices);
  gw.set_override(std::make_shared<testing::FailingProvider>());
  auto c = candidates(30);
  auto out = rerank_listwise(kIntern, c, prices.at("pro"), RerankOptions{}, gw);
  CHECK(out.degraded);
  CHECK(out.permutation.order == identity_permutation(30).order);
}

TEST_CASE("passages are truncated to the token budget") {
  std::string text(100, 'a');
  CHECK(truncate_to_token_budget(text, 10));
  CHECK(text.size() == 40);
  std::string small = "short";
  CHECK_FALSE(truncate_to_token_budget(small, 10));
  std::string utf = "ééééé";  // 10 bytes
  CHECK(truncate_to_token_budget(utf, 1));
  CHECK(utf == "éé");

  auto prices = testing::mock_prices();
  Gateway gw(prices);
  gw.set_override(std::make_shared<IdentityProvider>());
  RerankOptions opts;
  opts.passage_token_budget = 2;
  auto c = candidates(5, 10);
  auto out = rerank_listwise(kIntern, c, prices.at("pro"), opts, gw);
  CHECK(out.truncated_passages == 5);
}

TEST_CASE("ranking prompt numbers passages from one") {
  std::vector<std::string> passages{"alpha", "beta"};
  auto prompt = build_ranking_prompt("the query", passages);
  CHECK(prompt.find("[1] alpha") != std::string::npos);
  CHECK(prompt.find("[2] beta") != std::string::npos);
  CHECK(prompt.find("the query") != std::string::npos);
}

TEST_CASE("window larger than the per-call cap is rejected") {
  auto prices = testing::mock_prices();
  Gateway gw(prices);
  gw.set_override(std::make_shared<IdentityProvider>());
  RerankOptions opts;
  opts.window = 30;
  opts.max_passages_per_call = 20;
  auto c = candidates(40);
  CHECK_THROWS_AS(rerank_listwise(kIntern, c, prices.at("pro"), opts, gw), ValidationError);
}
