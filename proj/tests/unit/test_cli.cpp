#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "support.hpp"

using testing::read_text;
using testing::TempDir;
using testing::write_text;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = rrpipe::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_desk(const TempDir& dir) {
  write_text(dir / "desk.jsonl", R"({"doc_id":"d1","subset":"","text":"cat sat mat"})"
                                 "\n"
                                 R"({"doc_id":"d2","subset":"","text":"cat cat dog"})"
                                 "\n"
                                 R"({"doc_id":"d3","subset":"","text":"bird song"})"
                                 "\n");
}

}  // namespace

TEST_CASE("search prints d2 then d1 on the desk corpus") {
  TempDir dir;
  write_desk(dir);
  auto idx = cli({"index", "--corpus", (dir / "desk.jsonl").string(), "--out", (dir / "idx.bin").string()});
  REQUIRE(idx.code == 0);
  auto r = cli({"search", "--index", (dir / "idx.bin").string(), "--query-text", "cat"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string first, second, third;
  std::getline(lines, first);
  std::getline(lines, second);
  CHECK(first.rfind("1\td2\t0.624307", 0) == 0);
  CHECK(second.rfind("2\td1\t0.447139", 0) == 0);
  CHECK_FALSE(std::getline(lines, third));
}

TEST_CASE("help exits zero on every subcommand") {
  CHECK(cli({"--help"}).code == 0);
  for (const char* sub : {"ingest", "index", "search", "expand", "rerank", "run", "sweep", "report"})
    CHECK_MESSAGE(cli({sub, "--help"}).code == 0, sub);
}

TEST_CASE("usage errors exit one") {
  auto r = cli({"frobnicate"});
  CHECK(r.code == 1);
  CHECK(cli({"search", "--bogus"}).code == 1);
  CHECK(cli({"index", "--corpus", "/nonexistent/c.jsonl", "--out", "/tmp/x"}).code == 1);
}

TEST_CASE("run twice produces identical files") {
  TempDir dir;
  REQUIRE(cli({"ingest", "--synthetic", "--out-dir", dir.path().string()}).code == 0);
  write_text(dir / "prices.csv", testing::kMockPrices);
  write_text(dir / "cfg.json", R"({"qe_variant":"off","qe_mode":"off","rr_variant":"pro","k":20})");
  for (const char* out : {"a", "b"}) {
    auto r = cli({"run", "--config", (dir / "cfg.json").string(), "--corpus", (dir / "corpus.jsonl").string(),
                  "--queries", (dir / "queries.jsonl").string(), "--qrels", (dir / "qrels.txt").string(), "--prices",
                  (dir / "prices.csv").string(), "--out-dir", (dir / out).string(), "--provider", "mock:identity"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
  }
  CHECK(testing::snapshot_dir(dir / "a") == testing::snapshot_dir(dir / "b"));
  CHECK(read_text(dir / "a" / "per_query.jsonl").size() > 0);
}

TEST_CASE("sweep resumes after an interrupt and reports") {
  TempDir dir;
  REQUIRE(cli({"ingest", "--synthetic", "--out-dir", dir.path().string()}).code == 0);
  write_text(dir / "prices.csv", testing::kMockPrices);
  write_text(dir / "grid.json", R"({"qe_variants":["off"],"rr_variants":["flash-lite","pro"],"k":[10,20]})");
  std::vector<std::string> base{"sweep",      "--grid",   (dir / "grid.json").string(),
                                "--corpus",   (dir / "corpus.jsonl").string(),
                                "--queries",  (dir / "queries.jsonl").string(),
                                "--qrels",    (dir / "qrels.txt").string(),
                                "--prices",   (dir / "prices.csv").string(),
                                "--store",    (dir / "store").string(),
                                "--provider", "mock:oracle-rerank"};
  auto first = base;
  first.insert(first.end(), {"--max-configs", "1"});
  auto a = cli(first);
  REQUIRE_MESSAGE(a.code == 0, a.err);
  auto summary_a = nlohmann::json::parse(a.out);
  CHECK(summary_a["executed"] == 1);
  CHECK(summary_a["interrupted"] == true);

  auto second = base;
  second.push_back("--resume");
  auto b = cli(second);
  REQUIRE_MESSAGE(b.code == 0, b.err);
  auto summary_b = nlohmann::json::parse(b.out);
  CHECK(summary_b["resumed"] == 1);
  CHECK(summary_b["executed"] == 3);

  auto rep = cli({"report", "--store", (dir / "store").string(), "--shape", "rr_table"});
  REQUIRE_MESSAGE(rep.code == 0, rep.err);
  CHECK(read_text(dir / "store" / "report_rr_table.md").rfind("k = 20", 0) == 0);
  CHECK(cli({"report", "--store", (dir / "store").string(), "--shape", "qe_table"}).code == 1);
}

TEST_CASE("expand and rerank single queries") {
  TempDir dir;
  write_text(dir / "prices.csv", testing::kMockPrices);
  auto e = cli({"expand", "--prices", (dir / "prices.csv").string(), "--variant", "flash-lite", "--provider",
                "mock:identity", "--query-text", "summer intern"});
  REQUIRE_MESSAGE(e.code == 0, e.err);
  CHECK(nlohmann::json::parse(e.out)["retrieval_text"] == "summer intern");

  write_text(dir / "cands.jsonl", R"({"doc_id":"a","text":"alpha"})"
                                  "\n"
                                  R"({"doc_id":"b","text":"beta"})"
                                  "\n");
  auto r = cli({"rerank", "--prices", (dir / "prices.csv").string(), "--variant", "pro", "--provider",
                "mock:identity", "--candidates", (dir / "cands.jsonl").string(), "--query-text", "q"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("a") < r.out.find("b"));
}
