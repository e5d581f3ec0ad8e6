#include "rrpipe/synthetic.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace rrpipe {

namespace {

constexpr std::array<std::string_view, 5> kSubsets{"biology", "earth_science", "economics", "psychology",
                                                   "robotics"};

constexpr std::array<std::array<std::string_view, 3>, 10> kTopics{{
    {"enzyme", "substrate", "catalysis"},
    {"glacier", "moraine", "ablation"},
    {"tariff", "import", "quota"},
    {"anchoring", "bias", "heuristic"},
    {"gripper", "torque", "actuator"},
    {"mitochondria", "membrane", "respiration"},
    {"aquifer", "recharge", "groundwater"},
    {"inflation", "wage", "spiral"},
    {"conditioning", "reward", "extinction"},
    {"odometry", "drift", "encoder"},
}};

constexpr std::array<std::string_view, 10> kHidden{"allosteric", "cryosphere", "protectionism", "priming",
                                                   "compliance", "chemiosmosis", "permeability", "indexation",
                                                   "reinforcement", "localization"};

constexpr std::array<std::string_view, 24> kFiller{
    "ledger", "archive", "journal", "summary", "draft",   "outline", "sketch", "review",
    "digest", "record",  "entry",   "margin", "folder",  "binder",  "memo",   "packet",
    "slide",  "chart",   "figure",  "column", "section", "chapter", "index",  "appendix"};

std::string filler(std::size_t seed, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    out += ' ';
    out += kFiller[(seed * 7 + i * 5) % kFiller.size()];
  }
  return out;
}

}  // namespace

SyntheticDataset make_desk_dataset() {
  std::vector<Document> docs;
  std::vector<Query> queries;
  SyntheticDataset out;
  for (std::size_t q = 0; q < kTopics.size(); ++q) {
    const auto& [a, b, c] = kTopics[q];
    const std::string subset(kSubsets[q % kSubsets.size()]);
    const std::string hidden(kHidden[q]);
    const std::string qid = "q" + std::to_string(q + 1);
    auto doc_id = [&](std::size_t slot) {
      return "t" + std::string(q + 1 < 10 ? "0" : "") + std::to_string(q + 1) + "-d" + std::to_string(slot + 1);
    };
    const std::string sa(a), sb(b), sc(c);

    docs.push_back({doc_id(0), subset, "memory " + sa + " " + sa + " " + sb + " " + sb + filler(q * 5, 2)});
    docs.push_back({doc_id(1), subset, "memory " + sa + " " + sc + filler(q * 5 + 1, 4)});
    docs.push_back({doc_id(2), subset, "memory " + sb + filler(q * 5 + 2, 5)});
    docs.push_back({doc_id(3), subset, "memory " + hidden + filler(q * 5 + 3, 28)});
    docs.push_back({doc_id(4), subset, "memory " + hidden + " " + hidden + filler(q * 5 + 4, 27)});

    queries.push_back({qid, subset, "What does memory hold about " + sa + ", " + sb + " and " + sc + "?"});
    out.qrels.set(qid, doc_id(0), 0);
    out.qrels.set(qid, doc_id(1), 2);
    out.qrels.set(qid, doc_id(2), 0);
    out.qrels.set(qid, doc_id(3), 1);
    out.qrels.set(qid, doc_id(4), 2);
    out.expansion_hints[qid] = hidden + " " + sc;
  }
  out.corpus = Corpus(std::move(docs));
  out.queries = QuerySet(std::move(queries));
  return out;
}

}  // namespace rrpipe
