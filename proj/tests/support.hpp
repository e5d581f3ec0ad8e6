// Shared fixtures for unit and acceptance tests.
#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "rrpipe/corpus.hpp"
#include "rrpipe/llm_gateway.hpp"
#include "rrpipe/orchestrator.hpp"
#include "rrpipe/providers.hpp"
#include "rrpipe/stages.hpp"
#include "rrpipe/synthetic.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("rrpipe-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every file under a directory, keyed by relative path.
inline std::vector<std::pair<std::string, std::string>> snapshot_dir(const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.emplace_back(std::filesystem::relative(e.path(), dir).string(), read_text(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

inline constexpr const char* kMockPrices =
    "name,provider_id,thinking,price_in,price_out,max_context_tokens\n"
    "flash-lite,mock-lite,off,0.10,0.40,1000000\n"
    "flash-no-think,mock-flash,off,0.30,2.50,1000000\n"
    "flash-think,mock-flash-think,dynamic,0.30,2.50,1000000\n"
    "pro,mock-pro,dynamic,1.25,10.00,1000000\n";

inline rrpipe::PriceTable mock_prices() { return rrpipe::PriceTable::parse(kMockPrices); }

// Emits a uniformly random ranking of the passages it is shown, sometimes
// malformed so that repair paths are exercised too.
class ShuffleProvider final : public rrpipe::Provider {
 public:
  explicit ShuffleProvider(std::uint64_t seed) : rng_(seed) {}
  rrpipe::ProviderReply complete(const rrpipe::ModelVariant&, const rrpipe::GenerationRequest& request) override {
    rrpipe::ProviderReply reply;
    reply.latency_s = 0.0;
    if (request.stage != rrpipe::Stage::rr) return reply;
    std::vector<std::size_t> order(request.passage_ids.size());
    std::iota(order.begin(), order.end(), 1);
    std::shuffle(order.begin(), order.end(), rng_);
    std::uniform_int_distribution<int> coin(0, 3);
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (coin(rng_) == 0 && i > 0) continue;  // gap
      if (!reply.completion.empty()) reply.completion += " > ";
      reply.completion += "[" + std::to_string(order[i]) + "]";
      if (coin(rng_) == 0) reply.completion += " > [" + std::to_string(order[i]) + "]";  // duplicate
    }
    if (coin(rng_) == 0) reply.completion += " > [" + std::to_string(order.size() + 7) + "]";
    return reply;
  }
  bool deterministic() const override { return true; }
  std::string_view name() const override { return "test:shuffle"; }

 private:
  std::mt19937_64 rng_;
};

class FailingProvider final : public rrpipe::Provider {
 public:
  explicit FailingProvider(bool transient = false, bool deterministic = true)
      : transient_(transient), deterministic_(deterministic) {}
  rrpipe::ProviderReply complete(const rrpipe::ModelVariant&, const rrpipe::GenerationRequest&) override {
    ++calls;
    if (transient_) throw rrpipe::TransientProviderError("try later");
    throw rrpipe::ProviderError("down");
  }
  bool deterministic() const override { return deterministic_; }
  std::string_view name() const override { return "test:failing"; }
  std::atomic<int> calls{0};

 private:
  bool transient_;
  bool deterministic_;
};

// Replies with a fixed string and a fixed usage, counting calls.
class FixedProvider final : public rrpipe::Provider {
 public:
  explicit FixedProvider(std::string completion, bool deterministic = true)
      : completion_(std::move(completion)), deterministic_(deterministic) {}
  rrpipe::ProviderReply complete(const rrpipe::ModelVariant&, const rrpipe::GenerationRequest&) override {
    ++calls;
    return {completion_, std::nullopt, std::nullopt, 0.0};
  }
  bool deterministic() const override { return deterministic_; }
  std::string_view name() const override { return "test:fixed"; }
  std::atomic<int> calls{0};

 private:
  std::string completion_;
  bool deterministic_;
};

// Scripted expansion provider answering each synthetic query with its hint,
// prefixed per variant so that different QE variants produce distinct runs.
inline std::shared_ptr<rrpipe::ScriptedProvider> scripted_expansions(const rrpipe::SyntheticDataset& data,
                                                                     const std::vector<std::string>& variants) {
  auto provider = std::make_shared<rrpipe::ScriptedProvider>();
  for (const auto& q : data.queries) {
    const auto hash = rrpipe::prompt_hash(rrpipe::build_expansion_prompt(q));
    const auto& hint = data.expansion_hints.at(q.query_id);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      // Weaker variants only recover part of the hint.
      std::string text = v == 0 ? hint.substr(0, hint.find(' ')) : hint;
      for (std::size_t extra = 1; extra < v; ++extra) text += " " + hint;
      provider->add(hash, text, variants[v]);
    }
  }
  return provider;
}

}  // namespace testing

namespace testing {

// Routes expansion calls to one provider and ranking calls to another.
class StageSplitProvider final : public rrpipe::Provider {
 public:
  StageSplitProvider(std::shared_ptr<rrpipe::Provider> qe, std::shared_ptr<rrpipe::Provider> rr)
      : qe_(std::move(qe)), rr_(std::move(rr)) {}
  rrpipe::ProviderReply complete(const rrpipe::ModelVariant& v, const rrpipe::GenerationRequest& r) override {
    return r.stage == rrpipe::Stage::qe ? qe_->complete(v, r) : rr_->complete(v, r);
  }
  bool deterministic() const override { return qe_->deterministic() && rr_->deterministic(); }
  std::string_view name() const override { return "test:split"; }

 private:
  std::shared_ptr<rrpipe::Provider> qe_, rr_;
};

}  // namespace testing
