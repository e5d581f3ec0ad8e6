#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrpipe/bm25_index.hpp"
#include "rrpipe/corpus.hpp"
#include "rrpipe/llm_gateway.hpp"
#include "rrpipe/metrics.hpp"
#include "rrpipe/stages.hpp"

namespace rrpipe {

inline constexpr std::string_view kOff = "off";

/// One cell of an ablation grid.
struct PipelineConfig {
  std::string qe_variant{kOff};
  ExpansionMode qe_mode = ExpansionMode::off;
  std::string rr_variant{kOff};
  std::size_t k = 10;
  std::size_t window = 20;
  std::size_t stride = 10;
  Bm25Params bm25;
  bool remove_stopwords = true;
  std::size_t initial_n = 100;
  std::uint64_t seed = 0;
  std::size_t passage_token_budget = 300;
  std::size_t max_passages_per_call = 100;
  Gain gain = Gain::linear;
  std::map<std::string, std::string> template_hashes;

  /// Defaults with initial_n = max(100, k) and the current template hashes.
  static PipelineConfig make(std::string qe_variant, ExpansionMode qe_mode, std::string rr_variant, std::size_t k);

  bool qe_enabled() const { return qe_variant != kOff; }
  bool rr_enabled() const { return rr_variant != kOff; }

  /// Throws ValidationError.
  void validate() const;

  /// Canonical JSON (sorted keys) including the toolkit version.
  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);

  /// Stable hash of the canonical JSON; the run-store key.
  std::string hash() const;

  RerankOptions rerank_options() const;
};

/// Cross product of axis values, expanded qe-major, then rr, then k.
struct SweepGrid {
  std::vector<std::string> qe_variants{std::string(kOff)};
  ExpansionMode qe_mode = ExpansionMode::concat;
  std::vector<std::string> rr_variants{std::string(kOff)};
  std::vector<std::size_t> ks{10};
  PipelineConfig base;  // remaining knobs

  static SweepGrid from_json(const nlohmann::json& j);
  static SweepGrid load(const std::filesystem::path& path);
  std::vector<PipelineConfig> expand() const;
};

struct RunContext {
  const Corpus& corpus;
  const Bm25Index& index;
  const Qrels& qrels;
  Gateway& gateway;
};

struct QueryTrace {
  ExpandedQuery expanded;
  RankedList initial;
  RankedList final_list;
  std::optional<RerankOutcome> rerank;
  QueryResult result;
};

/// expand -> BM25 top initial_n -> rerank top k -> evaluate top 10.
QueryTrace run_query_traced(const Query& query, const PipelineConfig& config, const RunContext& ctx);
QueryResult run_query(const Query& query, const PipelineConfig& config, const RunContext& ctx);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::string now() = 0;  // ISO-8601 UTC
};

class SystemClock final : public Clock {
 public:
  std::string now() override;
};

/// Always returns the same instant; makes run stores byte-reproducible.
class FixedClock final : public Clock {
 public:
  explicit FixedClock(std::string instant = "1970-01-01T00:00:00Z") : instant_(std::move(instant)) {}
  std::string now() override { return instant_; }

 private:
  std::string instant_;
};

struct RunRecord {
  PipelineConfig config;
  std::string config_hash;
  std::vector<QueryResult> per_query;
  AggregateRow aggregate;
  std::string started_at;
  std::string finished_at;
  std::string toolkit_version;

  nlohmann::json to_json() const;
  /// Throws ValidationError when the stored aggregate disagrees with the
  /// per-query results.
  static RunRecord from_json(const nlohmann::json& j);
};

/// Runs every query of `queries` under `config`; per-query results keep
/// query order regardless of `concurrency`.
RunRecord run_config(const PipelineConfig& config, const QuerySet& queries, const RunContext& ctx,
                     std::size_t concurrency, Clock& clock);

/// One JSON file per RunRecord named `<config hash>.json`, plus
/// `manifest.json` listing processed configs in grid order.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path record_path(const std::string& config_hash) const;
  void save(const RunRecord& record) const;
  /// nullopt when absent or unreadable.
  std::optional<RunRecord> find(const std::string& config_hash) const;

  struct ManifestEntry {
    std::string config_hash;
    std::string status;  // "ok" or "failed"
    std::string error;
  };
  void write_manifest(const std::vector<ManifestEntry>& entries) const;
  std::vector<ManifestEntry> read_manifest() const;
  /// Records listed as ok in the manifest, in manifest order.
  std::vector<RunRecord> load_all() const;

 private:
  std::filesystem::path dir_;
};

struct SweepOptions {
  std::filesystem::path store_dir;
  bool resume = false;
  std::size_t concurrency = 4;
  std::optional<std::size_t> max_new_configs;  // stop early, as if interrupted
  std::shared_ptr<Clock> clock;                // SystemClock when null
  std::function<void(const std::string&)> log;
};

struct SweepFailure {
  std::string config_hash;
  std::string error;
};

struct SweepOutcome {
  std::vector<RunRecord> records;  // grid order
  std::vector<SweepFailure> failures;
  std::size_t resumed = 0;
  bool interrupted = false;
};

/// Builds one index per distinct analysis setting, runs each config and
/// persists records as they finish. A failing config is recorded and skipped.
SweepOutcome run_sweep(std::span<const PipelineConfig> grid, const QuerySet& queries, const Corpus& corpus,
                       const Qrels& qrels, Gateway& gateway, const SweepOptions& options);

std::string_view toolkit_version();

}  // namespace rrpipe
