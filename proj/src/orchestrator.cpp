#include "rrpipe/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "io.hpp"
#include "rrpipe/hash.hpp"
#include "rrpipe/resources.hpp"
#include "rrpipe/templates.hpp"

namespace rrpipe {

std::string_view toolkit_version() { return resources::kToolkitVersion; }

// ---------------------------------------------------------------------------
// PipelineConfig

PipelineConfig PipelineConfig::make(std::string qe_variant, ExpansionMode qe_mode, std::string rr_variant,
                                    std::size_t k) {
  PipelineConfig c;
  c.qe_variant = std::move(qe_variant);
  c.qe_mode = c.qe_variant == kOff ? ExpansionMode::off : qe_mode;
  c.rr_variant = std::move(rr_variant);
  c.k = k;
  c.initial_n = std::max<std::size_t>(100, k);
  c.template_hashes = rrpipe::template_hashes();
  return c;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& why) { throw ValidationError("invalid pipeline config: " + why); };
  if (k == 0) fail("k must be positive");
  if (initial_n < k) fail("initial_n must be >= k");
  if (window == 0 || stride == 0 || stride > window) fail("need 1 <= stride <= window");
  if (window > max_passages_per_call) fail("window exceeds max_passages_per_call");
  if (passage_token_budget == 0) fail("passage_token_budget must be positive");
  if ((qe_variant == kOff) != (qe_mode == ExpansionMode::off))
    fail("qe_variant 'off' and qe_mode 'off' must go together");
  if (qe_variant.empty() || rr_variant.empty()) fail("variant names must be non-empty");
  if (bm25.k1 < 0 || bm25.b < 0 || bm25.b > 1) fail("BM25 parameters out of range");
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"qe_variant", qe_variant},
          {"qe_mode", std::string(to_string(qe_mode))},
          {"rr_variant", rr_variant},
          {"k", k},
          {"window", window},
          {"stride", stride},
          {"bm25", {{"k1", bm25.k1}, {"b", bm25.b}}},
          {"remove_stopwords", remove_stopwords},
          {"initial_n", initial_n},
          {"seed", seed},
          {"passage_token_budget", passage_token_budget},
          {"max_passages_per_call", max_passages_per_call},
          {"gain", gain == Gain::linear ? "linear" : "exponential"},
          {"template_hashes", template_hashes},
          {"toolkit_version", std::string(toolkit_version())}};
}

namespace {

void apply_knobs(PipelineConfig& c, const nlohmann::json& j) {
  c.window = j.value("window", c.window);
  c.stride = j.value("stride", c.stride);
  if (auto it = j.find("bm25"); it != j.end()) {
    c.bm25.k1 = it->value("k1", c.bm25.k1);
    c.bm25.b = it->value("b", c.bm25.b);
  }
  c.remove_stopwords = j.value("remove_stopwords", c.remove_stopwords);
  c.seed = j.value("seed", c.seed);
  c.passage_token_budget = j.value("passage_token_budget", c.passage_token_budget);
  c.max_passages_per_call = j.value("max_passages_per_call", c.max_passages_per_call);
  if (auto it = j.find("gain"); it != j.end()) {
    auto g = it->get<std::string>();
    if (g != "linear" && g != "exponential") throw ValidationError("gain must be linear or exponential");
    c.gain = g == "linear" ? Gain::linear : Gain::exponential;
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  try {
    auto c = make(j.value("qe_variant", std::string(kOff)),
                  parse_expansion_mode(j.value("qe_mode", std::string("concat"))),
                  j.value("rr_variant", std::string(kOff)), j.value("k", std::size_t{10}));
    if (c.qe_variant != kOff && j.value("qe_mode", std::string("concat")) == "off")
      throw ValidationError("qe_mode 'off' requires qe_variant 'off'");
    apply_knobs(c, j);
    if (auto it = j.find("initial_n"); it != j.end() && !it->is_null()) c.initial_n = it->get<std::size_t>();
    if (auto it = j.find("template_hashes"); it != j.end())
      c.template_hashes = it->get<std::map<std::string, std::string>>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid pipeline config: ") + e.what());
  }
}

std::string PipelineConfig::hash() const { return stable_hash_hex(to_json().dump()); }

RerankOptions PipelineConfig::rerank_options() const {
  return RerankOptions{window, stride, max_passages_per_call, passage_token_budget};
}

SweepGrid SweepGrid::from_json(const nlohmann::json& j) {
  try {
    static const std::set<std::string> known{"qe_variants", "qe_mode", "rr_variants", "k", "window", "stride",
                                             "bm25", "remove_stopwords", "seed", "passage_token_budget",
                                             "max_passages_per_call", "gain", "initial_n"};
    if (!j.is_object()) throw ValidationError("sweep grid must be a JSON object");
    for (const auto& [key, value] : j.items())
      if (!known.count(key)) throw ValidationError("sweep grid: unknown key '" + key + "'");
    SweepGrid g;
    if (auto it = j.find("qe_variants"); it != j.end()) g.qe_variants = it->get<std::vector<std::string>>();
    g.qe_mode = parse_expansion_mode(j.value("qe_mode", std::string("concat")));
    if (g.qe_mode == ExpansionMode::off) throw ValidationError("grid qe_mode must be concat or replace");
    if (auto it = j.find("rr_variants"); it != j.end()) g.rr_variants = it->get<std::vector<std::string>>();
    if (auto it = j.find("k"); it != j.end()) {
      g.ks = it->is_array() ? it->get<std::vector<std::size_t>>() : std::vector<std::size_t>{it->get<std::size_t>()};
    }
    apply_knobs(g.base, j);
    if (auto it = j.find("initial_n"); it != j.end() && !it->is_null()) g.base.initial_n = it->get<std::size_t>();
    else g.base.initial_n = 0;  // resolved per k
    if (g.qe_variants.empty() || g.rr_variants.empty() || g.ks.empty())
      throw ValidationError("sweep grid axes must be non-empty");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid sweep grid: ") + e.what());
  }
}

SweepGrid SweepGrid::load(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(io::read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("sweep grid " + path.string() + " is not a JSON object");
  return from_json(j);
}

std::vector<PipelineConfig> SweepGrid::expand() const {
  std::vector<PipelineConfig> out;
  for (const auto& qe : qe_variants) {
    for (const auto& rr : rr_variants) {
      for (auto k : ks) {
        auto c = PipelineConfig::make(qe, qe_mode, rr, k);
        c.window = base.window;
        c.stride = base.stride;
        c.bm25 = base.bm25;
        c.remove_stopwords = base.remove_stopwords;
        c.seed = base.seed;
        c.passage_token_budget = base.passage_token_budget;
        c.max_passages_per_call = base.max_passages_per_call;
        c.gain = base.gain;
        if (base.initial_n != 0) c.initial_n = base.initial_n;
        c.validate();
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-query execution

QueryTrace run_query_traced(const Query& query, const PipelineConfig& config, const RunContext& ctx) {
  const auto& prices = ctx.gateway.prices();
  QueryTrace trace;
  std::vector<UsageRecord> usage;

  const ModelVariant* qe_variant = config.qe_enabled() ? &prices.at(config.qe_variant) : nullptr;
  trace.expanded = expand_query(query, qe_variant, config.qe_mode, ctx.gateway);
  if (trace.expanded.usage) usage.push_back(*trace.expanded.usage);

  trace.initial = ctx.index.search_text(trace.expanded.retrieval_text, config.initial_n, query.query_id);
  const std::size_t depth = std::min(config.k, trace.initial.entries.size());
  trace.final_list = trace.initial;
  trace.final_list.entries.resize(depth);

  if (config.rr_enabled() && depth > 0) {
    const auto& rr_variant = prices.at(config.rr_variant);
    std::vector<Candidate> candidates;
    candidates.reserve(depth);
    for (std::size_t i = 0; i < depth; ++i) {
      const auto& id = trace.initial.entries[i].doc_id;
      const auto* doc = ctx.corpus.find(id);
      if (doc == nullptr) throw ValidationError("index and corpus disagree: unknown doc_id " + id);
      candidates.push_back({id, doc->text});
    }
    auto outcome = rerank_listwise(query, candidates, rr_variant, config.rerank_options(), ctx.gateway);
    for (std::size_t i = 0; i < depth; ++i)
      trace.final_list.entries[i] = trace.initial.entries[outcome.permutation.order[i]];
    trace.final_list.provenance = Provenance::reranked;
    usage.insert(usage.end(), outcome.usage.begin(), outcome.usage.end());
    trace.rerank = std::move(outcome);
  }

  auto& r = trace.result;
  r.query_id = query.query_id;
  r.subset = query.subset;
  const auto& judgments = ctx.qrels.judgments_for(query.query_id);
  r.excluded = !has_relevant(judgments);
  auto ranked = trace.final_list.doc_ids();
  r.ndcg_at_10 = ndcg_at_k(ranked, judgments, 10, config.gain);
  r.recall_at_10 = recall_at_k(ranked, judgments, 10).value_or(0.0);
  r.degraded = trace.expanded.degraded || (trace.rerank && trace.rerank->degraded);
  r.cost = cost_of(usage, prices);
  for (const auto& u : usage) {
    r.latency_s += u.latency_s;
    if (u.stage == Stage::qe) {
      r.qe_input_tokens += u.input_tokens;
      r.qe_output_tokens += u.output_tokens;
    } else {
      r.rr_input_tokens += u.input_tokens;
      r.rr_output_tokens += u.output_tokens;
      ++r.rr_calls;
    }
  }
  return trace;
}

QueryResult run_query(const Query& query, const PipelineConfig& config, const RunContext& ctx) {
  return run_query_traced(query, config, ctx).result;
}

std::string SystemClock::now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Run records

nlohmann::json RunRecord::to_json() const {
  auto rows = nlohmann::json::array();
  for (const auto& r : per_query) rows.push_back(rrpipe::to_json(r));
  return {{"config", config.to_json()},
          {"config_hash", config_hash},
          {"toolkit_version", toolkit_version},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"aggregate", rrpipe::to_json(aggregate)},
          {"per_query", rows}};
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
  RunRecord rec;
  try {
    rec.config = PipelineConfig::from_json(j.at("config"));
    rec.config_hash = j.at("config_hash").get<std::string>();
    rec.toolkit_version = j.value("toolkit_version", std::string{});
    rec.started_at = j.value("started_at", std::string{});
    rec.finished_at = j.value("finished_at", std::string{});
    rec.aggregate = aggregate_from_json(j.at("aggregate"));
    for (const auto& row : j.at("per_query")) rec.per_query.push_back(query_result_from_json(row));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed run record: ") + e.what());
  }
  if (rrpipe::aggregate(rec.per_query) != rec.aggregate)
    throw ValidationError("run record " + rec.config_hash + ": aggregate does not match per-query results");
  return rec;
}

RunRecord run_config(const PipelineConfig& config, const QuerySet& queries, const RunContext& ctx,
                     std::size_t concurrency, Clock& clock) {
  config.validate();
  RunRecord rec;
  rec.config = config;
  rec.config_hash = config.hash();
  rec.toolkit_version = std::string(toolkit_version());
  rec.started_at = clock.now();
  rec.per_query.resize(queries.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      try {
        rec.per_query[i] = run_query(queries[i], config, ctx);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next = queries.size();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(concurrency, 1, std::max<std::size_t>(queries.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  rec.aggregate = aggregate(rec.per_query);
  rec.finished_at = clock.now();
  return rec;
}

// ---------------------------------------------------------------------------
// Run store

std::filesystem::path RunStore::record_path(const std::string& config_hash) const {
  return dir_ / (config_hash + ".json");
}

void RunStore::save(const RunRecord& record) const {
  io::write_file_atomic(record_path(record.config_hash), record.to_json().dump(2) + "\n");
}

std::optional<RunRecord> RunStore::find(const std::string& config_hash) const {
  auto path = record_path(config_hash);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(io::read_file(path));
    auto rec = RunRecord::from_json(j);
    if (rec.config_hash != config_hash || rec.config.hash() != config_hash) return std::nullopt;
    return rec;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void RunStore::write_manifest(const std::vector<ManifestEntry>& entries) const {
  auto rows = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json row{{"config_hash", e.config_hash}, {"file", e.config_hash + ".json"}, {"status", e.status}};
    if (!e.error.empty()) row["error"] = e.error;
    rows.push_back(std::move(row));
  }
  nlohmann::json manifest{{"toolkit_version", std::string(toolkit_version())}, {"entries", rows}};
  io::write_file_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<RunStore::ManifestEntry> RunStore::read_manifest() const {
  auto path = dir_ / "manifest.json";
  auto j = nlohmann::json::parse(io::read_file(path), nullptr, false);
  if (j.is_discarded() || !j.contains("entries")) throw ValidationError("malformed manifest " + path.string());
  std::vector<ManifestEntry> entries;
  for (const auto& row : j.at("entries"))
    entries.push_back({row.at("config_hash").get<std::string>(), row.at("status").get<std::string>(),
                       row.value("error", std::string{})});
  return entries;
}

std::vector<RunRecord> RunStore::load_all() const {
  std::vector<RunRecord> records;
  for (const auto& e : read_manifest()) {
    if (e.status != "ok") continue;
    auto j = nlohmann::json::parse(io::read_file(record_path(e.config_hash)), nullptr, false);
    if (j.is_discarded()) throw ValidationError("unreadable run record " + e.config_hash);
    records.push_back(RunRecord::from_json(j));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Sweeps

SweepOutcome run_sweep(std::span<const PipelineConfig> grid, const QuerySet& queries, const Corpus& corpus,
                       const Qrels& qrels, Gateway& gateway, const SweepOptions& options) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  for (const auto& c : grid) {
    c.validate();
    if (c.qe_enabled()) gateway.prices().at(c.qe_variant);
    if (c.rr_enabled()) gateway.prices().at(c.rr_variant);
  }
  auto clock = options.clock ? options.clock : std::make_shared<SystemClock>();
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  RunStore store(options.store_dir);
  std::filesystem::create_directories(options.store_dir);

  struct IndexKey {
    Bm25Params params;
    bool remove_stopwords;
    bool operator==(const IndexKey&) const = default;
  };
  std::vector<std::pair<IndexKey, std::unique_ptr<Bm25Index>>> indexes;
  auto index_for = [&](const PipelineConfig& c) -> const Bm25Index& {
    IndexKey key{c.bm25, c.remove_stopwords};
    for (auto& [k, idx] : indexes)
      if (k == key) return *idx;
    log("building index (k1=" + std::to_string(c.bm25.k1) + ", b=" + std::to_string(c.bm25.b) + ")");
    indexes.emplace_back(key, std::make_unique<Bm25Index>(
                                  Bm25Index::build(corpus, c.bm25, AnalyzerOptions{c.remove_stopwords})));
    return *indexes.back().second;
  };

  SweepOutcome outcome;
  std::vector<RunStore::ManifestEntry> manifest;
  std::size_t executed = 0;
  for (const auto& config : grid) {
    const auto hash = config.hash();
    if (options.resume) {
      if (auto existing = store.find(hash)) {
        ++outcome.resumed;
        manifest.push_back({hash, "ok", {}});
        outcome.records.push_back(std::move(*existing));
        log("resumed " + hash);
        continue;
      }
    }
    if (options.max_new_configs && executed >= *options.max_new_configs) {
      outcome.interrupted = true;
      break;
    }
    ++executed;
    try {
      RunContext ctx{corpus, index_for(config), qrels, gateway};
      auto record = run_config(config, queries, ctx, options.concurrency, *clock);
      store.save(record);
      manifest.push_back({hash, "ok", {}});
      outcome.records.push_back(std::move(record));
      log("completed " + hash);
    } catch (const std::exception& e) {
      manifest.push_back({hash, "failed", e.what()});
      outcome.failures.push_back({hash, e.what()});
      log("failed " + hash + ": " + e.what());
    }
    store.write_manifest(manifest);
  }
  store.write_manifest(manifest);
  return outcome;
}

}  // namespace rrpipe
