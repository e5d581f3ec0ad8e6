#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrpipe/bm25_index.hpp"
#include "rrpipe/corpus.hpp"
#include "rrpipe/kernels.hpp"
#include "rrpipe/llm_gateway.hpp"
#include "rrpipe/orchestrator.hpp"
#include "rrpipe/providers.hpp"
#include "rrpipe/report.hpp"
#include "rrpipe/stages.hpp"
#include "rrpipe/synthetic.hpp"

namespace rrpipe::cli {

namespace {

using nlohmann::json;

struct ProviderFlags {
  std::string provider;  // overrides price-table routing when set
  std::string script;
  std::string transcript;
  std::string record_transcript;
  std::size_t max_in_flight = 4;

  void attach(CLI::App& cmd) {
    cmd.add_option("--provider", provider,
                   "Route every variant to one provider: mock:identity, mock:scripted, mock:replay, "
                   "mock:oracle-rerank or gemini");
    cmd.add_option("--script", script, "Script file for mock:scripted");
    cmd.add_option("--transcript", transcript, "Transcript file for mock:replay");
    cmd.add_option("--record-transcript", record_transcript, "Append every completion to this transcript");
    cmd.add_option("--max-in-flight", max_in_flight, "Concurrent requests per provider")->check(CLI::PositiveNumber);
  }

  std::unique_ptr<Gateway> gateway(PriceTable prices, std::shared_ptr<const Qrels> qrels) const {
    GatewayOptions options;
    options.max_in_flight_per_provider = max_in_flight;
    auto gw = std::make_unique<Gateway>(std::move(prices), options);
    ProviderResources res{script, transcript, std::move(qrels)};
    auto wrap = [&](std::shared_ptr<Provider> p) -> std::shared_ptr<Provider> {
      if (record_transcript.empty()) return p;
      return std::make_shared<RecordingProvider>(std::move(p), record_transcript);
    };
    if (!provider.empty()) {
      gw->set_override(wrap(make_provider(provider, res)));
      return gw;
    }
    std::vector<std::string> ids;
    for (const auto& v : gw->prices().variants())
      if (std::find(ids.begin(), ids.end(), v.provider_id) == ids.end()) ids.push_back(v.provider_id);
    for (const auto& id : ids) gw->register_provider(id, wrap(make_provider(id, res)));
    return gw;
  }
};

struct QueryFlags {
  std::string text;
  std::string queries;
  std::string query_id;

  void attach(CLI::App& cmd) {
    auto* t = cmd.add_option("--query-text", text, "Ad-hoc query text");
    auto* q = cmd.add_option("--queries", queries, "Query file (JSONL)");
    auto* id = cmd.add_option("--query-id", query_id, "Query to take from --queries");
    q->needs(id);
    id->needs(q);
    t->excludes(q);
  }

  Query resolve() const {
    if (!queries.empty()) {
      auto set = load_queries(queries);
      const auto* q = set.find(query_id);
      if (q == nullptr) throw ValidationError("query '" + query_id + "' not in " + queries);
      return *q;
    }
    if (text.empty()) throw ValidationError("give --query-text or --queries with --query-id");
    return Query{"adhoc", "", text};
  }
};

struct Dataset {
  Corpus corpus;
  QuerySet queries;
  std::shared_ptr<const Qrels> qrels;
};

Dataset load_dataset(const std::string& corpus, const std::string& queries, const std::string& qrels,
                     std::ostream& err) {
  Dataset d;
  d.corpus = load_corpus(corpus);
  d.queries = load_queries(queries);
  auto loaded = load_qrels(qrels, d.queries);
  for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
  d.qrels = std::make_shared<const Qrels>(std::move(loaded.qrels));
  return d;
}

void write_jsonl(std::ostream& out, const json& row) { out << row.dump() << '\n'; }

json usage_json(const UsageRecord& u) {
  return {{"variant", u.variant_name}, {"stage", std::string(to_string(u.stage))},
          {"query_id", u.query_id},    {"input_tokens", u.input_tokens},
          {"output_tokens", u.output_tokens}, {"latency_s", u.latency_s},
          {"estimated", u.estimated}};
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path);
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError(path + " is not a JSON object");
  return j;
}

std::vector<Candidate> load_candidates(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path);
  std::vector<Candidate> candidates;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("doc_id") || !rec.contains("text") ||
        !rec["doc_id"].is_string() || !rec["text"].is_string())
      throw MalformedRecord(line_no, "candidate needs string fields doc_id and text");
    candidates.push_back({rec["doc_id"].get<std::string>(), rec["text"].get<std::string>()});
  }
  return candidates;
}

// Wall-clock timestamps would make mock runs irreproducible.
std::shared_ptr<Clock> clock_for(const Gateway& gw) {
  if (gw.deterministic()) return std::make_shared<FixedClock>();
  return std::make_shared<SystemClock>();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rrpipe: query expansion, BM25 retrieval and listwise re-ranking harness", "rrpipe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(toolkit_version()));

  // ingest ------------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "Validate a dataset, import a BRIGHT subset, or write the synthetic one");
  std::string in_corpus, in_queries, in_qrels, bright_docs, bright_examples, bright_subset, ingest_out;
  bool synthetic = false;
  ingest->add_option("--corpus", in_corpus, "Corpus file to validate");
  ingest->add_option("--queries", in_queries, "Query file to validate");
  ingest->add_option("--qrels", in_qrels, "Qrels file to validate (needs --queries)");
  ingest->add_option("--bright-docs", bright_docs, "BRIGHT documents JSONL (id, content)");
  ingest->add_option("--bright-examples", bright_examples, "BRIGHT examples JSONL (id, query, gold_ids)");
  ingest->add_option("--subset", bright_subset, "Subset tag for BRIGHT import");
  ingest->add_flag("--synthetic", synthetic, "Write the built-in 50-document synthetic dataset");
  ingest->add_option("--out-dir", ingest_out, "Where imported/synthetic files go");

  // index -------------------------------------------------------------------
  auto* index_cmd = app.add_subcommand("index", "Build a BM25 index snapshot");
  std::string idx_corpus, idx_out, idx_subset;
  Bm25Params idx_params;
  bool keep_stopwords = false;
  index_cmd->add_option("--corpus", idx_corpus, "Corpus file")->required();
  index_cmd->add_option("--out", idx_out, "Snapshot path")->required();
  index_cmd->add_option("--k1", idx_params.k1, "BM25 k1")->capture_default_str();
  index_cmd->add_option("--b", idx_params.b, "BM25 b")->capture_default_str();
  index_cmd->add_option("--subset", idx_subset, "Only index documents of this subset");
  index_cmd->add_flag("--keep-stopwords", keep_stopwords, "Disable stopword removal");

  // search ------------------------------------------------------------------
  auto* search = app.add_subcommand("search", "Print the BM25 ranking for one query");
  std::string search_index;
  std::size_t search_n = 10;
  QueryFlags search_query;
  search->add_option("--index", search_index, "Index snapshot")->required();
  search->add_option("-n,--top", search_n, "Results to print")->check(CLI::PositiveNumber)->capture_default_str();
  search_query.attach(*search);

  // expand ------------------------------------------------------------------
  auto* expand = app.add_subcommand("expand", "Run query expansion for one query");
  std::string exp_prices, exp_variant, exp_mode = "concat";
  QueryFlags exp_query;
  ProviderFlags exp_provider;
  expand->add_option("--prices", exp_prices, "Price table CSV")->required();
  expand->add_option("--variant", exp_variant, "Model variant")->required();
  expand->add_option("--mode", exp_mode, "concat, replace or off")->capture_default_str();
  exp_query.attach(*expand);
  exp_provider.attach(*expand);

  // rerank ------------------------------------------------------------------
  auto* rerank = app.add_subcommand("rerank", "Listwise re-rank a candidate file for one query");
  std::string rr_prices, rr_variant, rr_candidates, rr_qrels;
  std::optional<std::size_t> rr_k;
  RerankOptions rr_opts;
  QueryFlags rr_query;
  ProviderFlags rr_provider;
  rerank->add_option("--prices", rr_prices, "Price table CSV")->required();
  rerank->add_option("--variant", rr_variant, "Model variant")->required();
  rerank->add_option("--candidates", rr_candidates, "JSONL of {doc_id, text}, in initial order")->required();
  rerank->add_option("--k", rr_k, "Re-rank depth (default: all candidates)");
  rerank->add_option("--window", rr_opts.window, "Window size")->capture_default_str();
  rerank->add_option("--stride", rr_opts.stride, "Window stride")->capture_default_str();
  rerank->add_option("--passage-tokens", rr_opts.passage_token_budget, "Per-passage token budget")
      ->capture_default_str();
  rerank->add_option("--qrels", rr_qrels, "Qrels (for mock:oracle-rerank; needs --queries)");
  rr_query.attach(*rerank);
  rr_provider.attach(*rerank);

  // run ---------------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "Execute one pipeline configuration over a query set");
  std::string run_config_path, run_corpus, run_queries, run_qrels, run_prices, run_out;
  std::size_t run_concurrency = 4;
  std::optional<std::uint64_t> run_seed;
  ProviderFlags run_provider;
  run_cmd->add_option("--config", run_config_path, "Pipeline config JSON")->required();
  run_cmd->add_option("--corpus", run_corpus, "Corpus file")->required();
  run_cmd->add_option("--queries", run_queries, "Query file")->required();
  run_cmd->add_option("--qrels", run_qrels, "Qrels file")->required();
  run_cmd->add_option("--prices", run_prices, "Price table CSV")->required();
  run_cmd->add_option("--out-dir", run_out, "Output directory")->required();
  run_cmd->add_option("--concurrency", run_concurrency, "Queries in flight")->capture_default_str();
  run_cmd->add_option("--seed", run_seed, "Seed recorded in the config");
  run_provider.attach(*run_cmd);

  // sweep -------------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "Run every configuration of a grid into a run store");
  std::string sw_grid, sw_corpus, sw_queries, sw_qrels, sw_prices, sw_store;
  bool sw_resume = false;
  std::optional<std::size_t> sw_max;
  std::size_t sw_concurrency = 4;
  std::optional<std::uint64_t> sw_seed;
  ProviderFlags sw_provider;
  sweep->add_option("--grid", sw_grid, "Sweep grid JSON")->required();
  sweep->add_option("--corpus", sw_corpus, "Corpus file")->required();
  sweep->add_option("--queries", sw_queries, "Query file")->required();
  sweep->add_option("--qrels", sw_qrels, "Qrels file")->required();
  sweep->add_option("--prices", sw_prices, "Price table CSV")->required();
  sweep->add_option("--store", sw_store, "Run store directory")->required();
  sweep->add_flag("--resume", sw_resume, "Skip configs already in the store");
  sweep->add_option("--max-configs", sw_max, "Stop after this many newly executed configs");
  sweep->add_option("--concurrency", sw_concurrency, "Queries in flight")->capture_default_str();
  sweep->add_option("--seed", sw_seed, "Seed recorded in every config");
  sw_provider.attach(*sweep);

  // report ------------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Emit CSV and Markdown tables from a run store");
  std::string rep_store, rep_shape, rep_out, rep_qe;
  std::optional<std::size_t> rep_k;
  std::vector<std::string> rep_required;
  report->add_option("--store", rep_store, "Run store directory")->required();
  report->add_option("--shape", rep_shape, "qe_table, rr_table or depth_curve")->required();
  report->add_option("--out-dir", rep_out, "Output directory (default: the store)");
  report->add_option("--k", rep_k, "rr_table depth");
  report->add_option("--qe-variant", rep_qe, "rr_table QE variant");
  report->add_option("--require", rep_required, "Variant that must appear as a row");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (ingest->parsed()) {
      json summary;
      auto emit = [&](const Corpus& c, const QuerySet& q, const Qrels* r, const std::vector<std::string>& warnings) {
        summary["documents"] = c.size();
        summary["queries"] = q.size();
        summary["judged_queries"] = r ? r->query_count() : 0;
        summary["warnings"] = warnings;
        for (const auto& w : warnings) err << "warning: " << w << '\n';
      };
      if (synthetic || !bright_docs.empty()) {
        if (ingest_out.empty()) throw ValidationError("--out-dir is required");
        std::filesystem::path dir(ingest_out);
        Corpus c;
        QuerySet q;
        Qrels r;
        std::vector<std::string> warnings;
        if (synthetic) {
          auto ds = make_desk_dataset();
          c = std::move(ds.corpus), q = std::move(ds.queries), r = std::move(ds.qrels);
        } else {
          if (bright_examples.empty() || bright_subset.empty())
            throw ValidationError("BRIGHT import needs --bright-examples and --subset");
          auto imported = import_bright(bright_docs, bright_examples, bright_subset);
          c = std::move(imported.corpus), q = std::move(imported.queries), r = std::move(imported.qrels);
          warnings = std::move(imported.warnings);
        }
        write_corpus(dir / "corpus.jsonl", c);
        write_queries(dir / "queries.jsonl", q);
        write_qrels(dir / "qrels.txt", r);
        emit(c, q, &r, warnings);
      } else {
        if (in_corpus.empty() && in_queries.empty()) throw ValidationError("nothing to ingest");
        if (!in_qrels.empty() && in_queries.empty()) throw ValidationError("--qrels needs --queries");
        Corpus c = in_corpus.empty() ? Corpus{} : load_corpus(in_corpus);
        QuerySet q = in_queries.empty() ? QuerySet{} : load_queries(in_queries);
        std::optional<QrelsLoad> r;
        if (!in_qrels.empty()) r = load_qrels(in_qrels, q);
        emit(c, q, r ? &r->qrels : nullptr, r ? r->warnings : std::vector<std::string>{});
      }
      out << summary.dump() << '\n';
      return kExitOk;
    }

    if (index_cmd->parsed()) {
      auto corpus = load_corpus(idx_corpus);
      if (!idx_subset.empty()) corpus = filter_subset(corpus, idx_subset);
      auto index = Bm25Index::build(corpus, idx_params, AnalyzerOptions{!keep_stopwords});
      index.save(idx_out);
      out << json{{"documents", index.doc_count()},
                  {"terms", index.term_count()},
                  {"avg_doc_length", index.avg_doc_length()},
                  {"kernels", std::string(kernels::isa_name(kernels::active().isa))}}
                 .dump()
          << '\n';
      return kExitOk;
    }

    if (search->parsed()) {
      auto index = Bm25Index::load(search_index);
      auto query = search_query.resolve();
      auto ranked = index.search_text(query.text, search_n, query.query_id);
      for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
        out << (i + 1) << '\t' << ranked.entries[i].doc_id << '\t' << std::fixed << std::setprecision(6)
            << ranked.entries[i].score << '\n';
      }
      return kExitOk;
    }

    if (expand->parsed()) {
      auto gw = exp_provider.gateway(PriceTable::load(exp_prices), nullptr);
      auto query = exp_query.resolve();
      auto mode = parse_expansion_mode(exp_mode);
      const auto* variant = mode == ExpansionMode::off ? nullptr : &gw->prices().at(exp_variant);
      auto eq = expand_query(query, variant, mode, *gw);
      json j{{"query_id", eq.query_id},
             {"original_text", eq.original_text},
             {"expansion_text", eq.expansion_text},
             {"retrieval_text", eq.retrieval_text},
             {"degraded", eq.degraded},
             {"usage", eq.usage ? usage_json(*eq.usage) : json(nullptr)}};
      if (eq.usage) j["cost_usd"] = cost_of(*eq.usage, gw->prices()).to_string();
      out << j.dump() << '\n';
      return kExitOk;
    }

    if (rerank->parsed()) {
      auto query = rr_query.resolve();
      std::shared_ptr<const Qrels> qrels;
      if (!rr_qrels.empty()) {
        if (rr_query.queries.empty()) throw ValidationError("--qrels needs --queries");
        qrels = std::make_shared<const Qrels>(load_qrels(rr_qrels, load_queries(rr_query.queries)).qrels);
      }
      auto gw = rr_provider.gateway(PriceTable::load(rr_prices), qrels);
      auto candidates = load_candidates(rr_candidates);
      std::size_t k = rr_k.value_or(candidates.size());
      if (k == 0 || k > candidates.size()) throw ValidationError("--k must be between 1 and the candidate count");
      candidates.resize(k);
      auto outcome = rerank_listwise(query, candidates, gw->prices().at(rr_variant), rr_opts, *gw);
      json ids = json::array();
      for (auto i : outcome.permutation.order) ids.push_back(candidates[i].doc_id);
      json usage = json::array();
      for (const auto& u : outcome.usage) usage.push_back(usage_json(u));
      out << json{{"query_id", query.query_id},
                  {"order", outcome.permutation.order},
                  {"doc_ids", ids},
                  {"repaired", outcome.permutation.repaired},
                  {"degraded", outcome.degraded},
                  {"calls", outcome.calls},
                  {"truncated_passages", outcome.truncated_passages},
                  {"cost_usd", cost_of(outcome.usage, gw->prices()).to_string()},
                  {"usage", usage}}
                 .dump()
          << '\n';
      return kExitOk;
    }

    if (run_cmd->parsed()) {
      auto config = PipelineConfig::from_json(read_json(run_config_path));
      if (run_seed) config.seed = *run_seed;
      auto data = load_dataset(run_corpus, run_queries, run_qrels, err);
      auto gw = run_provider.gateway(PriceTable::load(run_prices), data.qrels);
      auto index = Bm25Index::build(data.corpus, config.bm25, AnalyzerOptions{config.remove_stopwords});
      RunContext ctx{data.corpus, index, *data.qrels, *gw};
      auto clock = clock_for(*gw);
      auto record = run_config(config, data.queries, ctx, run_concurrency, *clock);
      std::filesystem::path dir(run_out);
      std::filesystem::create_directories(dir);
      {
        std::ofstream f(dir / "run_record.json", std::ios::binary | std::ios::trunc);
        f << record.to_json().dump(2) << '\n';
        std::ofstream rows(dir / "per_query.jsonl", std::ios::binary | std::ios::trunc);
        for (const auto& r : record.per_query) write_jsonl(rows, to_json(r));
        if (!f || !rows) throw Error("failed writing run outputs to " + dir.string());
      }
      out << json{{"config_hash", record.config_hash}, {"aggregate", to_json(record.aggregate)}}.dump() << '\n';
      return kExitOk;
    }

    if (sweep->parsed()) {
      auto grid = SweepGrid::load(sw_grid);
      if (sw_seed) grid.base.seed = *sw_seed;
      auto configs = grid.expand();
      auto data = load_dataset(sw_corpus, sw_queries, sw_qrels, err);
      auto gw = sw_provider.gateway(PriceTable::load(sw_prices), data.qrels);
      SweepOptions options;
      options.store_dir = sw_store;
      options.resume = sw_resume;
      options.concurrency = sw_concurrency;
      options.max_new_configs = sw_max;
      options.clock = clock_for(*gw);
      options.log = [&err](const std::string& msg) { err << msg << '\n'; };
      auto outcome = run_sweep(configs, data.queries, data.corpus, *data.qrels, *gw, options);
      json failures = json::array();
      for (const auto& f : outcome.failures) failures.push_back({{"config_hash", f.config_hash}, {"error", f.error}});
      out << json{{"configs", configs.size()},
                  {"completed", outcome.records.size()},
                  {"resumed", outcome.resumed},
                  {"executed", outcome.records.size() - outcome.resumed},
                  {"failed", failures},
                  {"interrupted", outcome.interrupted}}
                 .dump()
          << '\n';
      return outcome.failures.empty() ? kExitOk : kExitRuntime;
    }

    if (report->parsed()) {
      RunStore store(rep_store);
      auto records = store.load_all();
      ReportOptions options;
      options.k = rep_k;
      if (!rep_qe.empty()) options.qe_variant = rep_qe;
      options.required_rows = rep_required;
      auto files = emit_report(records, parse_report_shape(rep_shape), rep_out.empty() ? rep_store : rep_out, options);
      out << json{{"csv", files.csv.string()}, {"markdown", files.markdown.string()}}.dump() << '\n';
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace rrpipe::cli
