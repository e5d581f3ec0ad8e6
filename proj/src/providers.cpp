#include "rrpipe/providers.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <numeric>

#include "io.hpp"
#include "rrpipe/hash.hpp"

namespace rrpipe {

std::string prompt_hash(std::string_view prompt) { return stable_hash_hex(prompt); }

std::string identity_ranking(std::size_t n) {
  std::string out;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i > 1) out += " > ";
    out += '[' + std::to_string(i) + ']';
  }
  return out;
}

ProviderReply IdentityProvider::complete(const ModelVariant&, const GenerationRequest& request) {
  ProviderReply reply;
  reply.latency_s = 0.0;
  if (request.stage == Stage::rr) reply.completion = identity_ranking(request.passage_ids.size());
  return reply;
}

// ---------------------------------------------------------------------------

std::shared_ptr<ScriptedProvider> ScriptedProvider::load(const std::filesystem::path& path) {
  auto provider = std::make_shared<ScriptedProvider>();
  io::for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    if (io::trim(line).empty()) return;
    auto rec = io::parse_record(line_no, line);
    std::string variant;
    if (auto it = rec.find("variant"); it != rec.end() && it->is_string()) variant = it->get<std::string>();
    provider->add(io::string_field(rec, line_no, "prompt_hash"), io::string_field(rec, line_no, "completion", true),
                  std::move(variant));
  });
  return provider;
}

void ScriptedProvider::add(std::string hash, std::string completion, std::string variant) {
  if (variant.empty()) {
    by_hash_[std::move(hash)] = std::move(completion);
  } else {
    by_variant_hash_[{std::move(variant), std::move(hash)}] = std::move(completion);
  }
}

ProviderReply ScriptedProvider::complete(const ModelVariant& variant, const GenerationRequest& request) {
  auto hash = prompt_hash(request.prompt);
  if (auto it = by_variant_hash_.find({variant.name, hash}); it != by_variant_hash_.end()) {
    return ProviderReply{it->second, std::nullopt, std::nullopt, 0.0};
  }
  if (auto it = by_hash_.find(hash); it != by_hash_.end()) {
    return ProviderReply{it->second, std::nullopt, std::nullopt, 0.0};
  }
  return IdentityProvider{}.complete(variant, request);
}

// ---------------------------------------------------------------------------

ProviderReply OracleRerankProvider::complete(const ModelVariant&, const GenerationRequest& request) {
  ProviderReply reply;
  reply.latency_s = 0.0;
  if (request.stage != Stage::rr) return reply;
  const auto& judgments = qrels_->judgments_for(request.query_id);
  auto grade = [&](std::size_t i) {
    auto it = judgments.find(request.passage_ids[i]);
    return it == judgments.end() ? 0 : it->second;
  };
  std::vector<std::size_t> order(request.passage_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grade(a) > grade(b); });
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0) reply.completion += " > ";
    reply.completion += '[' + std::to_string(order[i] + 1) + ']';
  }
  return reply;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const TranscriptEntry& e) {
  return {{"prompt_hash", e.prompt_hash},
          {"completion", e.completion},
          {"input_tokens", e.input_tokens},
          {"output_tokens", e.output_tokens},
          {"latency", e.latency_s}};
}

std::shared_ptr<ReplayProvider> ReplayProvider::load(const std::filesystem::path& path) {
  std::map<std::string, TranscriptEntry> entries;
  io::for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    if (io::trim(line).empty()) return;
    auto rec = io::parse_record(line_no, line);
    TranscriptEntry e;
    e.prompt_hash = io::string_field(rec, line_no, "prompt_hash");
    e.completion = io::string_field(rec, line_no, "completion", true);
    try {
      e.input_tokens = rec.at("input_tokens").get<std::int64_t>();
      e.output_tokens = rec.at("output_tokens").get<std::int64_t>();
      e.latency_s = rec.at("latency").get<double>();
    } catch (const nlohmann::json::exception&) {
      throw MalformedRecord(line_no, "transcript needs numeric input_tokens, output_tokens, latency");
    }
    if (e.input_tokens < 0 || e.output_tokens < 0 || e.latency_s < 0)
      throw MalformedRecord(line_no, "negative usage in transcript");
    entries[e.prompt_hash] = std::move(e);
  });
  return std::make_shared<ReplayProvider>(std::move(entries));
}

ProviderReply ReplayProvider::complete(const ModelVariant&, const GenerationRequest& request) {
  auto hash = prompt_hash(request.prompt);
  auto it = entries_.find(hash);
  if (it == entries_.end()) throw ProviderError("no transcript entry for prompt " + hash);
  const auto& e = it->second;
  return ProviderReply{e.completion, e.input_tokens, e.output_tokens, e.latency_s};
}

RecordingProvider::RecordingProvider(std::shared_ptr<Provider> inner, const std::filesystem::path& transcript)
    : inner_(std::move(inner)), out_(transcript, std::ios::app) {
  if (!out_) throw Error("cannot open transcript " + transcript.string());
}

ProviderReply RecordingProvider::complete(const ModelVariant& variant, const GenerationRequest& request) {
  auto reply = inner_->complete(variant, request);
  TranscriptEntry e{prompt_hash(request.prompt), reply.completion,
                    reply.input_tokens.value_or(estimate_tokens(request.prompt)),
                    reply.output_tokens.value_or(estimate_tokens(reply.completion)), reply.latency_s.value_or(0.0)};
  // Pin the usage the replay will serve.
  reply.input_tokens = e.input_tokens;
  reply.output_tokens = e.output_tokens;
  std::lock_guard lock(mu_);
  out_ << to_json(e).dump() << '\n';
  out_.flush();
  return reply;
}

// ---------------------------------------------------------------------------

std::string api_key_env_var(std::string_view provider_id) {
  std::string var = "RRPIPE_API_KEY_";
  for (char c : provider_id)
    var += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : '_';
  return var;
}

std::shared_ptr<Provider> make_provider(std::string_view spec, const ProviderResources& resources) {
  if (spec == "mock:identity") return std::make_shared<IdentityProvider>();
  if (spec == "mock:scripted") {
    if (resources.script.empty()) return std::make_shared<ScriptedProvider>();
    return ScriptedProvider::load(resources.script);
  }
  if (spec == "mock:replay") {
    if (resources.transcript.empty()) throw ValidationError("mock:replay needs a transcript file");
    return ReplayProvider::load(resources.transcript);
  }
  if (spec == "mock:oracle-rerank") {
    if (!resources.qrels) throw ValidationError("mock:oracle-rerank needs qrels");
    return std::make_shared<OracleRerankProvider>(resources.qrels);
  }
  if (spec == "gemini") {
    auto var = api_key_env_var(spec);
    const char* key = std::getenv(var.c_str());
    if (key == nullptr || *key == '\0') throw AuthError(var + " is not set");
    return std::make_shared<GeminiProvider>(key);
  }
  throw ValidationError("unknown provider '" + std::string(spec) + "'");
}

}  // namespace rrpipe
