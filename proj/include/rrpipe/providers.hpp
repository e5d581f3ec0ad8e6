#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "rrpipe/corpus.hpp"
#include "rrpipe/llm_gateway.hpp"

namespace rrpipe {

/// Hex FNV-1a of the exact prompt bytes; the key used by scripts and
/// transcripts.
std::string prompt_hash(std::string_view prompt);

/// "[1] > [2] > ... > [n]".
std::string identity_ranking(std::size_t n);

/// No-op expansion for QE, identity ranking for RR. Latency 0, token counts
/// estimated.
class IdentityProvider final : public Provider {
 public:
  ProviderReply complete(const ModelVariant& variant, const GenerationRequest& request) override;
  bool deterministic() const override { return true; }
  std::string_view name() const override { return "mock:identity"; }
};

/// Fixed completions keyed by prompt hash, optionally per variant. Prompts
/// without an entry fall back to IdentityProvider behaviour.
class ScriptedProvider final : public Provider {
 public:
  ScriptedProvider() = default;
  explicit ScriptedProvider(std::map<std::string, std::string> by_hash) : by_hash_(std::move(by_hash)) {}

  /// JSONL records `{"prompt_hash", "completion"[, "variant"]}`.
  static std::shared_ptr<ScriptedProvider> load(const std::filesystem::path& path);

  void add(std::string hash, std::string completion, std::string variant = {});

  ProviderReply complete(const ModelVariant& variant, const GenerationRequest& request) override;
  bool deterministic() const override { return true; }
  std::string_view name() const override { return "mock:scripted"; }

 private:
  std::map<std::string, std::string> by_hash_;
  std::map<std::pair<std::string, std::string>, std::string> by_variant_hash_;
};

/// Ranks each window by the judged grade of its passages (stable on ties):
/// the ideal permutation for the window. QE requests get a no-op expansion.
/// Test and analysis use only; it reads the answer key.
class OracleRerankProvider final : public Provider {
 public:
  explicit OracleRerankProvider(std::shared_ptr<const Qrels> qrels) : qrels_(std::move(qrels)) {}

  ProviderReply complete(const ModelVariant& variant, const GenerationRequest& request) override;
  bool deterministic() const override { return true; }
  std::string_view name() const override { return "mock:oracle-rerank"; }

 private:
  std::shared_ptr<const Qrels> qrels_;
};

struct TranscriptEntry {
  std::string prompt_hash;
  std::string completion;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double latency_s = 0.0;
};

nlohmann::json to_json(const TranscriptEntry& entry);

/// Serves recorded completions and usage byte-for-byte. A prompt missing from
/// the transcript is a (non-transient) ProviderError.
class ReplayProvider final : public Provider {
 public:
  explicit ReplayProvider(std::map<std::string, TranscriptEntry> entries) : entries_(std::move(entries)) {}
  static std::shared_ptr<ReplayProvider> load(const std::filesystem::path& path);

  ProviderReply complete(const ModelVariant& variant, const GenerationRequest& request) override;
  bool deterministic() const override { return true; }
  std::string_view name() const override { return "mock:replay"; }

 private:
  std::map<std::string, TranscriptEntry> entries_;
};

/// Forwards to `inner` and appends every successful call to a transcript
/// file that ReplayProvider can read back.
class RecordingProvider final : public Provider {
 public:
  RecordingProvider(std::shared_ptr<Provider> inner, const std::filesystem::path& transcript);

  ProviderReply complete(const ModelVariant& variant, const GenerationRequest& request) override;
  bool deterministic() const override { return inner_->deterministic(); }
  std::string_view name() const override { return inner_->name(); }

 private:
  std::shared_ptr<Provider> inner_;
  std::mutex mu_;
  std::ofstream out_;
};

/// Google Generative Language API (`models/{model}:generateContent`).
/// The thinking flag maps to thinkingBudget 0 (off) or -1 (dynamic).
class GeminiProvider final : public Provider {
 public:
  GeminiProvider(std::string api_key, std::string base_url = "https://generativelanguage.googleapis.com",
                 std::chrono::seconds timeout = std::chrono::seconds(300));

  ProviderReply complete(const ModelVariant& variant, const GenerationRequest& request) override;
  bool deterministic() const override { return false; }
  std::string_view name() const override { return "gemini"; }

  static nlohmann::json request_body(const ModelVariant& variant, std::string_view prompt);
  /// Throws ProviderError when no text candidate is present.
  static ProviderReply parse_response(std::string_view body);
  /// Throws the error class matching a non-2xx status.
  static void check_status(int status, std::string_view body);

 private:
  std::string api_key_;
  std::string base_url_;
  std::chrono::seconds timeout_;
};

/// `RRPIPE_API_KEY_<PROVIDER>` with the provider id uppercased and
/// non-alphanumerics replaced by '_'.
std::string api_key_env_var(std::string_view provider_id);

struct ProviderResources {
  std::filesystem::path script;      // mock:scripted (optional)
  std::filesystem::path transcript;  // mock:replay
  std::shared_ptr<const Qrels> qrels;  // mock:oracle-rerank
};

/// Builds a provider from `mock:identity`, `mock:scripted`, `mock:replay`,
/// `mock:oracle-rerank` or `gemini`. Throws ValidationError for unknown specs
/// or missing resources.
std::shared_ptr<Provider> make_provider(std::string_view spec, const ProviderResources& resources);

}  // namespace rrpipe
