#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rrpipe/error.hpp"
#include "rrpipe/money.hpp"

namespace rrpipe {

enum class Thinking { off, dynamic };
enum class Stage { qe, rr };

std::string_view to_string(Thinking thinking);
std::string_view to_string(Stage stage);
Thinking parse_thinking(std::string_view text);

struct ModelVariant {
  std::string name;
  std::string provider_id;
  Thinking thinking = Thinking::off;
  TokenPrice price_in;   // per 1e6 input tokens
  TokenPrice price_out;  // per 1e6 output tokens
  std::int64_t max_context_tokens = 0;
  std::string model;  // provider-side model id; defaults to `name`
};

/// Named model variants loaded from a CSV price table with header
/// `name,provider_id,thinking,price_in,price_out,max_context_tokens[,model]`.
class PriceTable {
 public:
  PriceTable() = default;
  explicit PriceTable(std::vector<ModelVariant> variants);

  static PriceTable load(const std::filesystem::path& path);
  static PriceTable parse(std::string_view csv);

  const ModelVariant* find(std::string_view name) const;
  /// Throws UnknownVariant.
  const ModelVariant& at(std::string_view name) const;
  std::span<const ModelVariant> variants() const { return variants_; }

 private:
  std::vector<ModelVariant> variants_;
};

struct UsageRecord {
  std::string variant_name;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;  // includes thinking tokens
  double latency_s = 0.0;
  Stage stage = Stage::qe;
  std::string query_id;
  bool estimated = false;  // token counts came from estimate_tokens

  bool operator==(const UsageRecord&) const = default;
};

/// ceil(byte_length / 4).
std::int64_t estimate_tokens(std::string_view text);

/// Throws UnknownVariant.
Money cost_of(const UsageRecord& usage, const PriceTable& table);
Money cost_of(std::span<const UsageRecord> usage, const PriceTable& table);

/// Append-only, safe for concurrent writers.
class UsageCollector {
 public:
  void append(UsageRecord record);
  std::vector<UsageRecord> snapshot() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<UsageRecord> records_;
};

struct GenerationRequest {
  std::string_view prompt;
  Stage stage = Stage::qe;
  std::string_view query_id;
  // Doc ids of the passages in a re-ranking prompt, in prompt order. Real
  // providers ignore this; the oracle and identity mocks need it.
  std::span<const std::string> passage_ids;
};

struct ProviderReply {
  std::string completion;
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
  std::optional<double> latency_s;  // gateway measures wall time when absent
};

/// A text-generation backend. Implementations must tolerate concurrent calls
/// and signal failures with TransientProviderError (retryable),
/// ProviderError or AuthError.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderReply complete(const ModelVariant& variant, const GenerationRequest& request) = 0;
  /// Deterministic providers are never retried.
  virtual bool deterministic() const = 0;
  virtual std::string_view name() const = 0;
};

struct RetryPolicy {
  int max_retries = 3;
  std::vector<std::chrono::milliseconds> backoff{std::chrono::seconds(1), std::chrono::seconds(2),
                                                 std::chrono::seconds(4)};

  std::chrono::milliseconds delay_before_retry(int retry) const;  // retry is 1-based
};

struct GatewayOptions {
  RetryPolicy retry;
  std::size_t max_in_flight_per_provider = 4;
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

struct Generation {
  std::string completion;
  UsageRecord usage;
};

class Gateway {
 public:
  explicit Gateway(PriceTable prices, GatewayOptions options = {});
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Routes variants whose provider_id equals `provider_id`.
  void register_provider(const std::string& provider_id, std::shared_ptr<Provider> provider);
  /// Routes every variant to `provider`, ignoring provider ids.
  void set_override(std::shared_ptr<Provider> provider);

  /// Checks the context limit, calls the provider with retries and returns
  /// the completion plus a populated UsageRecord (also appended to ledger()).
  /// Throws ContextOverflow, AuthError, ProviderUnavailable.
  Generation generate(const ModelVariant& variant, const GenerationRequest& request);

  const PriceTable& prices() const { return prices_; }
  UsageCollector& ledger() { return ledger_; }

  /// True when every provider that can be reached is deterministic.
  bool deterministic() const;

 private:
  struct Slot {
    std::shared_ptr<Provider> provider;
    std::mutex mu;
    std::condition_variable cv;
    std::size_t in_flight = 0;
  };
  Slot& route(const ModelVariant& variant);

  PriceTable prices_;
  GatewayOptions options_;
  std::map<std::string, std::unique_ptr<Slot>, std::less<>> slots_;
  std::unique_ptr<Slot> override_;
  UsageCollector ledger_;
};

}  // namespace rrpipe
