#include "rrpipe/llm_gateway.hpp"

#include <charconv>
#include <thread>
#include <unordered_set>

#include "io.hpp"

namespace rrpipe {

std::string_view to_string(Thinking thinking) { return thinking == Thinking::off ? "off" : "dynamic"; }

std::string_view to_string(Stage stage) { return stage == Stage::qe ? "qe" : "rr"; }

Thinking parse_thinking(std::string_view text) {
  if (text == "off") return Thinking::off;
  if (text == "dynamic") return Thinking::dynamic;
  throw ValidationError("thinking must be 'off' or 'dynamic', got '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Price table

PriceTable::PriceTable(std::vector<ModelVariant> variants) : variants_(std::move(variants)) {
  std::unordered_set<std::string> names;
  for (const auto& v : variants_) {
    if (v.name.empty()) throw ValidationError("price table: variant with empty name");
    if (!names.insert(v.name).second) throw ValidationError("price table: duplicate variant " + v.name);
    if (v.max_context_tokens <= 0)
      throw ValidationError("price table: max_context_tokens must be positive for " + v.name);
  }
}

PriceTable PriceTable::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

PriceTable PriceTable::parse(std::string_view csv) {
  std::vector<ModelVariant> variants;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!csv.empty()) {
    auto nl = csv.find('\n');
    auto line = io::trim(csv.substr(0, nl));
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      fields.push_back(io::trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!header_seen) {
      if (fields.size() < 6 || fields[0] != "name" || fields[1] != "provider_id" || fields[2] != "thinking" ||
          fields[3] != "price_in" || fields[4] != "price_out" || fields[5] != "max_context_tokens")
        throw MalformedRecord(line_no, "price table header must be "
                                       "'name,provider_id,thinking,price_in,price_out,max_context_tokens[,model]'");
      header_seen = true;
      continue;
    }
    if (fields.size() != 6 && fields.size() != 7) throw MalformedRecord(line_no, "expected 6 or 7 fields");
    ModelVariant v;
    v.name = std::string(fields[0]);
    v.provider_id = std::string(fields[1]);
    try {
      v.thinking = parse_thinking(fields[2]);
      v.price_in = TokenPrice::parse(fields[3]);
      v.price_out = TokenPrice::parse(fields[4]);
    } catch (const ValidationError& e) {
      throw MalformedRecord(line_no, e.what());
    }
    auto ctx = fields[5];
    auto [ptr, ec] = std::from_chars(ctx.data(), ctx.data() + ctx.size(), v.max_context_tokens);
    if (ec != std::errc() || ptr != ctx.data() + ctx.size() || v.max_context_tokens <= 0)
      throw MalformedRecord(line_no, "max_context_tokens must be a positive integer");
    v.model = fields.size() == 7 && !fields[6].empty() ? std::string(fields[6]) : v.name;
    if (v.name.empty() || v.provider_id.empty()) throw MalformedRecord(line_no, "empty name or provider_id");
    variants.push_back(std::move(v));
  }
  return PriceTable(std::move(variants));
}

const ModelVariant* PriceTable::find(std::string_view name) const {
  for (const auto& v : variants_)
    if (v.name == name) return &v;
  return nullptr;
}

const ModelVariant& PriceTable::at(std::string_view name) const {
  const auto* v = find(name);
  if (v == nullptr) throw UnknownVariant(std::string(name));
  return *v;
}

// ---------------------------------------------------------------------------
// Accounting

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

Money cost_of(const UsageRecord& usage, const PriceTable& table) {
  const auto& v = table.at(usage.variant_name);
  return v.price_in.cost(usage.input_tokens) + v.price_out.cost(usage.output_tokens);
}

Money cost_of(std::span<const UsageRecord> usage, const PriceTable& table) {
  Money total;
  for (const auto& u : usage) total += cost_of(u, table);
  return total;
}

void UsageCollector::append(UsageRecord record) {
  std::lock_guard lock(mu_);
  records_.push_back(std::move(record));
}

std::vector<UsageRecord> UsageCollector::snapshot() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t UsageCollector::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

// ---------------------------------------------------------------------------
// Gateway

std::chrono::milliseconds RetryPolicy::delay_before_retry(int retry) const {
  if (backoff.empty()) return std::chrono::milliseconds(0);
  std::size_t i = static_cast<std::size_t>(std::max(retry, 1) - 1);
  if (i < backoff.size()) return backoff[i];
  // Keep doubling past the configured schedule.
  auto delay = backoff.back();
  for (std::size_t k = backoff.size(); k <= i; ++k) delay *= 2;
  return delay;
}

Gateway::Gateway(PriceTable prices, GatewayOptions options)
    : prices_(std::move(prices)), options_(std::move(options)) {
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (options_.max_in_flight_per_provider == 0) options_.max_in_flight_per_provider = 1;
}

void Gateway::register_provider(const std::string& provider_id, std::shared_ptr<Provider> provider) {
  auto slot = std::make_unique<Slot>();
  slot->provider = std::move(provider);
  slots_[provider_id] = std::move(slot);
}

void Gateway::set_override(std::shared_ptr<Provider> provider) {
  override_ = std::make_unique<Slot>();
  override_->provider = std::move(provider);
}

bool Gateway::deterministic() const {
  if (override_) return override_->provider->deterministic();
  for (const auto& [id, slot] : slots_)
    if (!slot->provider->deterministic()) return false;
  return true;
}

Gateway::Slot& Gateway::route(const ModelVariant& variant) {
  if (override_) return *override_;
  auto it = slots_.find(variant.provider_id);
  if (it == slots_.end())
    throw ValidationError("no provider registered for provider_id '" + variant.provider_id + "' (variant " +
                          variant.name + ")");
  return *it->second;
}

Generation Gateway::generate(const ModelVariant& variant, const GenerationRequest& request) {
  const std::int64_t prompt_tokens = estimate_tokens(request.prompt);
  if (prompt_tokens > variant.max_context_tokens) throw ContextOverflow(prompt_tokens, variant.max_context_tokens);

  Slot& slot = route(variant);
  {
    std::unique_lock lock(slot.mu);
    slot.cv.wait(lock, [&] { return slot.in_flight < options_.max_in_flight_per_provider; });
    ++slot.in_flight;
  }
  struct Release {
    Slot& s;
    ~Release() {
      {
        std::lock_guard lock(s.mu);
        --s.in_flight;
      }
      s.cv.notify_one();
    }
  } release{slot};

  const bool may_retry = !slot.provider->deterministic();
  const auto started = std::chrono::steady_clock::now();
  ProviderReply reply;
  for (int attempt = 0;; ++attempt) {
    try {
      reply = slot.provider->complete(variant, request);
      break;
    } catch (const AuthError&) {
      throw;
    } catch (const TransientProviderError& e) {
      if (!may_retry || attempt >= options_.retry.max_retries)
        throw ProviderUnavailable(std::string(slot.provider->name()) + ": " + e.what() + " (after " +
                                  std::to_string(attempt + 1) + " attempts)");
      options_.sleep(options_.retry.delay_before_retry(attempt + 1));
    } catch (const ProviderError& e) {
      throw ProviderUnavailable(std::string(slot.provider->name()) + ": " + e.what());
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  Generation out;
  out.usage.variant_name = variant.name;
  out.usage.stage = request.stage;
  out.usage.query_id = std::string(request.query_id);
  out.usage.latency_s = reply.latency_s.value_or(wall);
  out.usage.estimated = !reply.input_tokens || !reply.output_tokens;
  out.usage.input_tokens = reply.input_tokens.value_or(prompt_tokens);
  out.usage.output_tokens = reply.output_tokens.value_or(estimate_tokens(reply.completion));
  if (out.usage.input_tokens < 0 || out.usage.output_tokens < 0 || out.usage.latency_s < 0)
    throw ProviderUnavailable(std::string(slot.provider->name()) + ": negative usage reported");
  out.completion = std::move(reply.completion);
  ledger_.append(out.usage);
  return out;
}

}  // namespace rrpipe
