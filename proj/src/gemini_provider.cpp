#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "rrpipe/providers.hpp"

namespace rrpipe {

GeminiProvider::GeminiProvider(std::string api_key, std::string base_url, std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), base_url_(std::move(base_url)), timeout_(timeout) {}

nlohmann::json GeminiProvider::request_body(const ModelVariant& variant, std::string_view prompt) {
  return {
      {"contents", nlohmann::json::array({{{"role", "user"}, {"parts", nlohmann::json::array({{{"text", prompt}}})}}})},
      {"generationConfig",
       {{"thinkingConfig", {{"thinkingBudget", variant.thinking == Thinking::off ? 0 : -1}}}}},
  };
}

ProviderReply GeminiProvider::parse_response(std::string_view body) {
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ProviderError("gemini: response is not JSON");
  ProviderReply reply;
  bool found = false;
  if (auto cands = doc.find("candidates"); cands != doc.end() && cands->is_array() && !cands->empty()) {
    const auto& content = (*cands)[0].value("content", nlohmann::json::object());
    if (auto parts = content.find("parts"); parts != content.end() && parts->is_array()) {
      for (const auto& part : *parts) {
        if (part.value("thought", false)) continue;
        if (auto text = part.find("text"); text != part.end() && text->is_string()) {
          reply.completion += text->get<std::string>();
          found = true;
        }
      }
    }
  }
  if (!found) throw ProviderError("gemini: no text in response");
  if (auto usage = doc.find("usageMetadata"); usage != doc.end() && usage->is_object()) {
    if (usage->contains("promptTokenCount")) reply.input_tokens = usage->at("promptTokenCount").get<std::int64_t>();
    if (usage->contains("candidatesTokenCount") || usage->contains("thoughtsTokenCount")) {
      reply.output_tokens =
          usage->value("candidatesTokenCount", std::int64_t{0}) + usage->value("thoughtsTokenCount", std::int64_t{0});
    }
  }
  return reply;
}

void GeminiProvider::check_status(int status, std::string_view body) {
  if (status >= 200 && status < 300) return;
  std::string detail = "gemini: HTTP " + std::to_string(status) + ": " + std::string(body.substr(0, 200));
  if (status == 401 || status == 403) throw AuthError(detail);
  if (status == 408 || status == 429 || status >= 500) throw TransientProviderError(detail);
  throw ProviderError(detail);
}

ProviderReply GeminiProvider::complete(const ModelVariant& variant, const GenerationRequest& request) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(timeout_);
  httplib::Headers headers{{"x-goog-api-key", api_key_}};
  const auto path = "/v1beta/models/" + variant.model + ":generateContent";
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path, headers, request_body(variant, request.prompt).dump(), "application/json");
  if (!res) throw TransientProviderError("gemini: transport error: " + httplib::to_string(res.error()));
  check_status(res->status, res->body);
  auto reply = parse_response(res->body);
  reply.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return reply;
}

}  // namespace rrpipe
