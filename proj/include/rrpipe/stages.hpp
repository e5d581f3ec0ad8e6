#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rrpipe/corpus.hpp"
#include "rrpipe/llm_gateway.hpp"

namespace rrpipe {

enum class ExpansionMode { concat, replace, off };

std::string_view to_string(ExpansionMode mode);
ExpansionMode parse_expansion_mode(std::string_view text);

struct ExpandedQuery {
  std::string query_id;
  std::string original_text;
  std::string expansion_text;
  std::string retrieval_text;  // what BM25 sees
  std::optional<UsageRecord> usage;
  bool degraded = false;  // provider failed; fell back to the original text
};

std::string build_expansion_prompt(const Query& query);

/// mode == off (or variant == nullptr) makes no LLM call. If the provider is
/// unavailable after retries the original text is used and `degraded` set;
/// other gateway errors propagate.
ExpandedQuery expand_query(const Query& query, const ModelVariant* variant, ExpansionMode mode, Gateway& gateway);

// ---------------------------------------------------------------------------
// Listwise re-ranking

struct Permutation {
  std::vector<std::size_t> order;  // 0-based candidate indices, best first
  bool repaired = false;

  bool operator==(const Permutation&) const = default;
};

bool is_valid_permutation(std::span<const std::size_t> order, std::size_t k);
Permutation identity_permutation(std::size_t k);

/// Reads bracketed 1-based identifiers ("[3] > [1] > [2]") in order.
/// Out-of-range identifiers are dropped, repeats keep the first occurrence,
/// and missing identifiers are appended in candidate order. Total: always
/// returns a valid permutation of size k.
Permutation parse_permutation(std::string_view response, std::size_t k);

struct Candidate {
  std::string doc_id;
  std::string text;
};

struct RerankOptions {
  std::size_t window = 20;
  std::size_t stride = 10;
  std::size_t max_passages_per_call = 100;
  std::size_t passage_token_budget = 300;  // estimated tokens per passage
};

/// Half-open candidate range ranked by one LLM call.
struct Window {
  std::size_t begin;
  std::size_t end;

  bool operator==(const Window&) const = default;
};

/// Back-to-front windows over k candidates: the first covers the tail, each
/// next one slides `stride` toward the head, the last starts at 0.
std::vector<Window> plan_windows(std::size_t k, std::size_t window, std::size_t stride);

/// Closed form of plan_windows(k, window, stride).size():
/// 1 when k <= window, else ceil((k - window) / stride) + 1.
std::size_t window_count(std::size_t k, std::size_t window, std::size_t stride);

/// Cuts `text` to at most `token_budget` estimated tokens (4 bytes each) on a
/// UTF-8 boundary. Returns true when something was removed.
bool truncate_to_token_budget(std::string& text, std::size_t token_budget);

std::string build_ranking_prompt(std::string_view query_text, std::span<const std::string> passages);

struct RerankOutcome {
  Permutation permutation;
  std::vector<UsageRecord> usage;
  std::size_t calls = 0;
  std::size_t truncated_passages = 0;
  bool degraded = false;  // provider unavailable; identity returned
};

/// Permutes `candidates` (already cut to depth k). k == 1 makes no call.
/// Throws ValidationError for inconsistent window settings; ProviderUnavailable
/// degrades to the identity permutation with repaired = true.
RerankOutcome rerank_listwise(const Query& query, std::span<const Candidate> candidates, const ModelVariant& variant,
                              const RerankOptions& options, Gateway& gateway);

}  // namespace rrpipe
