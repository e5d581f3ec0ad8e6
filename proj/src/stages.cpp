#include "rrpipe/stages.hpp"

#include <cctype>
#include <numeric>

#include "rrpipe/templates.hpp"

namespace rrpipe {

std::string_view to_string(ExpansionMode mode) {
  switch (mode) {
    case ExpansionMode::concat: return "concat";
    case ExpansionMode::replace: return "replace";
    case ExpansionMode::off: return "off";
  }
  return "off";
}

ExpansionMode parse_expansion_mode(std::string_view text) {
  if (text == "concat") return ExpansionMode::concat;
  if (text == "replace") return ExpansionMode::replace;
  if (text == "off") return ExpansionMode::off;
  throw ValidationError("expansion mode must be concat, replace or off; got '" + std::string(text) + "'");
}

std::string build_expansion_prompt(const Query& query) {
  return render(expansion_template().text, {{"query", query.text}});
}

ExpandedQuery expand_query(const Query& query, const ModelVariant* variant, ExpansionMode mode, Gateway& gateway) {
  ExpandedQuery out;
  out.query_id = query.query_id;
  out.original_text = query.text;
  out.retrieval_text = query.text;
  if (mode == ExpansionMode::off || variant == nullptr) return out;

  const auto prompt = build_expansion_prompt(query);
  try {
    auto gen = gateway.generate(*variant, GenerationRequest{prompt, Stage::qe, query.query_id, {}});
    out.expansion_text = std::move(gen.completion);
    out.usage = std::move(gen.usage);
  } catch (const ProviderUnavailable&) {
    out.degraded = true;
    return out;
  }
  if (mode == ExpansionMode::replace) {
    out.retrieval_text = out.expansion_text;
  } else if (!out.expansion_text.empty()) {
    out.retrieval_text = out.original_text + " " + out.expansion_text;
  }
  return out;
}

// ---------------------------------------------------------------------------

bool is_valid_permutation(std::span<const std::size_t> order, std::size_t k) {
  if (order.size() != k) return false;
  std::vector<bool> seen(k, false);
  for (auto i : order) {
    if (i >= k || seen[i]) return false;
    seen[i] = true;
  }
  return true;
}

Permutation identity_permutation(std::size_t k) {
  Permutation p;
  p.order.resize(k);
  std::iota(p.order.begin(), p.order.end(), std::size_t{0});
  return p;
}

Permutation parse_permutation(std::string_view response, std::size_t k) {
  Permutation p;
  std::vector<bool> seen(k, false);
  std::size_t i = 0;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_space = [](char c) { return c == ' ' || c == '\t'; };
  while (i < response.size()) {
    if (response[i] != '[') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < response.size() && is_space(response[j])) ++j;
    std::size_t digits_begin = j;
    std::size_t value = 0;
    bool overflow = false;
    while (j < response.size() && is_digit(response[j])) {
      std::size_t digit = static_cast<std::size_t>(response[j] - '0');
      if (value > (k + 10)) overflow = true;  // already out of range; stop growing
      if (!overflow) value = value * 10 + digit;
      ++j;
    }
    std::size_t digits_end = j;
    while (j < response.size() && is_space(response[j])) ++j;
    if (digits_end == digits_begin || j >= response.size() || response[j] != ']') {
      ++i;
      continue;
    }
    i = j + 1;
    if (overflow || value < 1 || value > k) {
      p.repaired = true;
      continue;
    }
    std::size_t index = value - 1;
    if (seen[index]) {
      p.repaired = true;
      continue;
    }
    seen[index] = true;
    p.order.push_back(index);
  }
  for (std::size_t idx = 0; idx < k; ++idx) {
    if (!seen[idx]) {
      p.order.push_back(idx);
      p.repaired = true;
    }
  }
  return p;
}

std::vector<Window> plan_windows(std::size_t k, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0 || stride > window)
    throw ValidationError("sliding window needs 1 <= stride <= window");
  std::vector<Window> windows;
  if (k == 0) return windows;
  if (k <= window) {
    windows.push_back({0, k});
    return windows;
  }
  std::size_t end = k;
  std::size_t begin = k - window;
  while (true) {
    windows.push_back({begin, end});
    if (begin == 0) break;
    end -= stride;
    begin = begin > stride ? begin - stride : 0;
  }
  return windows;
}

std::size_t window_count(std::size_t k, std::size_t window, std::size_t stride) {
  if (k == 0) return 0;
  if (k <= window) return 1;
  return (k - window + stride - 1) / stride + 1;
}

bool truncate_to_token_budget(std::string& text, std::size_t token_budget) {
  const std::size_t max_bytes = token_budget * 4;
  if (text.size() <= max_bytes) return false;
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  text.resize(cut);
  return true;
}

namespace {

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

}  // namespace

std::string build_ranking_prompt(std::string_view query_text, std::span<const std::string> passages) {
  std::string listing;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    if (i > 0) listing += '\n';
    listing += '[' + std::to_string(i + 1) + "] " + passages[i];
  }
  return render(ranking_template().text,
                {{"query", std::string(query_text)}, {"count", std::to_string(passages.size())}, {"passages", listing}});
}

RerankOutcome rerank_listwise(const Query& query, std::span<const Candidate> candidates, const ModelVariant& variant,
                              const RerankOptions& options, Gateway& gateway) {
  const std::size_t k = candidates.size();
  if (options.window > options.max_passages_per_call)
    throw ValidationError("window " + std::to_string(options.window) + " exceeds the per-call passage cap " +
                          std::to_string(options.max_passages_per_call));
  auto windows = plan_windows(k, options.window, options.stride);

  RerankOutcome outcome;
  outcome.permutation = identity_permutation(k);
  if (k <= 1) return outcome;

  std::vector<std::string> passages;
  passages.reserve(k);
  for (const auto& c : candidates) {
    auto text = collapse_whitespace(c.text);
    if (truncate_to_token_budget(text, options.passage_token_budget)) ++outcome.truncated_passages;
    passages.push_back(std::move(text));
  }

  auto& order = outcome.permutation.order;
  std::vector<std::string> window_texts;
  std::vector<std::string> window_ids;
  for (const auto& w : windows) {
    window_texts.clear();
    window_ids.clear();
    for (std::size_t pos = w.begin; pos < w.end; ++pos) {
      window_texts.push_back(passages[order[pos]]);
      window_ids.push_back(candidates[order[pos]].doc_id);
    }
    const auto prompt = build_ranking_prompt(query.text, window_texts);
    Generation gen;
    try {
      gen = gateway.generate(variant, GenerationRequest{prompt, Stage::rr, query.query_id, window_ids});
    } catch (const ProviderUnavailable&) {
      outcome.permutation = identity_permutation(k);
      outcome.permutation.repaired = true;
      outcome.degraded = true;
      return outcome;
    }
    ++outcome.calls;
    outcome.usage.push_back(std::move(gen.usage));
    auto local = parse_permutation(gen.completion, w.end - w.begin);
    outcome.permutation.repaired = outcome.permutation.repaired || local.repaired;
    std::vector<std::size_t> reordered;
    reordered.reserve(local.order.size());
    for (auto j : local.order) reordered.push_back(order[w.begin + j]);
    std::copy(reordered.begin(), reordered.end(), order.begin() + static_cast<std::ptrdiff_t>(w.begin));
  }
  return outcome;
}

}  // namespace rrpipe
