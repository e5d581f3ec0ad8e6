#pragma once

#include <map>
#include <string>
#include <string_view>

namespace rrpipe {

struct PromptTemplate {
  std::string_view id;
  std::string_view text;

  std::string hash() const;
};

/// Query expansion prompt; placeholder `{query}`.
const PromptTemplate& expansion_template();
/// Listwise ranking prompt; placeholders `{query}`, `{count}`, `{passages}`.
const PromptTemplate& ranking_template();

/// Template id -> content hash, recorded with every run.
std::map<std::string, std::string> template_hashes();

/// Single-pass substitution of `{name}` placeholders. Substituted values are
/// never rescanned; unknown placeholders are left as-is.
std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values);

}  // namespace rrpipe
