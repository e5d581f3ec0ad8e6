#include "rrpipe/templates.hpp"

#include "rrpipe/hash.hpp"
#include "rrpipe/resources.hpp"

namespace rrpipe {

std::string PromptTemplate::hash() const { return stable_hash_hex(text); }

const PromptTemplate& expansion_template() {
  static const PromptTemplate t{"qe-v1", resources::kQeTemplateV1};
  return t;
}

const PromptTemplate& ranking_template() {
  static const PromptTemplate t{"rr-v1", resources::kRrTemplateV1};
  return t;
}

std::map<std::string, std::string> template_hashes() {
  return {{std::string(expansion_template().id), expansion_template().hash()},
          {std::string(ranking_template().id), ranking_template().hash()}};
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(tmpl.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

}  // namespace rrpipe
