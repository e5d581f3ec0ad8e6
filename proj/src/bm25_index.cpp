#include "rrpipe/bm25_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "io.hpp"
#include "rrpipe/error.hpp"
#include "rrpipe/kernels.hpp"

namespace rrpipe {

namespace {

static_assert(std::endian::native == std::endian::little,
              "index snapshots are written little-endian");

bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ostream& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
void put_vector(std::ostream& out, const std::vector<T>& v) {
  put<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw SnapshotError("truncated index snapshot");
  return value;
}

std::string get_string(std::istream& in) {
  auto size = get<std::uint32_t>(in);
  std::string s(size, '\0');
  if (size > 0 && !in.read(s.data(), size)) throw SnapshotError("truncated index snapshot");
  return s;
}

template <typename T>
std::vector<T> get_vector(std::istream& in, std::uint64_t max_size) {
  auto size = get<std::uint64_t>(in);
  if (size > max_size) throw SnapshotError("corrupt index snapshot: implausible array length");
  std::vector<T> v(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(size * sizeof(T))))
    throw SnapshotError("truncated index snapshot");
  return v;
}

}  // namespace

std::vector<std::string> RankedList::doc_ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.doc_id);
  return ids;
}

double bm25_idf(std::size_t doc_count, std::size_t doc_freq) {
  const double n = static_cast<double>(doc_count);
  const double df = static_cast<double>(doc_freq);
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

Bm25Index Bm25Index::build(const Corpus& corpus, Bm25Params params, AnalyzerOptions analyzer) {
  if (corpus.empty()) throw EmptyCorpus();
  if (params.k1 < 0.0 || params.b < 0.0 || params.b > 1.0)
    throw ValidationError("BM25 parameters out of range (k1 >= 0, 0 <= b <= 1)");
  Bm25Index index;
  index.params_ = params;
  index.analyzer_ = analyzer;
  index.doc_ids_.reserve(corpus.size());
  index.doc_lengths_.reserve(corpus.size());

  std::unordered_map<std::uint32_t, std::uint32_t> tf;
  for (std::uint32_t ordinal = 0; ordinal < corpus.size(); ++ordinal) {
    const auto& doc = corpus[ordinal];
    auto tokens = tokenize(doc.text, analyzer);
    index.doc_ids_.push_back(doc.doc_id);
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    tf.clear();
    std::vector<std::uint32_t> first_seen;
    for (auto& token : tokens) {
      auto [it, inserted] = index.term_ids_.try_emplace(token, static_cast<std::uint32_t>(index.terms_.size()));
      if (inserted) {
        index.terms_.push_back(std::move(token));
        index.postings_.emplace_back();
      }
      if (tf[it->second]++ == 0) first_seen.push_back(it->second);
    }
    // Ordinals are visited in increasing order, so appends keep lists sorted.
    for (auto term : first_seen) {
      index.postings_[term].docs.push_back(ordinal);
      index.postings_[term].freqs.push_back(tf[term]);
    }
  }
  index.finalize();
  return index;
}

void Bm25Index::finalize() {
  std::uint64_t total = 0;
  for (auto len : doc_lengths_) total += len;
  avg_doc_length_ = static_cast<double>(total) / static_cast<double>(doc_lengths_.size());
  length_norms_.assign(doc_lengths_.size(), 0.0);
  // An all-stopword corpus has mean length 0; any positive constant keeps
  // the norm finite and no document can match a query anyway.
  const double avg = avg_doc_length_ > 0.0 ? avg_doc_length_ : 1.0;
  kernels::active().length_norms(doc_lengths_, params_.k1, params_.b, avg, length_norms_);
  if (term_ids_.empty()) {
    for (std::uint32_t i = 0; i < terms_.size(); ++i) term_ids_.emplace(terms_[i], i);
  }
}

const PostingList* Bm25Index::postings(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  return it == term_ids_.end() ? nullptr : &postings_[it->second];
}

std::size_t Bm25Index::doc_freq(std::string_view term) const {
  const auto* list = postings(term);
  return list == nullptr ? 0 : list->docs.size();
}

double Bm25Index::idf(std::string_view term) const { return bm25_idf(doc_count(), doc_freq(term)); }

RankedList Bm25Index::search(std::span<const std::string> query_terms, std::size_t n,
                             std::string query_id) const {
  RankedList result;
  result.query_id = std::move(query_id);
  result.provenance = Provenance::initial_retrieval;
  if (n == 0) return result;

  const auto& kernel = kernels::active();
  std::vector<double> acc(doc_count(), 0.0);
  const double k1_plus_1 = params_.k1 + 1.0;
  bool any = false;
  for (const auto& term : query_terms) {
    const auto* list = postings(term);
    if (list == nullptr) continue;
    any = true;
    kernel.accumulate(bm25_idf(doc_count(), list->docs.size()), k1_plus_1, list->docs, list->freqs,
                      length_norms_, acc);
  }
  if (!any) return result;

  std::vector<ScoredDoc> hits;
  for (std::uint32_t d = 0; d < acc.size(); ++d) {
    if (acc[d] > 0.0) hits.push_back({doc_ids_[d], acc[d]});
  }
  const std::size_t keep = std::min(n, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), ranks_before);
  hits.resize(keep);
  result.entries = std::move(hits);
  return result;
}

RankedList Bm25Index::search_text(std::string_view text, std::size_t n, std::string query_id) const {
  auto terms = tokenize(text, analyzer_);
  return search(terms, n, std::move(query_id));
}

void Bm25Index::write(std::ostream& out) const {
  out.write(kSnapshotMagic.data(), static_cast<std::streamsize>(kSnapshotMagic.size()));
  put<std::uint32_t>(out, kSnapshotVersion);
  put<double>(out, params_.k1);
  put<double>(out, params_.b);
  put<std::uint8_t>(out, analyzer_.remove_stopwords ? 1 : 0);
  put<std::uint64_t>(out, doc_ids_.size());
  for (const auto& id : doc_ids_) put_string(out, id);
  put_vector(out, doc_lengths_);
  put<std::uint64_t>(out, terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    put_string(out, terms_[t]);
    put_vector(out, postings_[t].docs);
    put_vector(out, postings_[t].freqs);
  }
  if (!out) throw Error("failed writing index snapshot");
}

Bm25Index Bm25Index::read(std::istream& in) {
  char magic[kSnapshotMagic.size()];
  if (!in.read(magic, sizeof magic) || std::string_view(magic, sizeof magic) != kSnapshotMagic)
    throw SnapshotError("not an index snapshot (bad magic)");
  auto version = get<std::uint32_t>(in);
  if (version != kSnapshotVersion)
    throw SnapshotError("unsupported index snapshot version " + std::to_string(version) +
                        " (expected " + std::to_string(kSnapshotVersion) + ")");
  Bm25Index index;
  index.params_.k1 = get<double>(in);
  index.params_.b = get<double>(in);
  index.analyzer_.remove_stopwords = get<std::uint8_t>(in) != 0;

  constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;
  auto doc_count = get<std::uint64_t>(in);
  if (doc_count == 0 || doc_count > kMaxCount) throw SnapshotError("corrupt index snapshot: document count");
  index.doc_ids_.reserve(doc_count);
  for (std::uint64_t i = 0; i < doc_count; ++i) index.doc_ids_.push_back(get_string(in));
  index.doc_lengths_ = get_vector<std::uint32_t>(in, kMaxCount);
  if (index.doc_lengths_.size() != doc_count) throw SnapshotError("corrupt index snapshot: length table");

  auto term_count = get<std::uint64_t>(in);
  if (term_count > kMaxCount) throw SnapshotError("corrupt index snapshot: term count");
  index.terms_.reserve(term_count);
  index.postings_.reserve(term_count);
  for (std::uint64_t t = 0; t < term_count; ++t) {
    index.terms_.push_back(get_string(in));
    PostingList list;
    list.docs = get_vector<std::uint32_t>(in, doc_count);
    list.freqs = get_vector<std::uint32_t>(in, doc_count);
    if (list.docs.size() != list.freqs.size() || list.docs.empty())
      throw SnapshotError("corrupt index snapshot: posting list shape");
    for (std::size_t i = 0; i < list.docs.size(); ++i) {
      if (list.docs[i] >= doc_count || (i > 0 && list.docs[i] <= list.docs[i - 1]) || list.freqs[i] == 0)
        throw SnapshotError("corrupt index snapshot: posting order");
    }
    index.postings_.push_back(std::move(list));
  }
  for (std::uint32_t i = 0; i < index.terms_.size(); ++i) {
    if (!index.term_ids_.emplace(index.terms_[i], i).second)
      throw SnapshotError("corrupt index snapshot: duplicate term");
  }
  index.finalize();
  return index;
}

void Bm25Index::save(const std::filesystem::path& path) const {
  std::ostringstream buf(std::ios::binary);
  write(buf);
  io::write_file_atomic(path, buf.str());
}

Bm25Index Bm25Index::load(const std::filesystem::path& path) {
  auto in = io::open_input(path, true);
  return read(in);
}

}  // namespace rrpipe
