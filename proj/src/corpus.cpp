#include "rrpipe/corpus.hpp"

#include <charconv>
#include <sstream>

#include "io.hpp"

namespace rrpipe {

namespace {

const Judgments kNoJudgments;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

template <typename Collection, typename Record, typename Build>
Collection load_jsonl(const std::filesystem::path& path, Build build) {
  std::vector<Record> records;
  io::for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    if (io::trim(line).empty()) return;
    records.push_back(build(line_no, io::parse_record(line_no, line)));
  });
  return Collection(std::move(records));
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

}  // namespace

Qrels::Qrels(std::map<std::string, Judgments, std::less<>> judgments)
    : judgments_(std::move(judgments)) {}

const Judgments& Qrels::judgments_for(std::string_view query_id) const {
  auto it = judgments_.find(query_id);
  return it == judgments_.end() ? kNoJudgments : it->second;
}

void Qrels::set(const std::string& query_id, const std::string& doc_id, int grade) {
  judgments_[query_id][doc_id] = grade;
}

Corpus load_corpus(const std::filesystem::path& path) {
  return load_jsonl<Corpus, Document>(path, [](std::size_t line_no, const nlohmann::json& rec) {
    Document doc{io::string_field(rec, line_no, "doc_id"),
                 io::string_field(rec, line_no, "subset", true),
                 io::string_field(rec, line_no, "text", true)};
    if (io::trim(doc.text).empty()) throw MalformedRecord(line_no, "document text is blank");
    return doc;
  });
}

QuerySet load_queries(const std::filesystem::path& path) {
  return load_jsonl<QuerySet, Query>(path, [](std::size_t line_no, const nlohmann::json& rec) {
    return Query{io::string_field(rec, line_no, "query_id"),
                 io::string_field(rec, line_no, "subset", true),
                 io::string_field(rec, line_no, "text", true)};
  });
}

QrelsLoad load_qrels(const std::filesystem::path& path, const QuerySet& queries) {
  QrelsLoad result;
  io::for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    auto fields = split_ws(line);
    if (fields.empty()) return;
    if (fields.size() != 3 && fields.size() != 4)
      throw MalformedRecord(line_no, "expected 'query_id doc_id grade'");
    std::string_view qid = fields.front();
    std::string_view did = fields[fields.size() - 2];
    std::string_view grade_text = fields.back();
    long long grade = 0;
    auto [ptr, ec] = std::from_chars(grade_text.data(), grade_text.data() + grade_text.size(), grade);
    if (ec != std::errc() || ptr != grade_text.data() + grade_text.size())
      throw MalformedRecord(line_no, "grade is not an integer");
    if (grade < 0) throw NegativeGrade(line_no, grade);
    if (grade > std::numeric_limits<int>::max()) throw MalformedRecord(line_no, "grade out of range");
    if (queries.find(qid) == nullptr) {
      result.warnings.push_back("line " + std::to_string(line_no) + ": unknown query_id '" +
                                std::string(qid) + "', record skipped");
      return;
    }
    result.qrels.set(std::string(qid), std::string(did), static_cast<int>(grade));
  });
  return result;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::vector<nlohmann::json> rows;
  rows.reserve(corpus.size());
  for (const auto& d : corpus)
    rows.push_back({{"doc_id", d.doc_id}, {"subset", d.subset}, {"text", d.text}});
  write_jsonl(path, rows);
}

void write_queries(const std::filesystem::path& path, const QuerySet& queries) {
  std::vector<nlohmann::json> rows;
  rows.reserve(queries.size());
  for (const auto& q : queries)
    rows.push_back({{"query_id", q.query_id}, {"subset", q.subset}, {"text", q.text}});
  write_jsonl(path, rows);
}

void write_qrels(const std::filesystem::path& path, const Qrels& qrels) {
  std::ostringstream out;
  for (const auto& [qid, judgments] : qrels.all())
    for (const auto& [did, grade] : judgments) out << qid << ' ' << did << ' ' << grade << '\n';
  io::write_file_atomic(path, out.str());
}

Corpus filter_subset(const Corpus& corpus, std::string_view subset) {
  std::vector<Document> kept;
  for (const auto& d : corpus)
    if (d.subset == subset) kept.push_back(d);
  return Corpus(std::move(kept));
}

QuerySet filter_subset(const QuerySet& queries, std::string_view subset) {
  std::vector<Query> kept;
  for (const auto& q : queries)
    if (q.subset == subset) kept.push_back(q);
  return QuerySet(std::move(kept));
}

BrightImport import_bright(const std::filesystem::path& documents_path,
                           const std::filesystem::path& examples_path, const std::string& subset) {
  BrightImport out;
  std::vector<Document> docs;
  std::size_t blank = 0;
  io::for_each_line(documents_path, [&](std::size_t line_no, std::string_view line) {
    if (io::trim(line).empty()) return;
    auto rec = io::parse_record(line_no, line);
    auto content = io::string_field(rec, line_no, "content", true);
    if (io::trim(content).empty()) {
      ++blank;
      return;
    }
    docs.push_back({io::string_field(rec, line_no, "id"), subset, std::move(content)});
  });
  if (blank > 0) out.warnings.push_back(std::to_string(blank) + " documents with blank content dropped");
  out.corpus = Corpus(std::move(docs));

  std::vector<Query> queries;
  Qrels qrels;
  io::for_each_line(examples_path, [&](std::size_t line_no, std::string_view line) {
    if (io::trim(line).empty()) return;
    auto rec = io::parse_record(line_no, line);
    auto qid = io::string_field(rec, line_no, "id");
    queries.push_back({qid, subset, io::string_field(rec, line_no, "query", true)});
    auto gold = rec.find("gold_ids");
    if (gold == rec.end() || !gold->is_array())
      throw MalformedRecord(line_no, "missing array field 'gold_ids'");
    for (const auto& id : *gold) {
      if (!id.is_string()) throw MalformedRecord(line_no, "non-string entry in 'gold_ids'");
      if (out.corpus.find(id.get<std::string>()) == nullptr) {
        out.warnings.push_back("query " + qid + ": gold id '" + id.get<std::string>() +
                               "' not in corpus");
      }
      qrels.set(qid, id.get<std::string>(), 1);
    }
  });
  out.queries = QuerySet(std::move(queries));
  out.qrels = std::move(qrels);
  return out;
}

}  // namespace rrpipe
