#include "rrpipe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "io.hpp"

namespace rrpipe {

std::string_view to_string(ReportShape shape) {
  switch (shape) {
    case ReportShape::qe_table: return "qe_table";
    case ReportShape::rr_table: return "rr_table";
    case ReportShape::depth_curve: return "depth_curve";
  }
  return "qe_table";
}

ReportShape parse_report_shape(std::string_view text) {
  for (auto s : {ReportShape::qe_table, ReportShape::rr_table, ReportShape::depth_curve})
    if (text == to_string(s)) return s;
  throw ValidationError("report shape must be qe_table, rr_table or depth_curve; got '" + std::string(text) + "'");
}

std::string variant_label(std::string_view variant) {
  if (variant == kOff) return "No Enhancement (BM25 only)";
  if (variant == "flash-lite") return "Flash-Lite";
  if (variant == "flash-no-think") return "Flash (No-Think)";
  if (variant == "flash-think") return "Flash (Think)";
  if (variant == "pro") return "Pro";
  return std::string(variant);
}

std::string format_metric(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string format_cost(double dollars) {
  if (dollars == 0.0) return "0.000";
  // Three significant digits in fixed notation, trailing zeros dropped.
  const int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(dollars))));
  const int decimals = std::max(0, 2 - magnitude);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, dollars);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

namespace {

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string markdown() const {
    std::string out = "|";
    for (const auto& h : header) out += " " + h + " |";
    out += "\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
    out += "\n";
    for (const auto& row : rows) {
      out += "|";
      for (const auto& cell : row) out += " " + cell + " |";
      out += "\n";
    }
    return out;
  }
};

std::string csv_lines(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_escape(fields[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void check_required(const std::vector<std::string>& present, const ReportOptions& options, ReportShape shape) {
  for (const auto& want : options.required_rows) {
    if (std::find(present.begin(), present.end(), want) == present.end())
      throw MissingAxis(std::string(to_string(shape)) + ": no run record for variant '" + want + "'");
  }
}

RenderedReport qe_table(std::span<const RunRecord> records, const ReportOptions& options) {
  std::vector<const RunRecord*> rows;
  std::vector<std::string> seen;
  for (const auto& r : records) {
    if (r.config.rr_enabled()) continue;
    if (std::find(seen.begin(), seen.end(), r.config.qe_variant) != seen.end()) continue;
    seen.push_back(r.config.qe_variant);
    rows.push_back(&r);
  }
  if (rows.empty()) throw MissingAxis("qe_table: no run records without re-ranking");
  check_required(seen, options, ReportShape::qe_table);

  Table md{{"Model Variant", "NDCG@10", "Recall@10", "Cost ($/query)"}, {}};
  std::vector<std::vector<std::string>> csv;
  for (const auto* r : rows) {
    const auto& a = r->aggregate;
    md.rows.push_back({variant_label(r->config.qe_variant), format_metric(a.ndcg_at_10), format_metric(a.recall_at_10),
                       format_cost(a.mean_cost_usd)});
    csv.push_back({r->config.qe_variant, csv_number(a.ndcg_at_10), csv_number(a.recall_at_10),
                   csv_number(a.mean_cost_usd), std::to_string(a.count), std::to_string(a.degraded_count),
                   r->config_hash});
  }
  return {csv_lines({"qe_variant", "ndcg_at_10", "recall_at_10", "cost_per_query_usd", "queries", "degraded",
                     "config_hash"},
                    csv),
          md.markdown()};
}

RenderedReport rr_table(std::span<const RunRecord> records, const ReportOptions& options) {
  std::optional<std::size_t> k = options.k;
  if (!k) {
    for (const auto& r : records)
      if (r.config.rr_enabled()) k = std::max(k.value_or(0), r.config.k);
  }
  std::optional<std::string> qe = options.qe_variant;
  std::vector<const RunRecord*> rows;
  std::vector<std::string> seen;
  for (const auto& r : records) {
    if (!r.config.rr_enabled() || r.config.k != k) continue;
    if (!qe) qe = r.config.qe_variant;
    if (r.config.qe_variant != *qe) continue;
    if (std::find(seen.begin(), seen.end(), r.config.rr_variant) != seen.end()) continue;
    seen.push_back(r.config.rr_variant);
    rows.push_back(&r);
  }
  if (rows.empty()) throw MissingAxis("rr_table: no re-ranked run records for the requested depth");
  check_required(seen, options, ReportShape::rr_table);

  const auto qe_label = *qe == kOff ? std::string("None") : variant_label(*qe);
  Table md{{"Configuration", "NDCG@10", "Recall@10", "Cost ($/query)", "Latency (s/query)"}, {}};
  std::vector<std::vector<std::string>> csv;
  for (const auto* r : rows) {
    const auto& a = r->aggregate;
    md.rows.push_back({"QE (" + qe_label + ") + RR (" + variant_label(r->config.rr_variant) + ")",
                       format_metric(a.ndcg_at_10), format_metric(a.recall_at_10), format_cost(a.mean_cost_usd),
                       format_metric(a.mean_latency_s)});
    csv.push_back({r->config.qe_variant, r->config.rr_variant, std::to_string(r->config.k), csv_number(a.ndcg_at_10),
                   csv_number(a.recall_at_10), csv_number(a.mean_cost_usd), csv_number(a.mean_latency_s),
                   std::to_string(a.count), std::to_string(a.degraded_count), r->config_hash});
  }
  return {csv_lines({"qe_variant", "rr_variant", "k", "ndcg_at_10", "recall_at_10", "cost_per_query_usd",
                     "latency_s_per_query", "queries", "degraded", "config_hash"},
                    csv),
          "k = " + std::to_string(*k) + "\n\n" + md.markdown()};
}

RenderedReport depth_curve(std::span<const RunRecord> records, const ReportOptions& options) {
  Table md{{"QE variant", "RR variant", "k", "NDCG@10"}, {}};
  std::vector<std::vector<std::string>> csv;
  std::vector<std::string> seen;
  for (const auto& r : records) {
    if (!r.config.rr_enabled()) continue;
    seen.push_back(r.config.qe_variant);
    md.rows.push_back({variant_label(r.config.qe_variant), variant_label(r.config.rr_variant),
                       std::to_string(r.config.k), format_metric(r.aggregate.ndcg_at_10)});
    csv.push_back({r.config.qe_variant, r.config.rr_variant, std::to_string(r.config.k),
                   csv_number(r.aggregate.ndcg_at_10)});
  }
  if (csv.empty()) throw MissingAxis("depth_curve: no re-ranked run records");
  check_required(seen, options, ReportShape::depth_curve);
  return {csv_lines({"qe_variant", "rr_variant", "k", "ndcg_at_10"}, csv), md.markdown()};
}

}  // namespace

RenderedReport render_report(std::span<const RunRecord> records, ReportShape shape, const ReportOptions& options) {
  switch (shape) {
    case ReportShape::qe_table: return qe_table(records, options);
    case ReportShape::rr_table: return rr_table(records, options);
    case ReportShape::depth_curve: return depth_curve(records, options);
  }
  throw MissingAxis("unknown report shape");
}

ReportFiles emit_report(std::span<const RunRecord> records, ReportShape shape, const std::filesystem::path& out_dir,
                        const ReportOptions& options) {
  auto rendered = render_report(records, shape, options);
  const auto stem = "report_" + std::string(to_string(shape));
  ReportFiles files{out_dir / (stem + ".csv"), out_dir / (stem + ".md")};
  io::write_file_atomic(files.csv, rendered.csv);
  io::write_file_atomic(files.markdown, rendered.markdown);
  return files;
}

}  // namespace rrpipe
