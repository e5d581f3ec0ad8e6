#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rrpipe/orchestrator.hpp"

namespace rrpipe {

enum class ReportShape { qe_table, rr_table, depth_curve };

std::string_view to_string(ReportShape shape);
ReportShape parse_report_shape(std::string_view text);

struct ReportOptions {
  /// rr_table: depth to tabulate (default: deepest k present).
  std::optional<std::size_t> k;
  /// rr_table: QE variant to hold fixed (default: that of the first record).
  std::optional<std::string> qe_variant;
  /// Variant names that must appear as rows; a missing one is MissingAxis.
  std::vector<std::string> required_rows;
};

struct RenderedReport {
  std::string csv;
  std::string markdown;
};

/// Display name for a variant ("flash-no-think" -> "Flash (No-Think)");
/// unknown names pass through. "off" is the no-expansion baseline.
std::string variant_label(std::string_view variant);

/// Two decimals.
std::string format_metric(double value);
/// Dollars to three significant digits without trailing zeros
/// ("0.0018", "0.054", "0.17"); exactly zero renders as "0.000".
std::string format_cost(double dollars);

/// qe_table: one row per QE variant among records without re-ranking.
/// rr_table: one row per RR variant at a fixed depth and QE variant.
/// depth_curve: long-format (qe_variant, k, ndcg_at_10) for every re-ranked
/// record. Throws MissingAxis when the shape has no rows or a required row
/// is absent.
RenderedReport render_report(std::span<const RunRecord> records, ReportShape shape, const ReportOptions& options = {});

struct ReportFiles {
  std::filesystem::path csv;
  std::filesystem::path markdown;
};

/// Writes `report_<shape>.csv` and `report_<shape>.md` into `out_dir`.
ReportFiles emit_report(std::span<const RunRecord> records, ReportShape shape, const std::filesystem::path& out_dir,
                        const ReportOptions& options = {});

}  // namespace rrpipe
