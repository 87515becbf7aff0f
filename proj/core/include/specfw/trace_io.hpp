#pragma once

// CSV traces.  Columns, in order:
//   iter, f_value, error_vs_ref, log10_error, dual_gap, step_kind, rank,
//   rank1_updates_cum, elapsed_s
// Reals are written with 17 significant digits so a read-back is exact.

#include <filesystem>
#include <string>
#include <vector>

#include "specfw/solver.hpp"

namespace specfw {

inline constexpr const char* kTraceHeader =
    "iter,f_value,error_vs_ref,log10_error,dual_gap,step_kind,rank,rank1_updates_cum,elapsed_s";

struct CsvRow {
  int iter = 0;
  double f_value = 0.0;
  double error_vs_ref = 0.0;
  double log10_error = 0.0;
  double dual_gap = 0.0;
  std::string step_kind;
  /// Integral for single runs; a mean across repeats in averaged files.
  double rank = 0.0;
  double rank1_updates_cum = 0.0;
  double elapsed_s = 0.0;
};

/// Errors below this fraction of max(1, |f_ref|) are rounding noise in f and
/// are clamped before taking log10.
inline constexpr double kRelativeErrorFloor = 1e-14;

double error_floor(double f_ref);

/// One CSV row per trace row with errors against f_ref.
std::vector<CsvRow> to_csv_rows(const std::vector<TraceRow>& trace, double f_ref);

/// Row-wise means over repeats; shorter runs are padded with their last row.
/// step_kind is the most frequent kind at that row.
std::vector<CsvRow> average_rows(const std::vector<std::vector<CsvRow>>& runs);

void write_csv(const std::vector<CsvRow>& rows, const std::filesystem::path& path);
/// Throws IoError on a missing file, a different header or a malformed row.
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

/// `<stem>.rep<k><ext>` next to `path`.
std::filesystem::path repeat_path(const std::filesystem::path& path, int k);

/// Byte-level rendering, shared by the writers.
std::string format_row(const CsvRow& row);
/// %.17g
std::string format_real(double v);

}  // namespace specfw
