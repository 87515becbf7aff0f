#include "specfw/trace_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "specfw/error.hpp"

namespace specfw {

namespace {

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    // stod rejects "inf"/"nan" spellings only on some platforms; accept both.
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan" || s == "-nan") return NAN;
    throw Error(ErrorCode::IoError, "bad number '" + s + "' in " + path.string());
  }
}

}  // namespace

std::string format_real(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

double error_floor(double f_ref) { return kRelativeErrorFloor * std::max(1.0, std::abs(f_ref)); }

std::vector<CsvRow> to_csv_rows(const std::vector<TraceRow>& trace, double f_ref) {
  const double floor = error_floor(f_ref);
  std::vector<CsvRow> rows;
  rows.reserve(trace.size());
  for (const TraceRow& t : trace) {
    CsvRow r;
    r.iter = t.iter;
    r.f_value = t.f_value;
    r.error_vs_ref = t.f_value - f_ref;
    r.log10_error = std::log10(std::max(r.error_vs_ref, floor));
    r.dual_gap = t.dual_gap;
    r.step_kind = std::string(to_string(t.step_kind));
    r.rank = t.rank;
    r.rank1_updates_cum = static_cast<double>(t.rank1_updates_cum);
    r.elapsed_s = t.elapsed;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CsvRow> average_rows(const std::vector<std::vector<CsvRow>>& runs) {
  std::size_t len = 0;
  for (const auto& run : runs) len = std::max(len, run.size());
  std::vector<CsvRow> out;
  out.reserve(len);
  for (std::size_t t = 0; t < len; ++t) {
    CsvRow mean;
    mean.iter = static_cast<int>(t + 1);
    std::map<std::string, int> kinds;
    int count = 0;
    for (const auto& run : runs) {
      if (run.empty()) continue;
      const CsvRow& r = run[std::min(t, run.size() - 1)];
      mean.f_value += r.f_value;
      mean.error_vs_ref += r.error_vs_ref;
      mean.log10_error += r.log10_error;
      mean.dual_gap += r.dual_gap;
      mean.rank += r.rank;
      mean.rank1_updates_cum += r.rank1_updates_cum;
      mean.elapsed_s += r.elapsed_s;
      ++kinds[r.step_kind];
      ++count;
    }
    if (count == 0) break;
    const double k = count;
    mean.f_value /= k;
    mean.error_vs_ref /= k;
    mean.log10_error /= k;
    mean.dual_gap /= k;
    mean.rank /= k;
    mean.rank1_updates_cum /= k;
    mean.elapsed_s /= k;
    mean.step_kind = std::max_element(kinds.begin(), kinds.end(), [](const auto& a, const auto& b) {
                       return a.second < b.second;
                     })->first;
    out.push_back(std::move(mean));
  }
  return out;
}

std::string format_row(const CsvRow& r) {
  std::ostringstream os;
  os << r.iter << ',' << format_real(r.f_value) << ',' << format_real(r.error_vs_ref) << ',' << format_real(r.log10_error)
     << ',' << format_real(r.dual_gap) << ',' << r.step_kind << ',' << format_real(r.rank) << ','
     << format_real(r.rank1_updates_cum) << ',' << format_real(r.elapsed_s);
  return os.str();
}

void write_csv(const std::vector<CsvRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << kTraceHeader << '\n';
  for (const CsvRow& r : rows) out << format_row(r) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw Error(ErrorCode::IoError, path.string() + ": unexpected header");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9)
      throw Error(ErrorCode::IoError, path.string() + ": expected 9 fields in '" + line + "'");
    CsvRow r;
    r.iter = static_cast<int>(parse_double(f[0], path));
    r.f_value = parse_double(f[1], path);
    r.error_vs_ref = parse_double(f[2], path);
    r.log10_error = parse_double(f[3], path);
    r.dual_gap = parse_double(f[4], path);
    r.step_kind = f[5];
    r.rank = parse_double(f[6], path);
    r.rank1_updates_cum = parse_double(f[7], path);
    r.elapsed_s = parse_double(f[8], path);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::filesystem::path repeat_path(const std::filesystem::path& path, int k) {
  std::filesystem::path p = path;
  const std::string ext = p.extension().string();
  p.replace_filename(p.stem().string() + ".rep" + std::to_string(k) + ext);
  return p;
}

}  // namespace specfw
