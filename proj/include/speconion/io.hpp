#pragma once

#include <string>
#include <vector>

#include "speconion/weyl.hpp"

namespace speconion {

struct FourierMultiplier;

namespace io {

void ensure_dir(const std::string& dir);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

// Symbol dump: header (hbar, L, nxi, mtheta) then rows
// `theta_index xi_index re im` for nonzero entries.
void write_symbol_dump(const WeylSymbol& s, const std::string& path);
WeylSymbol read_symbol_dump(const std::string& path);

void write_multiplier(const FourierMultiplier& m, const std::string& path);
FourierMultiplier read_multiplier(const std::string& path);

// CSV with a schema-version header comment; rows formatted with %.17g.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns,
            const std::string& schema = "speconion-csv-1");
  ~CsvWriter();
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& svals, const std::vector<double>& dvals);

 private:
  struct Impl;
  Impl* impl_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> cells;  // raw strings; numeric cells parse on demand
};
CsvTable read_csv(const std::string& path);

struct CsvDiffEntry {
  std::string file;
  int row = 0;
  std::string column;
  double a = 0, b = 0, tol = 0;
};
struct CsvDiffReport {
  bool schema_mismatch = false;
  std::string message;
  std::vector<CsvDiffEntry> exceedances;
  bool clean() const { return !schema_mismatch && exceedances.empty(); }
};

// Compare every *.csv present in both directories; numeric cells within
// per-column tolerance (default_tol when a column has no override).
CsvDiffReport diff_artifact_dirs(const std::string& dir_a, const std::string& dir_b,
                                 double default_tol,
                                 const std::vector<std::pair<std::string, double>>& overrides = {});

// Minimal SVG polyline plot (convenience artifact; CSVs are the contract).
void write_svg_plot(const std::string& path, const std::vector<double>& xs,
                    const std::vector<std::vector<double>>& series,
                    const std::vector<std::string>& labels, const std::string& title);

}  // namespace io
}  // namespace speconion
