#include "speconion/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "speconion/multiplier.hpp"

namespace speconion::io {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& l : lines) out << l << "\n";
}

void write_symbol_dump(const WeylSymbol& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[256];
  std::snprintf(buf, sizeof buf, "weylsymbol hbar %.17g L %.17g nxi %d mtheta %d kinetic %.17g real %d\n",
                s.grid.hbar, s.grid.L, s.grid.nxi, s.mtheta, s.kinetic_weight,
                s.real_flag ? 1 : 0);
  out << buf;
  for (int m = -s.mtheta; m <= s.mtheta; ++m) {
    for (int i = -s.grid.nxi; i <= s.grid.nxi; ++i) {
      const std::complex<double> v = s.at(m, i);
      if (v == std::complex<double>(0.0, 0.0)) continue;
      std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", m, i, v.real(), v.imag());
      out << buf;
    }
  }
}

WeylSymbol read_symbol_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, kw;
  double hbar, L, kinetic;
  int nxi, mtheta, realf;
  in >> tag;
  if (tag != "weylsymbol") throw std::runtime_error(path + ": not a symbol dump");
  in >> kw >> hbar >> kw >> L >> kw >> nxi >> kw >> mtheta >> kw >> kinetic >> kw >> realf;
  XiGrid g(hbar, L, 1.0);
  g.nxi = nxi;  // reconstruct exact extent
  WeylSymbol s(g, mtheta);
  s.kinetic_weight = kinetic;
  s.real_flag = realf != 0;
  int m, i;
  double re, im;
  while (in >> m >> i >> re >> im) s.set(m, i, {re, im});
  return s;
}

void write_multiplier(const FourierMultiplier& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[256];
  std::snprintf(buf, sizeof buf, "multiplier hbar %.17g L %.17g nxi %d window %.17g %.17g\n",
                m.grid.hbar, m.grid.L, m.grid.nxi, m.window_lo, m.window_hi);
  out << buf;
  for (int i = 0; i < m.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d %.17g\n", i - m.grid.nxi, m.values(i));
    out << buf;
  }
}

FourierMultiplier read_multiplier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, kw;
  double hbar, L, lo, hi;
  int nxi;
  in >> tag;
  if (tag != "multiplier") throw std::runtime_error(path + ": not a multiplier dump");
  in >> kw >> hbar >> kw >> L >> kw >> nxi >> kw >> lo >> hi;
  XiGrid g(hbar, L, 1.0);
  g.nxi = nxi;
  FourierMultiplier m(g, lo, hi);
  int i;
  double v;
  while (in >> i >> v) m.values(i + nxi) = v;
  return m;
}

struct CsvWriter::Impl {
  std::FILE* f = nullptr;
  size_t ncols = 0;
};

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns,
                     const std::string& schema)
    : impl_(new Impl) {
  impl_->f = std::fopen(path.c_str(), "w");
  if (!impl_->f) throw std::runtime_error("cannot write " + path);
  impl_->ncols = columns.size();
  std::fprintf(impl_->f, "# schema %s\n", schema.c_str());
  for (size_t i = 0; i < columns.size(); ++i)
    std::fprintf(impl_->f, "%s%s", columns[i].c_str(), i + 1 < columns.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() {
  if (impl_->f) std::fclose(impl_->f);
  delete impl_;
}

void CsvWriter::row(const std::vector<double>& values) { row_mixed({}, values); }

void CsvWriter::row_mixed(const std::vector<std::string>& svals,
                          const std::vector<double>& dvals) {
  size_t n = 0;
  for (const auto& s : svals) std::fprintf(impl_->f, "%s%s", s.c_str(), ++n < impl_->ncols ? "," : "\n");
  for (double v : dvals) std::fprintf(impl_->f, "%.17g%s", v, ++n < impl_->ncols ? "," : "\n");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable t;
  std::string line;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header_done) {
      t.columns = cells;
      header_done = true;
    } else {
      t.cells.push_back(cells);
    }
  }
  return t;
}

CsvDiffReport diff_artifact_dirs(const std::string& dir_a, const std::string& dir_b,
                                 double default_tol,
                                 const std::vector<std::pair<std::string, double>>& overrides) {
  CsvDiffReport rep;
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir_a))
    if (e.path().extension() == ".csv") files.push_back(e.path().filename().string());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string pa = dir_a + "/" + f, pb = dir_b + "/" + f;
    if (!fs::exists(pb)) {
      rep.schema_mismatch = true;
      rep.message = "missing in second dir: " + f;
      return rep;
    }
    CsvTable a = read_csv(pa), b = read_csv(pb);
    if (a.columns != b.columns || a.cells.size() != b.cells.size()) {
      rep.schema_mismatch = true;
      rep.message = "schema/row-count mismatch in " + f;
      return rep;
    }
    for (size_t r = 0; r < a.cells.size(); ++r) {
      for (size_t c = 0; c < a.columns.size() && c < a.cells[r].size(); ++c) {
        const std::string &sa = a.cells[r][c], &sb = b.cells[r][c];
        char* end_a = nullptr;
        char* end_b = nullptr;
        const double va = std::strtod(sa.c_str(), &end_a);
        const double vb = std::strtod(sb.c_str(), &end_b);
        const bool num_a = end_a && *end_a == '\0' && !sa.empty();
        const bool num_b = end_b && *end_b == '\0' && !sb.empty();
        if (num_a != num_b) {
          rep.schema_mismatch = true;
          rep.message = "cell type mismatch in " + f;
          return rep;
        }
        if (!num_a) {
          if (sa != sb) {
            rep.schema_mismatch = true;
            rep.message = "text cell differs in " + f;
            return rep;
          }
          continue;
        }
        double tol = default_tol;
        for (const auto& [col, t] : overrides)
          if (col == a.columns[c]) tol = t;
        if (std::fabs(va - vb) > tol) {
          CsvDiffEntry e;
          e.file = f;
          e.row = static_cast<int>(r);
          e.column = a.columns[c];
          e.a = va;
          e.b = vb;
          e.tol = tol;
          rep.exceedances.push_back(e);
        }
      }
    }
  }
  return rep;
}

void write_svg_plot(const std::string& path, const std::vector<double>& xs,
                    const std::vector<std::vector<double>>& series,
                    const std::vector<std::string>& labels, const std::string& title) {
  if (xs.empty() || series.empty()) return;
  const int W = 720, H = 440, ml = 60, mr = 20, mt = 30, mb = 40;
  double xmin = xs.front(), xmax = xs.back();
  double ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (double v : s) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (!(ymax > ymin)) {
    ymax = ymin + 1.0;
    ymin -= 1.0;
  }
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ofstream out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='18' text-anchor='middle' font-size='14'>" << title
      << "</text>\n";
  out << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill='none' stroke='" << colors[s % 6] << "' stroke-width='1.5' points='";
    for (size_t i = 0; i < xs.size() && i < series[s].size(); ++i)
      out << px(xs[i]) << "," << py(series[s][i]) << " ";
    out << "'/>\n";
    if (s < labels.size())
      out << "<text x='" << W - mr - 150 << "' y='" << mt + 16 * (s + 1) << "' fill='"
          << colors[s % 6] << "' font-size='12'>" << labels[s] << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace speconion::io
