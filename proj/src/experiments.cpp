#include "speconion/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "speconion/bloch.hpp"
#include "speconion/bump.hpp"
#include "speconion/gauge.hpp"
#include "speconion/io.hpp"
#include "speconion/multiplier.hpp"
#include "speconion/ode.hpp"
#include "speconion/parallel.hpp"
#include "speconion/potential.hpp"
#include "speconion/wave.hpp"

namespace speconion {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

ExperimentConfig ExperimentConfig::parse_string(const std::string& text,
                                                const std::string& origin) {
  ExperimentConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line.substr(0, line.find('#')));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    if (!section.empty()) key = section + "." + key;
    if (cfg.values_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
    cfg.values_[key] = val;
  }
  return cfg;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         std::optional<std::string> def) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (def) return *def;
    throw ConfigError(origin_ + ": missing required key " + key);
  }
  consumed_[key] = true;
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key, std::optional<double> def) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (def) return *def;
    throw ConfigError(origin_ + ": missing required key " + key);
  }
  consumed_[key] = true;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (!end || *end != '\0') throw ConfigError(origin_ + ": key " + key + " is not a number");
  return v;
}

int ExperimentConfig::get_int(const std::string& key, std::optional<int> def) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (def) return *def;
    throw ConfigError(origin_ + ": missing required key " + key);
  }
  const double v = get_double(key);
  if (v != std::floor(v)) throw ConfigError(origin_ + ": key " + key + " is not an integer");
  return static_cast<int>(v);
}

std::vector<double> ExperimentConfig::get_list(const std::string& key,
                                               std::optional<std::vector<double>> def) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (def) return *def;
    throw ConfigError(origin_ + ": missing required key " + key);
  }
  consumed_[key] = true;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (!end || *end != '\0') throw ConfigError(origin_ + ": bad list entry in " + key);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(origin_ + ": empty list for " + key);
  return out;
}

void ExperimentConfig::check_all_consumed() const {
  for (const auto& [k, v] : values_)
    if (!consumed_.count(k)) throw ConfigError(origin_ + ": unknown key " + k);
}

namespace {

TrigPotential potential_from_config(const ExperimentConfig& cfg) {
  if (cfg.has("potential_file")) return read_potential_file(cfg.get_string("potential_file"));
  const std::string spec = cfg.get_string("potential", std::string("zero"));
  auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string cell;
    while (std::getline(ss, cell, ':')) args.push_back(std::strtod(cell.c_str(), nullptr));
  }
  if (kind == "zero") return TrigPotential(2 * M_PI, 0);
  if (kind == "constant") {
    TrigPotential p(2 * M_PI, 0);
    p.v0(0) = args.empty() ? 1.0 : args[0];
    return p;
  }
  if (kind == "cosine") {
    TrigPotential p(2 * M_PI, 1);
    const double amp = args.empty() ? 2.0 : args[0];
    p.v0(1) = amp / 2.0;
    p.v0(-1) = amp / 2.0;
    return p;
  }
  if (kind == "cosine-v1") {
    TrigPotential p(2 * M_PI, 1);
    const double amp = args.empty() ? 0.1 : args[0];
    p.v1(1) = amp / 2.0;
    p.v1(-1) = amp / 2.0;
    return p;
  }
  if (kind == "random") {
    const std::uint64_t seed = args.size() > 0 ? static_cast<std::uint64_t>(args[0]) : 1;
    const int modes = args.size() > 1 ? static_cast<int>(args[1]) : 4;
    const double scale = args.size() > 2 ? args[2] : 1.0;
    return random_trig_potential(seed, 2 * M_PI, modes, scale);
  }
  throw ConfigError("unknown potential spec: " + spec);
}

struct Manifest {
  std::vector<std::string> lines;
  bool all_pass = true;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void config_echo(const ExperimentConfig& cfg) {
    lines.push_back("[config]");
    for (const auto& [k, v] : cfg.raw()) lines.push_back(k + " = " + v);
    lines.push_back("[results]");
  }
  void check(const std::string& name, bool pass, double value, double threshold) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: %s (value %.6g, threshold %.6g)", name.c_str(),
                  pass ? "pass" : "FAIL", value, threshold);
    lines.push_back(buf);
    all_pass = all_pass && pass;
  }
  void note(const std::string& s) { lines.push_back(s); }
  void finish(const std::string& out_dir) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[128];
    std::snprintf(buf, sizeof buf, "elapsed_seconds %.3f", secs);
    lines.push_back(buf);
    lines.push_back(std::string("status ") + (all_pass ? "pass" : "fail"));
    lines.push_back("version speconion-1");
    io::write_lines(out_dir + "/manifest.txt", lines);
  }
};

RunResult finalize(Manifest& mf, const std::string& out_dir) {
  mf.finish(out_dir);
  RunResult r;
  r.exit_code = mf.all_pass ? 0 : 1;
  r.notes = mf.lines;
  return r;
}

RunResult run_ldos(const ExperimentConfig& cfg, const std::string& out_dir) {
  const TrigPotential p = potential_from_config(cfg);
  const double hbar = cfg.get_double("hbar");
  const double w0 = cfg.get_double("omega_min", 0.8);
  const double w1 = cfg.get_double("omega_max", 1.2);
  const int nw = cfg.get_int("omega_count", 9);
  const double x = cfg.get_double("x", 0.0);
  const double y = cfg.get_double("y", 0.0);
  const int Nk = cfg.get_int("nk", 256);
  const std::string method = cfg.get_string("method", std::string("bloch"));
  cfg.check_all_consumed();

  Manifest mf;
  mf.config_echo(cfg);
  io::CsvWriter csv(out_dir + "/ldos.csv", {"method", "x", "y", "omega", "re", "im"});
  double worst_free = 0.0;
  for (int i = 0; i < nw; ++i) {
    const double om = nw == 1 ? w0 : w0 + (w1 - w0) * i / (nw - 1);
    SpectralSample s;
    if (method == "bloch") {
      s = bloch_spectral_kernel(p, x, y, om, hbar, Nk);
    } else if (method == "box") {
      const double X = cfg.get_double("box_x", 40.0);
      s = box_spectral_kernel(p, X, om, hbar, x, y);
    } else {
      throw ConfigError("ldos: unknown method " + method);
    }
    csv.row_mixed({s.method}, {s.x, s.y, s.omega, s.value.real(), s.value.imag()});
    if (p.is_zero() && x == y)
      worst_free = std::max(worst_free, std::fabs(s.value.real() - om / (M_PI * hbar)));
  }
  if (p.is_zero() && x == y) mf.check("free_diagonal_vs_closed_form", worst_free < 1e-7, worst_free, 1e-7);
  return finalize(mf, out_dir);
}

RunResult run_gauge(const ExperimentConfig& cfg, const std::string& out_dir) {
  const TrigPotential p = potential_from_config(cfg);
  const double hbar = cfg.get_double("hbar");
  PeelConfig pc;
  pc.window_a = cfg.get_double("window_a", 0.5);
  pc.window_b = cfg.get_double("window_b", 1.5);
  pc.delta = cfg.get_double("delta", 0.25);
  pc.tol_rel = cfg.get_double("tol_rel", 1e-8);
  pc.parallel_steps = cfg.get_int("parallel_steps", 6);
  pc.series_order = cfg.get_int("series_order", 8);
  const double ximax = cfg.get_double("xi_max", pc.window_b + 2.0);
  cfg.check_all_consumed();

  Manifest mf;
  mf.config_echo(cfg);
  XiGrid grid(hbar, p.period, ximax);
  WeylSymbol q = weyl_symbol_of(p, grid);
  OnionPeelResult res = onion_peel(q, pc);
  save_gauge_log(res.log, res.multiplier, out_dir + "/gaugelog");
  io::CsvWriter csv(out_dir + "/residuals.csv",
                    {"layer", "radius", "step", "residual", "steps_to_tau"});
  double final_resid = 0.0;
  for (const auto& rep : res.log.reports) {
    for (size_t s = 0; s < rep.residuals.size(); ++s)
      csv.row({static_cast<double>(rep.layer_index), rep.radius, static_cast<double>(s),
               rep.residuals[s], static_cast<double>(rep.steps_to_tau)});
    final_resid = rep.residuals.back();
  }
  mf.check("final_residual_below_tau", final_resid <= res.log.tau, final_resid, res.log.tau);
  return finalize(mf, out_dir);
}

RunResult run_compare(const ExperimentConfig& cfg, const std::string& out_dir) {
  const TrigPotential p = potential_from_config(cfg);
  LdosCompareConfig cc;
  const std::string kind = cfg.get_string("kind", std::string("periodize"));
  if (kind == "periodize")
    cc.kind = ModKind::periodize_mod;
  else if (kind == "box")
    cc.kind = ModKind::dirichlet_box;
  else if (kind == "well")
    cc.kind = ModKind::quadratic_well;
  else if (kind == "none")
    cc.kind = ModKind::none;
  else
    throw ConfigError("compare: unknown kind " + kind);
  cc.hbar = cfg.get_double("hbar", 0.125);
  cc.Ts = cfg.get_list("T", std::vector<double>{4, 8, 16});
  cc.omegas = cfg.get_list("omega", std::vector<double>{0.9, 0.95, 1.0, 1.05, 1.1});
  cc.X0 = cfg.get_double("x0_box", 80.0);
  cc.Nk = cfg.get_int("nk", 192);
  cc.delta_scale = cfg.get_double("delta_scale", 1.0);
  const double tail_amp = cfg.get_double("tail_amp", kind == "periodize" ? 1.2 : 0.0);
  const double tail_width = cfg.get_double("tail_width", 6.0);
  if (tail_amp != 0.0)
    cc.v0_tail = [tail_amp, tail_width](double x) {
      return tail_amp * std::exp(-(x / tail_width) * (x / tail_width));
    };
  const double c_max = cfg.get_double("c_max", 100.0);
  cfg.check_all_consumed();

  Manifest mf;
  mf.config_echo(cfg);
  LdosCompareReport rep = ldos_compare_experiment(p, cc);
  io::CsvWriter csv(out_dir + "/compare.csv", {"T", "omega", "e0", "e1", "diff", "bound_unit"});
  std::vector<double> ts, diffs;
  for (const auto& r : rep.rows) {
    csv.row({r.T, r.omega, r.e0, r.e1, r.diff, r.bound_unit});
    ts.push_back(r.T);
    diffs.push_back(r.diff);
  }
  io::write_svg_plot(out_dir + "/compare.svg", ts, {diffs}, {"|E0-E1|"}, "difference vs T");
  mf.check("fitted_C_below_max", rep.fitted_C <= c_max, rep.fitted_C, c_max);
  return finalize(mf, out_dir);
}

RunResult run_wave(const ExperimentConfig& cfg, const std::string& out_dir) {
  const TrigPotential p = potential_from_config(cfg);
  const double hbar = cfg.get_double("hbar", 0.125);
  const double X = cfg.get_double("box_x", 30.0);
  const int n = cfg.get_int("n", 1500);
  const double x0 = cfg.get_double("bump_center", 0.0);
  const double R0 = cfg.get_double("bump_radius", 6.0);
  const std::vector<double> ts = cfg.get_list("t", std::vector<double>{2, 4, 8, 12});
  const double leak_tol = cfg.get_double("leak_tol", 1e-6);
  const double delta = cfg.get_double("far_field_delta", 0.01);
  const double R = cfg.get_double("far_field_radius", 12.0);
  cfg.check_all_consumed();

  Manifest mf;
  mf.config_echo(cfg);
  io::CsvWriter csv(out_dir + "/wave.csv", {"t", "leaked_mass", "norm_diff"});
  double worst_leak = 0.0;
  TridiagOperator H0 = box_operator(p, X, n, hbar);
  TrigPotential far = p;  // far-field V0 perturbation applied through extra term
  TridiagOperator H1 = box_operator(
      p, X, n, hbar, [&](double x) {
        return hbar * delta * (1.0 - plateau(x, R, R + 1.0)) * std::cos(x);
      });
  Eigen::VectorXcd u0 = bump_state(H0, x0, R0);
  WaveCompareResult wc = wave_compare(H0, H1, hbar, u0, ts);
  for (size_t i = 0; i < ts.size(); ++i) {
    FiniteSpeedResult fs = finite_speed_check(p, hbar, X, n, x0, R0, ts[i]);
    worst_leak = std::max(worst_leak, fs.leaked_mass / fs.u0_norm);
    csv.row({ts[i], fs.leaked_mass / fs.u0_norm, wc.norm_diff[i]});
  }
  io::write_svg_plot(out_dir + "/wave.svg", ts, {wc.norm_diff}, {"norm diff"},
                     "wave comparison vs t");
  mf.check("leakage_below_tol", worst_leak < leak_tol, worst_leak, leak_tol);
  const double slope_norm = wc.slope / (delta * wc.u0_h1_norm);
  mf.check("compare_slope_below_10delta", slope_norm <= 10.0, slope_norm, 10.0);
  (void)far;
  return finalize(mf, out_dir);
}

RunResult run_tauberian(const ExperimentConfig& cfg, const std::string& out_dir) {
  const double hbar = cfg.get_double("hbar", 0.125);
  const double T = cfg.get_double("T", 8.0);
  const double c_max = cfg.get_double("c_max", 4.0);
  cfg.check_all_consumed();

  Manifest mf;
  mf.config_echo(cfg);
  // w = free E(0,0,.) = omega/(pi hbar) above 0
  const double om0 = 0.2, om1 = 2.0;
  const int n = 4096;
  const double dw = (om1 - om0) / (n - 1);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = std::max(0.0, om0 + i * dw) / (M_PI * hbar);
  SmoothingKernel nu{hbar, T};
  TauberianReport rep = tauberian_bounds_check(w, om0, dw, nu, 0.9, 1.3);
  io::CsvWriter csv(out_dir + "/tauberian.csv", {"C_conv", "C_transfer", "L_h", "M_h", "B_h"});
  csv.row({rep.C_conv, rep.C_transfer, rep.lipschitz_lh, rep.M_h, rep.B_h});
  mf.check("smallest_workable_C", rep.C_conv <= c_max, rep.C_conv, c_max);
  return finalize(mf, out_dir);
}

RunResult run_ode_energy(const ExperimentConfig& cfg, const std::string& out_dir) {
  const TrigPotential p0 = potential_from_config(cfg);
  const double hbar_for_v1 = cfg.get_double("hbar_v1", 1.0 / 64.0);
  const std::vector<double> rho =
      cfg.get_list("rho", std::vector<double>{16, 32, 64, 128, 256, 512});
  const double X = cfg.get_double("X", 100.0);
  const int trials = cfg.get_int("trials", 8);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const double slope_max = cfg.get_double("slope_max", -0.8);
  cfg.check_all_consumed();

  Manifest mf;
  mf.config_echo(cfg);
  auto [p, phase] = remove_first_order(p0, hbar_for_v1);
  EnergyRatioReport rep = energy_ratio_experiment(p, rho, X, trials, seed);
  io::CsvWriter csv(out_dir + "/ode_energy.csv", {"rho", "max_ratio_minus_1"});
  for (size_t i = 0; i < rho.size(); ++i) csv.row({rho[i], rep.max_ratio_minus_1[i]});
  GronwallReport gw = gronwall_check(p, 1.0, 1.0 / rho.back(), 0.0, 10.0, 100, seed);
  mf.check("ratio_slope", rep.points_used < 2 || rep.slope <= slope_max, rep.slope, slope_max);
  mf.check("gronwall_all_pass", gw.all_pass, gw.worst_ratio_over_bound, 1.0);
  return finalize(mf, out_dir);
}

RunResult run_lyapunov(const ExperimentConfig& cfg, const std::string& out_dir) {
  const TrigPotential p0 = potential_from_config(cfg);
  const std::vector<double> rho = cfg.get_list("rho", std::vector<double>{64, 256});
  const double X = cfg.get_double("X", 10000.0);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  cfg.check_all_consumed();

  Manifest mf;
  mf.config_echo(cfg);
  auto [p, phase] = remove_first_order(p0, 1.0 / rho.back());
  io::CsvWriter csv(out_dir + "/lyapunov.csv", {"rho", "exponent", "exponent_2X"});
  std::vector<double> exps;
  for (double r : rho) {
    LyapunovEstimate est = lyapunov_estimate(p, r, X, seed);
    exps.push_back(est.exponent);
    csv.row({r, est.exponent, est.exponent_double_x});
  }
  const double floor = 1e-10;
  const bool decay_ok = exps.back() <= exps.front() / 16.0 ||
                        (exps.front() < floor && exps.back() < floor);
  mf.check("exponent_decay_or_floor", decay_ok, exps.back(), exps.front() / 16.0);
  return finalize(mf, out_dir);
}

RunResult run_asymptotics(const ExperimentConfig& cfg, const std::string& out_dir) {
  const TrigPotential p = potential_from_config(cfg);
  const std::vector<double> rho =
      cfg.get_list("rho", std::vector<double>{16, 23, 32, 45, 64, 91, 128});
  const int N = cfg.get_int("terms", 3);
  const double x = cfg.get_double("x", 0.0);
  const double dist = cfg.get_double("offdiag_distance", 1.0);
  const int Nk = cfg.get_int("nk", 192);
  const double a0_tol = cfg.get_double("a0_tol", 1e-4);
  cfg.check_all_consumed();

  Manifest mf;
  mf.config_echo(cfg);
  std::vector<SpectralSample> diag, off;
  for (double r : rho) {
    diag.push_back(nonsemiclassical_kernel(p, x, x, r, Nk));
    off.push_back(nonsemiclassical_kernel(p, x, x + dist, r, Nk));
  }
  ExpansionFit fit = fit_expansion_diag(diag, rho, N);
  OffdiagFit ofit = fit_expansion_offdiag(off, rho, 2);
  io::CsvWriter csv(out_dir + "/expansion.csv", {"k", "re", "im", "residual"});
  for (int k = 0; k < fit.coeffs_re.size(); ++k)
    csv.row({static_cast<double>(k), fit.coeffs_re(k), fit.coeffs_im(k),
             k < fit.residuals.size() ? fit.residuals(k) : 0.0});
  io::CsvWriter csv2(out_dir + "/offdiag.csv", {"j", "re_plus", "im_plus", "re_minus", "im_minus"});
  for (size_t j = 0; j < ofit.g_plus.size(); ++j)
    csv2.row({static_cast<double>(j), ofit.g_plus[j].real(), ofit.g_plus[j].imag(),
              ofit.g_minus[j].real(), ofit.g_minus[j].imag()});
  mf.check("a0_equals_inv_pi", std::fabs(fit.coeffs_re(0) - 1.0 / M_PI) <= a0_tol,
           fit.coeffs_re(0), 1.0 / M_PI);
  // g0^+ = 1/(2 i pi |x-y|) = -i/(2 pi |x-y|)
  const std::complex<double> g0_target(0.0, -1.0 / (2.0 * M_PI * dist));
  mf.check("g0_plus", std::abs(ofit.g_plus[0] - g0_target) <= 1e-3,
           std::abs(ofit.g_plus[0] - g0_target), 1e-3);
  return finalize(mf, out_dir);
}

RunResult run_gaps(const ExperimentConfig& cfg, const std::string& out_dir) {
  const TrigPotential p = potential_from_config(cfg);
  const double hbar = cfg.get_double("hbar", 1.0);
  const double lmax = cfg.get_double("lambda_max", 45.0);
  cfg.check_all_consumed();

  Manifest mf;
  mf.config_echo(cfg);
  std::vector<BandGap> gaps = band_gaps(p, hbar, 0.0, lmax);
  io::CsvWriter csv(out_dir + "/gaps.csv", {"index", "center", "width"});
  bool decreasing = true;
  for (size_t i = 0; i < gaps.size(); ++i) {
    csv.row({static_cast<double>(gaps[i].index), gaps[i].center, gaps[i].width});
    if (i > 0 && gaps[i].index > 3 && gaps[i].width >= gaps[i - 1].width) decreasing = false;
  }
  mf.check("widths_decreasing_beyond_3", decreasing, gaps.empty() ? 0.0 : gaps.back().width, 0.0);
  return finalize(mf, out_dir);
}

}  // namespace

std::vector<std::string> experiment_names() {
  return {"ldos", "gauge", "compare", "wave", "tauberian", "ode-energy", "lyapunov", "asymptotics",
          "gaps"};
}

RunResult run_experiment(const std::string& name, const ExperimentConfig& cfg,
                         const std::string& out_dir, int threads) {
  if (threads > 0) set_max_threads(threads);
  io::ensure_dir(out_dir);
  if (name == "ldos") return run_ldos(cfg, out_dir);
  if (name == "gauge") return run_gauge(cfg, out_dir);
  if (name == "compare") return run_compare(cfg, out_dir);
  if (name == "wave") return run_wave(cfg, out_dir);
  if (name == "tauberian") return run_tauberian(cfg, out_dir);
  if (name == "ode-energy") return run_ode_energy(cfg, out_dir);
  if (name == "lyapunov") return run_lyapunov(cfg, out_dir);
  if (name == "asymptotics") return run_asymptotics(cfg, out_dir);
  if (name == "gaps") return run_gaps(cfg, out_dir);
  throw ConfigError("unknown experiment: " + name);
}

}  // namespace speconion
