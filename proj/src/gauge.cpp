#include "speconion/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "speconion/bump.hpp"
#include "speconion/io.hpp"
#include "speconion/multiplier.hpp"

namespace speconion {

void PeelConfig::validate() const {
  if (!(window_a > 0.0 && window_b > window_a))
    throw std::invalid_argument("PeelConfig: need 0 < a < b");
  if (!(delta > 0.0 && delta < 0.5))
    throw std::invalid_argument("PeelConfig: delta must lie in (0, 1/2)");
  if (parallel_steps < 1 || series_order < 1 || max_layers < 1)
    throw std::invalid_argument("PeelConfig: counts must be positive");
  if (!(tol_rel > 0.0)) throw std::invalid_argument("PeelConfig: tolerance must be positive");
}

void GaugeLog::append(WeylSymbol g, LayerReport rep) {
  generators.push_back(std::move(g));
  reports.push_back(std::move(rep));
}

void GaugeLog::validate() const {
  for (size_t i = 1; i < reports.size(); ++i)
    if (!(reports[i].radius < reports[i - 1].radius))
      throw std::logic_error("GaugeLog: layer radii not strictly decreasing");
  for (const auto& g : generators)
    if (!g.real_flag && g.sup_abs() > 0.0)
      throw std::logic_error("GaugeLog: generator not real-flagged");
}

namespace {

// Zero rows that carry nothing above abs_tol, then drop empty outer rows;
// keeps the mode count from creeping up across conjugation steps.
void truncate_rows(WeylSymbol& s, double abs_tol) {
  for (int m = -s.mtheta; m <= s.mtheta; ++m) {
    auto r = s.values.row(m + s.mtheta);
    if (r.cwiseAbs().maxCoeff() < abs_tol) r.setZero();
  }
  s.trim_modes();
}

// Shared parallel-GT engine. theta_sel is the scale of the smooth selector:
// frequencies |theta| >= theta_sel are targeted (weight 1 above theta_sel,
// 0 below theta_sel/2). resid_floor is the frequency floor for the measured
// residual on the window.
PeelStepResult run_parallel_layer(const WeylSymbol& q, const PeelConfig& cfg, double tau_abs,
                                  double theta_sel, double resid_floor, int layer_index,
                                  double radius) {
  if (q.kinetic_weight != 0.0)
    throw std::invalid_argument("gauge: q must be the perturbation symbol (no kinetic part)");
  if (!q.real_flag) throw std::invalid_argument("gauge: q must be real-flagged");
  const double a = cfg.window_a, b = cfg.window_b;
  const double hbar = q.grid.hbar;
  const double trunc_tol = tau_abs * 1e-5;

  PeelStepResult out;
  out.g = WeylSymbol(q.grid, 0);
  out.g.real_flag = true;
  out.q1 = q;
  out.report.layer_index = layer_index;
  out.report.radius = radius;
  out.report.theta_floor = resid_floor;
  out.report.residuals.push_back(residual_norm(q, a, b, resid_floor));

  const double hard_floor = tau_abs * 1e-4;
  for (int step = 0; step < cfg.parallel_steps; ++step) {
    const double r_prev = out.report.residuals.back();
    if (r_prev <= tau_abs && !cfg.polish) break;
    if (r_prev <= hard_floor) break;

    // high-frequency part over the window (smooth theta-selector)
    WeylSymbol q_high(q.grid, out.q1.mtheta);
    bool any = false;
    for (int m = -out.q1.mtheta; m <= out.q1.mtheta; ++m) {
      const double w = 1.0 - plateau(out.q1.grid.theta(m), theta_sel / 2.0, theta_sel);
      if (w == 0.0) continue;
      q_high.values.row(m + q_high.mtheta) = w * out.q1.values.row(m + out.q1.mtheta);
      if (q_high.row_nonzero(m)) any = true;
    }
    if (!any) break;
    q_high.real_flag = out.q1.real_flag;

    WeylSymbol g_step = solve_homological(q_high, a, b, theta_sel / 2.0 * 0.999, 1e300);
    out.g = add(out.g, g_step);
    out.g.real_flag = true;
    out.report.generator_sup = std::max(out.report.generator_sup, out.g.sup_abs());

    // conjugate the original Hamiltonian xi^2 + hbar*q by the accumulated G
    WeylSymbol h = scale(q, hbar);
    h.kinetic_weight = 1.0;
    h.real_flag = q.real_flag;
    ConjugationResult conj = conjugate_series(h, out.g, cfg.series_order);
    out.report.remainder_estimate =
        std::max(out.report.remainder_estimate, conj.remainder_sup / hbar);

    out.q1 = conj.symbol;
    out.q1.kinetic_weight = 0.0;
    out.q1.values /= hbar;
    truncate_rows(out.q1, trunc_tol);
    out.q1.real_flag = true;

    const double r_new = residual_norm(out.q1, a, b, resid_floor);
    out.report.residuals.push_back(r_new);
    out.report.steps_used = step + 1;
    if (r_new > 0.5 * r_prev && r_new > tau_abs && r_prev > tau_abs) {
      std::ostringstream os;
      os << "gauge layer " << layer_index << ": residual not halving (step " << step
         << ": " << r_prev << " -> " << r_new << ", tau = " << tau_abs << ")";
      throw GaugeConvergenceError(os.str());
    }
  }

  for (size_t i = 0; i < out.report.residuals.size(); ++i) {
    if (out.report.residuals[i] <= tau_abs) {
      out.report.steps_to_tau = static_cast<int>(i);
      break;
    }
  }
  return out;
}

}  // namespace

PeelStepResult peel_layer0(const WeylSymbol& q, const PeelConfig& cfg) {
  cfg.validate();
  const double tau_abs = cfg.tol_rel * std::max(q.sup_abs(), 1e-300);
  return run_parallel_layer(q, cfg, tau_abs, 1.0, 1.0, -1, 1.0);
}

PeelStepResult peel_layer(const WeylSymbol& q, double r, double sn, const PeelConfig& cfg) {
  cfg.validate();
  if (!(r > 0.0 && sn > 0.0 && sn < 1.0))
    throw std::invalid_argument("peel_layer: need r > 0 and sn in (0,1)");
  const double tau_abs = cfg.tol_rel * std::max(q.sup_abs(), 1e-300);
  const double incoming = residual_norm(q, cfg.window_a, cfg.window_b, r);
  if (incoming > 10.0 * tau_abs) {
    std::ostringstream os;
    os << "peel_layer: incoming symbol not clean at |theta| >= " << r << " (residual " << incoming
       << ", tau " << tau_abs << ")";
    throw std::invalid_argument(os.str());
  }
  return run_parallel_layer(q, cfg, tau_abs, r * sn, r * sn, 0, r);
}

OnionPeelResult onion_peel(const WeylSymbol& q, const PeelConfig& cfg) {
  cfg.validate();
  const double lattice = 2.0 * M_PI / q.grid.L;
  if (!(lattice > 0.0)) throw std::invalid_argument("onion_peel: degenerate mode lattice");
  double theta_min = cfg.theta_min > 0.0 ? cfg.theta_min : 0.999 * lattice;
  if (theta_min < 0.999 * lattice)
    throw std::invalid_argument("onion_peel: theta_min below one mode-lattice spacing");

  const double sup0 = q.sup_abs();
  const double tau_abs = cfg.tol_rel * std::max(sup0, 1e-300);
  const double sn = std::pow(q.grid.hbar, cfg.delta);  // s_n = mu_n^-delta, mu_n ~ 1/hbar

  OnionPeelResult res;
  res.log.tau = tau_abs;

  PeelStepResult step = run_parallel_layer(q, cfg, tau_abs, 1.0, 1.0, -1, 1.0);
  WeylSymbol cur = step.q1;
  res.log.append(step.g, step.report);

  double cleaned = 1.0;
  int layer = 0;
  while (cleaned > theta_min * (1.0 + 1e-12)) {
    if (layer >= cfg.max_layers)
      throw GaugeConvergenceError("onion_peel: layer budget exhausted before theta_min");
    const double target = std::max(cleaned * sn, theta_min);
    const double sn_eff = target / cleaned;
    PeelStepResult ls = run_parallel_layer(cur, cfg, tau_abs, target, target, layer, cleaned);
    cur = ls.q1;
    // ordering property: previously cleaned annuli must stay clean
    for (const auto& rep : res.log.reports) {
      const double again = residual_norm(cur, cfg.window_a, cfg.window_b, rep.theta_floor);
      if (again > 10.0 * tau_abs) {
        std::ostringstream os;
        os << "onion_peel: layer " << layer << " reintroduced residual " << again
           << " above floor " << rep.theta_floor;
        throw GaugeConvergenceError(os.str());
      }
    }
    res.log.append(ls.g, ls.report);
    cleaned = target;
    ++layer;
    (void)sn_eff;
  }

  // final check: everything at theta != 0 is below tau on the window
  const double final_resid =
      residual_norm(cur, cfg.window_a, cfg.window_b, 0.999 * lattice);
  if (final_resid > 10.0 * tau_abs) {
    std::ostringstream os;
    os << "onion_peel: final residual " << final_resid << " exceeds tau " << tau_abs;
    throw GaugeConvergenceError(os.str());
  }

  // multiplier: theta = 0 slice restricted by the window cutoff
  const double a = cfg.window_a, b = cfg.window_b;
  const double tw = 0.15 * (b - a);
  res.multiplier = FourierMultiplier(q.grid, a + tw, b - tw);
  for (int i = -q.grid.nxi; i <= q.grid.nxi; ++i) {
    const double cut = plateau_interval(std::fabs(q.grid.xi(i)), a, b, tw);
    res.multiplier.values(i + q.grid.nxi) = cut * cur.at(0, i).real();
  }
  res.final_symbol = cur;
  res.log.validate();
  return res;
}

void save_gauge_log(const GaugeLog& log, const FourierMultiplier& mult, const std::string& dir) {
  io::ensure_dir(dir);
  std::vector<std::string> lines;
  lines.push_back("layers " + std::to_string(log.generators.size()));
  {
    char buf[64];
    std::snprintf(buf, sizeof buf, "tau %.17g", log.tau);
    lines.push_back(buf);
  }
  for (size_t j = 0; j < log.generators.size(); ++j) {
    const LayerReport& r = log.reports[j];
    std::ostringstream os;
    os.precision(17);
    os << "layer " << r.layer_index << " radius " << r.radius << " theta_floor " << r.theta_floor
       << " steps " << r.steps_used << " steps_to_tau " << r.steps_to_tau << " residual "
       << (r.residuals.empty() ? 0.0 : r.residuals.back()) << " remainder "
       << r.remainder_estimate;
    lines.push_back(os.str());
    io::write_symbol_dump(log.generators[j], dir + "/layer_" + std::to_string(j) + ".sym");
  }
  io::write_lines(dir + "/manifest.txt", lines);
  io::write_multiplier(mult, dir + "/multiplier.txt");
}

}  // namespace speconion
