// Acceptance suite: runs every criterion at its stated tolerance and prints
// one [PASS]/[FAIL] line per criterion. Exits non-zero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "nmbc/activation.hpp"
#include "nmbc/calibration.hpp"
#include "nmbc/curves.hpp"
#include "nmbc/exo_sim.hpp"
#include "nmbc/gait.hpp"
#include "nmbc/muscle.hpp"
#include "nmbc/synth.hpp"
#include "nmbc/torque.hpp"
#include "test_util.hpp"

using namespace nmbc;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

struct Criterion {
  std::string name;
  std::vector<std::string> problems;
  Clock::time_point start = Clock::now();

  explicit Criterion(std::string n) : name(std::move(n)) {}

  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }
  void finish() {
    if (problems.empty()) {
      std::printf("[PASS] %s (%.2fs)\n", name.c_str(), seconds());
    } else {
      ++failures;
      std::printf("[FAIL] %s (%.2fs)\n", name.c_str(), seconds());
      for (const auto& p : problems) std::printf("       - %s\n", p.c_str());
    }
    std::fflush(stdout);
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- C1
void c1_curve_fidelity() {
  Criterion c("C1 curve fidelity: published knots to 1e-9, fv(0)=1, < 1 s");
  const CurveSet& cs = CurveSet::defaults();
  const double ax[] = {-5,     0,       0.401,   0.402,   0.4035, 0.52725,
                       0.62875, 0.71875, 0.86125, 1.045,  1.2175, 1.43875,
                       1.61875, 1.62,    1.621,   2.2,    5};
  const double ay[] = {0, 0, 0, 0, 0, 0.226667, 0.636667, 0.856667,
                       0.95, 0.993333, 0.77, 0.246667, 0, 0, 0, 0, 0};
  const double px[] = {-5,  0.998, 0.999, 1,   1.1,   1.2,   1.3,
                       1.4, 1.5,   1.6,   1.601, 1.602, 5};
  const double py[] = {0, 0, 0, 0, 0.035, 0.12, 0.26, 0.55, 1.17, 2, 2, 2, 2};
  const double vx[] = {-10, -1, -0.6, -0.3, -0.1, 0, 0.1, 0.3, 0.6, 0.8, 10};
  const double vy[] = {0, 0, 0.08, 0.2, 0.55, 1, 1.4, 1.6, 1.7, 1.75, 1.75};
  for (int i = 0; i < 17; ++i) {
    c.require(std::abs(cs.active_fl.value(ax[i]) - ay[i]) <= 1e-9,
              "active knot " + fmt(ax[i]));
  }
  for (int i = 0; i < 13; ++i) {
    c.require(std::abs(cs.passive_fl.value(px[i]) - py[i]) <= 1e-9,
              "passive knot " + fmt(px[i]));
  }
  for (int i = 0; i < 11; ++i) {
    c.require(std::abs(cs.fv.value(vx[i]) - vy[i]) <= 1e-9, "fv knot " + fmt(vx[i]));
  }
  c.require(cs.fv.value(0.0) == 1.0, "fv(0) must be exactly 1");
  c.require(c.seconds() < 1.0, "runtime " + fmt(c.seconds()) + " s >= 1 s");
  c.finish();
}

// ---------------------------------------------------------------- C2
void c2_tendon_continuity() {
  Criterion c("C2 tendon piecewise continuity at eps = 0.0127 to 1e-4, < 1 s");
  const double linear = 37.5 * 0.0127 - 0.2375;
  const double toe = 0.06142 * std::expm1(124.929 * 0.0127);
  c.require(std::abs(linear - toe) <= 1e-4,
            "branch gap " + fmt(std::abs(linear - toe)) + " > 1e-4");
  c.require(std::abs(tendon_force_norm(0.0127) - toe) == 0.0, "toe branch at the cut-off");
  c.require(std::abs(tendon_force_norm(0.0127 + 1e-9) - linear) <= 1e-6,
            "linear branch just above the cut-off");
  c.require(c.seconds() < 1.0, "runtime >= 1 s");
  c.finish();
}

// ---------------------------------------------------------------- C3
void c3_activation() {
  Criterion c("C3 activation law: endpoints exact, A(0.5,-3)=0.8176+-1e-4, monotone x1e4");
  for (double e : {-3.0, -1.5, -0.5, -1e-3}) {
    c.require(activation(0.0, e) == 0.0, "A(0) != 0 at E=" + fmt(e));
    c.require(activation(1.0, e) == 1.0, "A(1) != 1 at E=" + fmt(e));
  }
  const long double indep = (std::exp(-1.5L) - 1.0L) / (std::exp(-3.0L) - 1.0L);
  c.require(std::abs(activation(0.5, -3.0) - double(indep)) <= 1e-12,
            "independent evaluation mismatch");
  c.require(std::abs(activation(0.5, -3.0) - 0.8176) <= 1e-4, "A(0.5,-3) != 0.8176 +- 1e-4");
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> uu(0.0, 1.0), ue(-3.0, -1e-3);
  for (int i = 0; i < 10000; ++i) {
    const double e = ue(rng);
    double u1 = uu(rng), u2 = uu(rng);
    if (u1 == u2) continue;
    if (u1 > u2) std::swap(u1, u2);
    if (!(activation(u1, e) < activation(u2, e))) {
      c.require(false, "monotonicity violated at E=" + fmt(e));
      break;
    }
  }
  c.finish();
}

// ---------------------------------------------------------------- C4
void c4_moment_arm_derivative() {
  Criterion c("C4 moment arm = length derivative to 1e-6 m/rad on 3 surrogate families");
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(-0.55, 0.55);
  const double h = 1e-5;

  auto grid1 = [](std::function<double(double)> fn) {
    GeometryGrid g;
    g.mtu = "t";
    g.dofs = {"q"};
    Eigen::VectorXd k(11);
    for (int i = 0; i < 11; ++i) k[i] = -0.6 + 1.2 * i / 10.0;
    g.knots = {k};
    g.lmt.resize(11, 1);
    for (int i = 0; i < 11; ++i) g.lmt(i, 0) = fn(k[i]);
    return g;
  };

  for (auto [label, fn] : std::vector<std::pair<std::string, std::function<double(double)>>>{
           {"constant", [](double) { return 0.4; }},
           {"affine", [](double x) { return 0.4 - 0.05 * x; }}}) {
    const auto s = GeometrySurrogate::fit(grid1(fn));
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng);
      const double lo[] = {x - h}, mid[] = {x}, hi[] = {x + h};
      const double fd = (s.lmt(hi) - s.lmt(lo)) / (2.0 * h);
      if (std::abs(s.dlmt_dtheta(mid, std::size_t{0}) - fd) > 1e-6) {
        c.require(false, label + " family FD mismatch at x=" + fmt(x));
        break;
      }
    }
  }

  GeometryGrid g2;
  g2.mtu = "t2";
  g2.dofs = {"a", "b"};
  Eigen::VectorXd ka(11), kb(11);
  for (int i = 0; i < 11; ++i) {
    ka[i] = -0.6 + 1.2 * i / 10.0;
    kb[i] = -0.6 + 1.2 * i / 10.0;
  }
  g2.knots = {ka, kb};
  g2.lmt.resize(11, 11);
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j)
      g2.lmt(i, j) = 0.5 - 0.03 * ka[i] - 0.02 * kb[j] + 0.01 * ka[i] * kb[j];
  const auto s2 = GeometrySurrogate::fit(g2);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng);
    const double alo[] = {a - h, b}, ahi[] = {a + h, b}, mid[] = {a, b};
    const double blo[] = {a, b - h}, bhi[] = {a, b + h};
    const double fda = (s2.lmt(ahi) - s2.lmt(alo)) / (2.0 * h);
    const double fdb = (s2.lmt(bhi) - s2.lmt(blo)) / (2.0 * h);
    if (std::abs(s2.dlmt_dtheta(mid, std::size_t{0}) - fda) > 1e-6 ||
        std::abs(s2.dlmt_dtheta(mid, std::size_t{1}) - fdb) > 1e-6) {
      c.require(false, "bilinear family FD mismatch");
      break;
    }
  }
  c.finish();
}

// ---------------------------------------------------------------- C5
double residual_of(double lm, double lmt, double v, double a, const MtuParams& p,
                   const CurveSet& cs) {
  const double alpha = pennation(lm, p);
  const double cos_a = std::cos(alpha);
  const double f_t = p.f_max_iso * tendon_force_norm(tendon_strain(lmt - lm * cos_a, p.l_slack));
  return f_t - fiber_force(lm / p.l_opt, v, a, p, cs) * cos_a;
}

void c5_equilibrium() {
  Criterion c("C5 equilibrium solver: residual <= 1e-6 Fmax x1e4; 1e6-point oracle x100; < 60 s");
  const CurveSet& cs = CurveSet::defaults();
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  long fallbacks = 0;
  for (int i = 0; i < 10000; ++i) {
    MtuParams p;
    p.shape_factor_E = -1.5;
    p.f_max_iso = 500.0 + 3000.0 * u01(rng);
    p.l_opt = 0.03 + 0.09 * u01(rng);
    p.l_slack = 0.10 + 0.30 * u01(rng);
    p.alpha_opt = 0.5 * u01(rng);
    const double a = u01(rng);
    const double v = -0.5 + u01(rng);
    const double lmt = p.l_slack * (1.0 + -0.01 + 0.05 * u01(rng)) +
                       p.l_opt * (0.6 + 0.8 * u01(rng)) * std::cos(p.alpha_opt);
    const MtuState s = solve_equilibrium(lmt, v, a, p, cs);
    if (s.status != SolveStatus::kConverged) {
      ++fallbacks;
      continue;
    }
    if (std::abs(s.residual) > 1e-6 * p.f_max_iso) {
      c.require(false, "residual " + fmt(s.residual) + " at draw " + fmt(i));
      break;
    }
  }
  c.require(fallbacks < 100, fmt(fallbacks) + " boundary fallbacks in 1e4 draws");

  for (int i = 0; i < 100; ++i) {
    MtuParams p;
    p.shape_factor_E = -1.5;
    p.f_max_iso = 1000.0 + 2000.0 * u01(rng);
    p.l_opt = 0.04 + 0.06 * u01(rng);
    p.l_slack = 0.15 + 0.2 * u01(rng);
    p.alpha_opt = 0.4 * u01(rng);
    const double a = 0.05 + 0.95 * u01(rng);
    const double lmt = p.l_slack * (1.0 + 0.03 * u01(rng)) +
                       p.l_opt * (0.7 + 0.6 * u01(rng)) * std::cos(p.alpha_opt);
    const MtuState s = solve_equilibrium(lmt, 0.0, a, p, cs);

    // 1e6-point scan for the sign change, then bisection.
    const double lo = 0.3 * p.l_opt, hi = 1.8 * p.l_opt;
    const long n = 1000000;
    double prev_x = lo, prev_f = residual_of(lo, lmt, 0.0, a, p, cs);
    double a0 = 0, b0 = 0;
    bool found = false;
    for (long k = 1; k <= n; ++k) {
      const double x = lo + (hi - lo) * double(k) / double(n);
      const double f = residual_of(x, lmt, 0.0, a, p, cs);
      if ((prev_f > 0.0) != (f > 0.0)) {
        a0 = prev_x;
        b0 = x;
        found = true;
        break;
      }
      prev_x = x;
      prev_f = f;
    }
    if (!found) {
      c.require(false, "oracle found no sign change on case " + fmt(i));
      continue;
    }
    double fa = residual_of(a0, lmt, 0.0, a, p, cs);
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a0 + b0);
      const double fm = residual_of(m, lmt, 0.0, a, p, cs);
      if ((fa > 0.0) == (fm > 0.0)) {
        a0 = m;
        fa = fm;
      } else {
        b0 = m;
      }
    }
    if (std::abs(s.fiber_length - 0.5 * (a0 + b0)) > 1e-6) {
      c.require(false, "oracle disagreement " + fmt(std::abs(s.fiber_length - 0.5 * (a0 + b0))) +
                           " m on case " + fmt(i));
    }
  }
  c.require(c.seconds() < 60.0, "runtime " + fmt(c.seconds()) + " s >= 60 s");
  c.finish();
}

// ---------------------------------------------------------------- C6
void c6_calibration() {
  Criterion c("C6 calibration self-consistency: RMSE <= 5% peak, boxes, determinism; < 5 min");
  const SynthModel truth = make_synth_model(SynthSpec::Layout::kAnkle2, true);
  const SynthModel start = make_synth_model(SynthSpec::Layout::kAnkle2, false);

  SynthSpec spec;
  spec.duration_s = 6.0;
  spec.rate_hz = 100.0;
  spec.noise = 0.0;
  CalibrationDataset ds;
  ds.dofs = {"ankle_r"};
  for (int k = 0; k < 2; ++k) {
    const SynthTrial t = synth_trial(spec, truth.model, k);
    ds.trials.push_back({t.angles, t.emg, t.tau_id});
  }

  double peak = 0.0;
  for (const auto& t : ds.trials) peak = std::max(peak, t.tau_id.values.cwiseAbs().maxCoeff());

  SaOptions opts;
  opts.seed = 7;
  opts.max_evals = 4000;
  const CalibrationResult res = calibrate_sa(ds, start.model, opts);

  c.require(res.final_objective <= res.initial_objective, "objective increased");
  c.require(res.rmse_per_dof[0] <= 0.05 * peak,
            "RMSE " + fmt(res.rmse_per_dof[0]) + " > 5% of peak " + fmt(peak));
  for (std::size_t i = 0; i < res.params.size(); ++i) {
    const MtuParams& p = res.params[i];
    const MtuParams& init = start.model.mtus[i].params;
    c.require(p.shape_factor_E >= -3.0 && p.shape_factor_E <= -1e-3, "E outside [-3, -1e-3]");
    c.require(p.f_max_iso >= 0.5 * init.f_max_iso && p.f_max_iso <= 1.5 * init.f_max_iso,
              "F scale outside [0.5, 1.5]");
    c.require(p.l_opt >= 0.975 * init.l_opt && p.l_opt <= 1.025 * init.l_opt,
              "l_opt outside +-2.5%");
    c.require(p.l_slack >= 0.95 * init.l_slack && p.l_slack <= 1.05 * init.l_slack,
              "l_slack outside +-5%");
  }

  const CalibrationResult res2 = calibrate_sa(ds, start.model, opts);
  bool identical = res2.final_objective == res.final_objective && res2.evals == res.evals;
  for (std::size_t i = 0; identical && i < res.params.size(); ++i) {
    identical = res2.params[i].shape_factor_E == res.params[i].shape_factor_E &&
                res2.params[i].f_max_iso == res.params[i].f_max_iso &&
                res2.params[i].l_opt == res.params[i].l_opt &&
                res2.params[i].l_slack == res.params[i].l_slack;
  }
  c.require(identical, "same seed did not reproduce the result bit-exactly");
  c.require(c.seconds() < 300.0, "runtime " + fmt(c.seconds()) + " s >= 5 min");
  c.finish();
}

// ---------------------------------------------------------------- C7
void c7_pretune() {
  Criterion c("C7 pretune: identity objective <= 1e-10 m^2; 1.1x vs 200x200 grid within 1%");
  const SynthModel sm = make_synth_model(SynthSpec::Layout::kAnkle2, false);
  for (const auto& mtu : sm.model.mtus) {
    const auto samples = make_pretune_samples(sm.model, mtu.name, sm.model.surrogate(mtu.name));
    const PretuneResult r = pretune(samples, mtu.params);
    c.require(r.objective <= 1e-10,
              mtu.name + " identity objective " + fmt(r.objective) + " > 1e-10");
  }

  const auto& sol = sm.model.mtus[0];
  GeometryGrid g;
  for (const auto& grid : sm.grids) {
    if (grid.mtu == sol.name) g = grid;
  }
  g.lmt *= 1.1;
  const auto scaled = GeometrySurrogate::fit(g);
  const auto samples = make_pretune_samples(sm.model, sol.name, scaled);
  const PretuneResult r = pretune(samples, sol.params);
  c.require(std::abs(r.l_opt - 1.1 * sol.params.l_opt) <= 0.01 * 1.1 * sol.params.l_opt,
            "l_opt " + fmt(r.l_opt) + " not within 1% of 1.1x nominal");
  c.require(std::abs(r.l_slack - 1.1 * sol.params.l_slack) <= 0.01 * 1.1 * sol.params.l_slack,
            "l_slack " + fmt(r.l_slack) + " not within 1% of 1.1x nominal");

  // Exhaustive 200x200 scan bracketing both the nominal and the 1.1x answer.
  double best_lo = 0, best_ls = 0, best = 1e300;
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      const double lo = sol.params.l_opt * (0.9 + 0.4 * double(i) / 199.0);
      const double ls = sol.params.l_slack * (0.9 + 0.4 * double(j) / 199.0);
      double obj = 0.0;
      for (const auto& s : samples) {
        const double d = s.lmt_scaled - pretune_predicted_lmt(s, lo, ls);
        obj += d * d;
      }
      if (obj < best) {
        best = obj;
        best_lo = lo;
        best_ls = ls;
      }
    }
  }
  c.require(std::abs(r.l_opt - best_lo) <= 0.01 * best_lo, "grid oracle l_opt disagreement");
  c.require(std::abs(r.l_slack - best_ls) <= 0.01 * best_ls, "grid oracle l_slack disagreement");
  c.require(r.objective <= best, "optimizer worse than the exhaustive scan");
  c.finish();
}

// ---------------------------------------------------------------- C8
Trace channel_fn(const std::string& name, double dur, const std::function<double(double)>& fn) {
  const auto n = static_cast<Eigen::Index>(dur * 1000.0) + 1;
  Trace t;
  t.time.resize(n);
  t.channels = {name};
  t.values.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.time[i] = double(i) * 1e-3;
    t.values(i, 0) = fn(t.time[i]);
  }
  return t;
}

void c8_exo_sim() {
  Criterion c("C8 exo-sim: sine+strikes RMS <= 2 N*m, step settles <= 150 ms, 5x5 env grid");
  const auto strikes = [](double t) {
    const double p = t - std::floor(t);
    double v = 0.25 * std::sin(2.0 * std::numbers::pi * t);
    if (p < 0.06) v -= 0.05 * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * p / 0.06));
    return v;
  };

  const SimResult sine = simulate(
      SeaPlant{}, DobController{},
      channel_fn("tau_ref", 8.0,
                 [](double t) { return 20.0 * std::sin(2.0 * std::numbers::pi * t); }),
      channel_fn("angle", 8.0, strikes));
  c.require(sine.tracking_rms <= 2.0, "tracking RMS " + fmt(sine.tracking_rms) + " > 2 N*m");

  const SimResult step = simulate(
      SeaPlant{}, DobController{},
      channel_fn("tau_ref", 2.0, [](double t) { return t >= 0.5 ? 10.0 : 0.0; }),
      channel_fn("angle", 2.0, [](double) { return 0.0; }));
  const Eigen::VectorXd exo = step.series.col("tau_exo");
  Eigen::Index settle = -1;
  for (Eigen::Index i = 500; i < exo.size(); ++i) {
    bool stays = true;
    for (Eigen::Index j = i; j < exo.size(); ++j) {
      if (std::abs(exo[j] - 10.0) > 0.2) {
        stays = false;
        break;
      }
    }
    if (stays) {
      settle = i;
      break;
    }
  }
  c.require(settle >= 0 && step.series.time[settle] - 0.5 <= 0.150,
            settle < 0 ? "never settled" : "settling " + fmt(step.series.time[settle] - 0.5) + " s");

  const Trace pulse =
      channel_fn("tau_ref", 3.0, [](double t) { return t >= 0.2 && t < 0.7 ? 15.0 : 0.0; });
  const double stiffness[] = {0.0, 50.0, 200.0, 800.0, 3000.0};
  const double damping[] = {0.5, 1.0, 5.0, 20.0, 100.0};
  for (double ke : stiffness) {
    for (double de : damping) {
      try {
        const SimResult res =
            simulate_passive_env(SeaPlant{}, DobController{}, pulse, PassiveEnv{0.1, ke, de});
        const Eigen::VectorXd e = res.series.col("tau_exo");
        const double early = e.segment(700, 600).cwiseAbs().maxCoeff();
        const double late = e.tail(600).cwiseAbs().maxCoeff();
        if (late > std::max(0.5, 0.5 * early)) {
          c.require(false, "oscillations not decaying at k=" + fmt(ke) + " d=" + fmt(de));
        }
      } catch (const std::exception& e) {
        c.require(false, std::string("divergence: ") + e.what());
      }
    }
  }
  c.finish();
}

// ---------------------------------------------------------------- C9
void c9_assistance() {
  Criterion c("C9 assistance shaping: support-ratio linearity and the 40 N*m cap, exact");
  AssistanceConfig cfg;
  cfg.support_ratio = 0.7;
  c.require(shape_assistance(80.0, cfg) == 40.0, "clamp(0.7*80) != 40");
  c.require(shape_assistance(-80.0, cfg) == -40.0, "clamp(-56) != -40");
  cfg.support_ratio = 1.0;
  c.require(shape_assistance(30.0, cfg) == 30.0, "identity at ratio 1");
  c.require(shape_assistance(41.0, cfg) == 40.0, "cap at ratio 1");
  cfg.support_ratio = 0.0;
  c.require(shape_assistance(123.4, cfg) == 0.0, "ratio 0 is not zero");

  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> tau(-50.0, 50.0), ratio(0.0, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const double t = tau(rng);
    const double s = ratio(rng);
    AssistanceConfig c1, c2;
    c1.support_ratio = s;
    c2.support_ratio = 2.0 * s;
    const double a1 = shape_assistance(t, c1);
    const double a2 = shape_assistance(t, c2);
    if (std::abs(a2) < 40.0 && a2 != 2.0 * a1) {
      c.require(false, "doubling the ratio did not double the torque bitwise");
      break;
    }
  }
  c.finish();
}

// ---------------------------------------------------------------- C10
void c10_throughput() {
  Criterion c("C10 pipeline >= 1000 frames/s on the 14-MTU model; causal prefix bit-exact");
  const SynthModel sm = make_synth_model(SynthSpec::Layout::kBilateral14, true);
  SynthSpec spec;
  spec.duration_s = 10.0;
  spec.rate_hz = 1000.0;
  spec.layout = SynthSpec::Layout::kBilateral14;
  const SynthTrial trial = synth_trial(spec, sm.model, 0);

  const auto t0 = Clock::now();
  const Trace out =
      run_pipeline(sm.model, trial.emg, trial.angles, AssistanceConfig{}, 1000.0);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const double fps = double(out.rows()) / secs;
  c.require(fps >= 1000.0, "throughput " + fmt(fps) + " frames/s < 1000");

  const Eigen::Index cut = 1500;
  Trace angles_cut = trial.angles, emg_cut = trial.emg;
  angles_cut.time = trial.angles.time.head(cut).eval();
  angles_cut.values = trial.angles.values.topRows(cut).eval();
  emg_cut.time = trial.emg.time.head(cut).eval();
  emg_cut.values = trial.emg.values.topRows(cut).eval();
  const Trace prefix =
      run_pipeline(sm.model, emg_cut, angles_cut, AssistanceConfig{}, 1000.0);
  bool exact = prefix.rows() == cut;
  for (Eigen::Index i = 0; exact && i < cut; ++i) {
    for (Eigen::Index k = 0; k < out.cols(); ++k) {
      if (prefix.values(i, k) != out.values(i, k)) {
        exact = false;
        break;
      }
    }
  }
  c.require(exact, "prefix run is not bit-identical");
  c.finish();
}

// ---------------------------------------------------------------- C11
void c11_gait() {
  Criterion c("C11 gait analysis: peak count, sine RMS, outlier fence, percent change");
  const auto n = static_cast<Eigen::Index>(10.0 * 1000.0) + 1;
  Trace t;
  t.time.resize(n);
  t.channels = {"knee_r"};
  t.values.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.time[i] = double(i) * 1e-3;
    t.values(i, 0) = std::sin(2.0 * std::numbers::pi * t.time[i]);
  }
  PeakOptions opts;
  opts.min_period_s = 0.5;
  const auto cycles = segment(t, "knee_r", opts);
  c.require(cycles.size() == 9, "expected 9 cycles, got " + fmt(double(cycles.size())));
  for (const auto& cy : cycles) {
    if (std::abs(cy.rms[0] - 1.0 / std::sqrt(2.0)) > 0.01 / std::sqrt(2.0)) {
      c.require(false, "cycle RMS " + fmt(cy.rms[0]) + " not 1/sqrt(2) +- 1%");
      break;
    }
  }
  const auto kept = remove_outliers({1, 1, 1, 1, 100});
  c.require(kept == std::vector<double>{1, 1, 1, 1}, "outlier fence on {1,1,1,1,100}");

  ConditionSummary a, b;
  a.channels = b.channels = {"x"};
  a.mean_rms.resize(1);
  b.mean_rms.resize(1);
  // 0.75 and 1.0 are exactly representable: -25% must come out bit-exact.
  a.mean_rms << 0.75;
  b.mean_rms << 1.0;
  c.require(percent_change(a, b)[0] == -25.0, "percent change not exact on exact inputs");
  a.mean_rms << 0.78;
  c.require(std::abs(percent_change(a, b)[0] - -22.0) <= 1e-12,
            "percent change formula mismatch");
  c.finish();
}

// ---------------------------------------------------------------- C12
int shell(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

void c12_end_to_end() {
  Criterion c("C12 end-to-end: synth -> calibrate -> run -> analyze < 5 min, assisted change < 0");
  TempDir tmp;
  const std::string cli = NMBC_CLI_PATH;
  const std::string base = tmp.path.string();

  bool ok = true;
  ok = ok && shell(cli + " synth --out " + base + "/non --seed 7 --duration 6 --rate 100") == 0;
  ok = ok && shell(cli + " synth --out " + base + "/asst --seed 7 --duration 6 --rate 100" +
                   " --emg-scale 0.8") == 0;
  c.require(ok, "synth failed");

  if (ok) {
    ok = shell(cli + " calibrate --dataset " + base + "/non --model " + base +
               "/non/model.json --seed 7 --max-evals 2500 --out " + base + "/cal.json") == 0;
    c.require(ok, "calibrate failed");
  }
  if (ok) {
    for (const char* cond : {"non", "asst"}) {
      ok = ok && shell(cli + " run --model " + base + "/cal.json --emg " + base + "/" + cond +
                       "/trials/trial1_emg.csv --angles " + base + "/" + cond +
                       "/trials/trial1_angles.csv --support-ratio 0.5 --rate 100 --out " +
                       base + "/" + cond + "_tau.csv") == 0;
    }
    c.require(ok, "run failed");
  }
  if (ok) {
    write_file(tmp.file("session.json"), R"({
      "knee_channel": "knee_r",
      "channels": ["ankle_r_tau_bio"],
      "baseline": "nonassisted",
      "min_period_s": 0.8,
      "conditions": [
        {"label": "nonassisted", "traces": ["non/trials/trial1_angles.csv", "non_tau.csv"]},
        {"label": "assisted", "traces": ["asst/trials/trial1_angles.csv", "asst_tau.csv"]}
      ]
    })");
    ok = shell(cli + " analyze --session " + base + " --out " + base + "/report.csv") == 0;
    c.require(ok, "analyze failed");
  }

  if (ok) {
    // Find the assisted ankle torque percent change in the report.
    std::ifstream in(tmp.file("report.csv"));
    std::string line;
    std::getline(in, line);
    bool found = false;
    double change = 0.0;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string cond, chan, rms, before, after, pc;
      std::getline(ss, cond, ',');
      std::getline(ss, chan, ',');
      std::getline(ss, rms, ',');
      std::getline(ss, before, ',');
      std::getline(ss, after, ',');
      std::getline(ss, pc, ',');
      if (cond == "assisted" && chan == "ankle_r_tau_bio" && !pc.empty()) {
        change = std::stod(pc);
        found = true;
      }
    }
    c.require(found, "report has no assisted percent change");
    if (found) {
      c.require(change < 0.0, "assisted percent change " + fmt(change) + " not negative");
    }
  }
  c.require(c.seconds() < 300.0, "runtime " + fmt(c.seconds()) + " s >= 5 min");
  c.finish();
}

}  // namespace

int main() {
  c1_curve_fidelity();
  c2_tendon_continuity();
  c3_activation();
  c4_moment_arm_derivative();
  c5_equilibrium();
  c6_calibration();
  c7_pretune();
  c8_exo_sim();
  c9_assistance();
  c10_throughput();
  c11_gait();
  c12_end_to_end();
  if (failures == 0) {
    std::printf("All acceptance criteria passed.\n");
  } else {
    std::printf("%d criterion(s) FAILED.\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
