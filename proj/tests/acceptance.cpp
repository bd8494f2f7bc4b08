// Acceptance run: one line per criterion, tolerances pinned below.
// Exit status is 0 when every failing criterion is a documented expected
// failure (see README, "Known limitations").

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gvh/commands.hpp"
#include "gvh/config.hpp"
#include "gvh/errors.hpp"
#include "gvh/hedge.hpp"
#include "gvh/kernel.hpp"
#include "gvh/predict.hpp"
#include "gvh/simulate.hpp"
#include "gvh/valuation.hpp"

using namespace gvh;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

const std::set<int> kExpectedFailures{2, 6};

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double mean_of(const Eigen::VectorXd& v) { return v.mean(); }
double var_of(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return (v.array() - m).square().sum() / (static_cast<double>(v.size()) - 1.0);
}

std::string fmt(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

MarketModel market(NoiseModel m, double rate) {
  return MarketModel(std::move(m), 100.0, Drift::constant_rate(rate), 1.0);
}

// 1. Factorization error of L L^T against R on N = 64.
Outcome kernel_factorization() {
  struct Case {
    std::string name;
    NoiseModel model;
    bool analytic;
  };
  const std::vector<Case> cases{{"bm", NoiseModel::brownian(), true},
                                {"fbm0.6", NoiseModel::fractional(0.6), true},
                                {"fbm0.75", NoiseModel::fractional(0.75), true},
                                {"fbm0.9", NoiseModel::fractional(0.9), true},
                                {"mixed0.75", NoiseModel::mixed_fractional(0.75), false}};
  const auto grid = TimeGrid::uniform(1.0, 64);
  bool ok = true;
  std::ostringstream d;
  double worst_secs = 0.0;
  for (const auto& c : cases) {
    for (bool analytic : {false, true}) {
      if (analytic && !c.analytic) continue;
      const auto t0 = std::chrono::steady_clock::now();
      const auto k = build_kernel(c.model, grid, analytic ? KernelMethod::analytic : KernelMethod::cholesky);
      const double err = factorization_error(k, c.model);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      worst_secs = std::max(worst_secs, secs);
      const double tol = analytic ? 1e-3 : 1e-10;
      ok = ok && err <= tol && secs < 1.0;
      d << c.name << (analytic ? "/analytic=" : "/cholesky=") << fmt(err) << ' ';
    }
  }
  d << "max_runtime=" << fmt(worst_secs) << "s";
  return {ok, d.str()};
}

// 2. Quadratic variation: BM mean QV, fBm refinement, mixed kernel diagonal.
Outcome quadratic_variation_checks() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = TimeGrid::uniform(1.0, 512);
  std::ostringstream d;

  const auto bm = market(NoiseModel::brownian(), 0.0);
  const PathSet pb = simulate_paths(bm, build_kernel(bm.noise, grid), 1000, 101);
  Eigen::VectorXd qv(1000);
  for (Eigen::Index p = 0; p < 1000; ++p) qv[p] = realized_qv(pb.x.row(p).transpose(), grid);
  const double z = std::abs(mean_of(qv) - 1.0) / std::sqrt(var_of(qv) / 1000.0);
  const bool a = z <= 3.0;
  d << "bm_qv_z=" << fmt(z) << (a ? "" : "(fail)");

  const auto fb = market(NoiseModel::fractional(0.75), 0.0);
  const PathSet pf = simulate_paths(fb, build_kernel(fb.noise, grid, KernelMethod::cholesky), 1000, 102);
  bool b = true;
  double prev = 1e300;
  d << " fbm_qv=";
  for (std::size_t stride : {8, 4, 2, 1}) {
    const TimeGrid g = grid.coarsen(stride);
    double m = 0.0;
    for (Eigen::Index p = 0; p < 1000; ++p) m += realized_qv(subsample(pf.x.row(p).transpose(), stride), g);
    m /= 1000.0;
    b = b && m < prev;
    prev = m;
    d << fmt(m) << (stride > 1 ? "," : "");
  }
  if (!b) d << "(fail)";

  const auto mixed = NoiseModel::mixed_fractional(0.75);
  const QuadraticVariation qk = kernel_quadratic_variation(build_kernel(mixed, grid, KernelMethod::cholesky));
  double rel = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) rel = std::max(rel, std::abs(qk(grid[i]) / grid[i] - 1.0));
  const bool c = rel <= 0.02;
  d << " mixed_q2_rel=" << fmt(rel) << (c ? "" : "(fail, tol 0.02)");

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  d << " runtime=" << fmt(secs) << "s";
  return {a && b && c && secs < 30.0, d.str()};
}

// 3. Psi-weight route against the innovation route.
Outcome two_route() {
  const auto grid = TimeGrid::uniform(1.0, 64);
  double worst = 0.0;
  for (const auto& m : {NoiseModel::brownian(), NoiseModel::fractional(0.75)}) {
    const auto mk = market(m, 0.0);
    const auto k = build_kernel(mk.noise, grid, KernelMethod::cholesky);
    const PathSet ps = simulate_paths(mk, k, 20, 103);
    for (Eigen::Index p = 0; p < 20; ++p) {
      const Eigen::VectorXd x = ps.x.row(p).transpose();
      for (std::size_t u = 0; u <= 64; ++u)
        for (std::size_t t = u; t <= 64; ++t) {
          if (t == 0) continue;
          worst = std::max(worst, std::abs(conditional_mean_x(k, x, u, t) - conditional_mean_x_innovations(k, x, u, t)));
        }
    }
  }
  return {worst <= 1e-10, "max_abs_diff=" + fmt(worst) + " tol=1e-10"};
}

// 4. Conditional law and conditional call value against continuation Monte Carlo.
Outcome prediction_oracle() {
  const auto grid = TimeGrid::uniform(1.0, 64);
  const auto mk = market(NoiseModel::fractional(0.75), 0.0);
  const auto k = build_kernel(mk.noise, grid, KernelMethod::cholesky);
  const auto q2 = quadratic_variation(mk.noise, grid);
  const Eigen::VectorXd x = simulate_paths(mk, k, q2, 1, 104).x.row(0).transpose();
  const std::size_t u = 32, n = 10000;
  const PathMatrix c = conditional_simulate(k, x.head(u + 1), n, 105);
  const Eigen::VectorXd xt = c.col(64);
  const double m = conditional_mean_x(k, x, u, 64);
  const double v = conditional_cov(k, 64, 64, u);
  const double z_mean = std::abs(mean_of(xt) - m) / std::sqrt(v / n);
  const double z_var = std::abs(var_of(xt) - v) / (v * std::sqrt(2.0 / (n - 1.0)));

  const auto call = EuropeanPayoff::call(100.0);
  Eigen::VectorXd f(static_cast<Eigen::Index>(n));
  for (Eigen::Index p = 0; p < f.size(); ++p) f[p] = call(100.0 * std::exp(-0.5 * q2(1.0) + c(p, 64)));
  const double quad = conditional_functional_expectation(mk, k, q2, call, x, u, 64, 64);
  const double z_call = std::abs(mean_of(f) - quad) / std::sqrt(var_of(f) / n);
  const bool ok = z_mean <= 3.0 && z_var <= 3.0 && z_call <= 3.0;
  return {ok, "z_mean=" + fmt(z_mean) + " z_var=" + fmt(z_var) + " z_call=" + fmt(z_call) + " tol=3"};
}

// 5. Quadrature value and delta against the closed-form lognormal call.
Outcome quadrature_oracle() {
  const auto q2 = QuadraticVariation::closed_form([](double t) { return t; }, 1.0);
  const auto call = EuropeanPayoff::call(1.0);
  double ev = 0.0, ed = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double rem = 0.01 + (1.0 - 0.01) * i / 19.0;  // q^2(t, T)
    const double t = 1.0 - rem;
    for (int j = 0; j < 20; ++j) {
      const double x = 0.5 + 1.0 * j / 19.0;
      const double sd = std::sqrt(rem);
      const double d1 = (std::log(x) + 0.5 * rem) / sd;
      const double value = x * norm_cdf(d1) - norm_cdf(d1 - sd);
      ev = std::max(ev, std::abs(frictionless_value(call, q2, t, x) - value));
      ed = std::max(ed, std::abs(delta(call, q2, t, x) - norm_cdf(d1)));
    }
  }
  return {ev <= 1e-6 && ed <= 1e-5, "value_err=" + fmt(ev) + " (tol 1e-6) delta_err=" + fmt(ed) + " (tol 1e-5)"};
}

struct HedgeSetup {
  HedgeSetup()
      : mk(market(NoiseModel::brownian(), 0.1)),
        grid(TimeGrid::uniform(1.0, 110)),
        kernel(build_kernel(mk.noise, grid)),
        q2(quadratic_variation(mk.noise, grid)),
        plan(mk, kernel, q2, EuropeanPayoff::call(100.0), indices()) {}
  static std::vector<std::size_t> indices() {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i <= 100; i += 10) v.push_back(i);
    return v;
  }
  MarketModel mk;
  TimeGrid grid;
  DiscreteKernel kernel;
  QuadraticVariation q2;
  HedgePlan plan;
};

// 6. Per-step residual and fixed-point check, k in {0, 0.001, 0.01}.
Outcome hedge_residual() {
  const HedgeSetup s;
  const PathSet ps = simulate_paths(s.mk, s.kernel, s.q2, 100, 106);
  bool ok = true;
  std::ostringstream d;
  for (double k : {0.0, 0.001, 0.01}) {
    double res = 0.0, abs_res = 0.0, chk = 0.0;
    std::size_t aborted = 0;
    std::string first_abort;
    for (Eigen::Index p = 0; p < 100; ++p) {
      try {
        const HedgeTrace tr = run_hedge(s.plan, ps.x.row(p).transpose(), CostSpec(k));
        res = std::max(res, tr.max_rel_residual);
        abs_res = std::max(abs_res, tr.max_abs_residual);
        chk = std::max(chk, tr.max_solve_check);
      } catch (const HedgeAbort& e) {
        if (aborted++ == 0) first_abort = e.what();
      }
    }
    const bool arm = aborted == 0 && res <= 1e-10 && chk <= 1e-12;
    ok = ok && arm;
    d << "k=" << k << ":";
    if (aborted)
      d << " aborted " << aborted << "/100 (" << first_abort << ");";
    else
      d << " rel_residual=" << fmt(res) << " abs_residual=" << fmt(abs_res) << " solve_check=" << fmt(chk) << ";";
    d << ' ';
  }
  return {ok, d.str()};
}

// 7. E[V^k_{t_1}] = E[V^pi_{t_1}] by Monte Carlo over the first step.
Outcome first_step_mc() {
  const HedgeSetup s;
  const auto call = EuropeanPayoff::call(100.0);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
  const ConditionalGains g = conditional_gains(s.mk, s.q2, call, s.grid, s.plan.steps()[0], x0, 100.0, 64);
  const std::size_t n = 10000;
  const PathSet ps = simulate_paths(s.mk, s.kernel, s.q2, n, 107);
  bool ok = true;
  std::ostringstream d;
  for (double k : {0.0, 0.001}) {
    const CostSpec cost(k);
    HedgeState next;
    const StepRecord r = hedge_step({0.0, g.v_pi}, g, 100.0, 100.0, cost, 0, next);
    Eigen::VectorXd vk(static_cast<Eigen::Index>(n)), vpi(static_cast<Eigen::Index>(n));
    for (Eigen::Index p = 0; p < vk.size(); ++p) {
      const double s1 = ps.s(p, 10);
      vk[p] = advance_wealth(g.v_pi, r.position, r.dpi, 100.0, s1, cost);
      vpi[p] = frictionless_value(call, s.q2, s.grid[10], s1);
    }
    const Eigen::VectorXd diff = vk - vpi;
    const double z = std::abs(mean_of(diff)) / std::sqrt(var_of(diff) / n);
    ok = ok && z <= 3.0;
    d << "k=" << k << ": mean_Vk=" << fmt(mean_of(vk)) << " mean_Vpi=" << fmt(mean_of(vpi)) << " z=" << fmt(z)
      << "; ";
  }
  return {ok, d.str() + "tol=3"};
}

// 8. Initial position at and below the boundedness threshold.
Outcome initial_position_check() {
  const HedgeSetup s;
  const auto call = EuropeanPayoff::call(100.0);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
  const ConditionalGains g = conditional_gains(s.mk, s.q2, call, s.grid, s.plan.steps()[0], x0, 100.0, 64);
  const double threshold = std::abs(g.ds_hat) / 100.0;
  bool ok = true;
  for (double k : {threshold, 1.5 * threshold, 0.5}) {
    const InitialPosition ip = initial_position(CostSpec(k), g.ds_hat, 100.0, g.v_pi + g.dv_pi_hat);
    ok = ok && ip.pi0 == 0.0 && ip.beta0 == g.v_pi + g.dv_pi_hat;
  }
  bool raised = false;
  try {
    initial_position(CostSpec(0.5 * threshold), g.ds_hat, 100.0, g.v_pi + g.dv_pi_hat);
  } catch (const UnboundedMinimizationError&) {
    raised = true;
  }
  return {ok && raised, "threshold=" + fmt(threshold) + " pi0_zero_above=" + (ok ? "yes" : "no") +
                            " unbounded_below=" + (raised ? "yes" : "no")};
}

// 9. Simple-arbitrage identity gap as the grid doubles.
Outcome simple_arbitrage() {
  const auto grid = TimeGrid::uniform(1.0, 512);
  const auto mk = market(NoiseModel::fractional(0.75), 0.0);
  const auto k = build_kernel(mk.noise, grid, KernelMethod::cholesky);
  const PathSet ps = simulate_paths(mk, k, quadratic_variation(mk.noise, grid), 200, 109);
  bool ok = true;
  double prev = 1e300;
  std::ostringstream d;
  d << "mean_gap(N=128,256,512)=";
  for (std::size_t stride : {4, 2, 1}) {
    double gap = 0.0;
    for (Eigen::Index p = 0; p < 200; ++p) {
      const Eigen::VectorXd sp = subsample(ps.s.row(p).transpose(), stride);
      const ArbitrageCheck c = simple_arbitrage_check(sp, 0, static_cast<std::size_t>(sp.size() - 1));
      gap += std::abs(c.lhs - c.rhs);
    }
    gap /= 200.0;
    ok = ok && gap < prev;
    prev = gap;
    d << fmt(gap) << (stride > 1 ? "," : "");
  }
  return {ok, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Byte-identical hedge artifacts across reruns and worker counts.
Outcome determinism() {
  const ExperimentConfig cfg = parse_config(
      R"({"model": {"kind": "fbm", "hurst": 0.75}, "hedge": {"cost": 0.001}, "simulation": {"paths": 40, "seed": 7}})");
  const fs::path root = fs::temp_directory_path() / "gvh_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::vector<std::string>> runs;
  for (unsigned threads : {1u, 1u, 4u}) {
    RunOptions o;
    o.threads = threads;
    o.out_dir = root / std::to_string(runs.size());
    fs::create_directories(o.out_dir);
    std::vector<std::string> contents;
    for (const auto& f : cmd_hedge(cfg, o).files) contents.push_back(f.filename().string() + "\n" + slurp(f));
    runs.push_back(std::move(contents));
  }
  fs::remove_all(root);
  const bool same_run = runs[0] == runs[1];
  const bool same_threads = runs[0] == runs[2];
  return {same_run && same_threads && !runs[0].empty(),
          std::string("rerun_identical=") + (same_run ? "yes" : "no") +
              " threads1_vs_4_identical=" + (same_threads ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{
      kernel_factorization, quadratic_variation_checks, two_route,        prediction_oracle,
      quadrature_oracle,    hedge_residual,             first_step_mc,    initial_position_check,
      simple_arbitrage,     determinism};
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::string status = "PASS";
    if (!o.pass) {
      if (kExpectedFailures.count(id)) {
        status = "FAIL (expected, see README)";
      } else {
        status = "FAIL";
        ++unexpected;
      }
    }
    std::printf("criterion %2d: %s  %s\n", id, status.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return unexpected == 0 ? 0 : 1;
}
