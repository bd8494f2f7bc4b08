#include "gvh/hedge.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "gvh/quadrature.hpp"

namespace gvh {

namespace {

double price_at(const MarketModel& market, const QuadraticVariation& q2, double t, double x) {
  return market.s0 * std::exp(market.drift(t) - 0.5 * q2(t) + x);
}

std::string step_tag(std::size_t step) { return "step " + std::to_string(step) + ": "; }

}  // namespace

CostSpec::CostSpec(double k_) : k(k_) {
  if (!(k_ >= 0.0 && k_ < 1.0)) throw ConfigError("transaction cost k must lie in [0, 1)");
}

double expected_price_gain(double s, double beta_step, double rho, double dx_hat) {
  return s * std::expm1(beta_step + 0.5 * rho * rho + dx_hat);
}

ConditionalGains conditional_gains(const MarketModel& market, const QuadraticVariation& q2,
                                   const EuropeanPayoff& payoff, const TimeGrid& grid,
                                   const ConditionalStep& step,
                                   const Eigen::Ref<const Eigen::VectorXd>& x_path, double s_now,
                                   int order) {
  detail::check_order(order);
  const double t0 = grid[step.from];
  const double t1 = grid[step.to];
  const double horizon = q2.horizon();
  const double b = beta(market, q2, t0, t1);

  ConditionalGains g;
  g.dx_hat = step.mean_increment(x_path);
  g.rho_hat = step.rho_hat;
  g.ds_hat = expected_price_gain(s_now, b, g.rho_hat, g.dx_hat);
  g.v_pi = lognormal_value(payoff, s_now, q2.increment(t0, horizon), order);

  // E[v(t1, S_{t1}) | F_t0], S_{t1} = s_now exp(b + dx_hat + rho y). The inner
  // expectation over the remaining variance is v itself; kinks only survive
  // in y when nothing is left to average them out.
  const double tail = q2.increment(t1, horizon);
  const double shift = b + g.dx_hat;
  auto inner = [&](double y) {
    return lognormal_value(payoff, s_now * std::exp(shift + g.rho_hat * y), tail, order);
  };
  double ev;
  if (g.rho_hat == 0.0) {
    ev = inner(0.0);
  } else {
    std::vector<double> ky;
    if (tail == 0.0)
      for (double k : payoff.kinks())
        if (k > 0.0) ky.push_back((std::log(k / s_now) - shift) / g.rho_hat);
    ev = normal_expectation(inner, ky, order);
  }
  g.dv_pi_hat = ev - g.v_pi;
  return g;
}

ConditionalGains conditional_gains(const MarketModel& market, const DiscreteKernel& kernel,
                                   const QuadraticVariation& q2, const EuropeanPayoff& payoff,
                                   const Eigen::Ref<const Eigen::VectorXd>& x_path,
                                   std::size_t from, std::size_t to, int order) {
  if (!(from < to)) throw DomainError("conditional_gains needs from < to");
  if (static_cast<std::size_t>(x_path.size()) <= from)
    throw DomainError("path is not observed through the conditioning time");
  const TimeGrid& grid = kernel.grid();
  const ConditionalStep step = conditional_step(kernel, from, to);
  const double s_now = price_at(market, q2, grid[from], x_path[static_cast<Eigen::Index>(from)]);
  return conditional_gains(market, q2, payoff, grid, step, x_path, s_now, order);
}

PositionSolution solve_position(double a, double b, double pi_prev) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw NumericalError("non-finite position coefficients");
  if (!(std::abs(b) < 1.0))
    throw DegenerateCostError("|b| = |k S / dS_hat| >= 1; the cost term dominates the expected gain");
  // Round-off slack so a root sitting on pi_prev is not lost by both branches.
  const double tol = 1e-12 * std::max(1.0, std::abs(pi_prev));
  const double up = (a - b * pi_prev) / (1.0 - b);
  const double down = (a + b * pi_prev) / (1.0 + b);
  const bool up_ok = up >= pi_prev - tol;
  const bool down_ok = down < pi_prev + tol;
  if (!up_ok && !down_ok) throw NoSolutionError(up, down);

  PositionSolution sol{};
  if (up_ok && down_ok) {
    sol.tie = true;
    const bool take_up = std::abs(up - pi_prev) <= std::abs(down - pi_prev);
    sol.position = take_up ? up : down;
    sol.branch = take_up ? Branch::up : Branch::down;
  } else {
    sol.tie = false;
    sol.position = up_ok ? up : down;
    sol.branch = up_ok ? Branch::up : Branch::down;
  }
  const double jump = b * std::abs(sol.position - pi_prev);
  sol.check = std::abs(sol.position - a - jump) /
              std::max({1.0, std::abs(sol.position), std::abs(a), std::abs(jump)});
  return sol;
}

double advance_wealth(double wealth, double position, double dpi, double s_now, double s_next,
                      const CostSpec& cost) {
  return wealth + position * (s_next - s_now) - cost.k * s_now * std::abs(dpi);
}

StepRecord hedge_step(const HedgeState& state, const ConditionalGains& gains, double s_now,
                      double s_next, const CostSpec& cost, std::size_t step, HedgeState& next) {
  if (!(std::abs(gains.ds_hat) > kSingularGainTolerance * s_now))
    throw SingularHedgeError("expected price gain vanishes; the hedge is undefined");

  const double a = (gains.dv_pi_hat + (gains.v_pi - state.wealth)) / gains.ds_hat;
  const double b = cost.k * s_now / gains.ds_hat;
  const PositionSolution sol = solve_position(a, b, state.position);

  StepRecord r;
  r.step = step;
  r.s = s_now;
  r.position = sol.position;
  r.dpi = sol.position - state.position;
  r.v_k = state.wealth;
  r.v_pi = gains.v_pi;
  r.gains = gains;
  r.cost_paid = cost.k * s_now * std::abs(r.dpi);
  r.residual = (state.wealth + sol.position * gains.ds_hat - r.cost_paid) -
               (gains.v_pi + gains.dv_pi_hat);
  r.relative_residual =
      r.residual / std::max({1.0, std::abs(state.wealth), std::abs(sol.position * gains.ds_hat),
                             r.cost_paid, std::abs(gains.v_pi), std::abs(gains.dv_pi_hat)});
  r.solve_check = sol.check;
  r.branch = sol.branch;
  r.tie = sol.tie;

  next.position = sol.position;
  next.wealth = advance_wealth(state.wealth, sol.position, r.dpi, s_now, s_next, cost);
  return r;
}

InitialPosition initial_position(const CostSpec& cost, double ds_hat0, double s0, double ev_pi_t1) {
  if (!(s0 > 0.0)) throw DomainError("initial price must be positive");
  // V_0 = beta_0 + pi_0 S0 and E[V_{t1}] = beta_0 + pi_0 (S0 + dS_hat) - k S0 |pi_0|
  // must equal E[V^pi_{t1}]; the cost of setting up is minimal at pi_0 = 0
  // unless the expected gain beats the transaction cost.
  if (cost.k < std::abs(ds_hat0) / s0)
    throw UnboundedMinimizationError(
        "initial cost minimisation is unbounded: k < |dS_hat_0| / S0");
  return {ev_pi_t1, 0.0};
}

HedgePlan::HedgePlan(MarketModel market, const DiscreteKernel& kernel, QuadraticVariation q2,
                     EuropeanPayoff payoff, std::vector<std::size_t> trading_indices, int order)
    : market_(std::move(market)),
      grid_(kernel.grid()),
      q2_(std::move(q2)),
      payoff_(std::move(payoff)),
      trading_(std::move(trading_indices)),
      order_(order) {
  detail::check_order(order);
  const std::size_t n = grid_.steps();
  if (trading_.empty() || trading_.front() != 0)
    throw ConfigError("trading times must start at t = 0");
  for (std::size_t i = 1; i < trading_.size(); ++i)
    if (trading_[i] <= trading_[i - 1]) throw ConfigError("trading times must be strictly increasing");
  if (trading_.back() >= n) throw ConfigError("the last trading time must lie before maturity");
  if (std::abs(q2_.horizon() - grid_.horizon()) > 1e-12 * std::max(1.0, grid_.horizon()))
    throw ConfigError("quadratic variation horizon does not match the grid");

  steps_.reserve(trading_.size());
  for (std::size_t i = 0; i < trading_.size(); ++i) {
    const std::size_t to = i + 1 < trading_.size() ? trading_[i + 1] : n;
    steps_.push_back(conditional_step(kernel, trading_[i], to));
  }
}

HedgeTrace run_hedge(const HedgePlan& plan, const Eigen::Ref<const Eigen::VectorXd>& x_path,
                     const CostSpec& cost, InitPolicy policy) {
  const TimeGrid& grid = plan.grid();
  if (static_cast<std::size_t>(x_path.size()) != grid.size())
    throw DomainError("run_hedge: path does not match the grid");
  const MarketModel& market = plan.market();
  const QuadraticVariation& q2 = plan.q2();
  const auto& steps = plan.steps();

  auto s_at = [&](std::size_t g) {
    return price_at(market, q2, grid[g], x_path[static_cast<Eigen::Index>(g)]);
  };

  HedgeTrace trace;
  HedgeState state;
  std::size_t current = 0;
  try {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      current = i;
      const ConditionalStep& st = steps[i];
      const double s_now = s_at(st.from);
      const double s_next = s_at(st.to);
      const ConditionalGains gains =
          conditional_gains(market, q2, plan.payoff(), grid, st, x_path, s_now, plan.order());

      StepRecord rec;
      HedgeState next;
      if (i == 0 && policy == InitPolicy::min_cost) {
        const InitialPosition init =
            initial_position(cost, gains.ds_hat, s_now, gains.v_pi + gains.dv_pi_hat);
        state = {init.pi0, init.beta0 + init.pi0 * s_now};
        rec.step = 0;
        rec.s = s_now;
        rec.position = init.pi0;
        rec.dpi = 0.0;
        rec.v_k = state.wealth;
        rec.v_pi = gains.v_pi;
        rec.gains = gains;
        rec.residual = (state.wealth + init.pi0 * gains.ds_hat) - (gains.v_pi + gains.dv_pi_hat);
        rec.relative_residual =
            rec.residual / std::max({1.0, std::abs(state.wealth), std::abs(gains.v_pi),
                                     std::abs(gains.dv_pi_hat)});
        rec.branch = Branch::initial;
        next = {init.pi0, advance_wealth(state.wealth, init.pi0, 0.0, s_now, s_next, cost)};
        trace.initial_wealth = state.wealth;
      } else {
        if (i == 0) {
          state = {0.0, gains.v_pi};
          trace.initial_wealth = state.wealth;
        }
        rec = hedge_step(state, gains, s_now, s_next, cost, i, next);
      }
      rec.grid_index = st.from;
      rec.t = grid[st.from];
      trace.total_cost += rec.cost_paid;
      trace.max_abs_residual = std::max(trace.max_abs_residual, std::abs(rec.residual));
      trace.max_rel_residual = std::max(trace.max_rel_residual, std::abs(rec.relative_residual));
      trace.max_solve_check = std::max(trace.max_solve_check, rec.solve_check);
      trace.steps.push_back(rec);
      state = next;
    }
  } catch (const HedgeError& e) {
    throw HedgeAbort(step_tag(current) + e.what(), std::move(trace), current,
                     std::current_exception());
  }

  const double s_t = s_at(grid.steps());
  trace.terminal_wealth = state.wealth;
  trace.terminal_payoff = plan.payoff()(s_t);
  trace.tracking_error = trace.terminal_wealth - trace.terminal_payoff;
  return trace;
}

HedgeTrace run_hedge(const MarketModel& market, const DiscreteKernel& kernel,
                     const QuadraticVariation& q2, const EuropeanPayoff& payoff,
                     const Eigen::Ref<const Eigen::VectorXd>& x_path,
                     const std::vector<std::size_t>& trading_indices, const CostSpec& cost,
                     InitPolicy policy, int order) {
  const HedgePlan plan(market, kernel, q2, payoff, trading_indices, order);
  return run_hedge(plan, x_path, cost, policy);
}

}  // namespace gvh
