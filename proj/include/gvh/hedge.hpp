#pragma once

#include <cstddef>
#include <exception>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gvh/errors.hpp"
#include "gvh/kernel.hpp"
#include "gvh/model.hpp"
#include "gvh/payoff.hpp"
#include "gvh/predict.hpp"
#include "gvh/valuation.hpp"

namespace gvh {

/// Proportional transaction cost k in [0, 1).
struct CostSpec {
  explicit CostSpec(double k_);
  double k;
};

/// Expected one-step gains between consecutive trading times t_i < t_{i+1}
/// given the information at t_i.
struct ConditionalGains {
  double dx_hat = 0.0;     ///< E[X_{i+1} | F_i] - X_i
  double ds_hat = 0.0;     ///< E[S_{i+1} | F_i] - S_i
  double dv_pi_hat = 0.0;  ///< E[V^pi_{i+1} | F_i] - V^pi_i
  double rho_hat = 0.0;    ///< conditional std. dev. of X_{i+1}
  double v_pi = 0.0;       ///< V^pi_i = v(t_i, S_i)
};

/// S (exp(beta + rho^2/2 + dx_hat) - 1).
double expected_price_gain(double s, double beta_step, double rho, double dx_hat);

/// Gains from precomputed prediction data. `s_now` is S at step.from.
ConditionalGains conditional_gains(const MarketModel& market, const QuadraticVariation& q2,
                                   const EuropeanPayoff& payoff, const TimeGrid& grid,
                                   const ConditionalStep& step,
                                   const Eigen::Ref<const Eigen::VectorXd>& x_path, double s_now,
                                   int order);

/// Gains between grid indices `from` < `to` computed from scratch.
ConditionalGains conditional_gains(const MarketModel& market, const DiscreteKernel& kernel,
                                   const QuadraticVariation& q2, const EuropeanPayoff& payoff,
                                   const Eigen::Ref<const Eigen::VectorXd>& x_path,
                                   std::size_t from, std::size_t to, int order);

enum class Branch { up, down, initial };

struct PositionSolution {
  double position;
  Branch branch;
  bool tie;           ///< both branches were consistent; least |dpi| chosen
  /// |pi - a - b |pi - pi_prev|| / max(1, |pi|, |a|, |b (pi - pi_prev)|):
  /// the fixed-point defect relative to the size of its terms.
  double check;
};

/// Solves pi = a + b |pi - pi_prev| for |b| < 1.
PositionSolution solve_position(double a, double b, double pi_prev);

/// Position held into t_i and the cost-bearing wealth V^{pi^N,k}_{t_i}.
struct HedgeState {
  double position = 0.0;
  double wealth = 0.0;
};

/// Wealth after holding `position` over [s_now, s_next], having paid
/// k s_now |dpi| for the rebalance at the start of the interval.
double advance_wealth(double wealth, double position, double dpi, double s_now, double s_next,
                      const CostSpec& cost);

struct StepRecord {
  std::size_t step = 0;        ///< trading index i
  std::size_t grid_index = 0;  ///< simulation grid index of t_i
  double t = 0.0;
  double s = 0.0;
  double position = 0.0;
  double dpi = 0.0;
  double v_k = 0.0;
  double v_pi = 0.0;
  ConditionalGains gains;
  double residual = 0.0;  ///< [V^k + pi dS_hat - cost] - [V^pi + dV_pi_hat]
  /// residual / max(1, |V^k|, |pi dS_hat|, cost, |V^pi|, |dV_pi_hat|). The
  /// identity holds exactly, so this is pure rounding; the absolute residual
  /// grows with the wealth once tracking errors are amplified.
  double relative_residual = 0.0;
  double cost_paid = 0.0;
  double solve_check = 0.0;
  Branch branch = Branch::up;
  bool tie = false;
};

/// Relative threshold below which dS_hat is treated as zero.
inline constexpr double kSingularGainTolerance = 1e-10;

/// One conditional-mean rebalance at t_i followed by the wealth update to
/// t_{i+1}. Returns the record; `next` receives the state at t_{i+1}.
StepRecord hedge_step(const HedgeState& state, const ConditionalGains& gains, double s_now,
                      double s_next, const CostSpec& cost, std::size_t step, HedgeState& next);

struct InitialPosition {
  double beta0;  ///< riskless holding
  double pi0;    ///< risky holding
};

/// Minimal-cost initial position subject to the first conditional-mean
/// constraint. Bounded only when k >= |dS_hat_0| / S0, in which case all
/// wealth goes to the riskless asset.
InitialPosition initial_position(const CostSpec& cost, double ds_hat0, double s0, double ev_pi_t1);

enum class InitPolicy {
  recursive,  ///< V_0 = V^pi_0, pi_{-1} = 0, pi_0 from the same recursion
  min_cost,   ///< pi_0, beta_0 from initial_position
};

struct HedgeTrace {
  std::vector<StepRecord> steps;
  double initial_wealth = 0.0;
  double terminal_wealth = 0.0;
  double terminal_payoff = 0.0;
  double tracking_error = 0.0;  ///< V^k_T - f(S_T)
  double total_cost = 0.0;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  double max_solve_check = 0.0;
};

/// A path aborted mid-recursion; carries everything computed before the failure.
class HedgeAbort : public HedgeError {
public:
  HedgeAbort(std::string message, HedgeTrace partial, std::size_t step,
             std::exception_ptr cause = nullptr)
      : HedgeError(std::move(message)),
        partial_(std::move(partial)),
        step_(step),
        cause_(std::move(cause)) {}
  const HedgeTrace& partial_trace() const noexcept { return partial_; }
  std::size_t step() const noexcept { return step_; }
  /// The original SingularHedgeError / DegenerateCostError / ... for rethrow.
  std::exception_ptr cause() const noexcept { return cause_; }

private:
  HedgeTrace partial_;
  std::size_t step_;
  std::exception_ptr cause_;
};

/// Path-independent part of the recursion: trading indices and one-step
/// prediction weights, shared read-only by every path.
class HedgePlan {
public:
  /// trading_indices start at grid index 0 and stay strictly below N.
  HedgePlan(MarketModel market, const DiscreteKernel& kernel, QuadraticVariation q2,
            EuropeanPayoff payoff, std::vector<std::size_t> trading_indices,
            int order = kDefaultQuadOrder);

  const MarketModel& market() const noexcept { return market_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const QuadraticVariation& q2() const noexcept { return q2_; }
  const EuropeanPayoff& payoff() const noexcept { return payoff_; }
  const std::vector<std::size_t>& trading_indices() const noexcept { return trading_; }
  const std::vector<ConditionalStep>& steps() const noexcept { return steps_; }
  int order() const noexcept { return order_; }

private:
  MarketModel market_;
  TimeGrid grid_;
  QuadraticVariation q2_;
  EuropeanPayoff payoff_;
  std::vector<std::size_t> trading_;
  std::vector<ConditionalStep> steps_;
  int order_;
};

/// Runs the conditional-mean hedge along one noise path (grid indices 0..N).
/// Throws HedgeAbort on a singular gain, degenerate cost or missing fixed point.
HedgeTrace run_hedge(const HedgePlan& plan, const Eigen::Ref<const Eigen::VectorXd>& x_path,
                     const CostSpec& cost, InitPolicy policy = InitPolicy::recursive);

HedgeTrace run_hedge(const MarketModel& market, const DiscreteKernel& kernel,
                     const QuadraticVariation& q2, const EuropeanPayoff& payoff,
                     const Eigen::Ref<const Eigen::VectorXd>& x_path,
                     const std::vector<std::size_t>& trading_indices, const CostSpec& cost,
                     InitPolicy policy = InitPolicy::recursive, int order = kDefaultQuadOrder);

}  // namespace gvh
