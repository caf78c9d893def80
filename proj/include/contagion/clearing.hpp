#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "contagion/balance.hpp"

namespace contagion {

/// Idiosyncratic failure of one bank: its nonbank assets are marked down to
/// `recovery_on_nonbank` of par (0 = total write-off).
struct ShockScenario {
  NodeId shocked_bank = 0;
  double recovery_on_nonbank = 0.0;
};

struct ClearingOptions {
  /// Max payment change accepted as a fixed point.
  double tolerance = 1e-10;
  std::size_t max_inner_iterations = 10000;
  bool record_trace = false;
};

/// One outer round of the fictitious-default iteration.
struct ClearingRound {
  std::size_t round = 0;
  std::vector<NodeId> new_defaults;  ///< banks that joined the default set this round
  double max_delta = 0.0;            ///< largest payment change while solving the round
  std::size_t inner_iterations = 0;
};

struct ClearingSolution {
  ShockScenario scenario;
  std::vector<double> payments;     ///< p_i
  std::vector<double> obligations;  ///< p_bar_i = BL_i + NBL_i
  std::vector<NodeId> defaulted;    ///< ascending bank ids
  std::vector<double> losses;       ///< interbank loss of each creditor
  std::size_t iterations = 0;       ///< inner iterations, all rounds
  std::size_t rounds = 0;
  std::vector<ClearingRound> trace; ///< filled when requested

  /// p_i / p_bar_i, with 1 for banks that owe nothing.
  double payment_ratio(NodeId bank) const;
  bool is_defaulted(NodeId bank) const;
};

/// Clears the system after the shock. Banks pay
///   p_i = min(p_bar_i, e_i + sum_j (p_j / p_bar_j) w_ji),
/// with e_i = NBA_i (scaled by the recovery for the shocked bank). The default
/// set starts with banks whose write-off exceeds their equity and grows one
/// round at a time with every bank whose interbank loss plus write-off is
/// strictly larger than its equity. Non-defaulted banks pay in full.
///
/// Throws std::invalid_argument on inconsistent inputs and std::runtime_error
/// if the inner iteration fails to converge (with the per-round trace in the
/// message).
ClearingSolution clear(const ExposureMatrix& exposures, std::span<const BalanceSheet> sheets,
                       const ShockScenario& scenario, const ClearingOptions& options = {});

/// Result of shocking one bank.
struct CascadeResult {
  NodeId shocked_bank = 0;
  double di = 0.0;  ///< default impact: contagion loss / A0
  double ti = 0.0;  ///< total impact: initial write-off / A0 + DI
  double dc = 0.0;  ///< defaulted banks other than the shocked one / n
  std::vector<NodeId> defaulted;
};

/// Total initial assets A0 = sum_i (BA_i + NBA_i).
double total_assets(std::span<const BalanceSheet> sheets);

/// Post-clearing total assets A_t: nonbank assets at par except the shocked
/// bank's (at recovery), interbank claims at realized payments.
double post_shock_assets(const ClearingSolution& solution, std::span<const BalanceSheet> sheets);

/// DI, TI and DC for one solved scenario. Throws std::invalid_argument if a0 <= 0.
CascadeResult cascade_metrics(const ClearingSolution& solution, std::span<const BalanceSheet> sheets,
                              double a0);

/// Shocks every bank with total nonbank write-off, `workers` threads.
/// Results are indexed by bank id and independent of the worker count.
std::vector<CascadeResult> shock_all(const ExposureMatrix& exposures,
                                     std::span<const BalanceSheet> sheets, std::size_t workers,
                                     const ClearingOptions& options = {});

}  // namespace contagion
