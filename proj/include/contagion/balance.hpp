#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "contagion/netgen.hpp"
#include "contagion/rng.hpp"

namespace contagion {

/// Exposure of a link i -> j: `weight` is the obligation of debtor i to
/// creditor j, equivalently the exposure of j to i.
struct Exposure {
  NodeId debtor = 0;
  NodeId creditor = 0;
  double weight = 0.0;
};

/// Sparse exposure matrix with row (debtor) and column (creditor) access.
class ExposureMatrix {
 public:
  ExposureMatrix() = default;

  /// Entries must reference banks < n, have weights in (0, 1], and contain no
  /// repeated (debtor, creditor) pair.
  ExposureMatrix(std::size_t n, std::vector<Exposure> entries);

  std::size_t bank_count() const noexcept { return n_; }
  std::span<const Exposure> entries() const noexcept { return entries_; }

  /// Obligations of `debtor`, sorted by creditor.
  std::span<const Exposure> owed_by(NodeId debtor) const;
  /// Indices into entries() of the obligations owed to `creditor`.
  std::span<const std::uint32_t> owed_to(NodeId creditor) const;

  /// Interbank assets BA_j: sum of weights owed to j.
  double bank_assets(NodeId bank) const;
  /// Interbank liabilities BL_i: sum of weights owed by i.
  double bank_liabilities(NodeId bank) const;

 private:
  std::size_t n_ = 0;
  std::vector<Exposure> entries_;          // sorted by (debtor, creditor)
  std::vector<std::uint32_t> row_offset_;  // n + 1
  std::vector<std::uint32_t> col_offset_;  // n + 1
  std::vector<std::uint32_t> col_index_;
};

/// w_ij = k_out(i) k_in(j) / (max k_out * max k_in) for each link i -> j.
/// Throws std::invalid_argument for a graph without links.
ExposureMatrix build_exposures(const DirectedGraph& graph);

struct BalanceSheet {
  double ba = 0.0;   ///< interbank assets
  double bl = 0.0;   ///< interbank liabilities
  double nba = 0.0;  ///< nonbank assets
  double nbl = 0.0;  ///< nonbank liabilities
  double e = 0.0;    ///< equity
  double lambda = 0.0;

  double total_assets() const noexcept { return ba + nba; }
  /// Total obligations, interbank and nonbank.
  double total_obligations() const noexcept { return bl + nbl; }
};

struct BalanceConfig {
  double lambda_min = 0.05;
  double sigma = 0.01;
  double xi = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Samples lambda_i from Normal(lambda_min, sigma) truncated to
/// (lambda_min, inf) and derives every sheet. Deterministic in `config.seed`.
/// Throws std::runtime_error naming the bank if any NBL_i < 0.
std::vector<BalanceSheet> build_balance_sheets(const ExposureMatrix& exposures,
                                               const BalanceConfig& config);

/// Same construction with caller-supplied capital ratios.
std::vector<BalanceSheet> build_balance_sheets(const ExposureMatrix& exposures,
                                               std::span<const double> lambdas, double xi);

/// Draws one capital ratio strictly above `lambda_min` by rejection from
/// Normal(lambda_min, sigma). Throws std::runtime_error after 1000 rejections.
double sample_capital_ratio(double lambda_min, double sigma, Rng& rng);

struct NonbankRatios {
  double nba_over_assets = 0.0;
  double nbl_over_liabilities = 0.0;
};

/// NBA/A and NBL/L for a bank with the given interbank positions.
NonbankRatios nonbank_ratios(double ba, double bl, double lambda, double xi);

}  // namespace contagion
