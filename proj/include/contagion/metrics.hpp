#pragma once

#include <optional>
#include <span>
#include <vector>

#include "contagion/balance.hpp"
#include "contagion/clearing.hpp"
#include "contagion/netgen.hpp"

namespace contagion {

/// Gini coefficient of non-negative values, sorted-cumulative form.
/// Throws std::invalid_argument for fewer than 2 values, negative values, or
/// an all-zero input.
double gini(std::span<const double> values);
double gini(std::span<const std::uint32_t> values);

/// How a creditor's exposure is normalized in CS and frailty.
enum class SusceptibilityBasis {
  kEquity,          ///< w_ij / E_j
  kTotalExposure,   ///< w_ij / BA_j
};

struct TopoIndices {
  std::vector<double> cs;       ///< counterparty susceptibility
  std::vector<double> frailty;  ///< local network frailty
};

/// CS(i) = max over creditors j of w_ij / norm_j; 0 without creditors.
std::vector<double> counterparty_susceptibility(const ExposureMatrix& exposures,
                                                std::span<const BalanceSheet> sheets,
                                                SusceptibilityBasis basis = SusceptibilityBasis::kEquity);

/// f(i) = max over creditors j of (w_ij / norm_j) * BL_j; 0 without creditors.
std::vector<double> local_network_frailty(const ExposureMatrix& exposures,
                                          std::span<const BalanceSheet> sheets,
                                          SusceptibilityBasis basis = SusceptibilityBasis::kEquity);

TopoIndices topological_indices(const ExposureMatrix& exposures, std::span<const BalanceSheet> sheets,
                                SusceptibilityBasis basis = SusceptibilityBasis::kEquity);

struct NetworkRiskSummary {
  std::size_t banks = 0;
  double di_aggregate = 0.0;
  double dc_aggregate = 0.0;
  std::vector<NodeId> ranking_di;  ///< banks by DI descending, ties by id
  std::vector<NodeId> ranking_dc;
  std::vector<double> di_curve;    ///< DI values in ranking order
  std::vector<double> dc_curve;
  double mean_degree = 0.0;
  double gini_total = 0.0;
  double gini_in = 0.0;
  double gini_out = 0.0;
  double gini_assets = 0.0;

  double di_max() const { return di_curve.empty() ? 0.0 : di_curve.front(); }
  double dc_max() const { return dc_curve.empty() ? 0.0 : dc_curve.front(); }
};

/// Requires exactly one result per bank (any order) and n >= 2.
NetworkRiskSummary summarize(std::span<const CascadeResult> results, const DirectedGraph& graph,
                             std::span<const BalanceSheet> sheets);

enum class ImpactMeasure { kDefaultImpact, kDefaultCascade };

struct PositionStats {
  double mean = 0.0;
  double std = 0.0;                ///< sample standard deviation
  std::optional<double> cv;        ///< std / mean, undefined for a zero mean
};

/// Position-wise statistics over the ranking curves of an ensemble. Requires
/// at least 2 replications of equal size.
std::vector<PositionStats> ranking_statistics(std::span<const NetworkRiskSummary> ensemble,
                                              ImpactMeasure measure);

/// Pearson correlation; nullopt when either vector has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
/// Spearman rank correlation with average ranks for ties.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationPair {
  std::optional<double> pearson;
  std::optional<double> spearman;
};

struct IndexImpactCorrelation {
  CorrelationPair cs_di;
  CorrelationPair cs_dc;
  CorrelationPair frailty_di;
  CorrelationPair frailty_dc;
};

/// Correlations between CS / frailty and DI / DC across banks. Results must be
/// one per bank; requires n >= 3.
IndexImpactCorrelation index_impact_correlation(const TopoIndices& indices,
                                                std::span<const CascadeResult> results);

}  // namespace contagion
