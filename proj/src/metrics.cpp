#include "contagion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace contagion {

namespace {

std::vector<double> ranks_with_ties(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::vector<NodeId> rank_descending(std::span<const double> values) {
  std::vector<NodeId> order(values.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return values[a] != values[b] ? values[a] > values[b] : a < b;
  });
  return order;
}

template <typename Scale>
std::vector<double> max_relative_exposure(const ExposureMatrix& exposures,
                                          std::span<const BalanceSheet> sheets,
                                          SusceptibilityBasis basis, Scale scale) {
  const std::size_t n = exposures.bank_count();
  if (sheets.size() != n) {
    throw std::invalid_argument(
        fmt::format("{} balance sheets for an exposure matrix of {} banks", sheets.size(), n));
  }
  std::vector<double> out(n, 0.0);
  for (const Exposure& x : exposures.entries()) {
    const BalanceSheet& creditor = sheets[x.creditor];
    const double norm = basis == SusceptibilityBasis::kEquity ? creditor.e : creditor.ba;
    if (!(norm > 0.0)) continue;
    out[x.debtor] = std::max(out[x.debtor], x.weight / norm * scale(creditor));
  }
  return out;
}

}  // namespace

double gini(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("gini needs at least 2 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0.0) throw std::invalid_argument("gini needs non-negative values");
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    total += sorted[i];
    weighted += static_cast<double>(i + 1) * sorted[i];
  }
  if (total == 0.0) throw std::invalid_argument("gini undefined for all-zero values");
  const auto n = static_cast<double>(sorted.size());
  return std::clamp(2.0 * weighted / (n * total) - (n + 1.0) / n, 0.0, 1.0);
}

double gini(std::span<const std::uint32_t> values) {
  std::vector<double> v(values.begin(), values.end());
  return gini(std::span<const double>(v));
}

std::vector<double> counterparty_susceptibility(const ExposureMatrix& exposures,
                                                std::span<const BalanceSheet> sheets,
                                                SusceptibilityBasis basis) {
  return max_relative_exposure(exposures, sheets, basis, [](const BalanceSheet&) { return 1.0; });
}

std::vector<double> local_network_frailty(const ExposureMatrix& exposures,
                                          std::span<const BalanceSheet> sheets,
                                          SusceptibilityBasis basis) {
  return max_relative_exposure(exposures, sheets, basis, [](const BalanceSheet& s) { return s.bl; });
}

TopoIndices topological_indices(const ExposureMatrix& exposures, std::span<const BalanceSheet> sheets,
                                SusceptibilityBasis basis) {
  return {counterparty_susceptibility(exposures, sheets, basis),
          local_network_frailty(exposures, sheets, basis)};
}

NetworkRiskSummary summarize(std::span<const CascadeResult> results, const DirectedGraph& graph,
                             std::span<const BalanceSheet> sheets) {
  const std::size_t n = graph.node_count();
  if (n < 2) throw std::invalid_argument("risk summary needs at least 2 banks");
  if (results.size() != n || sheets.size() != n) {
    throw std::invalid_argument(fmt::format("expected {} cascade results and sheets, got {} and {}",
                                            n, results.size(), sheets.size()));
  }
  std::vector<double> di(n, -1.0);
  std::vector<double> dc(n, -1.0);
  for (const CascadeResult& r : results) {
    if (r.shocked_bank >= n || di[r.shocked_bank] >= 0.0) {
      throw std::invalid_argument(fmt::format("unexpected or repeated result for bank {}", r.shocked_bank));
    }
    di[r.shocked_bank] = r.di;
    dc[r.shocked_bank] = r.dc;
  }

  NetworkRiskSummary s;
  s.banks = n;
  s.di_aggregate = std::accumulate(di.begin(), di.end(), 0.0);
  s.dc_aggregate = std::accumulate(dc.begin(), dc.end(), 0.0);
  s.ranking_di = rank_descending(di);
  s.ranking_dc = rank_descending(dc);
  for (NodeId b : s.ranking_di) s.di_curve.push_back(di[b]);
  for (NodeId b : s.ranking_dc) s.dc_curve.push_back(dc[b]);

  s.mean_degree = graph.mean_degree();
  std::vector<double> total(n);
  std::vector<double> assets(n);
  for (std::size_t i = 0; i < n; ++i) {
    total[i] = static_cast<double>(graph.in_degrees()[i]) + graph.out_degrees()[i];
    assets[i] = sheets[i].total_assets();
  }
  s.gini_total = gini(total);
  s.gini_in = gini(graph.in_degrees());
  s.gini_out = gini(graph.out_degrees());
  s.gini_assets = gini(assets);
  return s;
}

std::vector<PositionStats> ranking_statistics(std::span<const NetworkRiskSummary> ensemble,
                                              ImpactMeasure measure) {
  if (ensemble.size() < 2) {
    throw std::invalid_argument("ranking statistics need at least 2 replications");
  }
  const auto curve = [&](const NetworkRiskSummary& s) -> const std::vector<double>& {
    return measure == ImpactMeasure::kDefaultImpact ? s.di_curve : s.dc_curve;
  };
  const std::size_t length = curve(ensemble.front()).size();
  for (const NetworkRiskSummary& s : ensemble) {
    if (curve(s).size() != length) {
      throw std::invalid_argument("ranking statistics need replications of equal size");
    }
  }
  const auto reps = static_cast<double>(ensemble.size());
  std::vector<PositionStats> out(length);
  for (std::size_t p = 0; p < length; ++p) {
    double sum = 0.0;
    for (const NetworkRiskSummary& s : ensemble) sum += curve(s)[p];
    const double mean = sum / reps;
    double ss = 0.0;
    for (const NetworkRiskSummary& s : ensemble) ss += (curve(s)[p] - mean) * (curve(s)[p] - mean);
    out[p].mean = mean;
    out[p].std = std::sqrt(ss / (reps - 1.0));
    if (mean != 0.0) out[p].cv = out[p].std / mean;
  }
  return out;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("correlation vectors differ in length");
  if (x.size() < 2) throw std::invalid_argument("correlation needs at least 2 points");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("correlation vectors differ in length");
  const std::vector<double> rx = ranks_with_ties(x);
  const std::vector<double> ry = ranks_with_ties(y);
  return pearson(rx, ry);
}

IndexImpactCorrelation index_impact_correlation(const TopoIndices& indices,
                                                std::span<const CascadeResult> results) {
  const std::size_t n = results.size();
  if (n < 3) throw std::invalid_argument("index-impact correlation needs at least 3 banks");
  if (indices.cs.size() != n || indices.frailty.size() != n) {
    throw std::invalid_argument("topological indices and cascade results are not aligned");
  }
  std::vector<double> di(n), dc(n);
  std::vector<char> seen(n, 0);
  for (const CascadeResult& r : results) {
    if (r.shocked_bank >= n || seen[r.shocked_bank]) {
      throw std::invalid_argument(fmt::format("unexpected or repeated result for bank {}", r.shocked_bank));
    }
    seen[r.shocked_bank] = 1;
    di[r.shocked_bank] = r.di;
    dc[r.shocked_bank] = r.dc;
  }
  const auto pair = [](std::span<const double> a, std::span<const double> b) {
    return CorrelationPair{pearson(a, b), spearman(a, b)};
  };
  return {pair(indices.cs, di), pair(indices.cs, dc), pair(indices.frailty, di),
          pair(indices.frailty, dc)};
}

}  // namespace contagion
