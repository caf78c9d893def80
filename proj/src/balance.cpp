#include "contagion/balance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace contagion {

namespace {
constexpr int kLambdaRetries = 1000;
}

ExposureMatrix::ExposureMatrix(std::size_t n, std::vector<Exposure> entries)
    : n_(n), row_offset_(n + 1, 0), col_offset_(n + 1, 0) {
  std::sort(entries.begin(), entries.end(), [](const Exposure& a, const Exposure& b) {
    return a.debtor != b.debtor ? a.debtor < b.debtor : a.creditor < b.creditor;
  });
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Exposure& x = entries[k];
    if (x.debtor >= n || x.creditor >= n) {
      throw std::invalid_argument(
          fmt::format("exposure {} -> {} out of range for {} banks", x.debtor, x.creditor, n));
    }
    if (x.debtor == x.creditor) {
      throw std::invalid_argument(fmt::format("self exposure at bank {}", x.debtor));
    }
    if (!(x.weight > 0.0 && x.weight <= 1.0)) {
      throw std::invalid_argument(
          fmt::format("exposure {} -> {} weight {} outside (0,1]", x.debtor, x.creditor, x.weight));
    }
    if (k > 0 && entries[k - 1].debtor == x.debtor && entries[k - 1].creditor == x.creditor) {
      throw std::invalid_argument(fmt::format("repeated exposure {} -> {}", x.debtor, x.creditor));
    }
    ++row_offset_[x.debtor + 1];
    ++col_offset_[x.creditor + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    row_offset_[i + 1] += row_offset_[i];
    col_offset_[i + 1] += col_offset_[i];
  }
  col_index_.resize(entries.size());
  std::vector<std::uint32_t> fill(col_offset_.begin(), col_offset_.end() - 1);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    col_index_[fill[entries[k].creditor]++] = static_cast<std::uint32_t>(k);
  }
  entries_ = std::move(entries);
}

std::span<const Exposure> ExposureMatrix::owed_by(NodeId debtor) const {
  if (debtor >= n_) throw std::out_of_range("bank id out of range");
  return std::span<const Exposure>(entries_).subspan(row_offset_[debtor],
                                                     row_offset_[debtor + 1] - row_offset_[debtor]);
}

std::span<const std::uint32_t> ExposureMatrix::owed_to(NodeId creditor) const {
  if (creditor >= n_) throw std::out_of_range("bank id out of range");
  return std::span<const std::uint32_t>(col_index_)
      .subspan(col_offset_[creditor], col_offset_[creditor + 1] - col_offset_[creditor]);
}

double ExposureMatrix::bank_assets(NodeId bank) const {
  double sum = 0.0;
  for (std::uint32_t k : owed_to(bank)) sum += entries_[k].weight;
  return sum;
}

double ExposureMatrix::bank_liabilities(NodeId bank) const {
  double sum = 0.0;
  for (const Exposure& x : owed_by(bank)) sum += x.weight;
  return sum;
}

ExposureMatrix build_exposures(const DirectedGraph& graph) {
  if (graph.link_count() == 0) {
    throw std::invalid_argument("cannot build exposures for a graph without links");
  }
  const double scale =
      static_cast<double>(graph.max_out_degree()) * static_cast<double>(graph.max_in_degree());
  std::vector<Exposure> entries;
  entries.reserve(graph.link_count());
  for (const Link& l : graph.links()) {
    const double w = static_cast<double>(graph.out_degree(l.source)) *
                     static_cast<double>(graph.in_degree(l.target)) / scale;
    entries.push_back({l.source, l.target, w});
  }
  return ExposureMatrix(graph.node_count(), std::move(entries));
}

void BalanceConfig::validate() const {
  if (!(lambda_min > 0.0 && lambda_min < 1.0)) {
    throw std::invalid_argument(fmt::format("lambda_min must lie in (0,1), got {}", lambda_min));
  }
  if (!(sigma > 0.0)) throw std::invalid_argument(fmt::format("sigma must be > 0, got {}", sigma));
  if (!(xi > 0.0)) throw std::invalid_argument(fmt::format("xi must be > 0, got {}", xi));
}

double sample_capital_ratio(double lambda_min, double sigma, Rng& rng) {
  std::normal_distribution<double> normal(lambda_min, sigma);
  for (int attempt = 0; attempt < kLambdaRetries; ++attempt) {
    const double x = normal(rng);
    if (x > lambda_min && x < 1.0) return x;
  }
  throw std::runtime_error(fmt::format(
      "no capital ratio above {} after {} draws (sigma={})", lambda_min, kLambdaRetries, sigma));
}

std::vector<BalanceSheet> build_balance_sheets(const ExposureMatrix& exposures,
                                               std::span<const double> lambdas, double xi) {
  const std::size_t n = exposures.bank_count();
  if (lambdas.size() != n) {
    throw std::invalid_argument(
        fmt::format("{} capital ratios supplied for {} banks", lambdas.size(), n));
  }
  std::vector<BalanceSheet> sheets(n);
  for (const Exposure& x : exposures.entries()) {
    sheets[x.creditor].ba += x.weight;
    sheets[x.debtor].bl += x.weight;
  }
  for (std::size_t i = 0; i < n; ++i) {
    BalanceSheet& s = sheets[i];
    const double lambda = lambdas[i];
    s.lambda = lambda;
    s.nba = xi * (s.ba + s.bl);
    s.e = lambda * (s.ba + s.nba);
    s.nbl = (1.0 - lambda) * (1.0 + xi) * s.ba + ((1.0 - lambda) * xi - 1.0) * s.bl;
    if (s.nbl < 0.0) {
      throw std::runtime_error(fmt::format(
          "bank {} has negative nonbank liabilities ({:.6g}) with xi={}: debt-heavy balance "
          "sheet, use a larger xi",
          i, s.nbl, xi));
    }
  }
  return sheets;
}

std::vector<BalanceSheet> build_balance_sheets(const ExposureMatrix& exposures,
                                               const BalanceConfig& config) {
  config.validate();
  Rng rng(config.seed);
  std::vector<double> lambdas(exposures.bank_count());
  for (double& lambda : lambdas) lambda = sample_capital_ratio(config.lambda_min, config.sigma, rng);
  return build_balance_sheets(exposures, lambdas, config.xi);
}

NonbankRatios nonbank_ratios(double ba, double bl, double lambda, double xi) {
  if (ba == 0.0 && bl == 0.0) {
    throw std::invalid_argument("nonbank ratios undefined for a bank without interbank positions");
  }
  const double nba = xi * (ba + bl);
  const double nbl = (1.0 - lambda) * (1.0 + xi) * ba + ((1.0 - lambda) * xi - 1.0) * bl;
  const double liabilities = (1.0 - lambda) * (1.0 + xi) * ba + (1.0 - lambda) * xi * bl;
  return {nba / ((xi + 1.0) * ba + xi * bl), nbl / liabilities};
}

}  // namespace contagion
