#include "contagion/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "contagion/parallel.hpp"

namespace contagion {

namespace {

// Inner iterations stop well below the requested tolerance so the reported
// fixed-point residual stays under it.
constexpr double kInnerSlack = 1e-3;

std::string describe_trace(const std::vector<ClearingRound>& trace) {
  std::string out;
  for (const ClearingRound& r : trace) {
    out += fmt::format("\n  round {}: +{} defaults, max_delta={:.3g}, inner={}", r.round,
                       r.new_defaults.size(), r.max_delta, r.inner_iterations);
  }
  return out;
}

}  // namespace

double ClearingSolution::payment_ratio(NodeId bank) const {
  const double owed = obligations.at(bank);
  return owed > 0.0 ? payments[bank] / owed : 1.0;
}

bool ClearingSolution::is_defaulted(NodeId bank) const {
  return std::binary_search(defaulted.begin(), defaulted.end(), bank);
}

ClearingSolution clear(const ExposureMatrix& exposures, std::span<const BalanceSheet> sheets,
                       const ShockScenario& scenario, const ClearingOptions& options) {
  const std::size_t n = exposures.bank_count();
  if (sheets.size() != n) {
    throw std::invalid_argument(
        fmt::format("{} balance sheets for an exposure matrix of {} banks", sheets.size(), n));
  }
  if (scenario.shocked_bank >= n) {
    throw std::invalid_argument(
        fmt::format("shocked bank {} does not exist ({} banks)", scenario.shocked_bank, n));
  }
  if (!(scenario.recovery_on_nonbank >= 0.0 && scenario.recovery_on_nonbank <= 1.0)) {
    throw std::invalid_argument("recovery_on_nonbank must lie in [0,1]");
  }

  const NodeId shocked = scenario.shocked_bank;
  const double writeoff = (1.0 - scenario.recovery_on_nonbank) * sheets[shocked].nba;
  const auto external = [&](NodeId i) {
    return i == shocked ? sheets[i].nba - writeoff : sheets[i].nba;
  };
  const auto initial_loss = [&](NodeId i) { return i == shocked ? writeoff : 0.0; };

  ClearingSolution sol;
  sol.scenario = scenario;
  sol.obligations.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.obligations[i] = sheets[i].total_obligations();
  sol.payments = sol.obligations;
  sol.losses.assign(n, 0.0);

  std::vector<char> in_default(n, 0);
  std::vector<NodeId> defaulted;
  std::vector<NodeId> joining;
  if (initial_loss(shocked) > sheets[shocked].e) joining.push_back(shocked);

  const auto entries = exposures.entries();
  const auto ratio = [&](NodeId i) {
    return sol.obligations[i] > 0.0 ? sol.payments[i] / sol.obligations[i] : 1.0;
  };

  std::vector<double> next_payment;
  std::vector<NodeId> touched;
  const double stop = options.tolerance * kInnerSlack;

  for (std::size_t round = 0; !joining.empty(); ++round) {
    if (round > n) {
      throw std::runtime_error("default set failed to stabilize within n rounds" +
                               describe_trace(sol.trace));
    }
    for (NodeId j : joining) {
      in_default[j] = 1;
      defaulted.push_back(j);
    }
    ClearingRound info;
    info.round = round;
    info.new_defaults = joining;
    joining.clear();

    // Successive substitution on the defaulted banks; everyone else pays p_bar.
    next_payment.resize(defaulted.size());
    for (;;) {
      if (info.inner_iterations == options.max_inner_iterations) {
        sol.trace.push_back(info);
        throw std::runtime_error(
            fmt::format("clearing did not converge after {} inner iterations in round {}",
                        options.max_inner_iterations, round) +
            describe_trace(sol.trace));
      }
      ++info.inner_iterations;
      double delta = 0.0;
      for (std::size_t k = 0; k < defaulted.size(); ++k) {
        const NodeId i = defaulted[k];
        double received = 0.0;
        for (std::uint32_t idx : exposures.owed_to(i)) {
          received += entries[idx].weight * ratio(entries[idx].debtor);
        }
        next_payment[k] = std::clamp(external(i) + received, 0.0, sol.obligations[i]);
        delta = std::max(delta, std::abs(next_payment[k] - sol.payments[i]));
      }
      for (std::size_t k = 0; k < defaulted.size(); ++k) sol.payments[defaulted[k]] = next_payment[k];
      info.max_delta = std::max(info.max_delta, delta);
      if (delta <= stop) break;
    }
    sol.iterations += info.inner_iterations;

    // Interbank losses of every creditor of a defaulted bank.
    for (NodeId j : touched) sol.losses[j] = 0.0;
    touched.clear();
    for (NodeId i : defaulted) {
      const double shortfall = 1.0 - ratio(i);
      for (const Exposure& x : exposures.owed_by(i)) {
        if (sol.losses[x.creditor] == 0.0) touched.push_back(x.creditor);
        sol.losses[x.creditor] += x.weight * shortfall;
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (NodeId j : touched) {
      if (!in_default[j] && sol.losses[j] + initial_loss(j) > sheets[j].e) joining.push_back(j);
    }
    if (options.record_trace) sol.trace.push_back(std::move(info));
    ++sol.rounds;
  }

  std::sort(defaulted.begin(), defaulted.end());
  sol.defaulted = std::move(defaulted);
  return sol;
}

double total_assets(std::span<const BalanceSheet> sheets) {
  double sum = 0.0;
  for (const BalanceSheet& s : sheets) sum += s.ba + s.nba;
  return sum;
}

double post_shock_assets(const ClearingSolution& solution, std::span<const BalanceSheet> sheets) {
  double sum = 0.0;
  for (std::size_t j = 0; j < sheets.size(); ++j) {
    sum += sheets[j].nba + (sheets[j].ba - solution.losses[j]);
  }
  const NodeId s = solution.scenario.shocked_bank;
  return sum - (1.0 - solution.scenario.recovery_on_nonbank) * sheets[s].nba;
}

CascadeResult cascade_metrics(const ClearingSolution& solution, std::span<const BalanceSheet> sheets,
                              double a0) {
  if (!(a0 > 0.0)) throw std::invalid_argument(fmt::format("initial assets must be > 0, got {}", a0));
  const NodeId s = solution.scenario.shocked_bank;
  const double initial = (1.0 - solution.scenario.recovery_on_nonbank) * sheets[s].nba;
  const double a_t = post_shock_assets(solution, sheets);

  CascadeResult r;
  r.shocked_bank = s;
  r.di = std::max(0.0, (a0 - a_t - initial) / a0);
  r.ti = initial / a0 + r.di;
  std::size_t others = 0;
  for (NodeId b : solution.defaulted) others += (b != s);
  r.dc = static_cast<double>(others) / static_cast<double>(sheets.size());
  r.defaulted = solution.defaulted;
  return r;
}

std::vector<CascadeResult> shock_all(const ExposureMatrix& exposures,
                                     std::span<const BalanceSheet> sheets, std::size_t workers,
                                     const ClearingOptions& options) {
  const std::size_t n = exposures.bank_count();
  const double a0 = total_assets(sheets);
  std::vector<CascadeResult> results(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto bank = static_cast<NodeId>(i);
    results[i] = cascade_metrics(clear(exposures, sheets, {bank, 0.0}, options), sheets, a0);
  });
  return results;
}

}  // namespace contagion
