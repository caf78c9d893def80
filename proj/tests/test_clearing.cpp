#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "contagion/balance.hpp"
#include "contagion/clearing.hpp"
#include "contagion/netgen.hpp"
#include "oracles.hpp"

using namespace contagion;

namespace {

using Instance = oracle::System;

double inflow(const Instance& inst, const ClearingSolution& sol, NodeId i) {
  double in = 0.0;
  for (std::uint32_t idx : inst.w.owed_to(i)) {
    const Exposure& x = inst.w.entries()[idx];
    in += x.weight * sol.payment_ratio(x.debtor);
  }
  return in;
}

}  // namespace

TEST_CASE("clearing agrees with a dense Picard oracle on random small systems") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int with_contagion = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Instance inst = oracle::random_system(rng);
    const NodeId s = static_cast<NodeId>(rng() % inst.sheets.size());
    const double recovery = trial % 3 == 0 ? 0.0 : unit(rng);
    const ClearingSolution sol = clear(inst.w, inst.sheets, {s, recovery});
    const oracle::Clearing ref = oracle::clear(inst, s, recovery);
    for (NodeId i = 0; i < inst.sheets.size(); ++i) {
      CHECK(sol.payments[i] == doctest::Approx(ref.p[i]).epsilon(1e-8));
      CHECK(sol.is_defaulted(i) == ref.defaulted[i]);
    }
    with_contagion += sol.defaulted.size() > 1;
  }
  CHECK(with_contagion > 20);  // the sample exercises cascades, not just isolated shocks
}

TEST_CASE("clearing fixed-point properties on a generated network") {
  const auto g = generate({params_from_delta_in(3.0), 600, 5});
  const ExposureMatrix w = build_exposures(g);
  const auto sheets = build_balance_sheets(w, BalanceConfig{0.05, 0.01, 2.0, 6});
  const Instance inst{w, sheets};
  for (NodeId s = 0; s < 600; s += 23) {
    const ClearingSolution sol = clear(w, sheets, {s, 0.0});
    double shortfall_paid = 0.0;
    double losses = 0.0;
    for (NodeId i = 0; i < sheets.size(); ++i) {
      const double p = sol.payments[i];
      const double e = i == s ? 0.0 : sheets[i].nba;
      CHECK(p >= 0.0);
      CHECK(p <= sol.obligations[i] + 1e-12);
      if (sol.is_defaulted(i)) {
        // Limited liability and the clearing equation.
        CHECK(p <= e + inflow(inst, sol, i) + 1e-9);
        CHECK(p == doctest::Approx(std::min(sol.obligations[i], e + inflow(inst, sol, i))).epsilon(1e-9));
        if (i != s) CHECK(sol.losses[i] > sheets[i].e);
      } else {
        CHECK(p == sol.obligations[i]);
        CHECK(sol.losses[i] <= sheets[i].e);
      }
      shortfall_paid += (1.0 - sol.payment_ratio(i)) * sheets[i].bl;
      losses += sol.losses[i];
      CHECK(sol.losses[i] <= sheets[i].ba + 1e-12);
    }
    // Interbank shortfalls are exactly the creditors' losses.
    CHECK(losses == doctest::Approx(shortfall_paid).epsilon(1e-9));
    CHECK(std::is_sorted(sol.defaulted.begin(), sol.defaulted.end()));
  }
}

TEST_CASE("two-bank system in closed form") {
  const double w01 = 0.8;
  const ExposureMatrix w(2, {{0, 1, w01}});
  const std::vector<double> lambdas{0.05, 0.05};
  const auto sheets = build_balance_sheets(w, lambdas, 2.0);
  const ClearingSolution sol = clear(w, sheets, {0, 0.0});
  CHECK(sol.payments[0] == 0.0);
  CHECK(sol.losses[1] == doctest::Approx(w01));
  CHECK(sol.is_defaulted(1));  // loss w exceeds E_1 = 0.05 * 3w
  const double a0 = total_assets(sheets);
  CHECK(a0 == doctest::Approx(5.0 * w01));
  const CascadeResult r = cascade_metrics(sol, sheets, a0);
  CHECK(r.di == doctest::Approx(0.2));
  CHECK(r.ti == doctest::Approx(0.6));
  CHECK(r.dc == doctest::Approx(0.5));

  // Shocking the creditor transmits nothing.
  const CascadeResult back = cascade_metrics(clear(w, sheets, {1, 0.0}), sheets, a0);
  CHECK(back.di == 0.0);
  CHECK(back.dc == 0.0);
}

TEST_CASE("no shock leaves every bank paying in full") {
  const auto g = generate({params_from_delta_in(2.0), 300, 8});
  const ExposureMatrix w = build_exposures(g);
  const auto sheets = build_balance_sheets(w, BalanceConfig{0.05, 0.01, 2.0, 1});
  const ClearingSolution sol = clear(w, sheets, {7, 1.0});
  CHECK(sol.defaulted.empty());
  for (NodeId i = 0; i < sheets.size(); ++i) CHECK(sol.payments[i] == sol.obligations[i]);
  const CascadeResult r = cascade_metrics(sol, sheets, total_assets(sheets));
  CHECK(r.di == 0.0);
  CHECK(r.ti == 0.0);
  CHECK(r.dc == 0.0);
}

TEST_CASE("shocked bank without obligations to banks transmits nothing") {
  const auto g = generate({params_from_delta_in(1.0), 400, 2});
  const ExposureMatrix w = build_exposures(g);
  const auto sheets = build_balance_sheets(w, BalanceConfig{0.05, 0.01, 2.0, 3});
  NodeId sink = 0;
  while (g.out_degree(sink) != 0) ++sink;
  const ClearingSolution sol = clear(w, sheets, {sink, 0.0});
  CHECK(sol.defaulted == std::vector<NodeId>{sink});
  for (NodeId i = 0; i < sheets.size(); ++i) CHECK(sol.losses[i] == 0.0);
}

TEST_CASE("isolated shocked bank") {
  const ExposureMatrix w(3, {{0, 1, 1.0}});
  const std::vector<double> lambdas{0.05, 0.05, 0.05};
  auto sheets = build_balance_sheets(w, lambdas, 2.0);
  // Give the isolated bank a purely nonbank balance sheet.
  sheets[2] = {0.0, 0.0, 1.0, 0.9, 0.1, 0.1};
  const double a0 = total_assets(sheets);
  const CascadeResult r = cascade_metrics(clear(w, sheets, {2, 0.0}), sheets, a0);
  CHECK(r.di == 0.0);
  CHECK(r.ti == doctest::Approx(1.0 / a0));
  CHECK(r.dc == 0.0);
}

TEST_CASE("higher recovery never adds defaults") {
  const auto g = generate({params_from_delta_in(3.0), 400, 12});
  const ExposureMatrix w = build_exposures(g);
  const auto sheets = build_balance_sheets(w, BalanceConfig{0.05, 0.01, 2.0, 4});
  for (NodeId s = 0; s < 400; s += 37) {
    std::size_t previous = sheets.size() + 1;
    double previous_di = 2.0;
    for (double rec : {0.0, 0.3, 0.6, 0.9, 1.0}) {
      const ClearingSolution sol = clear(w, sheets, {s, rec});
      const CascadeResult r = cascade_metrics(sol, sheets, total_assets(sheets));
      CHECK(sol.defaulted.size() <= previous);
      CHECK(r.di <= previous_di + 1e-12);
      previous = sol.defaulted.size();
      previous_di = r.di;
    }
  }
}

TEST_CASE("clearing input validation and trace") {
  const ExposureMatrix w(2, {{0, 1, 0.5}});
  const std::vector<double> lambdas{0.05, 0.05};
  const auto sheets = build_balance_sheets(w, lambdas, 2.0);
  CHECK_THROWS_AS(clear(w, sheets, {2, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(clear(w, sheets, {0, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(clear(w, std::span(sheets).first(1), {0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(cascade_metrics(clear(w, sheets, {0, 0.0}), sheets, 0.0), std::invalid_argument);

  ClearingOptions options;
  options.record_trace = true;
  const ClearingSolution sol = clear(w, sheets, {0, 0.0}, options);
  REQUIRE(sol.trace.size() == sol.rounds);
  CHECK(sol.trace[0].new_defaults == std::vector<NodeId>{0});
  CHECK(sol.trace[1].new_defaults == std::vector<NodeId>{1});
}

TEST_CASE("shocking every bank is independent of the worker count") {
  const auto g = generate({params_from_delta_in(2.0), 500, 31});
  const ExposureMatrix w = build_exposures(g);
  const auto sheets = build_balance_sheets(w, BalanceConfig{0.05, 0.01, 2.0, 32});
  const auto one = shock_all(w, sheets, 1);
  const auto four = shock_all(w, sheets, 4);
  REQUIRE(one.size() == 500);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].shocked_bank == i);
    CHECK(one[i].di == four[i].di);
    CHECK(one[i].dc == four[i].dc);
    CHECK(one[i].defaulted == four[i].defaulted);
    CHECK(one[i].ti >= one[i].di);
    CHECK(one[i].di >= 0.0);
    CHECK(one[i].dc < 1.0);
  }
}

TEST_CASE("asset losses equal the write-off plus transmitted shortfalls") {
  const auto g = generate({params_from_delta_in(1.0), 700, 41});
  const ExposureMatrix w = build_exposures(g);
  const auto sheets = build_balance_sheets(w, BalanceConfig{0.05, 0.01, 2.0, 42});
  const double a0 = total_assets(sheets);
  for (NodeId s = 0; s < 700; s += 11) {
    ClearingOptions options;
    options.record_trace = true;
    const ClearingSolution sol = clear(w, sheets, {s, 0.0}, options);
    double shortfalls = 0.0;
    for (const Exposure& x : w.entries()) shortfalls += x.weight * (1.0 - sol.payment_ratio(x.debtor));
    const double a_t = post_shock_assets(sol, sheets);
    CHECK(std::abs((a0 - a_t) - (sheets[s].nba + shortfalls)) < 1e-8);

    const CascadeResult r = cascade_metrics(sol, sheets, a0);
    CHECK(r.di <= r.ti);
    CHECK(r.dc * 700.0 == doctest::Approx(static_cast<double>(sol.defaulted.size()) - sol.is_defaulted(s)));

    // The default set only grows: rounds list disjoint additions whose union is the set.
    std::vector<NodeId> joined;
    for (const ClearingRound& round : sol.trace) joined.insert(joined.end(), round.new_defaults.begin(), round.new_defaults.end());
    std::sort(joined.begin(), joined.end());
    CHECK(std::adjacent_find(joined.begin(), joined.end()) == joined.end());
    CHECK(joined == sol.defaulted);
    CHECK(sol.rounds <= 700);
  }
}
