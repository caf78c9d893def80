#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "contagion/balance.hpp"
#include "contagion/clearing.hpp"
#include "contagion/harness.hpp"
#include "contagion/io.hpp"
#include "contagion/netgen.hpp"
#include "contagion/powerlaw.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace contagion;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path));
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path));
  return out;
}

struct GenerateArgs {
  AttachmentParams p;
  std::size_t nodes = 1000;
  std::uint64_t seed = 1;
  std::string out;
  bool merge = false;
};

void run_generate(const GenerateArgs& a) {
  GenParams params{a.p, a.nodes, a.seed,
                   a.merge ? MultiLinkPolicy::kMergeAtFinalize : MultiLinkPolicy::kRejectAtGrowth};
  const GeneratedGraph g = generate_with_stats(params);
  auto out = open_out(a.out);
  write_edge_list(out, g.graph, a.seed);
  std::cout << json{{"nodes", g.graph.node_count()},
                    {"links", g.graph.link_count()},
                    {"mean_degree", g.graph.mean_degree()},
                    {"duplicates_skipped", g.stats.duplicates_skipped},
                    {"self_loops_skipped", g.stats.self_loops_skipped}}
                   .dump()
            << '\n';
}

void run_fit(const std::string& input) {
  auto in = open_in(input);
  const std::vector<std::int64_t> degrees = read_degree_file(in);
  const PowerLawFit fit = fit_discrete(degrees);
  std::cout << json{{"exponent", fit.exponent},
                    {"x_min", fit.x_min},
                    {"ks", fit.ks_distance},
                    {"n_tail", fit.n_tail}}
                   .dump()
            << '\n';
}

struct ShockArgs {
  std::string edges;
  NodeId bank = 0;
  BalanceConfig balance;
  std::optional<std::uint64_t> seed;
  double recovery = 0.0;
  std::string trace, exposures_out, balances_out;
};

void run_shock(const ShockArgs& a) {
  auto in = open_in(a.edges);
  const EdgeListFile file = read_edge_list(in);
  if (a.bank >= file.graph.node_count()) {
    throw std::invalid_argument(
        fmt::format("bank {} out of range (network has {} banks)", a.bank, file.graph.node_count()));
  }
  const ExposureMatrix exposures = build_exposures(file.graph);
  BalanceConfig config = a.balance;
  config.seed = a.seed.value_or(file.seed);
  const std::vector<BalanceSheet> sheets = build_balance_sheets(exposures, config);

  ClearingOptions options;
  options.record_trace = !a.trace.empty();
  const ClearingSolution sol = clear(exposures, sheets, {a.bank, a.recovery}, options);
  const CascadeResult r = cascade_metrics(sol, sheets, total_assets(sheets));

  if (!a.trace.empty()) {
    auto out = open_out(a.trace);
    write_cascade_trace(out, sol);
  }
  if (!a.exposures_out.empty()) {
    auto out = open_out(a.exposures_out);
    write_exposures_csv(out, exposures);
  }
  if (!a.balances_out.empty()) {
    auto out = open_out(a.balances_out);
    write_balances_csv(out, sheets);
  }
  std::cout << json{{"bank", r.shocked_bank},
                    {"di", r.di},
                    {"ti", r.ti},
                    {"dc", r.dc},
                    {"defaulted", r.defaulted},
                    {"rounds", sol.rounds},
                    {"iterations", sol.iterations}}
                   .dump()
            << '\n';
}

struct SweepArgs {
  std::string spec;
  std::string out;
  std::vector<std::size_t> sizes;
  std::vector<double> lambdas;
  bool quiet = false;
};

void run_sweep(const SweepArgs& a) {
  auto in = open_in(a.spec);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", a.spec, e.what()));
  }
  const ExperimentSpec spec = spec_from_json(j);
  const fs::path out_dir = a.out;
  fs::create_directories(out_dir);

  RunOptions options;
  options.progress = !a.quiet;

  const auto emit_table = [&](const SweepTable& table, const std::string& name) {
    std::ofstream csv(out_dir / name, std::ios::binary);
    write_sweep_csv(csv, table);
    write_sweep_csv(std::cout, table);
  };

  if (!a.sizes.empty()) {
    options.artifact_dir = out_dir / "size_sweep";
    emit_table(size_sweep(spec, a.sizes, options), "size_sweep.csv");
  }
  if (!a.lambdas.empty()) {
    options.artifact_dir = out_dir / "capital_sweep";
    emit_table(capital_sweep(spec, a.lambdas, options), "capital_sweep.csv");
  }
  if (a.sizes.empty() && a.lambdas.empty()) {
    options.artifact_dir = out_dir;
    const ExperimentReport report = run_experiment(spec, options);
    write_report(report, out_dir);
    for (const std::string& note : report.notes) std::cerr << "note: " << note << '\n';
    std::cout << json{{"di", report.ensemble.di.mean},
                      {"dc", report.ensemble.dc.mean},
                      {"mean_degree", report.ensemble.mean_degree.mean},
                      {"runtime_seconds", report.runtime_seconds}}
                     .dump()
              << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interbank contagion simulator"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "grow a directed scale-free network");
  generate_cmd->add_option("--alpha", gen.p.alpha)->required();
  generate_cmd->add_option("--beta", gen.p.beta)->required();
  generate_cmd->add_option("--gamma", gen.p.gamma)->required();
  generate_cmd->add_option("--delta-in", gen.p.delta_in)->required();
  generate_cmd->add_option("--delta-out", gen.p.delta_out)->required();
  generate_cmd->add_option("--nodes", gen.nodes)->required();
  generate_cmd->add_option("--seed", gen.seed);
  generate_cmd->add_option("--out", gen.out, "edge-list output path")->required();
  generate_cmd->add_flag("--merge-multilinks", gen.merge,
                         "record repeated links during growth and merge them afterwards");

  std::string fit_input;
  auto* fit_cmd = app.add_subcommand("fit", "fit a discrete power law to a degree sequence");
  fit_cmd->add_option("--input", fit_input, "one integer per line")->required();

  ShockArgs shock;
  auto* shock_cmd = app.add_subcommand("shock", "default one bank and clear the system");
  shock_cmd->add_option("--edges", shock.edges, "edge list written by generate")->required();
  shock_cmd->add_option("--bank", shock.bank)->required();
  shock_cmd->add_option("--lambda-min", shock.balance.lambda_min);
  shock_cmd->add_option("--sigma", shock.balance.sigma);
  shock_cmd->add_option("--xi", shock.balance.xi);
  shock_cmd->add_option("--seed", shock.seed, "balance-sheet seed (default: edge-list seed)");
  shock_cmd->add_option("--recovery", shock.recovery, "recovery rate on the shocked nonbank assets")
      ->check(CLI::Range(0.0, 1.0));
  shock_cmd->add_option("--trace", shock.trace, "JSONL trace of the clearing rounds");
  shock_cmd->add_option("--exposures-out", shock.exposures_out);
  shock_cmd->add_option("--balances-out", shock.balances_out);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment or a parameter sweep");
  sweep_cmd->add_option("--spec", sweep.spec, "experiment spec (JSON)")->required();
  sweep_cmd->add_option("--out", sweep.out, "output directory")->required();
  sweep_cmd->add_option("--sizes", sweep.sizes, "network sizes to sweep");
  sweep_cmd->add_option("--lambdas", sweep.lambdas, "capital ratios to sweep");
  sweep_cmd->add_flag("--quiet", sweep.quiet, "no progress on stderr");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate_cmd) run_generate(gen);
    if (*fit_cmd) run_fit(fit_input);
    if (*shock_cmd) run_shock(shock);
    if (*sweep_cmd) run_sweep(sweep);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
