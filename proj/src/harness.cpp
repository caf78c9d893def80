#include "contagion/harness.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "contagion/clearing.hpp"
#include "contagion/io.hpp"
#include "contagion/rng.hpp"

namespace contagion {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Rows: family GC, S, GD; columns: alpha, beta, gamma, delta_in, delta_out.
constexpr std::array<std::array<std::array<double, 5>, 3>, 5> kTypeTable = {{
    {{{0.5625, 0.25, 0.1875, 1.0, 3.0}, {0.375, 0.25, 0.375, 2.0, 2.0}, {0.1875, 0.25, 0.5625, 3.0, 1.0}}},
    {{{0.1875, 0.75, 0.0625, 1.0, 3.0}, {0.125, 0.75, 0.125, 2.0, 2.0}, {0.0625, 0.75, 0.1875, 3.0, 1.0}}},
    {{{0.1875, 0.75, 0.0625, 25.0, 75.0}, {0.125, 0.75, 0.125, 50.0, 50.0}, {0.0625, 0.75, 0.1875, 75.0, 25.0}}},
    {{{0.5625, 0.25, 0.1875, 1.0, 3.0}, {0.375, 0.25, 0.375, 2.0, 2.0}, {0.1875, 0.25, 0.5625, 3.0, 1.0}}},
    {{{0.5625, 0.25, 0.1875, 10.0, 30.0}, {0.375, 0.25, 0.375, 20.0, 20.0}, {0.1875, 0.25, 0.5625, 30.0, 10.0}}},
}};

const std::array<const char*, 8> kSpecKeys = {"network_family", "type_variant", "n_nodes", "replications",
                                              "lambda_min", "sigma", "xi", "master_seed"};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  const auto n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

template <typename Field>
MeanStd over_replications(const std::vector<ReplicationResult>& reps, Field field) {
  std::vector<double> xs;
  xs.reserve(reps.size());
  for (const ReplicationResult& r : reps) xs.push_back(field(r));
  return mean_std(xs);
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& xs) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& x : xs) {
    if (x) {
      sum += *x;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

IndexImpactCorrelation average_correlations(const std::vector<ReplicationResult>& reps) {
  const auto avg = [&](auto member, auto method) {
    std::vector<std::optional<double>> xs;
    for (const ReplicationResult& r : reps) xs.push_back((r.correlation.*member).*method);
    return mean_defined(xs);
  };
  IndexImpactCorrelation out;
  for (auto member : {&IndexImpactCorrelation::cs_di, &IndexImpactCorrelation::cs_dc,
                      &IndexImpactCorrelation::frailty_di, &IndexImpactCorrelation::frailty_dc}) {
    (out.*member).pearson = avg(member, &CorrelationPair::pearson);
    (out.*member).spearman = avg(member, &CorrelationPair::spearman);
  }
  return out;
}

std::string fmt_num(double x) { return fmt::format("{:.12g}", x); }

std::string fmt_opt(const std::optional<double>& x) { return x ? fmt_num(*x) : std::string(); }

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", opt_json(m.std)}}; }

json correlation_json(const IndexImpactCorrelation& c) {
  const auto pair = [](const CorrelationPair& p) {
    return json{{"pearson", opt_json(p.pearson)}, {"spearman", opt_json(p.spearman)}};
  };
  return {{"cs_di", pair(c.cs_di)},
          {"cs_dc", pair(c.cs_dc)},
          {"frailty_di", pair(c.frailty_di)},
          {"frailty_dc", pair(c.frailty_dc)}};
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  return out;
}

SweepRow sweep_row(double parameter, const ExperimentReport& report) {
  return {parameter, report.ensemble.di, report.ensemble.dc, report.ensemble.di_max,
          report.ensemble.dc_max, report.below_min_size};
}

}  // namespace

std::string to_string(NetworkFamily family) {
  switch (family) {
    case NetworkFamily::kGC: return "GC";
    case NetworkFamily::kS: return "S";
    case NetworkFamily::kGD: return "GD";
  }
  return "?";
}

NetworkFamily parse_family(std::string_view name) {
  if (name == "GC") return NetworkFamily::kGC;
  if (name == "S") return NetworkFamily::kS;
  if (name == "GD") return NetworkFamily::kGD;
  throw std::invalid_argument(fmt::format("unknown network family '{}' (expected GC, S or GD)", name));
}

AttachmentParams type_parameters(NetworkFamily family, int type_variant) {
  if (type_variant < 0 || type_variant > 4) {
    throw std::invalid_argument(fmt::format("type_variant must be 0..4, got {}", type_variant));
  }
  const auto& row = kTypeTable[static_cast<std::size_t>(type_variant)][static_cast<std::size_t>(family)];
  return {row[0], row[1], row[2], row[3], row[4]};
}

void ExperimentSpec::validate() const {
  if (type_variant < 0 || type_variant > 4) {
    throw std::invalid_argument(fmt::format("type_variant must be 0..4, got {}", type_variant));
  }
  if (n_nodes < 2) throw std::invalid_argument("n_nodes must be >= 2");
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  BalanceConfig{lambda_min, sigma, xi, 0}.validate();
}

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kSpecKeys.begin(), kSpecKeys.end(), key) == kSpecKeys.end()) {
      throw std::invalid_argument(fmt::format("unknown experiment spec key '{}'", key));
    }
  }
  for (const char* key : kSpecKeys) {
    if (!j.contains(key)) throw std::invalid_argument(fmt::format("experiment spec lacks '{}'", key));
  }
  ExperimentSpec spec;
  try {
    spec.network_family = parse_family(j.at("network_family").get<std::string>());
    spec.type_variant = j.at("type_variant").get<int>();
    spec.n_nodes = j.at("n_nodes").get<std::size_t>();
    spec.replications = j.at("replications").get<std::size_t>();
    spec.lambda_min = j.at("lambda_min").get<double>();
    spec.sigma = j.at("sigma").get<double>();
    spec.xi = j.at("xi").get<double>();
    spec.master_seed = j.at("master_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(fmt::format("malformed experiment spec: {}", e.what()));
  }
  spec.validate();
  return spec;
}

json to_json(const ExperimentSpec& spec) {
  return {{"network_family", to_string(spec.network_family)},
          {"type_variant", spec.type_variant},
          {"n_nodes", spec.n_nodes},
          {"replications", spec.replications},
          {"lambda_min", spec.lambda_min},
          {"sigma", spec.sigma},
          {"xi", spec.xi},
          {"master_seed", spec.master_seed}};
}

ReplicationNetwork build_replication(const ExperimentSpec& spec, std::size_t replication) {
  ReplicationNetwork net;
  net.graph_seed = stream_seed(spec.master_seed, replication, Stream::kGraph);
  net.balance_seed = stream_seed(spec.master_seed, replication, Stream::kBalance);

  GenParams params;
  params.attachment = type_parameters(spec.network_family, spec.type_variant);
  params.n_target = spec.n_nodes;
  params.seed = net.graph_seed;
  GeneratedGraph generated = generate_with_stats(params);
  net.generation = generated.stats;
  net.graph = std::move(generated.graph);
  if (spec.type_variant == 3) {
    const double target = std::min(kType3MeanDegree, 2.0 * static_cast<double>(spec.n_nodes - 1));
    if (target > net.graph.mean_degree()) {
      net.graph = augment_random_links(net.graph, target,
                                       stream_seed(spec.master_seed, replication, Stream::kAugment));
    }
  }
  net.exposures = build_exposures(net.graph);
  net.sheets = build_balance_sheets(
      net.exposures, BalanceConfig{spec.lambda_min, spec.sigma, spec.xi, net.balance_seed});
  return net;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  const auto started = std::chrono::steady_clock::now();

  ExperimentReport report;
  report.spec = spec;
  report.workers = std::max<std::size_t>(1, options.workers);
  report.below_min_size = spec.n_nodes < kMinMeaningfulSize;
  if (report.below_min_size) {
    report.notes.push_back(fmt::format("n_nodes={} is below the minimum meaningful size {}",
                                       spec.n_nodes, kMinMeaningfulSize));
  }
  if (spec.type_variant == 3) {
    report.notes.push_back(fmt::format(
        "type 3: generated with the type-0 parameter row, then densified with uniformly random "
        "links to mean degree {}",
        kType3MeanDegree));
  }
  if (options.artifact_dir) fs::create_directories(*options.artifact_dir);

  std::vector<double> pooled_cs, pooled_frailty, pooled_di, pooled_dc;
  for (std::size_t rep = 0; rep < spec.replications; ++rep) {
    try {
      const ReplicationNetwork net = build_replication(spec, rep);
      const std::vector<CascadeResult> results = shock_all(net.exposures, net.sheets, report.workers);
      const TopoIndices indices = topological_indices(net.exposures, net.sheets);

      ReplicationResult r;
      r.replication = rep;
      r.graph_seed = net.graph_seed;
      r.generation = net.generation;
      r.summary = summarize(results, net.graph, net.sheets);
      // Correlations are left undefined for networks too small to rank.
      if (net.graph.node_count() >= 3) r.correlation = index_impact_correlation(indices, results);
      report.replications.push_back(std::move(r));

      pooled_cs.insert(pooled_cs.end(), indices.cs.begin(), indices.cs.end());
      pooled_frailty.insert(pooled_frailty.end(), indices.frailty.begin(), indices.frailty.end());
      for (const CascadeResult& c : results) {
        pooled_di.push_back(c.di);
        pooled_dc.push_back(c.dc);
      }

      if (options.artifact_dir) {
        auto edges = open_output(*options.artifact_dir / fmt::format("edges_{}.csv", rep));
        write_edge_list(edges, net.graph, net.graph_seed);
        auto balances = open_output(*options.artifact_dir / fmt::format("balances_{}.csv", rep));
        write_balances_csv(balances, net.sheets);
      }
      if (options.progress) {
        fmt::print(std::cerr, "[{}{} n={}] replication {}/{} done\n", to_string(spec.network_family),
                   spec.type_variant, spec.n_nodes, rep + 1, spec.replications);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("replication {}: {}", rep, e.what()));
    }
  }

  const auto& reps = report.replications;
  EnsembleStats& ens = report.ensemble;
  ens.di = over_replications(reps, [](const auto& r) { return r.summary.di_aggregate; });
  ens.dc = over_replications(reps, [](const auto& r) { return r.summary.dc_aggregate; });
  ens.di_max = over_replications(reps, [](const auto& r) { return r.summary.di_max(); });
  ens.dc_max = over_replications(reps, [](const auto& r) { return r.summary.dc_max(); });
  ens.mean_degree = over_replications(reps, [](const auto& r) { return r.summary.mean_degree; });
  ens.gini_total = over_replications(reps, [](const auto& r) { return r.summary.gini_total; });
  ens.gini_in = over_replications(reps, [](const auto& r) { return r.summary.gini_in; });
  ens.gini_out = over_replications(reps, [](const auto& r) { return r.summary.gini_out; });
  ens.gini_assets = over_replications(reps, [](const auto& r) { return r.summary.gini_assets; });
  ens.mean_correlation = average_correlations(reps);
  const auto pooled_pair = [](const std::vector<double>& a, const std::vector<double>& b) {
    return CorrelationPair{pearson(a, b), spearman(a, b)};
  };
  ens.pooled_correlation = {pooled_pair(pooled_cs, pooled_di), pooled_pair(pooled_cs, pooled_dc),
                            pooled_pair(pooled_frailty, pooled_di),
                            pooled_pair(pooled_frailty, pooled_dc)};

  if (reps.size() >= 2) {
    std::vector<NetworkRiskSummary> summaries;
    for (const ReplicationResult& r : reps) summaries.push_back(r.summary);
    report.ranking_di = ranking_statistics(summaries, ImpactMeasure::kDefaultImpact);
    report.ranking_dc = ranking_statistics(summaries, ImpactMeasure::kDefaultCascade);
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

void write_summary_csv(std::ostream& out, const ExperimentReport& report) {
  out << "replication,banks,raw_links,links,mean_degree,gini_total,gini_in,gini_out,gini_assets,"
         "di,dc,di_max,dc_max\n";
  for (const ReplicationResult& r : report.replications) {
    const NetworkRiskSummary& s = r.summary;
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.replication, s.banks,
               r.generation.raw_links, r.generation.final_links, fmt_num(s.mean_degree),
               fmt_num(s.gini_total), fmt_num(s.gini_in), fmt_num(s.gini_out),
               fmt_num(s.gini_assets), fmt_num(s.di_aggregate), fmt_num(s.dc_aggregate),
               fmt_num(s.di_max()), fmt_num(s.dc_max()));
  }
}

void write_ranking_csv(std::ostream& out, const ExperimentReport& report, ImpactMeasure measure) {
  out << "position,mean,std,cv\n";
  const auto& stats = measure == ImpactMeasure::kDefaultImpact ? report.ranking_di : report.ranking_dc;
  if (!stats.empty()) {
    for (std::size_t p = 0; p < stats.size(); ++p) {
      fmt::print(out, "{},{},{},{}\n", p + 1, fmt_num(stats[p].mean), fmt_num(stats[p].std),
                 fmt_opt(stats[p].cv));
    }
    return;
  }
  // Single replication: the curve itself, no dispersion.
  if (report.replications.empty()) return;
  const NetworkRiskSummary& s = report.replications.front().summary;
  const auto& curve = measure == ImpactMeasure::kDefaultImpact ? s.di_curve : s.dc_curve;
  for (std::size_t p = 0; p < curve.size(); ++p) fmt::print(out, "{},{},,\n", p + 1, fmt_num(curve[p]));
}

json report_json(const ExperimentReport& report) {
  const EnsembleStats& e = report.ensemble;
  json reps = json::array();
  for (const ReplicationResult& r : report.replications) {
    const NetworkRiskSummary& s = r.summary;
    reps.push_back({{"replication", r.replication},
                    {"graph_seed", r.graph_seed},
                    {"raw_links", r.generation.raw_links},
                    {"links", r.generation.final_links},
                    {"duplicates_skipped", r.generation.duplicates_skipped},
                    {"self_loops_skipped", r.generation.self_loops_skipped},
                    {"mean_degree", s.mean_degree},
                    {"gini_total", s.gini_total},
                    {"gini_in", s.gini_in},
                    {"gini_out", s.gini_out},
                    {"gini_assets", s.gini_assets},
                    {"di", s.di_aggregate},
                    {"dc", s.dc_aggregate},
                    {"di_max", s.di_max()},
                    {"dc_max", s.dc_max()},
                    {"correlation", correlation_json(r.correlation)}});
  }
  return {{"spec", to_json(report.spec)},
          {"ensemble",
           {{"di", mean_std_json(e.di)},
            {"dc", mean_std_json(e.dc)},
            {"di_max", mean_std_json(e.di_max)},
            {"dc_max", mean_std_json(e.dc_max)},
            {"mean_degree", mean_std_json(e.mean_degree)},
            {"gini_total", mean_std_json(e.gini_total)},
            {"gini_in", mean_std_json(e.gini_in)},
            {"gini_out", mean_std_json(e.gini_out)},
            {"gini_assets", mean_std_json(e.gini_assets)},
            {"mean_correlation", correlation_json(e.mean_correlation)},
            {"pooled_correlation", correlation_json(e.pooled_correlation)}}},
          {"replications", reps},
          {"metadata",
           {{"runtime_seconds", report.runtime_seconds},
            {"workers", report.workers},
            {"below_min_size", report.below_min_size},
            {"notes", report.notes}}}};
}

void write_report(const ExperimentReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  auto summary = open_output(dir / "summary.csv");
  write_summary_csv(summary, report);
  auto ranking_di = open_output(dir / "ranking_di.csv");
  write_ranking_csv(ranking_di, report, ImpactMeasure::kDefaultImpact);
  auto ranking_dc = open_output(dir / "ranking_dc.csv");
  write_ranking_csv(ranking_dc, report, ImpactMeasure::kDefaultCascade);
  auto js = open_output(dir / "report.json");
  js << report_json(report).dump(2) << '\n';
}

SweepTable size_sweep(const ExperimentSpec& spec, std::span<const std::size_t> sizes,
                      const RunOptions& options) {
  if (sizes.empty()) throw std::invalid_argument("size sweep needs at least one size");
  SweepTable table;
  table.parameter_name = "n_nodes";
  for (std::size_t n : sizes) {
    ExperimentSpec s = spec;
    s.n_nodes = n;
    RunOptions o = options;
    if (options.artifact_dir) o.artifact_dir = *options.artifact_dir / fmt::format("n_{}", n);
    table.rows.push_back(sweep_row(static_cast<double>(n), run_experiment(s, o)));
  }
  return table;
}

SweepTable capital_sweep(const ExperimentSpec& spec, std::span<const double> lambdas,
                         const RunOptions& options) {
  if (lambdas.empty()) throw std::invalid_argument("capital sweep needs at least one lambda");
  SweepTable table;
  table.parameter_name = "lambda_min";
  for (double lambda : lambdas) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
      throw std::invalid_argument(fmt::format("lambda {} outside (0,1)", lambda));
    }
    ExperimentSpec s = spec;
    s.lambda_min = lambda;
    RunOptions o = options;
    if (options.artifact_dir) o.artifact_dir = *options.artifact_dir / fmt::format("lambda_{}", lambda);
    table.rows.push_back(sweep_row(lambda, run_experiment(s, o)));
  }
  if (table.rows.size() >= 2) {
    bool di_down = true;
    bool dc_down = true;
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
      di_down = di_down && table.rows[k].di.mean < table.rows[k - 1].di.mean;
      dc_down = dc_down && table.rows[k].dc.mean < table.rows[k - 1].dc.mean;
    }
    table.di_strictly_decreasing = di_down;
    table.dc_strictly_decreasing = dc_down;
    const SweepRow& first = table.rows.front();
    const SweepRow& last = table.rows.back();
    const double di_drop = (first.di.mean - last.di.mean) / first.di.mean;
    const double dc_drop = (first.dc.mean - last.dc.mean) / first.dc.mean;
    table.dc_more_sensitive = dc_drop > di_drop;
  }
  return table;
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  fmt::print(out, "{},di_mean,di_std,dc_mean,dc_std,di_max_mean,dc_max_mean,below_min_size\n",
             table.parameter_name);
  for (const SweepRow& r : table.rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", fmt_num(r.parameter), fmt_num(r.di.mean),
               fmt_opt(r.di.std), fmt_num(r.dc.mean), fmt_opt(r.dc.std), fmt_num(r.di_max.mean),
               fmt_num(r.dc_max.mean), r.below_min_size ? 1 : 0);
  }
}

}  // namespace contagion
