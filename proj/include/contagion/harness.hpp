#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "contagion/balance.hpp"
#include "contagion/metrics.hpp"
#include "contagion/netgen.hpp"
#include "contagion/parallel.hpp"

namespace contagion {

/// GD: concentrated in debts, S: symmetric, GC: concentrated in credits.
enum class NetworkFamily { kGC, kS, kGD };

std::string to_string(NetworkFamily family);
NetworkFamily parse_family(std::string_view name);

/// Mean total degree targeted when densifying type-3 networks.
inline constexpr double kType3MeanDegree = 7.8;
/// Smaller networks run but are flagged in reports.
inline constexpr std::size_t kMinMeaningfulSize = 100;

/// Attachment parameters of each family for network types 0-4. Type 3 shares
/// the type-0 row and is densified afterwards.
AttachmentParams type_parameters(NetworkFamily family, int type_variant);

struct ExperimentSpec {
  NetworkFamily network_family = NetworkFamily::kS;
  int type_variant = 0;
  std::size_t n_nodes = 1000;
  std::size_t replications = 20;
  double lambda_min = 0.05;
  double sigma = 0.01;
  double xi = 2.0;
  std::uint64_t master_seed = 1;

  void validate() const;
};

/// Reads a spec object whose keys are exactly the ExperimentSpec field names.
ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& spec);

/// Network and balance sheets of one replication.
struct ReplicationNetwork {
  DirectedGraph graph;
  GenerationStats generation;
  ExposureMatrix exposures;
  std::vector<BalanceSheet> sheets;
  std::uint64_t graph_seed = 0;
  std::uint64_t balance_seed = 0;
};

ReplicationNetwork build_replication(const ExperimentSpec& spec, std::size_t replication);

struct ReplicationResult {
  std::size_t replication = 0;
  std::uint64_t graph_seed = 0;
  GenerationStats generation;
  NetworkRiskSummary summary;
  IndexImpactCorrelation correlation;
};

struct MeanStd {
  double mean = 0.0;
  std::optional<double> std;  ///< sample std; absent for a single replication
};

struct EnsembleStats {
  MeanStd di, dc, di_max, dc_max;
  MeanStd mean_degree, gini_total, gini_in, gini_out, gini_assets;
  /// Per-replication correlations averaged over replications where defined.
  IndexImpactCorrelation mean_correlation;
  /// Correlations over all (replication, bank) pairs.
  IndexImpactCorrelation pooled_correlation;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<ReplicationResult> replications;
  EnsembleStats ensemble;
  std::vector<PositionStats> ranking_di;  ///< empty for a single replication
  std::vector<PositionStats> ranking_dc;
  bool below_min_size = false;
  std::vector<std::string> notes;
  double runtime_seconds = 0.0;
  std::size_t workers = 1;
};

struct RunOptions {
  std::size_t workers = default_workers();
  /// When set, edges_<rep>.csv and balances_<rep>.csv are written here.
  std::optional<std::filesystem::path> artifact_dir;
  bool progress = false;
};

/// Runs every replication: generate, build sheets, shock each bank, summarize.
/// Errors are rethrown as std::runtime_error prefixed with the replication.
ExperimentReport run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Writes summary.csv, ranking_di.csv, ranking_dc.csv and report.json.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

void write_summary_csv(std::ostream& out, const ExperimentReport& report);
void write_ranking_csv(std::ostream& out, const ExperimentReport& report, ImpactMeasure measure);
nlohmann::json report_json(const ExperimentReport& report);

struct SweepRow {
  double parameter = 0.0;
  MeanStd di, dc, di_max, dc_max;
  bool below_min_size = false;
};

struct SweepTable {
  std::string parameter_name;
  std::vector<SweepRow> rows;
  /// Monotonicity checks, only for sweeps with 2 or more values.
  std::optional<bool> di_strictly_decreasing;
  std::optional<bool> dc_strictly_decreasing;
  /// Relative drop of DC from first to last value exceeds that of DI.
  std::optional<bool> dc_more_sensitive;
};

SweepTable size_sweep(const ExperimentSpec& spec, std::span<const std::size_t> sizes,
                      const RunOptions& options = {});
SweepTable capital_sweep(const ExperimentSpec& spec, std::span<const double> lambdas,
                         const RunOptions& options = {});

void write_sweep_csv(std::ostream& out, const SweepTable& table);

}  // namespace contagion
