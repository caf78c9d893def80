#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "contagion/harness.hpp"

using namespace contagion;
namespace fs = std::filesystem;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.network_family = NetworkFamily::kGD;
  spec.type_variant = 0;
  spec.n_nodes = 150;
  spec.replications = 3;
  spec.master_seed = 77;
  return spec;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("type parameter table") {
  for (NetworkFamily f : {NetworkFamily::kGC, NetworkFamily::kS, NetworkFamily::kGD}) {
    for (int t = 0; t <= 4; ++t) {
      const AttachmentParams p = type_parameters(f, t);
      CHECK_NOTHROW(p.validate());
    }
    // Types 0, 3 and 4 share the probabilities; 1 and 2 share theirs.
    CHECK(type_parameters(f, 3).alpha == type_parameters(f, 0).alpha);
    CHECK(type_parameters(f, 4).gamma == type_parameters(f, 0).gamma);
    CHECK(type_parameters(f, 2).beta == 0.75);
    CHECK(type_parameters(f, 1).beta == 0.75);
    CHECK(type_parameters(f, 0).beta == 0.25);
    // Types 2 and 4 scale the offsets of types 1 and 0.
    CHECK(type_parameters(f, 2).delta_in == 25.0 * type_parameters(f, 1).delta_in);
    CHECK(type_parameters(f, 4).delta_out == 10.0 * type_parameters(f, 0).delta_out);
  }
  const auto gd0 = type_parameters(NetworkFamily::kGD, 0);
  CHECK(gd0.alpha == 0.1875);
  CHECK(gd0.gamma == 0.5625);
  CHECK(gd0.delta_in == 3.0);
  const auto gc1 = type_parameters(NetworkFamily::kGC, 1);
  CHECK(gc1.alpha == 0.1875);
  CHECK(gc1.gamma == 0.0625);
  CHECK_THROWS_AS(type_parameters(NetworkFamily::kS, 5), std::invalid_argument);
}

TEST_CASE("family names") {
  CHECK(parse_family("GC") == NetworkFamily::kGC);
  CHECK(parse_family("S") == NetworkFamily::kS);
  CHECK(to_string(parse_family("GD")) == "GD");
  CHECK_THROWS_AS(parse_family("gd"), std::invalid_argument);
}

TEST_CASE("spec JSON requires exactly the spec fields") {
  const ExperimentSpec spec = small_spec();
  nlohmann::json j = to_json(spec);
  const ExperimentSpec back = spec_from_json(j);
  CHECK(back.network_family == spec.network_family);
  CHECK(back.n_nodes == spec.n_nodes);
  CHECK(back.master_seed == spec.master_seed);

  nlohmann::json extra = j;
  extra["workers"] = 4;
  CHECK_THROWS_AS(spec_from_json(extra), std::invalid_argument);
  nlohmann::json missing = j;
  missing.erase("xi");
  CHECK_THROWS_AS(spec_from_json(missing), std::invalid_argument);
  nlohmann::json wrong_type = j;
  wrong_type["n_nodes"] = "many";
  CHECK_THROWS_AS(spec_from_json(wrong_type), std::invalid_argument);
  nlohmann::json bad_value = j;
  bad_value["lambda_min"] = 1.5;
  CHECK_THROWS_AS(spec_from_json(bad_value), std::invalid_argument);
}

TEST_CASE("replication streams are independent and reproducible") {
  const ExperimentSpec spec = small_spec();
  const ReplicationNetwork a = build_replication(spec, 0);
  const ReplicationNetwork b = build_replication(spec, 1);
  CHECK(a.graph_seed != b.graph_seed);
  CHECK(a.graph_seed != a.balance_seed);
  CHECK_FALSE(a.graph == b.graph);
  CHECK(build_replication(spec, 0).graph == a.graph);
  CHECK(build_replication(spec, 0).sheets[3].lambda == a.sheets[3].lambda);
}

TEST_CASE("type 3 networks are densified to the target mean degree") {
  ExperimentSpec spec = small_spec();
  spec.type_variant = 3;
  spec.n_nodes = 300;
  const ReplicationNetwork net = build_replication(spec, 0);
  CHECK(net.graph.mean_degree() >= kType3MeanDegree - 1e-9);
  CHECK(net.graph.mean_degree() < kType3MeanDegree + 0.01);
  ExperimentSpec base = spec;
  base.type_variant = 0;
  const ReplicationNetwork sparse = build_replication(base, 0);
  for (const Link& l : sparse.graph.links()) CHECK(net.graph.has_link(l.source, l.target));
}

TEST_CASE("experiment report") {
  RunOptions options;
  options.workers = 2;
  const ExperimentReport report = run_experiment(small_spec(), options);
  REQUIRE(report.replications.size() == 3);
  CHECK(report.ensemble.di.std.has_value());
  CHECK(report.ranking_di.size() == 150);
  CHECK(report.ranking_dc.size() == 150);
  CHECK_FALSE(report.below_min_size);
  double mean_di = 0.0;
  for (const auto& r : report.replications) mean_di += r.summary.di_aggregate / 3.0;
  CHECK(report.ensemble.di.mean == doctest::Approx(mean_di));
  CHECK(report.ranking_di[0].mean == doctest::Approx(report.ensemble.di_max.mean));

  const auto j = report_json(report);
  CHECK(j.at("replications").size() == 3);
  CHECK(j.at("metadata").at("workers") == 2);
}

TEST_CASE("single replication leaves dispersion empty") {
  ExperimentSpec spec = small_spec();
  spec.replications = 1;
  const ExperimentReport report = run_experiment(spec);
  CHECK_FALSE(report.ensemble.di.std.has_value());
  CHECK(report.ranking_di.empty());
  std::ostringstream csv;
  write_ranking_csv(csv, report, ImpactMeasure::kDefaultImpact);
  std::istringstream lines(csv.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "position,mean,std,cv");
  CHECK(first.substr(0, 2) == "1,");
  CHECK(first.substr(first.size() - 2) == ",,");
}

TEST_CASE("tiny networks run but are flagged") {
  ExperimentSpec spec = small_spec();
  spec.replications = 2;
  spec.n_nodes = 2;
  const ExperimentReport report = run_experiment(spec);
  CHECK(report.below_min_size);
  CHECK_FALSE(report.notes.empty());
  CHECK(report.replications[0].summary.banks == 2);
  CHECK_FALSE(report.replications[0].correlation.cs_di.pearson.has_value());
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
  const fs::path root = fs::temp_directory_path() / "contagion_harness_test";
  fs::remove_all(root);
  RunOptions one;
  one.workers = 1;
  one.artifact_dir = root / "a";
  RunOptions three;
  three.workers = 3;
  three.artifact_dir = root / "b";
  write_report(run_experiment(small_spec(), one), root / "a");
  write_report(run_experiment(small_spec(), three), root / "b");
  for (const char* name : {"summary.csv", "ranking_di.csv", "ranking_dc.csv", "edges_0.csv",
                           "edges_2.csv", "balances_1.csv"}) {
    CHECK_MESSAGE(fs::exists(root / "a" / name), name);
    CHECK_MESSAGE(slurp(root / "a" / name) == slurp(root / "b" / name), name);
  }
  CHECK(fs::exists(root / "a" / "report.json"));
  fs::remove_all(root);
}

TEST_CASE("capital sweep flags") {
  ExperimentSpec spec = small_spec();
  spec.replications = 2;
  const std::vector<double> one{0.05};
  const SweepTable single = capital_sweep(spec, one);
  CHECK(single.rows.size() == 1);
  CHECK_FALSE(single.di_strictly_decreasing.has_value());
  CHECK_FALSE(single.dc_more_sensitive.has_value());

  const std::vector<double> lambdas{0.01, 0.05, 0.10};
  const SweepTable table = capital_sweep(spec, lambdas);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.di_strictly_decreasing.has_value());
  CHECK(*table.dc_strictly_decreasing == (table.rows[1].dc.mean < table.rows[0].dc.mean &&
                                          table.rows[2].dc.mean < table.rows[1].dc.mean));
  std::ostringstream csv;
  write_sweep_csv(csv, table);
  CHECK(csv.str().rfind("lambda_min,di_mean", 0) == 0);

  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS(capital_sweep(spec, bad), std::invalid_argument);
}

TEST_CASE("size sweep") {
  ExperimentSpec spec = small_spec();
  spec.replications = 2;
  const std::vector<std::size_t> sizes{50, 200};
  const SweepTable table = size_sweep(spec, sizes);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].below_min_size);
  CHECK_FALSE(table.rows[1].below_min_size);
  CHECK(table.rows[1].parameter == 200.0);
}

TEST_CASE("parallel_for visits every index once and rethrows failures") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 1000);
  CHECK_THROWS_AS(parallel_for(100, 3,
                               [](std::size_t i) {
                                 if (i == 42) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  parallel_for(0, 2, [](std::size_t) { FAIL("no work expected"); });
}
