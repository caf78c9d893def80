#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace contagion {

using NodeId = std::uint32_t;

/// Directed link `source -> target`: source owes target.
struct Link {
  NodeId source = 0;
  NodeId target = 0;

  friend constexpr auto operator<=>(const Link&, const Link&) = default;
};

/// The five attachment parameters of the directed preferential-attachment
/// process.
struct AttachmentParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta_in = 0.0;
  double delta_out = 0.0;

  /// Throws std::invalid_argument when probabilities are outside [0,1], do not
  /// sum to one within 1e-12, or an offset is negative.
  void validate() const;
};

/// What to do with a beta step that would repeat an existing link.
enum class MultiLinkPolicy {
  kRejectAtGrowth,    ///< skip the step; growth degrees stay simple-graph degrees
  kMergeAtFinalize,   ///< record it; merge parallel links when finalizing
};

struct GenParams {
  AttachmentParams attachment;
  std::size_t n_target = 2;
  std::uint64_t seed = 0;
  MultiLinkPolicy multi_link = MultiLinkPolicy::kRejectAtGrowth;

  void validate() const;
};

/// Simple digraph: no self-loops, no parallel links. Links are kept sorted by
/// (source, target).
class DirectedGraph {
 public:
  DirectedGraph() = default;

  /// Builds a simple digraph, dropping self-loops and merging parallel links.
  /// Throws std::invalid_argument for endpoints >= n.
  DirectedGraph(std::size_t n, std::vector<Link> links);

  std::size_t node_count() const noexcept { return n_; }
  std::size_t link_count() const noexcept { return links_.size(); }
  std::span<const Link> links() const noexcept { return links_; }
  std::span<const std::uint32_t> in_degrees() const noexcept { return in_degree_; }
  std::span<const std::uint32_t> out_degrees() const noexcept { return out_degree_; }
  std::uint32_t in_degree(NodeId v) const { return in_degree_.at(v); }
  std::uint32_t out_degree(NodeId v) const { return out_degree_.at(v); }
  std::uint32_t max_in_degree() const noexcept;
  std::uint32_t max_out_degree() const noexcept;

  /// Mean total degree (in + out) per node, i.e. 2 * links / nodes.
  double mean_degree() const noexcept;

  bool has_link(NodeId source, NodeId target) const;

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Link> links_;
  std::vector<std::uint32_t> in_degree_;
  std::vector<std::uint32_t> out_degree_;
};

/// Snapshot of the growth process handed to an observer before every step.
struct GrowthState {
  std::size_t links = 0;  ///< t: links recorded so far (multigraph count)
  std::size_t nodes = 0;  ///< n(t)
  std::span<const std::uint32_t> in_degree;   ///< running degrees
  std::span<const std::uint32_t> out_degree;
  double delta_in = 0.0;
  double delta_out = 0.0;

  /// Unnormalized in-attachment weight k_in(u) + delta_in.
  double in_weight(NodeId u) const { return in_degree[u] + delta_in; }
  double out_weight(NodeId v) const { return out_degree[v] + delta_out; }
  /// Normalizers t + n(t) * delta used by the sampler.
  double in_normalizer() const { return links + nodes * delta_in; }
  double out_normalizer() const { return links + nodes * delta_out; }
};

using GrowthObserver = std::function<void(const GrowthState&)>;

struct GenerationStats {
  std::size_t steps = 0;              ///< growth steps attempted
  std::size_t raw_links = 0;          ///< links recorded during growth, incl. G0
  std::size_t self_loops_skipped = 0; ///< beta steps abandoned after resampling
  std::size_t duplicates_skipped = 0; ///< beta steps rejected as parallel links
  std::size_t final_links = 0;
};

struct GeneratedGraph {
  DirectedGraph graph;
  GenerationStats stats;
};

/// Grows a graph from G0 = {0 -> 1, 1 -> 0} until it has `n_target` nodes.
/// Deterministic in `params.seed`.
GeneratedGraph generate_with_stats(const GenParams& params,
                                   const GrowthObserver& observer = {});

DirectedGraph generate(const GenParams& params);

/// Point on the constraint curve alpha + gamma = 0.75, delta_in + delta_out = 4
/// with alpha / gamma = delta_out / delta_in. Requires 0 < delta_in < 4.
AttachmentParams params_from_delta_in(double delta_in);

struct ExponentPair {
  double x_in = 0.0;
  double x_out = 0.0;
};

/// Limiting in/out degree exponents of the growth process.
ExponentPair limit_exponents(const AttachmentParams& params);

/// Out-exponent on the constraint curve as a function of the in-exponent.
double constraint_curve_out_exponent(double x_in);

/// Adds uniformly random links between distinct, unlinked node pairs until
/// the mean total degree reaches `target_mean_degree` (first link count m with
/// 2m/n >= target). Throws when the target exceeds the complete digraph or is
/// below the current mean degree.
DirectedGraph augment_random_links(const DirectedGraph& graph, double target_mean_degree,
                                   std::uint64_t seed);

}  // namespace contagion
