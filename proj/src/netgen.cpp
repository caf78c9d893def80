#include "contagion/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include <fmt/format.h>

#include "contagion/rng.hpp"

namespace contagion {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr int kSelfLoopRetries = 100;

std::uint64_t link_key(NodeId source, NodeId target) {
  return (static_cast<std::uint64_t>(source) << 32) | target;
}

// Draws endpoints with probability (k(u) + delta) / (t + n delta): with mass t
// the endpoint of a uniformly chosen recorded link, otherwise a uniform node.
class EndpointSampler {
 public:
  EndpointSampler(const std::vector<NodeId>& endpoints, double delta)
      : endpoints_(endpoints), delta_(delta) {}

  NodeId draw(std::size_t nodes, Rng& rng) const {
    const double t = static_cast<double>(endpoints_.size());
    const double total = t + static_cast<double>(nodes) * delta_;
    const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
    if (r < t) {
      const auto idx = std::min(static_cast<std::size_t>(r), endpoints_.size() - 1);
      return endpoints_[idx];
    }
    const auto node = static_cast<std::size_t>((r - t) / delta_);
    return static_cast<NodeId>(std::min(node, nodes - 1));
  }

 private:
  const std::vector<NodeId>& endpoints_;
  double delta_;
};

}  // namespace

void AttachmentParams::validate() const {
  for (double p : {alpha, beta, gamma}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(fmt::format("attachment probability {} outside [0,1]", p));
    }
  }
  if (std::abs(alpha + beta + gamma - 1.0) > kSumTolerance) {
    throw std::invalid_argument(
        fmt::format("alpha + beta + gamma = {:.15g}, expected 1", alpha + beta + gamma));
  }
  if (!(delta_in >= 0.0) || !(delta_out >= 0.0)) {
    throw std::invalid_argument("delta_in and delta_out must be non-negative");
  }
}

void GenParams::validate() const {
  attachment.validate();
  if (n_target < 2) {
    throw std::invalid_argument(fmt::format("n_target must be >= 2, got {}", n_target));
  }
  if (n_target > 2 && attachment.alpha + attachment.gamma <= 0.0) {
    throw std::invalid_argument(
        "alpha + gamma = 0: no step adds a node, n_target can never be reached");
  }
  if (n_target > std::numeric_limits<NodeId>::max()) {
    throw std::invalid_argument("n_target exceeds node id range");
  }
}

DirectedGraph::DirectedGraph(std::size_t n, std::vector<Link> links)
    : n_(n), in_degree_(n, 0), out_degree_(n, 0) {
  std::erase_if(links, [](const Link& l) { return l.source == l.target; });
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  for (const Link& l : links) {
    if (l.source >= n || l.target >= n) {
      throw std::invalid_argument(
          fmt::format("link {} -> {} out of range for {} nodes", l.source, l.target, n));
    }
    ++out_degree_[l.source];
    ++in_degree_[l.target];
  }
  links_ = std::move(links);
}

std::uint32_t DirectedGraph::max_in_degree() const noexcept {
  return in_degree_.empty() ? 0 : *std::max_element(in_degree_.begin(), in_degree_.end());
}

std::uint32_t DirectedGraph::max_out_degree() const noexcept {
  return out_degree_.empty() ? 0 : *std::max_element(out_degree_.begin(), out_degree_.end());
}

double DirectedGraph::mean_degree() const noexcept {
  return n_ == 0 ? 0.0 : 2.0 * static_cast<double>(links_.size()) / static_cast<double>(n_);
}

bool DirectedGraph::has_link(NodeId source, NodeId target) const {
  return std::binary_search(links_.begin(), links_.end(), Link{source, target});
}

GeneratedGraph generate_with_stats(const GenParams& params, const GrowthObserver& observer) {
  params.validate();
  const AttachmentParams& a = params.attachment;
  const bool reject_duplicates = params.multi_link == MultiLinkPolicy::kRejectAtGrowth;

  Rng rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Recorded links as parallel token arrays: sources drive out-attachment,
  // targets drive in-attachment.
  std::vector<NodeId> sources{0, 1};
  std::vector<NodeId> targets{1, 0};
  std::vector<std::uint32_t> in_degree{1, 1};
  std::vector<std::uint32_t> out_degree{1, 1};
  std::unordered_set<std::uint64_t> present{link_key(0, 1), link_key(1, 0)};
  std::size_t nodes = 2;

  const EndpointSampler pick_target(targets, a.delta_in);
  const EndpointSampler pick_source(sources, a.delta_out);

  GenerationStats stats;
  const auto record = [&](NodeId v, NodeId u) {
    sources.push_back(v);
    targets.push_back(u);
    ++out_degree[v];
    ++in_degree[u];
    present.insert(link_key(v, u));
  };
  const auto add_node = [&]() {
    in_degree.push_back(0);
    out_degree.push_back(0);
    return static_cast<NodeId>(nodes++);
  };

  while (nodes < params.n_target) {
    if (observer) {
      observer(GrowthState{sources.size(), nodes, in_degree, out_degree, a.delta_in,
                           a.delta_out});
    }
    ++stats.steps;
    const double r = unit(rng);
    if (r < a.alpha) {
      const NodeId u = pick_target.draw(nodes, rng);
      const NodeId v = add_node();
      record(v, u);
    } else if (r < a.alpha + a.beta) {
      const NodeId v = pick_source.draw(nodes, rng);
      NodeId u = pick_target.draw(nodes, rng);
      for (int retry = 0; u == v && retry < kSelfLoopRetries; ++retry) {
        u = pick_target.draw(nodes, rng);
      }
      if (u == v) {
        ++stats.self_loops_skipped;
        continue;
      }
      if (present.contains(link_key(v, u))) {
        if (reject_duplicates) {
          ++stats.duplicates_skipped;
          continue;
        }
      }
      record(v, u);
    } else {
      const NodeId v = pick_source.draw(nodes, rng);
      const NodeId u = add_node();
      record(v, u);
    }
  }

  stats.raw_links = sources.size();
  std::vector<Link> links;
  links.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) links.push_back({sources[i], targets[i]});
  GeneratedGraph out{DirectedGraph(nodes, std::move(links)), stats};
  out.stats.final_links = out.graph.link_count();
  return out;
}

DirectedGraph generate(const GenParams& params) { return generate_with_stats(params).graph; }

AttachmentParams params_from_delta_in(double delta_in) {
  if (!(delta_in > 0.0 && delta_in < 4.0)) {
    throw std::invalid_argument(fmt::format("delta_in must lie in (0,4), got {}", delta_in));
  }
  AttachmentParams p;
  p.alpha = (12.0 - 3.0 * delta_in) / 16.0;
  p.beta = 0.25;
  p.gamma = 3.0 * delta_in / 16.0;
  p.delta_in = delta_in;
  p.delta_out = 4.0 - delta_in;
  return p;
}

ExponentPair limit_exponents(const AttachmentParams& p) {
  if (p.alpha + p.beta <= 0.0 || p.beta + p.gamma <= 0.0) {
    throw std::invalid_argument("limit exponents undefined: alpha + beta or beta + gamma is 0");
  }
  const double spread = p.alpha + p.gamma;
  return {1.0 + (1.0 + p.delta_in * spread) / (p.alpha + p.beta),
          1.0 + (1.0 + p.delta_out * spread) / (p.beta + p.gamma)};
}

double constraint_curve_out_exponent(double x_in) {
  if (!(x_in > 1.0)) throw std::invalid_argument("x_in must exceed 1");
  return (x_in + 15.0) / (x_in - 1.0);
}

DirectedGraph augment_random_links(const DirectedGraph& graph, double target_mean_degree,
                                   std::uint64_t seed) {
  const std::size_t n = graph.node_count();
  const double current = graph.mean_degree();
  if (target_mean_degree < current - 1e-12) {
    throw std::invalid_argument(fmt::format(
        "target mean degree {} is below the current mean degree {}", target_mean_degree, current));
  }
  const auto wanted =
      static_cast<std::size_t>(std::ceil(target_mean_degree * static_cast<double>(n) / 2.0 - 1e-9));
  const std::size_t capacity = n * (n - 1);
  if (wanted > capacity) {
    throw std::invalid_argument(fmt::format(
        "target mean degree {} unreachable: complete digraph on {} nodes has mean degree {}",
        target_mean_degree, n, 2.0 * static_cast<double>(n - 1)));
  }
  if (wanted <= graph.link_count()) return graph;

  std::unordered_set<std::uint64_t> present;
  present.reserve(wanted * 2);
  std::vector<Link> links(graph.links().begin(), graph.links().end());
  for (const Link& l : links) present.insert(link_key(l.source, l.target));

  Rng rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  while (links.size() < wanted) {
    const NodeId i = pick(rng);
    const NodeId j = pick(rng);
    if (i == j || !present.insert(link_key(i, j)).second) continue;
    links.push_back({i, j});
  }
  return DirectedGraph(n, std::move(links));
}

}  // namespace contagion
