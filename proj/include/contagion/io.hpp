#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "contagion/balance.hpp"
#include "contagion/clearing.hpp"
#include "contagion/netgen.hpp"

namespace contagion {

// Edge list: header "# nodes=<n> seed=<seed>", then one "source,target" line per link.
void write_edge_list(std::ostream& out, const DirectedGraph& graph, std::uint64_t seed);

struct EdgeListFile {
  DirectedGraph graph;
  std::uint64_t seed = 0;
};

/// Parses the edge-list format. Throws std::runtime_error with the line number
/// on malformed input.
EdgeListFile read_edge_list(std::istream& in);

// CSV "i,j,w", weights with 12 significant digits.
void write_exposures_csv(std::ostream& out, const ExposureMatrix& exposures);

// CSV "bank,ba,bl,nba,nbl,e,lambda".
void write_balances_csv(std::ostream& out, std::span<const BalanceSheet> sheets);

/// One integer per line; blank lines and '#' comments are skipped.
std::vector<std::int64_t> read_degree_file(std::istream& in);

/// JSON lines, one object per outer round:
/// {"round":r,"new_defaults":[...],"max_delta":x,"inner_iterations":k}
void write_cascade_trace(std::ostream& out, const ClearingSolution& solution);

}  // namespace contagion
