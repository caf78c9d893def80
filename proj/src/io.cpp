#include "contagion/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

namespace contagion {

namespace {

template <typename T>
T parse_number(std::string_view text, std::size_t line) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::runtime_error(fmt::format("line {}: cannot parse '{}'", line, text));
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void write_edge_list(std::ostream& out, const DirectedGraph& graph, std::uint64_t seed) {
  fmt::print(out, "# nodes={} seed={}\n", graph.node_count(), seed);
  for (const Link& l : graph.links()) fmt::print(out, "{},{}\n", l.source, l.target);
}

EdgeListFile read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error("edge list is empty");
  ++line_no;
  const std::string_view header = trim(line);
  const auto nodes_at = header.find("nodes=");
  const auto seed_at = header.find("seed=");
  if (header.empty() || header.front() != '#' || nodes_at == std::string_view::npos ||
      seed_at == std::string_view::npos) {
    throw std::runtime_error("line 1: expected header '# nodes=<n> seed=<seed>'");
  }
  const auto field = [&](std::size_t at, std::size_t skip) {
    const std::string_view rest = header.substr(at + skip);
    return rest.substr(0, rest.find(' '));
  };
  const auto n = parse_number<std::size_t>(field(nodes_at, 6), line_no);
  EdgeListFile file;
  file.seed = parse_number<std::uint64_t>(field(seed_at, 5), line_no);

  std::vector<Link> links;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    const auto comma = row.find(',');
    if (comma == std::string_view::npos) {
      throw std::runtime_error(fmt::format("line {}: expected 'source,target'", line_no));
    }
    const Link link{parse_number<NodeId>(trim(row.substr(0, comma)), line_no),
                    parse_number<NodeId>(trim(row.substr(comma + 1)), line_no)};
    if (link.source >= n || link.target >= n) {
      throw std::runtime_error(
          fmt::format("line {}: node id out of range for nodes={}", line_no, n));
    }
    links.push_back(link);
  }
  try {
    file.graph = DirectedGraph(n, std::move(links));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(e.what());
  }
  return file;
}

void write_exposures_csv(std::ostream& out, const ExposureMatrix& exposures) {
  out << "i,j,w\n";
  for (const Exposure& x : exposures.entries()) {
    fmt::print(out, "{},{},{:.12g}\n", x.debtor, x.creditor, x.weight);
  }
}

void write_balances_csv(std::ostream& out, std::span<const BalanceSheet> sheets) {
  out << "bank,ba,bl,nba,nbl,e,lambda\n";
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    const BalanceSheet& s = sheets[i];
    fmt::print(out, "{},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", i, s.ba, s.bl, s.nba,
               s.nbl, s.e, s.lambda);
  }
}

std::vector<std::int64_t> read_degree_file(std::istream& in) {
  std::vector<std::int64_t> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    values.push_back(parse_number<std::int64_t>(row, line_no));
  }
  return values;
}

void write_cascade_trace(std::ostream& out, const ClearingSolution& solution) {
  for (const ClearingRound& r : solution.trace) {
    const nlohmann::json row = {{"round", r.round},
                                {"new_defaults", r.new_defaults},
                                {"max_delta", r.max_delta},
                                {"inner_iterations", r.inner_iterations}};
    out << row.dump() << '\n';
  }
}

}  // namespace contagion
