#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dosp {

using Edge = std::pair<std::size_t, std::size_t>;

// Undirected, connected agent network. Immutable after construction.
//
// Each node i owns an ordered neighbor list; the position of j in that list
// is the "slot" of the directed pair (i, j). Multipliers of the proximity
// constraints are stored per slot, so the graph also answers the reverse
// query: for slot s of i (neighbor j), which slot of j points back at i.
class Graph {
 public:
  // Throws InvalidEdge (self-loop, duplicate, out-of-range index) or
  // DisconnectedGraph (some node unreachable from node 0).
  static Graph build(std::size_t node_count, std::span<const Edge> edges);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  // Sorted ascending.
  std::span<const std::size_t> neighbors(std::size_t i) const;
  std::size_t degree(std::size_t i) const { return neighbors(i).size(); }

  // Slot of i inside neighbors(neighbors(i)[slot]).
  std::size_t reverse_slot(std::size_t i, std::size_t slot) const;

  bool adjacent(std::size_t i, std::size_t j) const;

  // Hop distances from `source` to every node.
  std::vector<std::size_t> hop_distances(std::size_t source) const;
  std::size_t diameter() const noexcept { return diameter_; }

 private:
  Graph() = default;

  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::vector<std::size_t>> reverse_slot_;
  std::size_t diameter_ = 0;
};

// Generator shorthands accepted in run configs.
Graph make_cycle(std::size_t n);
Graph make_path(std::size_t n);
Graph make_complete(std::size_t n);
Graph make_star(std::size_t n);
// Nodes uniform in the unit square, edges between nodes within `radius`.
Graph make_random_geometric(std::size_t n, double radius, std::uint64_t seed);

// Parses "cycle", "path", "complete", "star" or
// "random_geometric(radius, seed)" for `n` nodes.
Graph make_graph_from_generator(const std::string& spec, std::size_t n);

}  // namespace dosp
