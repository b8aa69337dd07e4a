#include "dosp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <regex>
#include <set>

#include "dosp/errors.hpp"
#include "dosp/rng.hpp"

namespace dosp {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

Graph Graph::build(std::size_t node_count, std::span<const Edge> edges) {
  if (node_count == 0) throw InvalidArgument("graph needs at least one node");

  Graph g;
  g.adjacency_.assign(node_count, {});
  std::set<Edge> seen;
  for (auto [a, b] : edges) {
    if (a >= node_count || b >= node_count) {
      throw InvalidEdge("edge (" + std::to_string(a) + "," + std::to_string(b) +
                        ") references a node outside [0," +
                        std::to_string(node_count) + ")");
    }
    if (a == b) {
      throw InvalidEdge("self-loop on node " + std::to_string(a));
    }
    Edge key{std::min(a, b), std::max(a, b)};
    if (!seen.insert(key).second) {
      throw InvalidEdge("duplicate edge (" + std::to_string(key.first) + "," +
                        std::to_string(key.second) + ")");
    }
    g.edges_.push_back(key);
    g.adjacency_[a].push_back(b);
    g.adjacency_[b].push_back(a);
  }
  for (auto& nbrs : g.adjacency_) std::sort(nbrs.begin(), nbrs.end());

  g.reverse_slot_.resize(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    for (std::size_t j : g.adjacency_[i]) {
      const auto& back = g.adjacency_[j];
      auto it = std::lower_bound(back.begin(), back.end(), i);
      g.reverse_slot_[i].push_back(static_cast<std::size_t>(it - back.begin()));
    }
  }

  auto from_zero = g.hop_distances(0);
  for (std::size_t v = 0; v < node_count; ++v) {
    if (from_zero[v] == kUnreached) {
      throw DisconnectedGraph("node " + std::to_string(v) +
                              " is unreachable from node 0");
    }
  }

  std::size_t diam = 0;
  for (std::size_t s = 0; s < node_count; ++s) {
    auto d = g.hop_distances(s);
    diam = std::max(diam, *std::max_element(d.begin(), d.end()));
  }
  g.diameter_ = diam;
  return g;
}

std::span<const std::size_t> Graph::neighbors(std::size_t i) const {
  if (i >= adjacency_.size()) {
    throw OutOfRange("node index " + std::to_string(i) + " out of range");
  }
  return adjacency_[i];
}

std::size_t Graph::reverse_slot(std::size_t i, std::size_t slot) const {
  if (i >= adjacency_.size() || slot >= adjacency_[i].size()) {
    throw OutOfRange("neighbor slot out of range");
  }
  return reverse_slot_[i][slot];
}

bool Graph::adjacent(std::size_t i, std::size_t j) const {
  auto nbrs = neighbors(i);
  return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

std::vector<std::size_t> Graph::hop_distances(std::size_t source) const {
  std::vector<std::size_t> dist(adjacency_.size(), kUnreached);
  std::deque<std::size_t> queue{source};
  dist.at(source) = 0;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (auto v : adjacency_[u]) {
      if (dist[v] == kUnreached) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

Graph make_cycle(std::size_t n) {
  std::vector<Edge> e;
  if (n == 2) e.push_back({0, 1});
  if (n >= 3) {
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
  }
  return Graph::build(n, e);
}

Graph make_path(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return Graph::build(n, e);
}

Graph make_complete(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.push_back({i, j});
  return Graph::build(n, e);
}

Graph make_star(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 1; i < n; ++i) e.push_back({0, i});
  return Graph::build(n, e);
}

Graph make_random_geometric(std::size_t n, double radius, std::uint64_t seed) {
  if (!(radius > 0.0)) throw InvalidArgument("random_geometric radius must be > 0");
  auto rng = substream(seed, "topology");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, double>> pos(n);
  for (auto& p : pos) {
    p.first = unit(rng);
    p.second = unit(rng);
  }
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = pos[i].first - pos[j].first;
      double dy = pos[i].second - pos[j].second;
      if (std::hypot(dx, dy) <= radius) e.push_back({i, j});
    }
  }
  return Graph::build(n, e);
}

Graph make_graph_from_generator(const std::string& spec, std::size_t n) {
  if (spec == "cycle") return make_cycle(n);
  if (spec == "path") return make_path(n);
  if (spec == "complete") return make_complete(n);
  if (spec == "star") return make_star(n);
  static const std::regex rgg(
      R"(\s*random_geometric\s*\(\s*([0-9eE+\-.]+)\s*,\s*([0-9]+)\s*\)\s*)");
  std::smatch m;
  if (std::regex_match(spec, m, rgg)) {
    return make_random_geometric(n, std::stod(m[1].str()),
                                 std::stoull(m[2].str()));
  }
  throw InvalidArgument("unknown graph generator '" + spec + "'");
}

}  // namespace dosp
