#include "ltlmas/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace ltlmas {

EdgeSet sense_edges(std::span<const Vec> x, std::span<const double> d_con) {
  if (x.size() != d_con.size()) throw std::invalid_argument("position and sensing radius counts differ");
  EdgeSet out;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if ((x[i] - x[j]).norm() <= std::min(d_con[i], d_con[j])) out.push_back({i, j});
  return out;
}

void validate_edges(const EdgeSet& edges, std::size_t n) {
  std::set<Edge> seen;
  for (const auto& e : edges) {
    if (e.tail >= e.head || e.head >= n)
      throw std::invalid_argument("invalid edge (" + std::to_string(e.tail) + "," + std::to_string(e.head) + ")");
    if (!seen.insert(e).second)
      throw std::invalid_argument("duplicate edge (" + std::to_string(e.tail) + "," + std::to_string(e.head) + ")");
  }
}

EdgeSet complete_edges(std::size_t n, const EdgeSet& initial) {
  validate_edges(initial, n);
  std::set<Edge> present(initial.begin(), initial.end());
  EdgeSet out = initial;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!present.contains({i, j})) out.push_back({i, j});
  return out;
}

Eigen::MatrixXi incidence(const EdgeSet& edges, std::size_t n) {
  validate_edges(edges, n);
  Eigen::MatrixXi d = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(edges.size()));
  for (std::size_t m = 0; m < edges.size(); ++m) {
    d(static_cast<Eigen::Index>(edges[m].tail), static_cast<Eigen::Index>(m)) = -1;
    d(static_cast<Eigen::Index>(edges[m].head), static_cast<Eigen::Index>(m)) = 1;
  }
  return d;
}

bool is_connected(const EdgeSet& edges, std::size_t n) {
  if (n == 0) return false;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::size_t components = n;
  for (const auto& e : edges) {
    if (e.tail >= n || e.head >= n) throw std::invalid_argument("edge index out of range");
    auto a = find(e.tail), b = find(e.head);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

std::optional<std::pair<std::size_t, std::size_t>> first_collision(std::span<const Vec> x, std::span<const double> r) {
  if (x.size() != r.size()) throw std::invalid_argument("position and radius counts differ");
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if ((x[i] - x[j]).norm() < r[i] + r[j]) return std::pair{i, j};
  return std::nullopt;
}

bool check_collision_free(std::span<const Vec> x, std::span<const double> r) { return !first_collision(x, r); }

}  // namespace ltlmas
