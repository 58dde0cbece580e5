#pragma once

// Proximity graph, edge numbering and incidence matrices. Agents are 0-based.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace ltlmas {

using Vec = Eigen::VectorXd;

/// Edge (tail, head) with tail < head.
struct Edge {
  std::size_t tail;
  std::size_t head;

  auto operator<=>(const Edge&) const = default;
};

/// Edge m is `edges[m]`; the order is the numbering.
using EdgeSet = std::vector<Edge>;

/// Pairs with ||x_i - x_j|| <= min(d_con_i, d_con_j), lexicographic order.
EdgeSet sense_edges(std::span<const Vec> x, std::span<const double> d_con);

/// All n(n-1)/2 pairs: `initial` first in its own order, the rest appended
/// lexicographically. Throws std::invalid_argument on an invalid `initial`.
EdgeSet complete_edges(std::size_t n, const EdgeSet& initial);

/// Throws std::invalid_argument on duplicates, tail >= head or indices >= n.
void validate_edges(const EdgeSet& edges, std::size_t n);

/// n x M matrix with -1 at the tail and +1 at the head of each column.
Eigen::MatrixXi incidence(const EdgeSet& edges, std::size_t n);

bool is_connected(const EdgeSet& edges, std::size_t n);

/// Sphere disjointness, ||x_i - x_j|| >= r_i + r_j for all pairs (the
/// spheres are open, so touching ones do not overlap).
bool check_collision_free(std::span<const Vec> x, std::span<const double> r);

/// First pair (lexicographic) violating check_collision_free.
std::optional<std::pair<std::size_t, std::size_t>> first_collision(std::span<const Vec> x, std::span<const double> r);

}  // namespace ltlmas
