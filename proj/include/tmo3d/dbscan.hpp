#pragma once

// Grid-accelerated DBSCAN.
//
// Output matches the classic sequential algorithm run over the input order:
// clusters are numbered by their lowest-index core point, and a border point
// reachable from several clusters joins the lowest-numbered one. Neighborhoods
// are closed balls (distance <= eps) and count the point itself.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace tmo3d {

struct Clustering {
  static constexpr int kNoise = -1;

  std::vector<std::vector<std::size_t>> clusters;  // member indices, ascending
  std::vector<std::size_t> noise;                  // ascending
  std::vector<int> labels;                         // cluster id per point or kNoise
};

namespace detail {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

inline Clustering dbscan(std::span<const Eigen::Vector3d> points, double eps, std::size_t min_pts) {
  using detail::CellKey;
  const std::size_t n = points.size();
  Clustering out;
  out.labels.assign(n, Clustering::kNoise);
  if (n == 0) return out;

  // Cell side slightly above eps/2: same-cell points are always within eps,
  // and any eps-neighbor lies within two cells along each axis.
  const double cell = 0.5 * eps * (1.0 + 1e-7);
  const double eps2 = eps * eps;
  Eigen::Vector3d lo = points[0];
  for (const auto& p : points) lo = lo.cwiseMin(p);

  std::vector<CellKey> key_of(n);
  std::unordered_map<CellKey, std::vector<std::size_t>, detail::CellKeyHash> cells;
  cells.reserve(n / 4 + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d r = (points[i] - lo) / cell;
    key_of[i] = {static_cast<std::int64_t>(std::floor(r.x())),
                 static_cast<std::int64_t>(std::floor(r.y())),
                 static_cast<std::int64_t>(std::floor(r.z()))};
    cells[key_of[i]].push_back(i);
  }

  const auto for_each_neighbor_cell = [&](const CellKey& k, auto&& fn) {
    for (std::int64_t dx = -2; dx <= 2; ++dx)
      for (std::int64_t dy = -2; dy <= 2; ++dy)
        for (std::int64_t dz = -2; dz <= 2; ++dz) {
          auto it = cells.find({k.x + dx, k.y + dy, k.z + dz});
          if (it != cells.end() && !fn(it->first, it->second)) return;
        }
  };
  const auto near = [&](std::size_t a, std::size_t b) {
    return (points[a] - points[b]).squaredNorm() <= eps2;
  };

  // Core flags.
  std::vector<char> core(n, 0);
  for (const auto& [key, members] : cells) {
    if (members.size() >= min_pts) {
      for (auto i : members) core[i] = 1;
      continue;
    }
    for (auto i : members) {
      std::size_t count = 0;
      for_each_neighbor_cell(key, [&](const CellKey&, const std::vector<std::size_t>& other) {
        for (auto j : other) {
          if (near(i, j) && ++count >= min_pts) return false;
        }
        return true;
      });
      core[i] = count >= min_pts ? 1 : 0;
    }
  }

  // Connected components of core points under eps-adjacency.
  detail::UnionFind uf(n);
  std::unordered_map<CellKey, std::vector<std::size_t>, detail::CellKeyHash> core_cells;
  for (const auto& [key, members] : cells) {
    std::vector<std::size_t> c;
    for (auto i : members) {
      if (core[i]) c.push_back(i);
    }
    if (c.empty()) continue;
    for (std::size_t m = 1; m < c.size(); ++m) uf.unite(c[0], c[m]);
    core_cells.emplace(key, std::move(c));
  }
  for (const auto& [key, mine] : core_cells) {
    for (std::int64_t dx = -2; dx <= 2; ++dx)
      for (std::int64_t dy = -2; dy <= 2; ++dy)
        for (std::int64_t dz = -2; dz <= 2; ++dz) {
          const CellKey other_key{key.x + dx, key.y + dy, key.z + dz};
          // Visit each unordered cell pair once.
          if (std::tie(other_key.x, other_key.y, other_key.z) <= std::tie(key.x, key.y, key.z)) {
            continue;
          }
          auto it = core_cells.find(other_key);
          if (it == core_cells.end()) continue;
          if (uf.find(mine[0]) == uf.find(it->second[0])) continue;
          bool linked = false;
          for (auto a : mine) {
            for (auto b : it->second) {
              if (near(a, b)) {
                linked = true;
                break;
              }
            }
            if (linked) break;
          }
          if (linked) uf.unite(mine[0], it->second[0]);
        }
  }

  // Number clusters by their lowest core index. Roots of the union-find are
  // the minimum index of each component (unite keeps the smaller root).
  std::vector<int> cluster_of_root(n, Clustering::kNoise);
  int next_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const std::size_t r = uf.find(i);
    if (cluster_of_root[r] == Clustering::kNoise) cluster_of_root[r] = next_id++;
    out.labels[i] = cluster_of_root[r];
  }

  // Border points join the lowest-numbered adjacent cluster.
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = std::numeric_limits<int>::max();
    for_each_neighbor_cell(key_of[i], [&](const CellKey& k, const std::vector<std::size_t>&) {
      auto it = core_cells.find(k);
      if (it == core_cells.end()) return true;
      for (auto j : it->second) {
        if (out.labels[j] < best && near(i, j)) best = out.labels[j];
      }
      return best != 0;
    });
    if (best != std::numeric_limits<int>::max()) out.labels[i] = best;
  }

  out.clusters.resize(static_cast<std::size_t>(next_id));
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] == Clustering::kNoise) {
      out.noise.push_back(i);
    } else {
      out.clusters[static_cast<std::size_t>(out.labels[i])].push_back(i);
    }
  }
  return out;
}

}  // namespace tmo3d
