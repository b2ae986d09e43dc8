#pragma once

// Brute-force reference implementations shared by the unit tests and the acceptance runner.
// They trade speed for obviousness: all-pairs distances, std::set intersections, dense
// adjacency matrices.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "ovmap/camera.hpp"

namespace ovmap::oracle {

// Replays the merge hierarchy: at each level, pairs (2i, 2i+1) are unified by a transitive
// closure over the cross-pair relation "overlap / larger size > thr".
inline std::set<std::set<std::uint32_t>> merge(
    std::vector<std::vector<std::set<std::uint32_t>>> levels, double thr) {
  while (levels.size() > 1) {
    std::vector<std::vector<std::set<std::uint32_t>>> next;
    for (std::size_t i = 0; i + 1 < levels.size(); i += 2) {
      auto nodes = levels[i];
      const std::size_t nl = nodes.size();
      nodes.insert(nodes.end(), levels[i + 1].begin(), levels[i + 1].end());
      const std::size_t n = nodes.size();
      std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
      for (std::size_t a = 0; a < nl; ++a) {
        for (std::size_t b = nl; b < n; ++b) {
          std::size_t inter = 0;
          for (const auto p : nodes[a]) inter += nodes[b].count(p);
          const double orv = static_cast<double>(inter) /
                             static_cast<double>(std::max(nodes[a].size(), nodes[b].size()));
          if (orv > thr) adj[a][b] = adj[b][a] = true;
        }
      }
      // Warshall closure.
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b)
            if (adj[a][k] && adj[k][b]) adj[a][b] = true;
      std::vector<bool> done(n, false);
      std::vector<std::set<std::uint32_t>> merged;
      for (std::size_t a = 0; a < n; ++a) {
        if (done[a]) continue;
        std::set<std::uint32_t> u = nodes[a];
        done[a] = true;
        for (std::size_t b = a + 1; b < n; ++b) {
          if (adj[a][b]) {
            u.insert(nodes[b].begin(), nodes[b].end());
            done[b] = true;
          }
        }
        merged.push_back(std::move(u));
      }
      next.push_back(std::move(merged));
    }
    if (levels.size() % 2 == 1) next.push_back(levels.back());
    levels = std::move(next);
  }
  return {levels[0].begin(), levels[0].end()};
}

// Textbook DBSCAN over all pairs; clusters start from core points in index order and a point
// belongs to the first cluster that reaches it.
inline std::vector<std::int32_t> dbscan(const std::vector<Point3>& pts, double eps,
                                        std::size_t min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if ((pts[i] - pts[j]).squaredNorm() <= eps * eps) nb[i].push_back(j);
    }
  }
  std::vector<std::int32_t> label(n, -1);
  std::int32_t c = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] != -1 || nb[s].size() < min_pts) continue;
    std::vector<std::size_t> stack{s};
    label[s] = c;
    while (!stack.empty()) {
      const auto p = stack.back();
      stack.pop_back();
      if (nb[p].size() < min_pts) continue;
      for (const auto q : nb[p]) {
        if (label[q] == -1) {
          label[q] = c;
          stack.push_back(q);
        }
      }
    }
    ++c;
  }
  return label;
}

// Renumbers labels 0.. in order of first appearance (negative labels kept), so two clusterings
// can be compared up to relabeling.
inline std::vector<std::int32_t> canonical(const std::vector<std::int32_t>& labels) {
  std::map<std::int32_t, std::int32_t> m;
  std::vector<std::int32_t> out;
  for (const auto l : labels) {
    if (l < 0) {
      out.push_back(l);
      continue;
    }
    const auto it = m.try_emplace(l, static_cast<std::int32_t>(m.size())).first;
    out.push_back(it->second);
  }
  return out;
}

// Dominant group per segment by histogram over explicit (segment, group) counts.
// Ties go to the smaller group id; a segment no group touches gets 0.
inline std::vector<std::uint32_t> vote(const std::vector<std::vector<std::uint32_t>>& segments,
                                       const std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>>& groups,
                                       std::size_t n) {
  std::vector<std::uint32_t> labels(n, 0);
  for (const auto& s : segments) {
    std::map<std::uint32_t, std::size_t> count;
    for (const auto& [g, pts] : groups) {
      const std::set<std::uint32_t> in(pts.begin(), pts.end());
      for (const auto p : s) count[g] += in.count(p);
    }
    std::uint32_t best = 0;
    std::size_t best_n = 0;
    for (const auto& [g, c] : count) {
      if (c > best_n) {
        best_n = c;
        best = g;
      }
    }
    for (const auto p : s) labels[p] = best;
  }
  return labels;
}

}  // namespace ovmap::oracle
