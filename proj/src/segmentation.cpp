#include "ovmap/segmentation.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "ovmap/errors.hpp"
#include "ovmap/union_find.hpp"

namespace ovmap {

double normal_edge_weight(const Point3& ni, const Point3& nj) {
  return 1.0 - std::max(0.0, ni.dot(nj));
}

SegmentGraph build_graph(const WorkingCloud& cloud, int k_graph) {
  if (k_graph < 1) throw UsageError("build_graph: k_graph must be positive");
  if (cloud.size() < static_cast<std::size_t>(k_graph) + 1) {
    throw DataError("build_graph: cloud smaller than k_graph + 1");
  }
  if (!cloud.has_normals()) throw DataError("build_graph: normals have not been estimated");

  const auto n = cloud.size();
  std::vector<std::vector<std::uint32_t>> nbrs(n);
#pragma omp parallel for schedule(dynamic, 512)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    // k + 1 because the query point is its own nearest neighbour.
    const auto knn = cloud.index.knn(cloud.points[i], static_cast<std::size_t>(k_graph) + 1);
    auto& out = nbrs[i];
    for (const auto& nb : knn) {
      if (nb.index != i && out.size() < static_cast<std::size_t>(k_graph)) out.push_back(nb.index);
    }
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(n * static_cast<std::size_t>(k_graph));
  for (std::uint32_t i = 0; i < n; ++i) {
    for (const auto j : nbrs[i]) pairs.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  SegmentGraph g;
  g.node_count = n;
  g.edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    g.edges.push_back({a, b, normal_edge_weight(cloud.normals[a], cloud.normals[b])});
  }
  return g;
}

std::vector<SurfaceSegment> felzenszwalb_segment(const SegmentGraph& g, double k_fz,
                                                 std::size_t min_size) {
  if (!(k_fz > 0.0)) throw UsageError("felzenszwalb_segment: k must be positive");
  std::vector<std::uint32_t> order(g.edges.size());
  std::iota(order.begin(), order.end(), 0U);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double wa = g.edges[a].weight;
    const double wb = g.edges[b].weight;
    return wa < wb || (wa == wb && a < b);
  });

  DisjointSet ds(g.node_count);
  // threshold[root] = Int(C) + k / |C|
  std::vector<double> threshold(g.node_count, k_fz);
  for (const auto e : order) {
    const auto& edge = g.edges[e];
    const auto a = ds.find(edge.a);
    const auto b = ds.find(edge.b);
    if (a == b) continue;
    if (edge.weight <= threshold[a] && edge.weight <= threshold[b]) {
      const auto root = ds.unite(a, b);
      // Edges arrive in ascending order, so this weight is the new internal maximum.
      threshold[root] = edge.weight + k_fz / static_cast<double>(ds.component_size(root));
    }
  }

  for (const auto e : order) {
    const auto& edge = g.edges[e];
    const auto a = ds.find(edge.a);
    const auto b = ds.find(edge.b);
    if (a != b && (ds.component_size(a) < min_size || ds.component_size(b) < min_size)) {
      ds.unite(a, b);
    }
  }

  std::vector<std::uint32_t> labels(g.node_count);
  std::vector<std::int64_t> id_of_root(g.node_count, -1);
  std::uint32_t next = 0;
  for (std::uint32_t i = 0; i < g.node_count; ++i) {
    const auto r = ds.find(i);
    if (id_of_root[r] < 0) id_of_root[r] = next++;
    labels[i] = static_cast<std::uint32_t>(id_of_root[r]);
  }
  return segments_from_labels(labels);
}

std::vector<std::uint32_t> segment_labels(std::span<const SurfaceSegment> segments,
                                          std::size_t point_count) {
  std::vector<std::uint32_t> labels(point_count, UINT32_MAX);
  for (const auto& s : segments) {
    for (const auto p : s.points) {
      if (p >= point_count) throw DataError("segment references point outside the cloud");
      if (labels[p] != UINT32_MAX) throw DataError("segments overlap");
      labels[p] = s.id;
    }
  }
  if (std::find(labels.begin(), labels.end(), UINT32_MAX) != labels.end()) {
    throw DataError("segments do not cover the cloud");
  }
  return labels;
}

std::vector<SurfaceSegment> segments_from_labels(std::span<const std::uint32_t> labels) {
  std::map<std::uint32_t, std::uint32_t> dense;  // label -> position
  std::vector<SurfaceSegment> out;
  for (std::uint32_t i = 0; i < labels.size(); ++i) {
    const auto [it, inserted] = dense.try_emplace(labels[i], static_cast<std::uint32_t>(out.size()));
    if (inserted) out.push_back({labels[i], {}});
    out[it->second].points.push_back(i);
  }
  return out;
}

}  // namespace ovmap
