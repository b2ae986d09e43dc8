#include "ovmap/postprocess.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "ovmap/errors.hpp"

namespace ovmap {

void PostprocessConfig::validate() const {
  if (!(dbscan_eps > 0.0)) throw UsageError("dbscan_eps must be positive");
  if (dbscan_min_pts < 1) throw UsageError("dbscan_min_pts must be at least 1");
  if (min_instance_points < 1) throw UsageError("min_instance_points must be at least 1");
  if (!(knn_fill_radius > 0.0)) throw UsageError("knn_fill_radius must be positive");
}

std::vector<std::int32_t> dbscan(std::span<const Point3> points, double eps,
                                 std::size_t min_pts) {
  if (!(eps > 0.0)) throw UsageError("dbscan: eps must be positive");
  if (min_pts < 1) throw UsageError("dbscan: min_pts must be at least 1");
  const std::size_t n = points.size();
  std::vector<std::int32_t> labels(n, -1);
  if (n == 0) return labels;

  const KdTree tree(std::vector<Point3>(points.begin(), points.end()));
  std::vector<std::vector<std::uint32_t>> nbrs(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    std::vector<KdTree::Neighbor> found;
    tree.radius_search(points[static_cast<std::size_t>(i)], eps, found);
    auto& out = nbrs[static_cast<std::size_t>(i)];
    out.reserve(found.size());
    for (const auto& nb : found) out.push_back(nb.index);
  }

  std::int32_t next = 0;
  std::deque<std::uint32_t> queue;
  for (std::uint32_t seed = 0; seed < n; ++seed) {
    if (labels[seed] != -1 || nbrs[seed].size() < min_pts) continue;
    const std::int32_t c = next++;
    labels[seed] = c;
    queue.assign(1, seed);
    while (!queue.empty()) {
      const auto p = queue.front();
      queue.pop_front();
      if (nbrs[p].size() < min_pts) continue;  // border: reached, not expanded
      for (const auto q : nbrs[p]) {
        if (labels[q] != -1) continue;
        labels[q] = c;
        queue.push_back(q);
      }
    }
  }
  return labels;
}

InstanceMap split_and_filter(const InstanceMap& map, const WorkingCloud& cloud,
                             const PostprocessConfig& cfg) {
  cfg.validate();
  if (map.point_count() != cloud.size()) {
    throw InvariantError("split_and_filter: map and cloud sizes differ");
  }
  const auto members = map.members();
  const auto& records = map.instances();

  struct Split {
    std::vector<std::vector<std::uint32_t>> clusters;  // [0] keeps the id
  };
  std::vector<Split> splits(records.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(records.size()); ++r) {
    const auto& idx = members[static_cast<std::size_t>(r)];
    std::vector<Point3> pts;
    pts.reserve(idx.size());
    for (const auto p : idx) pts.push_back(cloud.points[p]);
    const auto labels = dbscan(pts, cfg.dbscan_eps, cfg.dbscan_min_pts);
    std::int32_t count = 0;
    for (const auto l : labels) count = std::max(count, l + 1);
    std::vector<std::vector<std::uint32_t>> clusters(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (labels[i] >= 0) clusters[static_cast<std::size_t>(labels[i])].push_back(idx[i]);
    }
    // Members are ascending, so clusters[i].front() is the smallest index in each.
    std::stable_sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
      if (a.size() != b.size()) return a.size() > b.size();
      return a.front() < b.front();
    });
    auto& out = splits[static_cast<std::size_t>(r)].clusters;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (c == 0 || clusters[c].size() >= cfg.min_instance_points) {
        out.push_back(std::move(clusters[c]));
      }
    }
  }

  InstanceId next = 1;
  for (const auto& rec : records) next = std::max(next, rec.id + 1);

  InstanceMap out(map.point_count());
  auto& labels = out.mutable_labels();
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& clusters = splits[r].clusters;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      InstanceRecord rec = records[r];
      rec.id = c == 0 ? records[r].id : next++;
      for (const auto p : clusters[c]) labels[p] = rec.id;
      out.upsert(std::move(rec));
    }
  }
  out.recount();
  return out;
}

InstanceMap knn_fill(const InstanceMap& map, const WorkingCloud& cloud, double radius) {
  if (!(radius > 0.0)) throw UsageError("knn_fill: radius must be positive");
  if (map.point_count() != cloud.size()) {
    throw InvariantError("knn_fill: map and cloud sizes differ");
  }
  const auto before = map.labels();
  std::vector<std::uint32_t> assigned;
  std::vector<Point3> assigned_pts;
  for (std::uint32_t i = 0; i < before.size(); ++i) {
    if (before[i] != 0) {
      assigned.push_back(i);
      assigned_pts.push_back(cloud.points[i]);
    }
  }
  InstanceMap out = map;
  if (assigned.empty() || assigned.size() == before.size()) return out;

  // The index over assigned points only keeps original index order, so its (dist, index)
  // tie-break matches the smaller cloud index.
  const KdTree tree(std::move(assigned_pts));
  auto& labels = out.mutable_labels();
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(before.size()); ++i) {
    const auto p = static_cast<std::size_t>(i);
    if (before[p] != 0) continue;
    const auto nb = tree.nearest(cloud.points[p], radius);
    if (nb) labels[p] = before[assigned[nb->index]];
  }
  out.recount();
  return out;
}

}  // namespace ovmap
