#include "ovmap/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace ovmap {

namespace {

constexpr std::uint32_t kLeafSize = 12;

bool closer(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

struct Closer {
  bool operator()(const KdTree::Neighbor& a, const KdTree::Neighbor& b) const {
    return closer(a, b);
  }
};

}  // namespace

KdTree::KdTree(std::vector<Point3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0U);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
  sorted_.reserve(points_.size());
  for (auto i : order_) sorted_.push_back(points_[i]);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  Node node{};
  for (int d = 0; d < 3; ++d) {
    node.lo[d] = std::numeric_limits<double>::infinity();
    node.hi[d] = -std::numeric_limits<double>::infinity();
  }
  for (auto i = begin; i < end; ++i) {
    const Point3& p = points_[order_[i]];
    for (int d = 0; d < 3; ++d) {
      node.lo[d] = std::min(node.lo[d], p[d]);
      node.hi[d] = std::max(node.hi[d], p[d]);
    }
  }
  node.begin = begin;
  node.end = end;
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  for (int d = 1; d < 3; ++d) {
    if (node.hi[d] - node.lo[d] > node.hi[axis] - node.lo[axis]) axis = d;
  }
  if (node.hi[axis] - node.lo[axis] <= 0.0) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis];
                     const double pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double KdTree::box_dist2(const Node& n, const Point3& q) {
  double s = 0.0;
  for (int d = 0; d < 3; ++d) {
    double diff = 0.0;
    if (q[d] < n.lo[d]) {
      diff = n.lo[d] - q[d];
    } else if (q[d] > n.hi[d]) {
      diff = q[d] - n.hi[d];
    }
    s += diff * diff;
  }
  return s;
}

std::optional<KdTree::Neighbor> KdTree::nearest(const Point3& q, double max_dist) const {
  if (nodes_.empty()) return std::nullopt;
  Neighbor best{std::numeric_limits<std::uint32_t>::max(), max_dist * max_dist};
  bool found = false;

  // Explicit stack; nearer child is pushed last so it is visited first.
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[static_cast<std::size_t>(stack[--top])];
    if (box_dist2(n, q) > best.dist2) continue;
    if (n.left < 0) {
      for (auto i = n.begin; i < n.end; ++i) {
        const Neighbor cand{order_[i], (sorted_[i] - q).squaredNorm()};
        if (cand.dist2 < best.dist2 || (cand.dist2 == best.dist2 && cand.index < best.index)) {
          best = cand;
          found = true;
        }
      }
      continue;
    }
    const Node& l = nodes_[static_cast<std::size_t>(n.left)];
    const Node& r = nodes_[static_cast<std::size_t>(n.right)];
    if (box_dist2(l, q) <= box_dist2(r, q)) {
      stack[top++] = n.right;
      stack[top++] = n.left;
    } else {
      stack[top++] = n.left;
      stack[top++] = n.right;
    }
  }
  if (!found) return std::nullopt;
  return best;
}

std::vector<KdTree::Neighbor> KdTree::knn(const Point3& q, std::size_t k) const {
  std::vector<Neighbor> heap;  // max-heap under Closer: front is the worst kept neighbour
  if (nodes_.empty() || k == 0) return heap;
  heap.reserve(k + 1);
  const Closer cmp;

  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[static_cast<std::size_t>(stack[--top])];
    // Strict comparison keeps equidistant subtrees reachable for index tie-breaks.
    if (heap.size() == k && box_dist2(n, q) > heap.front().dist2) continue;
    if (n.left < 0) {
      for (auto i = n.begin; i < n.end; ++i) {
        const Neighbor cand{order_[i], (sorted_[i] - q).squaredNorm()};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end(), cmp);
        } else if (closer(cand, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), cmp);
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end(), cmp);
        }
      }
      continue;
    }
    const Node& l = nodes_[static_cast<std::size_t>(n.left)];
    const Node& r = nodes_[static_cast<std::size_t>(n.right)];
    if (box_dist2(l, q) <= box_dist2(r, q)) {
      stack[top++] = n.right;
      stack[top++] = n.left;
    } else {
      stack[top++] = n.left;
      stack[top++] = n.right;
    }
  }
  std::sort_heap(heap.begin(), heap.end(), cmp);
  return heap;
}

void KdTree::radius_search(const Point3& q, double radius, std::vector<Neighbor>& out) const {
  out.clear();
  if (nodes_.empty() || radius < 0.0) return;
  const double r2 = radius * radius;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[static_cast<std::size_t>(stack[--top])];
    if (box_dist2(n, q) > r2) continue;
    if (n.left < 0) {
      for (auto i = n.begin; i < n.end; ++i) {
        const double d2 = (sorted_[i] - q).squaredNorm();
        if (d2 <= r2) out.push_back({order_[i], d2});
      }
      continue;
    }
    stack[top++] = n.left;
    stack[top++] = n.right;
  }
  std::sort(out.begin(), out.end(), closer);
}

std::vector<KdTree::Neighbor> KdTree::radius_search(const Point3& q, double radius) const {
  std::vector<Neighbor> out;
  radius_search(q, radius, out);
  return out;
}

}  // namespace ovmap
