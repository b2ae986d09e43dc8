#include "ovmap/evaluation.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "ovmap/errors.hpp"
#include "ovmap/io.hpp"

namespace ovmap {

double instance_iou(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.empty() && b.empty()) throw UsageError("instance_iou: both sets are empty");
  std::size_t inter = 0;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::vector<int> ap_thresholds() {
  std::vector<int> t{25};
  for (int p = 50; p <= 95; p += 5) t.push_back(p);
  return t;
}

APReport evaluate(std::span<const InstanceId> pred, std::span<const std::uint32_t> gt) {
  if (pred.size() != gt.size()) {
    throw DataError("evaluate: prediction has " + std::to_string(pred.size()) +
                    " points, ground truth " + std::to_string(gt.size()));
  }
  // Sizes after dropping unannotated points, and the pred x gt contingency table.
  std::map<InstanceId, std::size_t> pred_size;
  std::map<std::uint32_t, std::size_t> gt_size;
  std::map<std::pair<InstanceId, std::uint32_t>, std::size_t> overlap;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == 0) continue;
    ++gt_size[gt[i]];
    if (pred[i] == 0) continue;
    ++pred_size[pred[i]];
    ++overlap[{pred[i], gt[i]}];
  }

  struct Pred {
    InstanceId id;
    std::size_t size;
    std::vector<std::pair<std::uint32_t, std::size_t>> hits;  // (gt id, intersection), by gt id
  };
  std::vector<Pred> ranked;
  for (const auto& [id, n] : pred_size) ranked.push_back({id, n, {}});
  {
    std::unordered_map<InstanceId, std::size_t> slot;
    for (std::size_t i = 0; i < ranked.size(); ++i) slot[ranked[i].id] = i;
    for (const auto& [key, n] : overlap) ranked[slot[key.first]].hits.emplace_back(key.second, n);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Pred& a, const Pred& b) {
    if (a.size != b.size) return a.size > b.size;
    return a.id < b.id;
  });

  const std::size_t num_gt = gt_size.size();
  APReport report;
  double sum = 0.0;
  int count = 0;
  for (const int pct : ap_thresholds()) {
    ThresholdResult tr;
    tr.percent = pct;
    tr.num_gt = num_gt;
    std::map<std::uint32_t, bool> matched;
    std::vector<std::size_t> tp_at;  // cumulative true positives per rank
    for (const auto& p : ranked) {
      // Best unmatched ground truth by IoU = inter / union, compared exactly as fractions.
      std::uint32_t best = 0;
      std::size_t best_inter = 0;
      std::size_t best_union = 1;
      for (const auto& [g, inter] : p.hits) {
        if (matched[g]) continue;
        const std::size_t uni = p.size + gt_size[g] - inter;
        // inter/uni > best_inter/best_union; hits ascend by gt id so ties keep the smaller id.
        if (best == 0 || inter * best_union > best_inter * uni) {
          best = g;
          best_inter = inter;
          best_union = uni;
        }
      }
      const bool tp = best != 0 && 100 * best_inter >= static_cast<std::size_t>(pct) * best_union;
      if (tp) matched[best] = true;
      tp_at.push_back((tp_at.empty() ? 0 : tp_at.back()) + (tp ? 1 : 0));
    }
    for (std::size_t k = 0; k < tp_at.size(); ++k) {
      tr.precision.push_back(static_cast<double>(tp_at[k]) / static_cast<double>(k + 1));
      tr.recall.push_back(num_gt ? static_cast<double>(tp_at[k]) / num_gt : 0.0);
    }
    tr.true_positives = tp_at.empty() ? 0 : tp_at.back();
    tr.false_positives = tp_at.size() - tr.true_positives;
    if (num_gt > 0 && !tp_at.empty()) {
      // Suffix maximum of precision so each recall level takes the best precision at or beyond it.
      std::vector<double> best_after(tp_at.size() + 1, 0.0);
      for (std::size_t k = tp_at.size(); k-- > 0;) {
        best_after[k] = std::max(best_after[k + 1], tr.precision[k]);
      }
      double area = 0.0;
      std::size_t k = 0;
      for (std::size_t i = 0; i <= 100; ++i) {
        while (k < tp_at.size() && tp_at[k] * 100 < i * num_gt) ++k;
        area += best_after[k];
      }
      tr.ap = area / 101.0;
    }
    if (pct == 25) report.ap25 = tr.ap;
    if (pct == 50) report.ap50 = tr.ap;
    if (pct >= 50) {
      sum += tr.ap;
      ++count;
    }
    report.per_threshold.push_back(std::move(tr));
  }
  report.ap = sum / count;
  return report;
}

APReport evaluate(const InstanceMap& pred, const GroundTruthMap& gt) {
  return evaluate(pred.labels(), gt.labels);
}

std::string APReport::to_json() const {
  nlohmann::ordered_json j;
  j["ap"] = ap;
  j["ap50"] = ap50;
  j["ap25"] = ap25;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& t : per_threshold) {
    nlohmann::ordered_json e;
    e["iou"] = t.percent / 100.0;
    e["ap"] = t.ap;
    e["true_positives"] = t.true_positives;
    e["false_positives"] = t.false_positives;
    e["num_gt"] = t.num_gt;
    e["precision"] = t.precision;
    e["recall"] = t.recall;
    arr.push_back(std::move(e));
  }
  j["per_threshold"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::vector<std::uint32_t> transfer_labels(const KdTree& source,
                                           std::span<const std::uint32_t> source_labels,
                                           std::span<const Point3> target, double max_dist) {
  if (source.size() != source_labels.size()) {
    throw InvariantError("transfer_labels: index and labels differ in size");
  }
  std::vector<std::uint32_t> out(target.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(target.size()); ++i) {
    const auto nb = source.nearest(target[static_cast<std::size_t>(i)], max_dist);
    if (nb) out[static_cast<std::size_t>(i)] = source_labels[nb->index];
  }
  return out;
}

LabeledCloud read_labeled_ply(const std::filesystem::path& path) {
  auto ply = read_ply(path);
  const auto it = ply.int_properties.find("instance_id");
  if (it == ply.int_properties.end()) {
    throw DataError(path.string() + ": no instance_id vertex property");
  }
  LabeledCloud out;
  out.points = std::move(ply.points);
  out.labels.reserve(it->second.size());
  for (const auto v : it->second) {
    if (v < 0) throw DataError(path.string() + ": negative instance id");
    out.labels.push_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

GroundTruthMap read_gt_json(const std::filesystem::path& path, std::size_t point_count) {
  GroundTruthMap gt;
  gt.labels.assign(point_count, 0);
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    if (j.is_array()) {
      if (j.size() != point_count) throw DataError(path.string() + ": label count mismatch");
      for (std::size_t i = 0; i < point_count; ++i) gt.labels[i] = j[i].get<std::uint32_t>();
    } else if (j.is_object()) {
      for (const auto& [k, v] : j.items()) {
        const auto idx = std::stoull(k);
        if (idx >= point_count) throw DataError(path.string() + ": point index out of range");
        gt.labels[idx] = v.get<std::uint32_t>();
      }
    } else {
      throw DataError(path.string() + ": expected an array or object");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw DataError(path.string() + ": non-numeric point index");
  }
  return gt;
}

}  // namespace ovmap
