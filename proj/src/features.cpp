#include "ovmap/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "ovmap/errors.hpp"

namespace ovmap {

static_assert(std::endian::native == std::endian::little, "feature I/O assumes little endian");

namespace {

constexpr char kMagic[4] = {'O', 'V', 'F', 'T'};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw DataError(std::string("feature file truncated reading ") + what);
  }
  return v;
}

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

std::string describe(const FeatureKey& key) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, InstanceKey>) {
          return "instance " + std::to_string(k.id);
        } else if constexpr (std::is_same_v<K, FrameMaskKey>) {
          return "frame " + std::to_string(k.frame) + " mask " + std::to_string(k.mask_id);
        } else {
          return "query '" + k.label + "'";
        }
      },
      key);
}

}  // namespace

void write_features(std::ostream& out, const FeatureFile& file) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kFeatureFileVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.records.size()));
  put<std::uint32_t>(out, file.dim);
  for (const auto& r : file.records) {
    if (r.vector.size() != file.dim) throw InvariantError("feature record of wrong dimension");
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, InstanceKey>) {
            put<std::uint8_t>(out, 0);
            put<std::uint32_t>(out, k.id);
          } else if constexpr (std::is_same_v<K, FrameMaskKey>) {
            put<std::uint8_t>(out, 1);
            put<std::uint32_t>(out, k.frame);
            put<std::uint32_t>(out, k.mask_id);
          } else {
            put<std::uint8_t>(out, 2);
            put<std::uint32_t>(out, static_cast<std::uint32_t>(k.label.size()));
            out.write(k.label.data(), static_cast<std::streamsize>(k.label.size()));
          }
        },
        r.key);
    out.write(reinterpret_cast<const char*>(r.vector.data()),
              static_cast<std::streamsize>(r.vector.size() * sizeof(float)));
  }
  if (!out) throw DataError("failed writing feature file");
}

FeatureFile read_features(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not an OVFT feature file");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kFeatureFileVersion) {
    throw DataError("unsupported feature file version " + std::to_string(version));
  }
  const auto count = get<std::uint32_t>(in, "record count");
  FeatureFile file;
  file.dim = get<std::uint32_t>(in, "dimension");
  if (file.dim == 0 && count > 0) throw DataError("feature dimension is 0");
  file.records.reserve(std::min<std::uint32_t>(count, 1u << 16));
  for (std::uint32_t i = 0; i < count; ++i) {
    FeatureRecord r;
    const auto kind = get<std::uint8_t>(in, "key kind");
    switch (kind) {
      case 0:
        r.key = InstanceKey{get<std::uint32_t>(in, "instance id")};
        break;
      case 1: {
        FrameMaskKey k;
        k.frame = get<std::uint32_t>(in, "frame");
        k.mask_id = get<std::uint32_t>(in, "mask id");
        r.key = k;
        break;
      }
      case 2: {
        const auto len = get<std::uint32_t>(in, "label length");
        if (len > (1u << 20)) throw DataError("feature label too long");
        std::string label(len, '\0');
        if (!in.read(label.data(), len)) throw DataError("feature file truncated in label");
        r.key = QueryKey{std::move(label)};
        break;
      }
      default:
        throw DataError("unknown feature key kind " + std::to_string(kind));
    }
    r.vector.resize(file.dim);
    if (!in.read(reinterpret_cast<char*>(r.vector.data()),
                 static_cast<std::streamsize>(file.dim * sizeof(float)))) {
      throw DataError("feature file truncated in vector " + std::to_string(i));
    }
    file.records.push_back(std::move(r));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("trailing bytes after feature records");
  }
  return file;
}

void write_features(const std::filesystem::path& path, const FeatureFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_features(out, file);
}

FeatureFile read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_features(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

bool is_unit(std::span<const float> v, double tol) {
  return std::abs(std::sqrt(dot(v, v)) - 1.0) <= tol;
}

std::vector<float> normalized(std::span<const float> v) {
  const double n = std::sqrt(dot(v, v));
  if (!(n > 0.0)) throw DataError("cannot normalize a zero vector");
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / n);
  return out;
}

InstanceMap attach_features(const InstanceMap& map, std::span<const FeatureRecord> records,
                            std::span<const CropRequest> manifest, const WarningSink& warn) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, InstanceId> by_view;
  for (const auto& c : manifest) by_view[{c.frame, c.mask_id}] = c.instance_id;

  InstanceMap out = map;
  std::set<InstanceId> seen;
  std::size_t dim = 0;
  for (const auto& r : records) {
    InstanceId target = 0;
    if (const auto* k = std::get_if<InstanceKey>(&r.key)) {
      target = k->id;
    } else if (const auto* k = std::get_if<FrameMaskKey>(&r.key)) {
      const auto it = by_view.find({k->frame, k->mask_id});
      if (it == by_view.end()) {
        if (warn) warn("skipping feature for " + describe(r.key) + ": not in crop manifest");
        continue;
      }
      target = it->second;
    } else {
      throw DataError("query record " + describe(r.key) + " given as an instance feature");
    }
    auto* rec = out.find(target);
    if (!rec) {
      if (warn) warn("skipping feature for " + describe(r.key) + ": no such instance");
      continue;
    }
    if (!seen.insert(target).second) {
      throw DataError("duplicate feature for instance " + std::to_string(target));
    }
    if (!is_unit(r.vector)) throw DataError("feature for " + describe(r.key) + " is not unit");
    if (dim != 0 && r.vector.size() != dim) throw DataError("feature dimensions differ");
    dim = r.vector.size();
    rec->feature = r.vector;
  }
  return out;
}

std::vector<QueryHit> query(const InstanceMap& map, std::span<const float> q, std::size_t top_k) {
  std::vector<QueryHit> hits;
  for (const auto& r : map.instances()) {
    if (!r.feature) continue;
    if (r.feature->size() != q.size()) throw DataError("query dimension differs from features");
    hits.push_back({r.id, dot(*r.feature, q)});
  }
  std::sort(hits.begin(), hits.end(), [](const QueryHit& a, const QueryHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.instance_id < b.instance_id;
  });
  if (hits.size() > top_k) hits.resize(top_k);
  return hits;
}

QuerySet query_set_from(const FeatureFile& file) {
  QuerySet qs;
  std::set<std::string> labels;
  for (const auto& r : file.records) {
    const auto* k = std::get_if<QueryKey>(&r.key);
    if (!k) continue;
    if (!labels.insert(k->label).second) throw DataError("duplicate query label '" + k->label + "'");
    if (!is_unit(r.vector)) throw DataError("query '" + k->label + "' is not unit");
    qs.push_back({k->label, r.vector});
  }
  return qs;
}

InstanceMap label_instances(const InstanceMap& map, const QuerySet& qs) {
  if (qs.empty()) throw UsageError("label_instances: empty query set");
  InstanceMap out = map;
  for (auto& r : out.mutable_instances()) {
    if (!r.feature) continue;
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < qs.size(); ++i) {
      if (qs[i].vector.size() != r.feature->size()) {
        throw DataError("query dimension differs from features");
      }
      const double s = dot(*r.feature, qs[i].vector);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    r.label = qs[best].label;
  }
  return out;
}

}  // namespace ovmap
