#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ovmap/instance.hpp"

namespace ovmap {

struct InstanceKey {
  InstanceId id = 0;
  auto operator<=>(const InstanceKey&) const = default;
};
struct FrameMaskKey {
  std::uint32_t frame = 0;
  std::uint32_t mask_id = 0;
  auto operator<=>(const FrameMaskKey&) const = default;
};
struct QueryKey {
  std::string label;
  auto operator<=>(const QueryKey&) const = default;
};
using FeatureKey = std::variant<InstanceKey, FrameMaskKey, QueryKey>;

struct FeatureRecord {
  FeatureKey key;
  std::vector<float> vector;
};

/// Contents of an "OVFT" file. All records share `dim`.
struct FeatureFile {
  std::uint32_t dim = 0;
  std::vector<FeatureRecord> records;
};

inline constexpr std::uint32_t kFeatureFileVersion = 1;

void write_features(std::ostream& out, const FeatureFile& file);
FeatureFile read_features(std::istream& in);
void write_features(const std::filesystem::path& path, const FeatureFile& file);
FeatureFile read_features(const std::filesystem::path& path);

bool is_unit(std::span<const float> v, double tol = 1e-4);

/// Scales to unit length. Throws DataError for a zero vector.
std::vector<float> normalized(std::span<const float> v);

using WarningSink = std::function<void(const std::string&)>;

/// Gives instances their vectors. Instance keys match ids; frame+mask keys match the crop
/// manifest. Duplicate targets and non-unit vectors throw DataError; keys that match nothing
/// are reported to `warn` and skipped. Query records are rejected.
InstanceMap attach_features(const InstanceMap& map, std::span<const FeatureRecord> records,
                            std::span<const CropRequest> manifest = {},
                            const WarningSink& warn = {});

struct QueryHit {
  InstanceId instance_id = 0;
  double score = 0.0;
};

/// Featured instances by descending cosine, ties by id, at most top_k.
std::vector<QueryHit> query(const InstanceMap& map, std::span<const float> q, std::size_t top_k);

struct LabeledQuery {
  std::string label;
  std::vector<float> vector;
};
using QuerySet = std::vector<LabeledQuery>;

/// Extracts the query records of a feature file. Throws DataError for duplicate labels.
QuerySet query_set_from(const FeatureFile& file);

/// Every featured instance gets the label of its best-matching query (ties: earlier query).
InstanceMap label_instances(const InstanceMap& map, const QuerySet& qs);

}  // namespace ovmap
