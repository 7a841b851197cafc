#pragma once

// Feature interchange file shared with the external deep-feature extractor:
//
//   LDFV1 <kind> <dim> <count>\n
//   then per record: <source_id>\n followed by dim float32 little-endian values.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace livediff {

struct FeatureRecord {
  std::string source_id;
  std::vector<float> values;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

struct FeatureFile {
  std::string kind;  // "dk" or "deep"
  std::size_t dim = 0;
  std::vector<FeatureRecord> records;

  /// Null when the id is absent. Linear scan; callers index once if needed.
  const FeatureRecord* find(const std::string& source_id) const;

  friend bool operator==(const FeatureFile&, const FeatureFile&) = default;
};

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file);
FeatureFile decode_feature_file(std::span<const std::uint8_t> bytes);

FeatureFile read_feature_file(const std::string& path);
void write_feature_file(const std::string& path, const FeatureFile& file);

}  // namespace livediff
