#include "livediff/feature_file.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <cstring>
#include <sstream>

#include "livediff/error.hpp"
#include "livediff/image.hpp"

namespace livediff {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

namespace {

void put_float_le(std::vector<std::uint8_t>& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(bits >> s));
}

float get_float_le(const std::uint8_t* p) {
  std::uint32_t bits = 0;
  for (int k = 3; k >= 0; --k) bits = (bits << 8) | p[k];
  return std::bit_cast<float>(bits);
}

void check_kind(const std::string& kind) {
  if (kind != "dk" && kind != "deep") {
    throw Error(ErrorKind::MalformedFile, "feature kind '" + kind + "' (expected dk|deep)");
  }
}

}  // namespace

const FeatureRecord* FeatureFile::find(const std::string& source_id) const {
  for (const auto& r : records) {
    if (r.source_id == source_id) return &r;
  }
  return nullptr;
}

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file) {
  check_kind(file.kind);
  const std::string header = "LDFV1 " + file.kind + " " + std::to_string(file.dim) + " " +
                             std::to_string(file.records.size()) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + file.records.size() * (file.dim * 4 + 16));
  for (const auto& r : file.records) {
    if (r.source_id.empty() || r.source_id.find('\n') != std::string::npos) {
      throw Error(ErrorKind::InvalidConfig, "source id must be a non-empty single line");
    }
    if (r.values.size() != file.dim) {
      throw Error(ErrorKind::DimensionMismatch, "record '" + r.source_id + "' has " +
                                                    std::to_string(r.values.size()) +
                                                    " values, file dim " + std::to_string(file.dim));
    }
    out.insert(out.end(), r.source_id.begin(), r.source_id.end());
    out.push_back('\n');
    for (const float v : r.values) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::InvalidConfig, "record '" + r.source_id + "' has a non-finite value");
      }
      put_float_le(out, v);
    }
  }
  return out;
}

FeatureFile decode_feature_file(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto line = [&]() {
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size()) throw Error(ErrorKind::MalformedFile, "feature file truncated");
    std::string s(reinterpret_cast<const char*>(bytes.data()) + start, pos - start);
    ++pos;
    return s;
  };

  std::istringstream header(line());
  std::string magic;
  FeatureFile file;
  long long dim = -1;
  long long count = -1;
  header >> magic >> file.kind >> dim >> count;
  std::string trailing;
  if (magic != "LDFV1" || !header || dim <= 0 || count < 0 || (header >> trailing)) {
    throw Error(ErrorKind::MalformedFile, "bad LDFV1 header");
  }
  check_kind(file.kind);
  file.dim = static_cast<std::size_t>(dim);
  file.records.reserve(std::min<std::size_t>(static_cast<std::size_t>(count), bytes.size()));
  for (long long k = 0; k < count; ++k) {
    FeatureRecord r;
    r.source_id = line();
    if (r.source_id.empty()) throw Error(ErrorKind::MalformedFile, "empty source id");
    if (bytes.size() - pos < file.dim * 4) {
      throw Error(ErrorKind::MalformedFile, "record '" + r.source_id + "' truncated");
    }
    r.values.resize(file.dim);
    for (std::size_t i = 0; i < file.dim; ++i) r.values[i] = get_float_le(bytes.data() + pos + 4 * i);
    pos += file.dim * 4;
    file.records.push_back(std::move(r));
  }
  if (pos != bytes.size()) throw Error(ErrorKind::MalformedFile, "trailing bytes after last record");
  return file;
}

FeatureFile read_feature_file(const std::string& path) {
  try {
    return decode_feature_file(read_file_bytes(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::MissingFile) throw;
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void write_feature_file(const std::string& path, const FeatureFile& file) {
  write_file_atomic(path, encode_feature_file(file));
}

}  // namespace livediff
