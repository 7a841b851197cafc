#include <filesystem>
#include <set>
#include <sstream>

#include "livediff/error.hpp"
#include "livediff/pipeline.hpp"

namespace livediff::pipeline {

const char* to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Devel: return "devel";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::Train;
  if (text == "devel") return Split::Devel;
  if (text == "test") return Split::Test;
  throw Error(ErrorKind::ParseError, "unknown split '" + text + "'");
}

std::vector<const ManifestEntry*> Manifest::split(Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == s) out.push_back(&e);
  }
  return out;
}

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

Manifest parse_manifest(const std::string& text, const std::string& base_dir, bool check_files) {
  namespace fs = std::filesystem;
  Manifest m;
  std::set<std::string> seen;
  std::vector<std::string> missing;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorKind::ParseError, "manifest line " + std::to_string(line_no) + ": " + why);
    };
    const auto fields = split_on(line, '\t');
    if (fields.size() != 4) fail("expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    ManifestEntry e;
    e.source_id = fields[0];
    if (e.source_id.empty()) fail("empty source_id");
    try {
      e.split = parse_split(fields[1]);
      e.label = parse_label(fields[2]);
    } catch (const Error& err) {
      fail(err.what());
    }
    for (const auto& p : split_on(fields[3], ',')) {
      if (p.empty()) fail("empty frame path");
      const fs::path path(p);
      e.frame_paths.push_back(path.is_absolute() || base_dir.empty()
                                  ? path.string()
                                  : (fs::path(base_dir) / path).string());
    }
    if (!seen.insert(e.source_id).second) {
      throw Error(ErrorKind::DuplicateId, "manifest line " + std::to_string(line_no) +
                                              ": source_id '" + e.source_id + "' repeats");
    }
    if (check_files) {
      for (const auto& p : e.frame_paths) {
        if (!fs::exists(p)) missing.push_back(p);
      }
    }
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw Error(ErrorKind::ParseError, "manifest has no entries");
  if (!missing.empty()) {
    std::string list;
    for (const auto& p : missing) list += "\n  " + p;
    throw Error(ErrorKind::MissingFile, std::to_string(missing.size()) + " frame file(s) absent:" + list);
  }
  return m;
}

Manifest load_manifest(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_manifest(std::string(bytes.begin(), bytes.end()), dir, true);
}

}  // namespace livediff::pipeline
