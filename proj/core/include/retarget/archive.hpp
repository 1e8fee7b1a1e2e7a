#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace retarget {

/// Named f64 arrays and byte blobs in one little-endian binary file
/// (layout in docs/formats.md). Entries are stored sorted by name, so equal
/// archives serialize to equal bytes.
struct Archive {
  std::map<std::string, std::vector<double>> arrays;
  std::map<std::string, std::string> blobs;

  const std::vector<double>& array(const std::string& name) const;
  const std::string& blob(const std::string& name) const;

  friend bool operator==(const Archive&, const Archive&) = default;
};

std::string serialize_archive(const Archive& a);
Archive deserialize_archive(const std::string& bytes);
void save_archive(const Archive& a, const std::filesystem::path& path);
Archive load_archive(const std::filesystem::path& path);

}  // namespace retarget
