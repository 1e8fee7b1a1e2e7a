#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "retarget/retarget.hpp"

namespace retarget {

inline constexpr const char* kTripletSchema = "retarget.triplet/1";
inline constexpr const char* kManifestSchema = "retarget.triplet-manifest/1";

struct ResidualStats {
  std::size_t count = 0;
  double position_mean = 0.0;  // m
  double position_max = 0.0;
  double rotation_mean = 0.0;  // rad
  double rotation_max = 0.0;

  friend bool operator==(const ResidualStats&, const ResidualStats&) = default;
};

struct TripletManifest {
  std::size_t episodes = 0;
  std::size_t steps = 0;
  std::map<std::string, std::size_t> task_episodes;  // task id -> episode count
  ResidualStats left, right, both;

  friend bool operator==(const TripletManifest&, const TripletManifest&) = default;
};

// Episodes in order, steps in order, left before right for `both`.
TripletManifest make_manifest(const std::vector<RetargetedEpisode>& reps);

std::string triplet_to_line(const RetargetedEpisode& rep);
RetargetedEpisode triplet_from_line(const std::string& line);

std::string manifest_to_json(const TripletManifest& m);
TripletManifest manifest_from_json(const std::string& text);

/// Writes the dataset (one record per line) and `<path>.manifest.json`.
/// Returns the manifest path.
std::filesystem::path export_triplets(const std::vector<RetargetedEpisode>& reps, const std::filesystem::path& path);
std::vector<RetargetedEpisode> read_triplets(const std::filesystem::path& path);

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset);

}  // namespace retarget
