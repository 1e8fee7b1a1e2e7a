#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "retarget/episode.hpp"

namespace retarget {

inline constexpr const char* kEpisodeSchema = "retarget.episode/1";

enum class ReadMode {
  kStrict,       // the first malformed record throws
  kSkipInvalid,  // malformed records are excluded and reported
};

struct Exclusion {
  std::size_t line = 0;  // 1-based
  std::string episode_id;
  std::string reason;
};

struct ReadReport {
  std::vector<Exclusion> excluded;
};

// One JSON object per line; see docs/formats.md.
std::string episode_to_line(const Episode& ep);
Episode episode_from_line(const std::string& line);

std::vector<Episode> read_episodes(const std::filesystem::path& path, ReadMode mode = ReadMode::kStrict,
                                   ReadReport* report = nullptr);
void write_episodes(const std::vector<Episode>& episodes, const std::filesystem::path& path);

}  // namespace retarget
