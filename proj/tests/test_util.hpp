#pragma once

#include <filesystem>
#include <string>

#include "retarget/episode.hpp"
#include "retarget/rng.hpp"

namespace retarget::testing {

// Straight-line reach with a gentle vertical wave; valid and preprocessed-free.
inline Episode line_episode(const std::string& id, std::size_t steps = 40, double x0 = 0.45) {
  Episode ep;
  ep.episode_id = id;
  ep.task_id = "reach/cube";
  ep.language = "reach the cube";
  ep.embodiment = "test-arm";
  ep.frequency = 20.0;
  const Quat q(Eigen::AngleAxisd(-1.5707963267948966, Vec3::UnitY()));
  for (std::size_t i = 0; i < steps; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(steps - 1);
    EpisodeStep st;
    st.t = static_cast<double>(i) / ep.frequency;
    st.left_wrist = Pose(Vec3(x0 + 0.1 * s, 0.2, 0.9 + 0.05 * std::sin(6.0 * s)), q);
    st.right_wrist = Pose(Vec3(x0 + 0.05 * s, -0.2, 0.85 - 0.1 * s), q);
    st.left_grip = 1.0 - s;
    st.right_grip = s;
    ep.steps.push_back(st);
  }
  return ep;
}

// Unique scratch directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("retarget_test_" + tag + "_" + std::to_string(Rng(hash_string(tag)).next_u64() % 1000000));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace retarget::testing
