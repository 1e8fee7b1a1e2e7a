#pragma once

#include <filesystem>
#include <string>

#include "retarget/humanoid.hpp"
#include "retarget/kinematics.hpp"

namespace retarget {

// Chain file schema tag; see docs/formats.md.
inline constexpr const char* kChainSchema = "retarget.chain/1";
inline constexpr const char* kHumanoidSchema = "retarget.humanoid/1";

KinematicChain parse_chain(const std::string& json_text);
std::string dump_chain(const KinematicChain& chain);
KinematicChain load_chain(const std::filesystem::path& path);
void save_chain(const KinematicChain& chain, const std::filesystem::path& path);

HumanoidModel parse_humanoid(const std::string& json_text);
std::string dump_humanoid(const HumanoidModel& model);
HumanoidModel load_humanoid(const std::filesystem::path& path);

}  // namespace retarget
