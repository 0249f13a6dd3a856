#ifndef RISIM_CONFIG_HPP
#define RISIM_CONFIG_HPP

#include <string>

#include "risim/scene.hpp"

namespace risim {

/// Loads a scene config from a flat "key = value" UTF-8 text file. Keys match
/// the SceneConfig field names; '#' starts a comment. roi_angles accepts
/// either a comma list of degrees or the shorthand lo:hi:count; n_bit accepts
/// an integer or the word "continuous". The result is validated.
SceneConfig load_config(const std::string& path);

/// Applies one "key=value" assignment (same syntax as the file) on top of an
/// existing config; used for CLI overrides.
void apply_config_entry(SceneConfig& cfg, const std::string& key, const std::string& value);

void save_config(const std::string& path, const SceneConfig& cfg);

/// Evenly spaced RoI grid helper.
Vec linspace_deg(double lo, double hi, int count);

}  // namespace risim

#endif
