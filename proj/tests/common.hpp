#pragma once

#include <map>
#include <string>

#include "sbcheck/generate.hpp"
#include "sbcheck/model.hpp"

namespace testing {

inline std::string model_path(const std::string& name) { return std::string(SBCHECK_MODELS_DIR) + "/" + name + ".sb"; }

inline const sbcheck::SBSystem& bundled(const std::string& name) {
  static std::map<std::string, sbcheck::SBSystem> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, sbcheck::load_model(model_path(name))).first;
  return it->second;
}

inline const char* const kBundled[] = {"atv_s0", "atv_s1", "bone_s0", "bone_s1"};

/// Small random system; parameters cycle with the seed so a seed range
/// covers sparse, dense, and single-S-state shapes.
inline sbcheck::SBSystem random_system(std::uint64_t seed) {
  sbcheck::GenParams p;
  p.seed = seed;
  p.b_states = 1 + seed % 12;
  p.s_states = 1 + (seed / 12) % 4;
  p.density = 0.05 + 0.05 * static_cast<double>(seed % 9);
  return sbcheck::gen_random(p);
}

}  // namespace testing
