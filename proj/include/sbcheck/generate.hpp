#pragma once

#include <cstdint>

#include "sbcheck/model.hpp"

namespace sbcheck {

struct GenParams {
  std::uint64_t seed = 1;
  std::size_t b_states = 6;
  std::size_t s_states = 2;
  /// Probability of each B transition; 1 gives a total relation.
  double density = 0.3;
  /// Probability of each ordered S transition pair.
  double s_density = 0.5;
};

/// Random explicit S[B] system over `x : int 0..3, y : int 0..2, z : bool`.
/// S labels are intervals of 3*x+y that partition all observations, and q0
/// is placed inside L(r0). Output depends only on the parameters.
SBSystem gen_random(const GenParams& p);

}  // namespace sbcheck
