#pragma once

#include <utility>

namespace idp {

/// SSPRK(2,2), i.e. Heun's method written as a convex combination of two
/// forward-Euler stages: w1 = S(u), w2 = S(w1), u_new = u/2 + w2/2.
///
/// `stage` maps a state to its forward-Euler successor; `average` forms
/// (a + b) / 2 in whatever representation the state uses.
template <class State, class Stage, class Average>
State heun_compose(const State& u, Stage&& stage, Average&& average) {
  State w1 = stage(u);
  State w2 = stage(w1);
  return average(u, w2);
}

}  // namespace idp
