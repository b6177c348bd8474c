// 3D Gauss-Markov motion with reflective box bounds.
#pragma once

#include <vector>

#include "fanet/config.hpp"
#include "fanet/rng.hpp"
#include "fanet/vec3.hpp"

namespace fanet {

struct MotionState {
    Vec3 pos;
    Vec3 vel;
    Vec3 mean_vel;  // per-node target velocity, magnitude avg_speed
    double alpha = 0.5;
};

// One per-axis step: v' = alpha*v + (1-alpha)*mean_v + sqrt(1-alpha^2)*mean_speed*N(0,1),
// then position += v'*dt with reflection at the box faces. A reflection flips
// the sign of both the velocity and the mean-velocity component; flipping only
// the instantaneous velocity makes nodes crawl along the walls.
// The Gaussian draws happen even when alpha=1 zeroes the noise term, so the
// stream position never depends on parameter values.
void gm_step(MotionState& s, const Vec3& area, double mean_speed, double dt, Rng& rng);

// Deterministic initial states for nodes 0..node_count. Slot 0 is the ground
// station: area center, zero velocity, never stepped. UAV spawn draws are
// keyed per node id so the layout is stable under node-count changes.
std::vector<MotionState> spawn_motion_states(const SimConfig& cfg);

}  // namespace fanet
