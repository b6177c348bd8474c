#include "fanet/mobility.hpp"

#include <cmath>

namespace fanet {

void gm_step(MotionState& s, const Vec3& area, double mean_speed, double dt, Rng& rng) {
    const double a = s.alpha;
    const double noise_scale = std::sqrt(std::max(0.0, 1.0 - a * a)) * mean_speed;
    for (int axis = 0; axis < 3; ++axis) {
        const double xi = rng.normal();
        double v = a * s.vel[axis] + (1.0 - a) * s.mean_vel[axis] + noise_scale * xi;
        s.vel[axis] = v;
        double p = s.pos[axis] + v * dt;
        const double bound = area[axis];
        // a step longer than the box can cross more than one face
        while (p < 0.0 || p > bound) {
            p = p < 0.0 ? -p : 2.0 * bound - p;
            s.vel[axis] = -s.vel[axis];
            s.mean_vel[axis] = -s.mean_vel[axis];
        }
        s.pos[axis] = p;
    }
}

std::vector<MotionState> spawn_motion_states(const SimConfig& cfg) {
    std::vector<MotionState> out(static_cast<std::size_t>(cfg.total_nodes()));
    MotionState& gbs = out[0];
    gbs.pos = cfg.area_center();
    gbs.vel = {0.0, 0.0, 0.0};
    gbs.mean_vel = {0.0, 0.0, 0.0};
    gbs.alpha = 1.0;
    for (int id = 1; id <= cfg.node_count; ++id) {
        Rng rng(seed_stream(cfg.seed, "spawn", static_cast<std::uint64_t>(id)));
        MotionState st;
        st.pos = {rng.uniform(0.0, cfg.area_m.x), rng.uniform(0.0, cfg.area_m.y),
                  rng.uniform(0.0, cfg.area_m.z)};
        st.alpha = rng.uniform(cfg.alpha_min, cfg.alpha_max);
        Vec3 dir;
        do {
            dir = {rng.normal(), rng.normal(), rng.normal()};
        } while (dir.norm() < 1e-9);
        st.mean_vel = dir * (cfg.avg_speed_mps / dir.norm());
        st.vel = st.mean_vel;
        out[static_cast<std::size_t>(id)] = st;
    }
    return out;
}

}  // namespace fanet
