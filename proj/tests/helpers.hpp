#ifndef RISIM_TESTS_HELPERS_HPP
#define RISIM_TESTS_HELPERS_HPP

#include <cstdint>

#include "risim/config.hpp"
#include "risim/rng.hpp"
#include "risim/scene.hpp"

namespace risim::test {

/// Small scene with evenly spread RoI pixels inside (10, 50) degrees.
inline SceneConfig make_config(int n_ris, int n_pixels, int frame_len, int delay) {
    SceneConfig cfg;
    cfg.n_ris = n_ris;
    cfg.n_pixels = n_pixels;
    cfg.frame_len = frame_len;
    cfg.delay = delay;
    cfg.theta_bs = -45.0;
    cfg.theta_ue = 70.0;
    cfg.roi_angles = linspace_deg(10.0, 50.0, n_pixels);
    return cfg;
}

inline PhaseSchedule random_schedule(const SceneConfig& cfg, std::uint64_t seed) {
    CounterRng rng(seed, Stream::Weights);
    PhaseSchedule sched;
    sched.phases.resize(cfg.frame_len + cfg.delay, cfg.n_ris);
    for (Eigen::Index t = 0; t < sched.phases.rows(); ++t)
        for (Eigen::Index n = 0; n < sched.phases.cols(); ++n)
            sched.phases(t, n) = kTwoPi * rng.uniform();
    return sched;
}

inline PhaseSchedule zero_schedule(const SceneConfig& cfg) {
    PhaseSchedule sched;
    sched.phases = Mat::Zero(cfg.frame_len + cfg.delay, cfg.n_ris);
    return sched;
}

}  // namespace risim::test

#endif
