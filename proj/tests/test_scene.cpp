#include <cmath>
#include <complex>
#include <stdexcept>

#include <doctest.h>

#include "helpers.hpp"
#include "risim/rng.hpp"
#include "risim/scene.hpp"

using namespace risim;

namespace {

/// Independent re-evaluation of one received sample straight from the model
/// definition, plain loops only.
Complex synth_sample_oracle(const SceneConfig& cfg, const PhaseSchedule& sched,
                            const SymbolFrame& frame, const SceneTruth& truth, int t) {
    const CVec g = steering_vector(cfg.theta_bs, cfg.n_ris);
    const CVec h_c = steering_vector(cfg.theta_ue, cfg.n_ris);
    Complex y(0.0, 0.0);
    if (t < cfg.frame_len) {
        Complex c(0.0, 0.0);
        for (int n = 0; n < cfg.n_ris; ++n)
            c += g[n] * std::polar(1.0, sched.phases(t, n)) * h_c[n];
        y += cfg.alpha_c * c * frame.symbols[t];
    }
    if (t >= cfg.delay) {
        Complex img(0.0, 0.0);
        for (int m = 0; m < cfg.n_pixels; ++m) {
            const CVec a = steering_vector(cfg.roi_angles[m], cfg.n_ris);
            Complex row(0.0, 0.0);
            for (int n = 0; n < cfg.n_ris; ++n)
                row += g[n] * std::polar(1.0, sched.phases(t, n)) * a[n];
            img += row * truth.sigma[m];
        }
        y += cfg.alpha_i * img * frame.symbols[t - cfg.delay];
    }
    return y;
}

}  // namespace

TEST_CASE("steering vector matches the closed forms") {
    const CVec a0 = steering_vector(0.0, 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a0[i] - Complex(1.0, 0.0)) < 1e-12);

    const CVec a30 = steering_vector(30.0, 3);
    CHECK(std::abs(a30[0] - Complex(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(a30[1] - Complex(0.0, 1.0)) < 1e-12);
    CHECK(std::abs(a30[2] - Complex(-1.0, 0.0)) < 1e-12);

    const CVec a70 = steering_vector(70.0, 150);
    for (int i = 0; i < 150; ++i) CHECK(std::abs(std::abs(a70[i]) - 1.0) < 1e-12);
    CHECK(std::abs(a70.dot(a70) - Complex(150.0, 0.0)) < 1e-9);

    CHECK_THROWS_AS(steering_vector(90.0, 4), std::domain_error);
    CHECK_THROWS_AS(steering_vector(-95.0, 4), std::domain_error);
}

TEST_CASE("phase matrix acts diagonally") {
    CounterRng rng(7, Stream::Weights);
    CVec v(5);
    for (int i = 0; i < 5; ++i) v[i] = rng.cnormal();

    CHECK((phase_matrix_apply(Vec::Zero(5), v) - v).norm() < 1e-15);
    CHECK((phase_matrix_apply(Vec::Constant(5, kPi), v) + v).norm() < 1e-12);

    Vec phases(5);
    for (int i = 0; i < 5; ++i) phases[i] = kTwoPi * rng.uniform();
    const CVec a = steering_vector(25.0, 5);
    const CVec out = phase_matrix_apply(phases, a);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(std::abs(out[i]) - 1.0) < 1e-12);

    CHECK_THROWS_AS(phase_matrix_apply(Vec::Zero(4), v), std::invalid_argument);
}

TEST_CASE("received frame follows the three-segment model") {
    SceneConfig cfg = test::make_config(4, 2, 2, 1);
    cfg.noise_var = 0.0;
    cfg.alpha_i = 0.0;
    const PhaseSchedule sched = test::random_schedule(cfg, 3);
    CounterRng sym_rng(11, Stream::Symbols);
    const SymbolFrame frame = random_qpsk_frame(cfg.frame_len, sym_rng);
    SceneTruth truth = make_scene_truth(CVec::Zero(2));

    const ReceivedFrame rx = synth_received(cfg, sched, frame, truth, 5);
    REQUIRE(rx.samples.size() == 3);
    CHECK(std::abs(rx.samples[0] - synth_sample_oracle(cfg, sched, frame, truth, 0)) < 1e-12);
    CHECK(std::abs(rx.samples[2]) < 1e-15);  // imaging-only tail with a silent scene

    SceneConfig no_comm = cfg;
    no_comm.alpha_c = 0.0;
    no_comm.alpha_i = 1.0;
    truth.sigma = CVec::Ones(2);
    truth = make_scene_truth(truth.sigma);
    const ReceivedFrame rx2 = synth_received(no_comm, sched, frame, truth, 5);
    for (int t = 0; t < no_comm.delay; ++t) CHECK(std::abs(rx2.samples[t]) < 1e-15);
    CHECK(std::abs(rx2.samples[1] - synth_sample_oracle(no_comm, sched, frame, truth, 1)) <
          1e-12);
}

TEST_CASE("synthesis is seed-deterministic and additive across links") {
    SceneConfig cfg = test::make_config(6, 3, 16, 2);
    cfg.noise_var = 0.8;
    const PhaseSchedule sched = test::random_schedule(cfg, 21);
    CounterRng sym_rng(13, Stream::Symbols);
    const SymbolFrame frame = random_qpsk_frame(cfg.frame_len, sym_rng);
    CVec sigma = CVec::Zero(3);
    sigma[1] = Complex(0.8, -0.4);
    const SceneTruth truth = make_scene_truth(sigma);

    const ReceivedFrame a = synth_received(cfg, sched, frame, truth, 99);
    const ReceivedFrame b = synth_received(cfg, sched, frame, truth, 99);
    CHECK((a.samples - b.samples).norm() == 0.0);
    const ReceivedFrame c = synth_received(cfg, sched, frame, truth, 100);
    CHECK((a.samples - c.samples).norm() > 0.0);

    SceneConfig quiet = cfg;
    quiet.noise_var = 0.0;
    SceneConfig comm_only = quiet;
    comm_only.alpha_i = 0.0;
    SceneConfig img_only = quiet;
    img_only.alpha_c = 0.0;
    const CVec whole = synth_received(quiet, sched, frame, truth, 1).samples;
    const CVec parts = synth_received(comm_only, sched, frame, truth, 1).samples +
                       synth_received(img_only, sched, frame, truth, 1).samples;
    CHECK((whole - parts).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("noise realizations have the configured variance") {
    SceneConfig cfg = test::make_config(2, 2, 10000, 1);
    cfg.alpha_c = 0.0;
    cfg.alpha_i = 0.0;
    cfg.noise_var = 2.5;
    const PhaseSchedule sched = test::zero_schedule(cfg);
    CounterRng sym_rng(17, Stream::Symbols);
    const SymbolFrame frame = random_qpsk_frame(cfg.frame_len, sym_rng);
    const SceneTruth truth = make_scene_truth(CVec::Zero(2));

    const ReceivedFrame rx = synth_received(cfg, sched, frame, truth, 2024);
    const double var = rx.samples.squaredNorm() / static_cast<double>(rx.samples.size());
    CHECK(var == doctest::Approx(cfg.noise_var).epsilon(0.05));
}

TEST_CASE("paper-scale synthesis has the right shape") {
    SceneConfig cfg = test::make_config(150, 64, 1024, 1);
    cfg.roi_angles = linspace_deg(15.0, 50.0, 64);
    cfg.theta_ue = 70.0;
    cfg.theta_bs = -45.0;
    cfg.noise_var = 0.5;
    const PhaseSchedule sched = test::random_schedule(cfg, 4);
    CounterRng sym_rng(5, Stream::Symbols);
    const SymbolFrame frame = random_qpsk_frame(cfg.frame_len, sym_rng);
    CVec sigma = CVec::Zero(64);
    sigma[10] = 1.0;
    const ReceivedFrame rx = synth_received(cfg, sched, frame, make_scene_truth(sigma), 9);
    CHECK(rx.samples.size() == 1025);
}

TEST_CASE("cnr and inr follow their definitions") {
    // Single element, all-zero phases: the comm product is exactly alpha_c.
    SceneConfig cfg = test::make_config(1, 2, 8, 1);
    cfg.theta_bs = 0.0;
    cfg.theta_ue = 0.0;
    cfg.alpha_c = 1.0;
    cfg.alpha_i = 0.0;
    cfg.noise_var = 1.0;
    const PhaseSchedule sched = test::zero_schedule(cfg);
    CounterRng sym_rng(3, Stream::Symbols);
    const SymbolFrame frame = random_qpsk_frame(cfg.frame_len, sym_rng);
    const SceneTruth truth = make_scene_truth(CVec::Zero(2));

    const auto [cnr0, inr0] = cnr_inr(cfg, sched, frame, truth);
    CHECK(cnr0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isinf(inr0));
    CHECK(inr0 < 0.0);

    SceneConfig doubled = cfg;
    doubled.alpha_c = 2.0;
    const auto [cnr2, inr2] = cnr_inr(doubled, sched, frame, truth);
    (void)inr2;
    CHECK(cnr2 - cnr0 == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));

    SceneConfig broken = cfg;
    broken.noise_var = 0.0;
    CHECK_THROWS_AS(cnr_inr(broken, sched, frame, truth), std::domain_error);
}

TEST_CASE("cnr and inr ignore a common symbol rotation") {
    SceneConfig cfg = test::make_config(5, 3, 12, 1);
    cfg.noise_var = 0.7;
    const PhaseSchedule sched = test::random_schedule(cfg, 8);
    CounterRng sym_rng(23, Stream::Symbols);
    const SymbolFrame frame = random_qpsk_frame(cfg.frame_len, sym_rng);
    CVec sigma = CVec::Zero(3);
    sigma[0] = Complex(0.0, 1.0);
    const SceneTruth truth = make_scene_truth(sigma);

    SymbolFrame rotated = frame;
    rotated.symbols *= std::polar(1.0, 1.234);
    const auto [cnr_a, inr_a] = cnr_inr(cfg, sched, frame, truth);
    const auto [cnr_b, inr_b] = cnr_inr(cfg, sched, rotated, truth);
    CHECK(cnr_a == doctest::Approx(cnr_b).epsilon(1e-12));
    CHECK(inr_a == doctest::Approx(inr_b).epsilon(1e-12));
}

TEST_CASE("qpsk index picks the nearest point with low-index ties") {
    CHECK(qpsk_index(std::polar(1.0, kPi / 4.0)) == 1);
    CHECK(qpsk_index(Complex(1.0, 0.0)) == 1);  // tie between 1 and 4
    CHECK(qpsk_index(0.9 * std::polar(1.0, 3.0 * kPi / 4.0)) == 2);
    CHECK(qpsk_index(Complex(-0.1, -1.0)) == 3);
    CHECK(qpsk_index(Complex(0.1, -1.0)) == 4);
}

TEST_CASE("qpsk frames sit exactly on the constellation") {
    CounterRng rng(31, Stream::Symbols);
    const SymbolFrame frame = random_qpsk_frame(64, rng);
    for (int t = 0; t < 64; ++t) {
        const int i = qpsk_index(frame.symbols[t]);
        CHECK(frame.symbols[t] == qpsk_point(i));
        CHECK(std::abs(std::abs(frame.symbols[t]) - 1.0) < 1e-15);
    }
}

TEST_CASE("counter rng streams are reproducible and distinct") {
    CounterRng a(42, Stream::Noise);
    CounterRng b(42, Stream::Noise);
    bool all_equal = true;
    for (int i = 0; i < 100; ++i)
        if (a.next_u64() != b.next_u64()) all_equal = false;
    CHECK(all_equal);

    CounterRng d(42, Stream::Noise);
    CounterRng e(43, Stream::Noise);
    int distinct = 0;
    for (int i = 0; i < 100; ++i)
        if (d.next_u64() != e.next_u64()) ++distinct;
    CHECK(distinct == 100);

    // Box-Muller draws have roughly unit variance.
    CounterRng f(7, Stream::Noise);
    double acc = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double z = f.normal();
        acc += z * z;
    }
    CHECK(acc / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("config invariants are enforced") {
    SceneConfig cfg = test::make_config(4, 2, 8, 1);
    CHECK_NOTHROW(cfg.validate());

    SceneConfig bad = cfg;
    bad.delay = 8;
    CHECK_THROWS(bad.validate());

    bad = cfg;
    bad.roi_angles[1] = bad.roi_angles[0];
    CHECK_THROWS(bad.validate());

    bad = cfg;
    bad.n_bit = 17;
    CHECK_THROWS(bad.validate());

    bad = cfg;
    bad.rho = 1.5;
    CHECK_THROWS(bad.validate());
}
