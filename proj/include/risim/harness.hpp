#ifndef RISIM_HARNESS_HPP
#define RISIM_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "risim/decoder.hpp"
#include "risim/sbl.hpp"
#include "risim/scene.hpp"
#include "risim/types.hpp"

namespace risim {

enum class Method { Proposed, IgnoreEcho, PureQpsk, GivenSigma, GivenX };

const char* method_name(Method m);

/// One Monte Carlo aggregation row.
struct MetricsRecord {
    double cnr_db = 0.0;
    double inr_db = 0.0;
    Method method = Method::Proposed;
    double ser = 0.0;
    double ser_stderr = 0.0;
    double nmse_db = 0.0;  // NaN when the method does not estimate the scene
    int trials = 0;
    long long errors_total = 0;
};

/// Sweep description of one experiment scenario.
struct ScenarioSpec {
    int id = 1;
    std::vector<std::pair<double, double>> sweep;  // (cnr_db, inr_db)
    char scene_letter = 'X';
    int trials = 200;

    static ScenarioSpec standard(int id, int trials);
    void validate() const;
};

/// 8x8 letter mask flattened row-major to a 64-pixel scene, unit magnitude,
/// zero phase. Throws std::invalid_argument for unknown letters.
SceneTruth letter_scene(char letter);

/// Scene ground truth for a scenario: the letter mask when the RoI has 64
/// pixels, otherwise an evenly spaced unit-magnitude support of size
/// max(3, round(M/4)).
SceneTruth scenario_truth(char letter, int n_pixels);

/// Rearranges a 64-pixel scene into its 8x8 magnitude grid (row-major).
Mat scene_grid(const CVec& sigma);

enum class RatioTarget { Cnr, Inr };

/// Noise variance that makes the measured CNR (or INR) hit target_db with
/// the other link parameters held fixed. Throws InfeasibleTargetError when
/// the selected link carries no power.
double calibrate_noise(const SceneConfig& cfg, const PhaseSchedule& sched,
                       const SceneTruth& truth, double target_db, RatioTarget which);

/// Copy of cfg with noise_var set from the CNR target and alpha_i rescaled to
/// hit the INR target.
SceneConfig calibrate_scene(const SceneConfig& cfg, const PhaseSchedule& sched,
                            const SceneTruth& truth, double cnr_db, double inr_db);

struct TrialOutput {
    int errors = 0;
    std::optional<SparseEstimate> scene;
    double nmse_db = 0.0;  // valid when scene is set
};

/// Imager callback backed by the adaptive SBL loop on the given frame.
Imager make_sbl_imager(const SceneConfig& cfg, const LinkModel& link,
                       const ReceivedFrame& rx, int max_iters = 50, double tol = 1e-4);

/// Residual builder on a precomputed link model (same output as
/// build_residual, without re-deriving the geometry).
ImagingSystem build_residual_from_link(const SceneConfig& cfg, const LinkModel& link,
                                       const ReceivedFrame& rx, const SymbolFrame& x_hat);

/// One seeded trial of one method at one operating point. Methods sharing a
/// (master_seed, trial_index) pair see identical symbols and noise.
TrialOutput run_trial(const SceneConfig& cfg, const PhaseSchedule& sched,
                      const LinkModel& link, const SceneTruth& truth, Method method,
                      std::uint64_t master_seed, std::uint64_t trial_index);

/// Full sweep of one scenario: Q trials per point and method, aggregated into
/// records and written as CSV and SVG under out_dir. Output is byte-identical
/// for a fixed master_seed at any parallelism.
std::vector<MetricsRecord> run_scenario(const ScenarioSpec& spec, const SceneConfig& cfg,
                                        const PhaseSchedule& sched, const std::string& out_dir,
                                        std::uint64_t master_seed, int jobs);

}  // namespace risim

#endif
