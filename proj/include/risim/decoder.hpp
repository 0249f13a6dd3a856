#ifndef RISIM_DECODER_HPP
#define RISIM_DECODER_HPP

#include <functional>
#include <vector>

#include "risim/gaussian.hpp"
#include "risim/sbl.hpp"
#include "risim/scene.hpp"
#include "risim/types.hpp"

namespace risim {

/// Per-schedule link quantities shared by every frame decode: the complex
/// coefficient multiplying x_t on the communication path and the alpha-free
/// imaging rows g^T Theta(t+delay) H_I for t = 0..frame_len-1.
struct LinkModel {
    CVec comm_coeff;    // frame_len
    CMat imaging_rows;  // frame_len x n_pixels (no alpha_i factor)
};

LinkModel make_link_model(const SceneConfig& cfg, const PhaseSchedule& sched);

/// Coefficient alpha_c * g^T Theta(t) h_c of x_t. t is 0-based, t < frame_len.
Complex comm_scalar(const SceneConfig& cfg, const PhaseSchedule& sched, int t);

/// Observation-to-symbol message in the communication-only segment.
ScalarGaussian fwd_msg_pure_comm(Complex comm_coeff, double noise_var, Complex y_t);

/// Observation-to-symbol message in the overlapped segment: the imaging part
/// is cancelled with the point estimate m_h_prev and the moment-matched
/// neighbour message, then the communication coefficient is divided out.
ScalarGaussian fwd_msg_overlap(Complex comm_coeff, double noise_var, Complex y_t,
                               Complex m_h_prev, const MomentStats& prev_x_msg);

/// Echo-to-symbol message where the look-ahead sample is pure imaging.
ScalarGaussian bwd_msg_tail(Complex m_h, double noise_var, Complex y_ahead);

/// Echo-to-symbol message where the look-ahead sample still carries a
/// communication term, cancelled via the moment-matched neighbour message.
ScalarGaussian bwd_msg_mid(Complex m_h, double noise_var, Complex y_ahead,
                           Complex comm_coeff_ahead, const MomentStats& next_x_msg);

struct DecoderOptions {
    double damping = 1.0;   // message damping factor in (0, 1]; 1 disables it
    CVec initial_scene;     // starting sigma estimate; empty means all-zero
};

struct DecodeResult {
    SymbolFrame symbols;
    SparseEstimate scene;
    std::vector<SymbolBelief> beliefs;
    std::vector<double> delta_trace;
    int iterations = 0;
    bool converged = false;
};

/// Imaging callback invoked once per outer iteration with the current hard
/// symbol decisions; returns the refreshed scene estimate.
using Imager = std::function<SparseEstimate(const SymbolFrame&)>;

/// Joint decode: alternating forward/backward Gaussian sweeps with QPSK
/// moment matching, hard decisions, and scene refreshes through the imager,
/// until the combined symbol+scene change drops below decoder_tol or
/// decoder_max_iters is reached. Throws DecodeFailure on non-finite messages.
DecodeResult run_decoder(const SceneConfig& cfg, const LinkModel& link,
                         const ReceivedFrame& rx, const Imager& imager,
                         const DecoderOptions& opts = {});

DecodeResult run_decoder(const SceneConfig& cfg, const PhaseSchedule& sched,
                         const ReceivedFrame& rx, const Imager& imager,
                         const DecoderOptions& opts = {});

}  // namespace risim

#endif
