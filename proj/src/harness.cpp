#include "risim/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "risim/csv.hpp"
#include "risim/errors.hpp"
#include "risim/svg_plot.hpp"

namespace risim {

namespace {

constexpr int kSblMaxIters = 50;
constexpr double kSblTol = 1e-4;

const char* const kLetterX[8] = {"1......1", ".1....1.", "..1..1..", "...11...",
                                 "...11...", "..1..1..", ".1....1.", "1......1"};
const char* const kLetterD[8] = {"111111..", "1.....1.", "1......1", "1......1",
                                 "1......1", "1......1", "1.....1.", "111111.."};
const char* const kLetterU[8] = {"1......1", "1......1", "1......1", "1......1",
                                 "1......1", "1......1", ".1....1.", "..1111.."};

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Mean per-sample power of each link with unit symbols.
std::pair<double, double> link_powers(const SceneConfig& cfg, const PhaseSchedule& sched,
                                      const SceneTruth& truth) {
    const LinkModel link = make_link_model(cfg, sched);
    const double comm = link.comm_coeff.squaredNorm() / cfg.frame_len;
    const double img = (link.imaging_rows * truth.sigma).squaredNorm() *
                       cfg.alpha_i * cfg.alpha_i / cfg.frame_len;
    return {comm, img};
}

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::Proposed: return "proposed";
        case Method::IgnoreEcho: return "ignore_echo";
        case Method::PureQpsk: return "pure_qpsk";
        case Method::GivenSigma: return "given_sigma";
        case Method::GivenX: return "given_x";
    }
    return "unknown";
}

ScenarioSpec ScenarioSpec::standard(int id, int trials) {
    ScenarioSpec spec;
    spec.id = id;
    spec.trials = trials;
    switch (id) {
        case 1:
            spec.scene_letter = 'X';
            for (double cnr : {6.0, 8.0, 10.0, 12.0, 14.0, 16.0})
                spec.sweep.emplace_back(cnr, cnr - 5.0);
            break;
        case 2:
            spec.scene_letter = 'D';
            for (double inr : {4.0, 5.0, 6.0, 7.0, 8.0}) spec.sweep.emplace_back(12.0, inr);
            break;
        case 3:
            spec.scene_letter = 'U';
            for (double cnr : {8.0, 10.0, 12.0, 14.0, 16.0}) spec.sweep.emplace_back(cnr, 6.0);
            break;
        default:
            throw std::invalid_argument("scenario id must be 1, 2 or 3");
    }
    return spec;
}

void ScenarioSpec::validate() const {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (sweep.empty()) throw std::invalid_argument("sweep must be nonempty");
    for (const auto& [cnr, inr] : sweep) {
        if (id == 1 && std::abs(cnr - inr - 5.0) > 1e-9)
            throw std::invalid_argument("scenario 1 requires cnr - inr = 5");
        if (id == 2 && std::abs(cnr - 12.0) > 1e-9)
            throw std::invalid_argument("scenario 2 fixes cnr = 12");
        if (id == 3 && std::abs(inr - 6.0) > 1e-9)
            throw std::invalid_argument("scenario 3 fixes inr = 6");
    }
}

SceneTruth letter_scene(char letter) {
    const char* const* mask = nullptr;
    switch (letter) {
        case 'X': mask = kLetterX; break;
        case 'D': mask = kLetterD; break;
        case 'U': mask = kLetterU; break;
        default: throw std::invalid_argument("letter scene must be X, D or U");
    }
    CVec sigma = CVec::Zero(64);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
            if (mask[r][c] == '1') sigma[r * 8 + c] = Complex(1.0, 0.0);
    return make_scene_truth(std::move(sigma));
}

SceneTruth scenario_truth(char letter, int n_pixels) {
    if (n_pixels == 64) return letter_scene(letter);
    const int support = std::max(3, (n_pixels + 2) / 4);
    CVec sigma = CVec::Zero(n_pixels);
    for (int j = 0; j < support; ++j)
        sigma[static_cast<Eigen::Index>(j) * n_pixels / support] = Complex(1.0, 0.0);
    return make_scene_truth(std::move(sigma));
}

Mat scene_grid(const CVec& sigma) {
    if (sigma.size() != 64) throw std::invalid_argument("scene grid needs 64 pixels");
    Mat grid(8, 8);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) grid(r, c) = std::abs(sigma[r * 8 + c]);
    return grid;
}

double calibrate_noise(const SceneConfig& cfg, const PhaseSchedule& sched,
                       const SceneTruth& truth, double target_db, RatioTarget which) {
    if (!std::isfinite(target_db)) throw InfeasibleTargetError("target ratio must be finite");
    const auto [comm, img] = link_powers(cfg, sched, truth);
    const double power = which == RatioTarget::Cnr ? comm : img;
    if (!(power > 0.0))
        throw InfeasibleTargetError("selected link carries no power; ratio unreachable");
    return power / db_to_linear(target_db);
}

SceneConfig calibrate_scene(const SceneConfig& cfg, const PhaseSchedule& sched,
                            const SceneTruth& truth, double cnr_db, double inr_db) {
    SceneConfig out = cfg;
    out.noise_var = calibrate_noise(cfg, sched, truth, cnr_db, RatioTarget::Cnr);
    SceneConfig unit = cfg;
    unit.alpha_i = 1.0;
    const auto [comm, img_unit] = link_powers(unit, sched, truth);
    (void)comm;
    if (!(img_unit > 0.0))
        throw InfeasibleTargetError("imaging link carries no power; INR unreachable");
    out.alpha_i = std::sqrt(out.noise_var * db_to_linear(inr_db) / img_unit);
    return out;
}

ImagingSystem build_residual_from_link(const SceneConfig& cfg, const LinkModel& link,
                                       const ReceivedFrame& rx, const SymbolFrame& x_hat) {
    ImagingSystem sys;
    sys.matrix.resize(cfg.frame_len, cfg.n_pixels);
    sys.residual.resize(cfg.frame_len);
    for (int r = 0; r < cfg.frame_len; ++r) {
        const int t = r + cfg.delay;
        sys.matrix.row(r) = cfg.alpha_i * x_hat.symbols[r] * link.imaging_rows.row(r);
        Complex h = rx.samples[t];
        if (t < cfg.frame_len) h -= link.comm_coeff[t] * x_hat.symbols[t];
        sys.residual[r] = h;
    }
    return sys;
}

Imager make_sbl_imager(const SceneConfig& cfg, const LinkModel& link, const ReceivedFrame& rx,
                       int max_iters, double tol) {
    return [=, &link](const SymbolFrame& x_hat) {
        const ImagingSystem sys = build_residual_from_link(cfg, link, rx, x_hat);
        return run_sbl(sys, default_sbl_init(sys), max_iters, tol, cfg.gamma_rate);
    };
}

namespace {

int count_errors(const SymbolFrame& decided, const SymbolFrame& truth) {
    int errors = 0;
    for (Eigen::Index t = 0; t < truth.symbols.size(); ++t)
        if (qpsk_index(decided.symbols[t]) != qpsk_index(truth.symbols[t])) ++errors;
    return errors;
}

double nmse_db(const CVec& estimate, const CVec& truth) {
    return 10.0 * std::log10((estimate - truth).squaredNorm() /
                             std::max(truth.squaredNorm(), 1e-300));
}

}  // namespace

TrialOutput run_trial(const SceneConfig& cfg, const PhaseSchedule& sched, const LinkModel& link,
                      const SceneTruth& truth, Method method, std::uint64_t master_seed,
                      std::uint64_t trial_index) {
    const std::uint64_t seed = derive_seed(master_seed, trial_index);
    CounterRng sym_rng(seed, Stream::Symbols);
    const SymbolFrame frame = random_qpsk_frame(cfg.frame_len, sym_rng);
    TrialOutput out;

    switch (method) {
        case Method::Proposed: {
            const ReceivedFrame rx = synth_received(cfg, sched, frame, truth, seed);
            const DecodeResult res =
                run_decoder(cfg, link, rx, make_sbl_imager(cfg, link, rx));
            out.errors = count_errors(res.symbols, frame);
            out.scene = res.scene;
            out.nmse_db = nmse_db(res.scene.sigma, truth.sigma);
            break;
        }
        case Method::IgnoreEcho: {
            const ReceivedFrame rx = synth_received(cfg, sched, frame, truth, seed);
            SceneConfig single = cfg;
            single.decoder_max_iters = 1;
            const Imager zero_imager = [&](const SymbolFrame&) {
                SparseEstimate est;
                est.sigma = CVec::Zero(cfg.n_pixels);
                est.gamma = Vec::Ones(cfg.n_pixels);
                return est;
            };
            const DecodeResult res = run_decoder(single, link, rx, zero_imager);
            out.errors = count_errors(res.symbols, frame);
            break;
        }
        case Method::PureQpsk: {
            SceneConfig uncoupled = cfg;
            uncoupled.alpha_i = 0.0;
            const ReceivedFrame rx = synth_received(uncoupled, sched, frame, truth, seed);
            SymbolFrame decided;
            decided.symbols.resize(cfg.frame_len);
            for (int t = 0; t < cfg.frame_len; ++t) {
                const Complex c = link.comm_coeff[t];
                const Complex z = std::abs(c) > 1e-12 ? rx.samples[t] / c : Complex(0.0, 0.0);
                decided.symbols[t] = qpsk_point(qpsk_index(z));
            }
            out.errors = count_errors(decided, frame);
            break;
        }
        case Method::GivenSigma: {
            const ReceivedFrame rx = synth_received(cfg, sched, frame, truth, seed);
            const Imager truth_imager = [&](const SymbolFrame&) {
                SparseEstimate est;
                est.sigma = truth.sigma;
                est.gamma = Vec::Ones(cfg.n_pixels);
                est.converged = true;
                return est;
            };
            DecoderOptions opts;
            opts.initial_scene = truth.sigma;
            const DecodeResult res = run_decoder(cfg, link, rx, truth_imager, opts);
            out.errors = count_errors(res.symbols, frame);
            break;
        }
        case Method::GivenX: {
            const ReceivedFrame rx = synth_received(cfg, sched, frame, truth, seed);
            const ImagingSystem sys = build_residual_from_link(cfg, link, rx, frame);
            const SparseEstimate est =
                run_sbl(sys, default_sbl_init(sys), kSblMaxIters, kSblTol, cfg.gamma_rate);
            out.scene = est;
            out.nmse_db = nmse_db(est.sigma, truth.sigma);
            break;
        }
    }
    return out;
}

namespace {

struct TrialBundle {
    TrialOutput proposed, ignore_echo, pure_qpsk, given_sigma, given_x;
};

void write_records_csv(const std::string& out_dir, const std::vector<MetricsRecord>& records) {
    {
        std::ofstream out(out_dir + "/ser_curve.csv", std::ios::binary);
        out << "cnr_db,inr_db,method,ser,stderr,trials\n";
        for (const auto& r : records) {
            if (r.method == Method::GivenX) continue;
            out << format_double(r.cnr_db) << ',' << format_double(r.inr_db) << ','
                << method_name(r.method) << ',' << format_double(r.ser) << ','
                << format_double(r.ser_stderr) << ',' << r.trials << '\n';
        }
    }
    {
        std::ofstream out(out_dir + "/nmse_curve.csv", std::ios::binary);
        out << "cnr_db,inr_db,method,nmse_db,trials\n";
        for (const auto& r : records) {
            if (r.method != Method::Proposed && r.method != Method::GivenX) continue;
            out << format_double(r.cnr_db) << ',' << format_double(r.inr_db) << ','
                << method_name(r.method) << ',' << format_double(r.nmse_db) << ','
                << r.trials << '\n';
        }
    }
}

void write_record_plots(const ScenarioSpec& spec, const std::string& out_dir,
                        const std::vector<MetricsRecord>& records) {
    const bool sweep_inr = spec.id == 2;  // scenario 2 varies INR at fixed CNR
    const std::string x_label = sweep_inr ? "INR (dB)" : "CNR (dB)";
    const auto x_of = [&](const MetricsRecord& r) { return sweep_inr ? r.inr_db : r.cnr_db; };

    std::vector<PlotSeries> ser_series;
    for (Method m :
         {Method::Proposed, Method::IgnoreEcho, Method::PureQpsk, Method::GivenSigma}) {
        PlotSeries s;
        s.label = method_name(m);
        for (const auto& r : records)
            if (r.method == m) {
                s.x.push_back(x_of(r));
                s.y.push_back(r.ser);
            }
        ser_series.push_back(std::move(s));
    }
    PlotSpec ser_spec{"SER, scenario " + std::to_string(spec.id), x_label, "SER", true};
    write_svg_plot(out_dir + "/ser_curve.svg", ser_spec, ser_series);

    std::vector<PlotSeries> nmse_series;
    for (Method m : {Method::Proposed, Method::GivenX}) {
        PlotSeries s;
        s.label = method_name(m);
        for (const auto& r : records)
            if (r.method == m) {
                s.x.push_back(x_of(r));
                s.y.push_back(r.nmse_db);
            }
        nmse_series.push_back(std::move(s));
    }
    PlotSpec nmse_spec{"NMSE, scenario " + std::to_string(spec.id), x_label, "NMSE (dB)", false};
    write_svg_plot(out_dir + "/nmse_curve.svg", nmse_spec, nmse_series);
}

}  // namespace

std::vector<MetricsRecord> run_scenario(const ScenarioSpec& spec, const SceneConfig& cfg,
                                        const PhaseSchedule& sched, const std::string& out_dir,
                                        std::uint64_t master_seed, int jobs) {
    spec.validate();
    std::filesystem::create_directories(out_dir);
    const SceneTruth truth = scenario_truth(spec.scene_letter, cfg.n_pixels);
    const int q_trials = spec.trials;
    jobs = std::max(1, jobs);

    std::vector<MetricsRecord> records;
    std::optional<SparseEstimate> sample_scene;
    std::exception_ptr failure;

    for (std::size_t point = 0; point < spec.sweep.size() && !failure; ++point) {
        const auto [cnr_db, inr_db] = spec.sweep[point];
        SceneConfig point_cfg;
        try {
            point_cfg = calibrate_scene(cfg, sched, truth, cnr_db, inr_db);
        } catch (...) {
            failure = std::current_exception();
            break;
        }
        const LinkModel link = make_link_model(point_cfg, sched);

        std::vector<TrialBundle> bundles(q_trials);
        std::atomic<int> next{0};
        std::exception_ptr worker_failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            try {
                for (int q = next.fetch_add(1); q < q_trials; q = next.fetch_add(1)) {
                    const std::uint64_t index =
                        static_cast<std::uint64_t>(point) * q_trials + q;
                    TrialBundle b;
                    b.proposed = run_trial(point_cfg, sched, link, truth, Method::Proposed,
                                           master_seed, index);
                    b.ignore_echo = run_trial(point_cfg, sched, link, truth,
                                              Method::IgnoreEcho, master_seed, index);
                    b.pure_qpsk = run_trial(point_cfg, sched, link, truth, Method::PureQpsk,
                                            master_seed, index);
                    b.given_sigma = run_trial(point_cfg, sched, link, truth,
                                              Method::GivenSigma, master_seed, index);
                    b.given_x = run_trial(point_cfg, sched, link, truth, Method::GivenX,
                                          master_seed, index);
                    bundles[q] = std::move(b);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!worker_failure) worker_failure = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (worker_failure) {
            failure = worker_failure;
            break;
        }

        // Aggregation walks trials in index order so that output does not
        // depend on the number of workers.
        const auto aggregate = [&](Method m, auto pick) {
            MetricsRecord rec;
            rec.cnr_db = cnr_db;
            rec.inr_db = inr_db;
            rec.method = m;
            rec.trials = q_trials;
            double nmse_sum = 0.0;
            int nmse_count = 0;
            for (int q = 0; q < q_trials; ++q) {
                const TrialOutput& t = pick(bundles[q]);
                rec.errors_total += t.errors;
                if (t.scene) {
                    nmse_sum += t.nmse_db;
                    ++nmse_count;
                }
            }
            const double symbols =
                static_cast<double>(q_trials) * static_cast<double>(cfg.frame_len);
            rec.ser = static_cast<double>(rec.errors_total) / symbols;
            rec.ser_stderr = std::sqrt(std::max(rec.ser * (1.0 - rec.ser), 0.0) / symbols);
            rec.nmse_db = nmse_count > 0 ? nmse_sum / nmse_count
                                         : std::numeric_limits<double>::quiet_NaN();
            return rec;
        };
        records.push_back(aggregate(Method::Proposed, [](const TrialBundle& b) -> const TrialOutput& { return b.proposed; }));
        records.push_back(aggregate(Method::IgnoreEcho, [](const TrialBundle& b) -> const TrialOutput& { return b.ignore_echo; }));
        records.push_back(aggregate(Method::PureQpsk, [](const TrialBundle& b) -> const TrialOutput& { return b.pure_qpsk; }));
        records.push_back(aggregate(Method::GivenSigma, [](const TrialBundle& b) -> const TrialOutput& { return b.given_sigma; }));
        records.push_back(aggregate(Method::GivenX, [](const TrialBundle& b) -> const TrialOutput& { return b.given_x; }));

        if (point + 1 == spec.sweep.size() && bundles[0].proposed.scene)
            sample_scene = bundles[0].proposed.scene;
    }

    write_records_csv(out_dir, records);
    write_record_plots(spec, out_dir, records);
    if (cfg.n_pixels == 64) {
        write_scene_grid_csv(out_dir + "/scene_truth_grid.csv", scene_grid(truth.sigma));
        if (sample_scene) {
            write_scene_csv(out_dir + "/scene_recovered.csv", sample_scene->sigma,
                            sample_scene->gamma);
            write_scene_grid_csv(out_dir + "/scene_recovered_grid.csv",
                                 scene_grid(sample_scene->sigma));
        }
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

}  // namespace risim
