#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "risim/config.hpp"
#include "risim/csv.hpp"
#include "risim/decoder.hpp"
#include "risim/harness.hpp"
#include "risim/phase_opt.hpp"
#include "risim/svg_plot.hpp"

namespace {

using namespace risim;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int trials = 200;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    std::string nbit;
    double rho = -1.0;
    std::vector<std::string> overrides;
};

SceneConfig load_scene(const GlobalArgs& args) {
    SceneConfig cfg = load_config(args.config_path);
    if (!args.nbit.empty()) apply_config_entry(cfg, "n_bit", args.nbit);
    if (args.rho >= 0.0) cfg.rho = args.rho;
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got: " + kv);
        apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

PhaseSchedule obtain_schedule(const SceneConfig& cfg, const GlobalArgs& args,
                              const std::string& schedule_path, bool write_outputs) {
    if (!schedule_path.empty()) return read_schedule_csv(schedule_path);
    std::cerr << "optimizing phases (n_bit = "
              << (cfg.continuous_phase() ? std::string("continuous") : std::to_string(cfg.n_bit))
              << ", rho = " << cfg.rho << ")...\n";
    auto [sched, report] = optimize_phases(cfg, args.seed);
    std::cerr << "  iterations " << report.iterations << ", final ortho metric "
              << report.final_ortho_metric << (report.accepted ? " (accepted)" : " (rejected)")
              << "\n";
    if (write_outputs) {
        std::filesystem::create_directories(args.out_dir);
        write_schedule_csv(args.out_dir + "/schedule.csv", sched);
        write_loss_trace_csv(args.out_dir + "/loss_trace.csv", report.loss_trace,
                             report.ortho_trace);
    }
    return sched;
}

int cmd_optimize(const GlobalArgs& args) {
    const SceneConfig cfg = load_scene(args);
    obtain_schedule(cfg, args, "", true);
    std::cout << "wrote " << args.out_dir << "/schedule.csv and loss_trace.csv\n";
    return 0;
}

int cmd_beam_pattern(const GlobalArgs& args, const std::string& schedule_path,
                     const std::string& times_arg) {
    const SceneConfig cfg = load_scene(args);
    const PhaseSchedule sched = obtain_schedule(cfg, args, schedule_path, true);
    std::filesystem::create_directories(args.out_dir);

    std::vector<int> times;
    std::stringstream ss(times_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const int t = std::stoi(item) - 1;  // CSV surface is 1-based
        if (t >= 0 && t < sched.phases.rows()) times.push_back(t);
    }
    if (times.empty()) times.push_back(0);

    const Vec grid = linspace_deg(-89.75, 89.75, 719);
    std::vector<Vec> gains;
    std::vector<PlotSeries> series;
    for (int t : times) {
        gains.push_back(beam_pattern(cfg, sched, t, grid));
        PlotSeries s;
        s.label = "t = " + std::to_string(t + 1);
        s.x.assign(grid.data(), grid.data() + grid.size());
        s.y.assign(gains.back().data(), gains.back().data() + gains.back().size());
        series.push_back(std::move(s));
    }
    write_beam_pattern_csv(args.out_dir + "/beam_pattern.csv", times, grid, gains);
    write_svg_plot(args.out_dir + "/beam_pattern.svg",
                   {"Receive beam pattern", "angle (deg)", "gain (dB)", false}, series);
    std::cout << "wrote " << args.out_dir << "/beam_pattern.csv and beam_pattern.svg\n";
    return 0;
}

int cmd_simulate(const GlobalArgs& args, int scenario, const std::string& schedule_path) {
    const SceneConfig cfg = load_scene(args);
    const PhaseSchedule sched = obtain_schedule(cfg, args, schedule_path, true);
    const ScenarioSpec spec = ScenarioSpec::standard(scenario, args.trials);
    const auto records = run_scenario(spec, cfg, sched, args.out_dir, args.seed, args.jobs);
    for (const auto& r : records) {
        std::cout << "cnr " << r.cnr_db << " dB, inr " << r.inr_db << " dB, "
                  << method_name(r.method) << ": ser " << r.ser;
        if (r.method == Method::Proposed || r.method == Method::GivenX)
            std::cout << ", nmse " << r.nmse_db << " dB";
        std::cout << '\n';
    }
    std::cout << "wrote " << args.out_dir << "/ser_curve.csv and nmse_curve.csv\n";
    return 0;
}

int cmd_decode(const GlobalArgs& args, const std::string& schedule_path,
               const std::string& frame_path) {
    const SceneConfig cfg = load_scene(args);
    const PhaseSchedule sched = read_schedule_csv(schedule_path);
    ReceivedFrame rx = read_frame_csv(frame_path);
    if (rx.samples.size() != cfg.frame_len + cfg.delay)
        throw std::invalid_argument("frame length does not match config");

    const LinkModel link = make_link_model(cfg, sched);
    const DecodeResult res =
        run_decoder(cfg, link, rx, make_sbl_imager(cfg, link, rx));

    std::filesystem::create_directories(args.out_dir);
    std::vector<int> decided(res.beliefs.size());
    std::vector<Eigen::Vector4d> probs(res.beliefs.size());
    for (std::size_t t = 0; t < res.beliefs.size(); ++t) {
        decided[t] = res.beliefs[t].decided;
        probs[t] = res.beliefs[t].probs;
    }
    write_decisions_csv(args.out_dir + "/decisions.csv", decided, probs);
    write_sigma_csv(args.out_dir + "/sigma.csv", res.scene.sigma);
    write_scene_csv(args.out_dir + "/scene_recovered.csv", res.scene.sigma, res.scene.gamma);
    if (cfg.n_pixels == 64)
        write_scene_grid_csv(args.out_dir + "/scene_recovered_grid.csv",
                             scene_grid(res.scene.sigma));
    std::cout << "decode " << (res.converged ? "converged" : "stopped") << " after "
              << res.iterations << " iterations; wrote " << args.out_dir
              << "/decisions.csv and sigma.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-assisted uplink joint communication and imaging simulator"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "scene config file (key = value)")
        ->required();
    app.add_option("--seed", args.seed, "master seed");
    app.add_option("--out", args.out_dir, "output directory");
    app.add_option("--trials", args.trials, "Monte Carlo trials per sweep point");
    app.add_option("--jobs", args.jobs, "worker threads");
    app.add_option("--nbit", args.nbit, "phase quantization: 1..16 or continuous");
    app.add_option("--rho", args.rho, "communication/imaging weight in [0,1]");
    app.add_option("--set", args.overrides, "extra config override key=value")
        ->take_all();

    auto* optimize = app.add_subcommand("optimize-phases", "design a RIS phase schedule");

    std::string schedule_path;
    std::string times_arg = "1,200,500,800,1000";
    auto* beam = app.add_subcommand("beam-pattern", "receive pattern of a schedule");
    beam->add_option("--schedule", schedule_path, "schedule CSV (optimized when absent)");
    beam->add_option("--times", times_arg, "comma list of 1-based time indices");

    int scenario = 1;
    std::string sim_schedule_path;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo SER/NMSE sweep");
    simulate->add_option("--scenario", scenario, "scenario id")
        ->check(CLI::IsMember({1, 2, 3}))
        ->required();
    simulate->add_option("--schedule", sim_schedule_path,
                         "schedule CSV (optimized when absent)");

    std::string decode_schedule, decode_frame;
    auto* decode = app.add_subcommand("decode", "decode one received frame");
    decode->add_option("--schedule", decode_schedule, "schedule CSV")->required();
    decode->add_option("--frame", decode_frame, "received frame CSV (t,re,im)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (optimize->parsed()) return cmd_optimize(args);
        if (beam->parsed()) return cmd_beam_pattern(args, schedule_path, times_arg);
        if (simulate->parsed()) return cmd_simulate(args, scenario, sim_schedule_path);
        if (decode->parsed()) return cmd_decode(args, decode_schedule, decode_frame);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
