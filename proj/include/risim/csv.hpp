#ifndef RISIM_CSV_HPP
#define RISIM_CSV_HPP

#include <string>
#include <vector>

#include "risim/scene.hpp"
#include "risim/types.hpp"

namespace risim {

/// Shortest round-trippable decimal form of x; identical output across runs.
std::string format_double(double x);

void write_schedule_csv(const std::string& path, const PhaseSchedule& sched);
PhaseSchedule read_schedule_csv(const std::string& path);

void write_loss_trace_csv(const std::string& path, const std::vector<double>& loss,
                          const std::vector<double>& ortho);

void write_frame_csv(const std::string& path, const ReceivedFrame& rx);
ReceivedFrame read_frame_csv(const std::string& path);

void write_decisions_csv(const std::string& path, const std::vector<int>& decided,
                         const std::vector<Eigen::Vector4d>& probs);

void write_sigma_csv(const std::string& path, const CVec& sigma);
void write_scene_csv(const std::string& path, const CVec& sigma, const Vec& gamma);
void write_scene_grid_csv(const std::string& path, const Mat& grid);

void write_beam_pattern_csv(const std::string& path, const std::vector<int>& times,
                            const Vec& grid_deg, const std::vector<Vec>& gains);

}  // namespace risim

#endif
