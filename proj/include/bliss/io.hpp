#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>

#include "bliss/lti.hpp"

namespace bliss::io {

/// Writes M row-major as CSV, one row per line, every entry with the
/// shortest decimal representation that round-trips to the same double.
void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::Ref<const Eigen::MatrixXd>& M);

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Trajectory directory layout: meta.json plus X.csv, Xplus.csv and, when
/// available, U_true.csv, A_true.csv, B_true.csv.
void save_trajectory(const std::filesystem::path& dir,
                     const lti::TrajectoryData& traj,
                     const lti::SystemRealization* sys = nullptr);

lti::TrajectoryData load_trajectory(const std::filesystem::path& dir);

/// Loads A_true.csv / B_true.csv when the directory carries ground truth.
std::optional<lti::SystemRealization> load_system(
    const std::filesystem::path& dir);

std::string format_double(double x);
double parse_double(const std::string& text);

}  // namespace bliss::io
