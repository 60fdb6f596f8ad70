#include "bliss/io.hpp"

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace bliss::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc()) {
    throw std::runtime_error("format_double: conversion failed");
  }
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc()) {
    throw std::runtime_error("parse_double: cannot parse '" + text + "'");
  }
  return value;
}

void write_matrix_csv(const fs::path& path,
                      const Eigen::Ref<const Eigen::MatrixXd>& M) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      row.push_back(parse_double(line.substr(start, comma - start)));
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("ragged CSV rows in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Eigen::MatrixXd(0, 0);

  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return M;
}

void save_trajectory(const fs::path& dir, const lti::TrajectoryData& traj,
                     const lti::SystemRealization* sys) {
  fs::create_directories(dir);

  json meta;
  meta["n"] = traj.meta.n;
  meta["m"] = traj.meta.m;
  meta["T"] = traj.meta.T;
  meta["s"] = traj.meta.s;
  meta["seed"] = traj.meta.seed;
  meta["distribution"] = lti::to_string(traj.meta.distribution);
  meta["spectral_radius"] = traj.meta.spectral_radius;
  meta["input_scale"] = traj.meta.input_scale;
  meta["has_inputs"] = traj.U_true.has_value();
  meta["has_system"] = sys != nullptr;

  std::ofstream meta_out(dir / "meta.json");
  if (!meta_out) {
    throw std::runtime_error("cannot write " + (dir / "meta.json").string());
  }
  meta_out << meta.dump(2) << '\n';

  write_matrix_csv(dir / "X.csv", traj.X);
  write_matrix_csv(dir / "Xplus.csv", traj.Xplus);
  if (traj.U_true) {
    write_matrix_csv(dir / "U_true.csv", *traj.U_true);
  }
  if (sys != nullptr) {
    write_matrix_csv(dir / "A_true.csv", sys->A);
    write_matrix_csv(dir / "B_true.csv", sys->B);
  }
}

lti::TrajectoryData load_trajectory(const fs::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) {
    throw std::runtime_error("cannot read " + (dir / "meta.json").string());
  }
  json meta = json::parse(meta_in);

  lti::TrajectoryData traj;
  traj.meta.n = meta.at("n").get<Eigen::Index>();
  traj.meta.m = meta.at("m").get<Eigen::Index>();
  traj.meta.T = meta.at("T").get<Eigen::Index>();
  traj.meta.s = meta.at("s").get<int>();
  traj.meta.seed = meta.at("seed").get<std::uint64_t>();
  traj.meta.distribution =
      lti::distribution_from_string(meta.at("distribution").get<std::string>());
  traj.meta.spectral_radius = meta.at("spectral_radius").get<double>();
  traj.meta.input_scale = meta.at("input_scale").get<double>();

  traj.X = read_matrix_csv(dir / "X.csv");
  traj.Xplus = read_matrix_csv(dir / "Xplus.csv");
  if (meta.value("has_inputs", false)) {
    traj.U_true = read_matrix_csv(dir / "U_true.csv");
  }

  if (traj.X.rows() != traj.meta.T || traj.X.cols() != traj.meta.n ||
      traj.Xplus.rows() != traj.meta.n || traj.Xplus.cols() != traj.meta.T) {
    throw std::runtime_error("trajectory shapes inconsistent with meta.json in " +
                             dir.string());
  }
  return traj;
}

std::optional<lti::SystemRealization> load_system(const fs::path& dir) {
  if (!fs::exists(dir / "A_true.csv") || !fs::exists(dir / "B_true.csv")) {
    return std::nullopt;
  }
  lti::SystemRealization sys;
  sys.A = read_matrix_csv(dir / "A_true.csv");
  sys.B = read_matrix_csv(dir / "B_true.csv");
  sys.n = sys.A.rows();
  sys.m = sys.B.cols();
  return sys;
}

}  // namespace bliss::io
