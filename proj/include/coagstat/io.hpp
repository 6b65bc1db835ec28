#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "coagstat/evolution.hpp"
#include "coagstat/grid.hpp"

namespace coagstat {

// 17 significant digits, enough to round-trip any double.
std::string fmt17(double v);

// Write to <path>.tmp and rename, so readers never see partial output.
void atomic_write(const std::filesystem::path& path, const std::string& content);

void write_distribution_csv(const std::filesystem::path& path, const Grid& grid,
                            std::span<const double> phi);
void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectorySample>& traj);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace coagstat
