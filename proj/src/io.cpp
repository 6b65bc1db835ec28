#include "coagstat/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace coagstat {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_distribution_csv(const std::filesystem::path& path, const Grid& grid,
                            std::span<const double> phi) {
  std::ostringstream os;
  os << "x,dx,phi\n";
  for (int i = 0; i < grid.size(); ++i)
    os << fmt17(grid.pivot(i)) << ',' << fmt17(grid.width(i)) << ','
       << fmt17(phi[static_cast<std::size_t>(i)]) << '\n';
  atomic_write(path, os.str());
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectorySample>& traj) {
  std::ostringstream os;
  os << "t,M0,Mlambda,M1,M1plambda,overflow_mass\n";
  for (const TrajectorySample& s : traj)
    os << fmt17(s.t) << ',' << fmt17(s.m0) << ',' << fmt17(s.mlambda) << ','
       << fmt17(s.m1) << ',' << fmt17(s.m1pl) << ',' << fmt17(s.overflow_mass) << '\n';
  atomic_write(path, os.str());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  atomic_write(path, j.dump(2) + "\n");
}

}  // namespace coagstat
