#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fits/sim.hpp"

namespace fits::io {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// `t,x0..,u0..,h0..,qp_status,solve_time,objective`.
std::string trajectory_header(int nx, int nu, int m);

/// Values use 17 significant digits so a read-back log reproduces its metrics
/// exactly. qp_status is "none" for controllers without a QP.
void write_trajectory_csv(std::ostream& os, const EpisodeLog& log, int nx, int nu, int m);
EpisodeLog read_trajectory_csv(std::istream& is);

/// One row per labelled run, 9 significant digits.
void write_metrics_csv(std::ostream& os, const std::vector<std::pair<std::string, Metrics>>& rows);
/// Column-aligned version of the same table.
void write_metrics_table(std::ostream& os, const std::vector<std::pair<std::string, Metrics>>& rows);

/// Plain text, one "cx cy r" triple per line; '#' starts a comment and commas
/// are accepted as separators.
std::vector<Obstacle> read_layout(std::istream& is);
void write_layout(std::ostream& os, const std::vector<Obstacle>& obstacles);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

}  // namespace fits::io
