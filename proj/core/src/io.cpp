#include "fits/io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace fits::io {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "invalid number '" + s + "' for " + what);
  }
}

int count_prefix(const std::vector<std::string>& cols, std::size_t& at, char prefix) {
  int n = 0;
  while (at < cols.size() && cols[at] == prefix + std::to_string(n)) {
    ++n;
    ++at;
  }
  return n;
}

std::string status_name(const std::optional<qp::QPStatus>& s) {
  return s ? std::string(qp::to_string(*s)) : std::string("none");
}

std::optional<qp::QPStatus> parse_status(const std::string& s, int line) {
  if (s == "none") return std::nullopt;
  for (auto st : {qp::QPStatus::Optimal, qp::QPStatus::Infeasible, qp::QPStatus::MaxIterations}) {
    if (s == qp::to_string(st)) return st;
  }
  throw ParseError(line, "unknown qp_status '" + s + "'");
}

}  // namespace

ParseError::ParseError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::string trajectory_header(int nx, int nu, int m) {
  std::ostringstream os;
  os << 't';
  for (int i = 0; i < nx; ++i) os << ",x" << i;
  for (int i = 0; i < nu; ++i) os << ",u" << i;
  for (int i = 0; i < m; ++i) os << ",h" << i;
  os << ",qp_status,solve_time,objective";
  return os.str();
}

void write_trajectory_csv(std::ostream& os, const EpisodeLog& log, int nx, int nu, int m) {
  os << trajectory_header(nx, nu, m) << '\n';
  os << std::setprecision(17);
  for (const auto& r : log.records) {
    if (r.x.size() != nx || r.u.size() != nu || r.h.size() != m) {
      throw std::invalid_argument("trajectory record does not match header dimensions");
    }
    os << r.t;
    for (int i = 0; i < nx; ++i) os << ',' << r.x(i);
    for (int i = 0; i < nu; ++i) os << ',' << r.u(i);
    for (int i = 0; i < m; ++i) os << ',' << r.h(i);
    os << ',' << status_name(r.qp_status) << ',' << r.solve_time << ',' << r.objective << '\n';
  }
}

EpisodeLog read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(1, "missing header");
  const auto cols = split_csv(line);
  std::size_t at = 0;
  if (cols.empty() || cols[at++] != "t") throw ParseError(1, "header must start with 't'");
  const int nx = count_prefix(cols, at, 'x');
  const int nu = count_prefix(cols, at, 'u');
  const int m = count_prefix(cols, at, 'h');
  if (cols.size() != at + 3 || cols[at] != "qp_status" || cols[at + 1] != "solve_time" ||
      cols[at + 2] != "objective") {
    throw ParseError(1, "header must end with qp_status,solve_time,objective");
  }
  EpisodeLog log;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != cols.size()) {
      throw ParseError(lineno, "expected " + std::to_string(cols.size()) + " fields, got " +
                                   std::to_string(f.size()));
    }
    EpisodeRecord r;
    std::size_t k = 0;
    r.t = parse_double(f[k++], lineno, "t");
    r.x.resize(nx);
    r.u.resize(nu);
    r.h.resize(m);
    for (int i = 0; i < nx; ++i, ++k) r.x(i) = parse_double(f[k], lineno, cols[k]);
    for (int i = 0; i < nu; ++i, ++k) r.u(i) = parse_double(f[k], lineno, cols[k]);
    for (int i = 0; i < m; ++i, ++k) r.h(i) = parse_double(f[k], lineno, cols[k]);
    r.qp_status = parse_status(f[k++], lineno);
    r.solve_time = parse_double(f[k++], lineno, "solve_time");
    r.objective = parse_double(f[k++], lineno, "objective");
    log.records.push_back(std::move(r));
  }
  return log;
}

void write_metrics_csv(std::ostream& os, const std::vector<std::pair<std::string, Metrics>>& rows) {
  os << "controller,rmse,comp_time_mean,comp_time_std,mean_u_norm,violations,h_min,goal_reached,"
        "infeasible_ticks\n";
  os << std::setprecision(9);
  for (const auto& [name, m] : rows) {
    os << name << ',' << m.rmse << ',' << m.comp_time_mean << ',' << m.comp_time_std << ','
       << m.mean_u_norm << ',' << m.violations << ',' << m.h_min << ','
       << (m.goal_reached ? "true" : "false") << ',' << m.infeasible_ticks << '\n';
  }
}

void write_metrics_table(std::ostream& os, const std::vector<std::pair<std::string, Metrics>>& rows) {
  const std::vector<std::string> head{"controller", "rmse[m]",    "t_comp[ms]", "t_comp_std[ms]",
                                      "|u|",        "violations", "h_min[m]",   "goal",
                                      "infeasible"};
  std::vector<std::vector<std::string>> cells{head};
  const auto fmt = [](double v) {
    std::ostringstream s;
    s << std::setprecision(9) << v;
    return s.str();
  };
  for (const auto& [name, m] : rows) {
    cells.push_back({name, fmt(m.rmse), fmt(1e3 * m.comp_time_mean), fmt(1e3 * m.comp_time_std),
                     fmt(m.mean_u_norm), std::to_string(m.violations), fmt(m.h_min),
                     m.goal_reached ? "yes" : "no", std::to_string(m.infeasible_ticks)});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << row[c];
    }
    os << '\n';
  }
}

std::vector<Obstacle> read_layout(std::istream& is) {
  std::vector<Obstacle> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 3) {
      throw ParseError(lineno, "expected 'cx cy r', got " + std::to_string(tok.size()) + " fields");
    }
    Obstacle o;
    o.center = {parse_double(tok[0], lineno, "cx"), parse_double(tok[1], lineno, "cy")};
    o.radius = parse_double(tok[2], lineno, "r");
    if (!(o.radius > 0.0)) throw ParseError(lineno, "obstacle radius must be positive");
    out.push_back(o);
  }
  return out;
}

void write_layout(std::ostream& os, const std::vector<Obstacle>& obstacles) {
  os << "# cx cy r\n" << std::setprecision(9);
  for (const auto& o : obstacles) os << o.center.x() << ' ' << o.center.y() << ' ' << o.radius << '\n';
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    writer(os);
    os.flush();
    if (!os) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace fits::io
