#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fits/baselines.hpp"
#include "fits/controller.hpp"
#include "fits/scenario.hpp"
#include "fits/sim.hpp"

namespace fits::cli {

/// Bad configuration text or values. `line` is 0 when the problem does not
/// come from a file (command-line flags, cross-field checks).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string field, std::string detail, std::string source = {});
  int line() const { return line_; }
  const std::string& field() const { return field_; }
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  std::string field_;
  std::string detail_;
};

inline const std::vector<std::string> kScenarioNames = {"geofencing", "navigation"};
inline const std::vector<std::string> kControllerNames = {"fits", "cbf", "lqr"};

/// Everything the subcommands need. Unset optionals fall back to the
/// scenario defaults.
struct RunConfig {
  std::string scenario = "navigation";
  std::uint64_t seed = kDefaultNavigationSeed;
  std::optional<double> t_sim;
  std::optional<Eigen::VectorXd> x_init;
  std::string layout_file;  // navigation only; empty means a seeded layout

  std::vector<std::string> controllers = {"fits"};

  // FITS overrides.
  std::optional<int> num_steps;
  std::optional<double> horizon;
  std::optional<int> num_samples;
  std::optional<double> gamma_safety;
  std::optional<double> gamma_actuation;
  std::optional<double> reg_weight;
  std::optional<double> dt;
  std::optional<double> margin;
  std::optional<double> kappa_safety_factor;
  std::optional<int> substeps;
  std::optional<SampleLayout> sample_layout;
  std::optional<int> qp_max_iterations;

  // CBF baseline overrides.
  std::optional<double> cbf_gamma;
  std::optional<double> cbf_position_gain;

  std::string out_dir = "out";
  int repetitions = 1;

  /// Throws ConfigError on unknown names or out-of-range values.
  void validate() const;

  FitsConfig fits_config() const;
  CbfSettings cbf_settings() const;
  LqrSettings lqr_settings() const;
  /// Scenario for one repetition; `seed` selects the navigation layout.
  Scenario build_scenario(std::uint64_t seed) const;
};

/// Reads sections [scenario], [controller] and [output] into `cfg`, keeping
/// existing values for keys that are absent.
void parse_config(std::istream& is, RunConfig& cfg);
void load_config_file(const std::string& path, RunConfig& cfg);

/// Key reference with the built-in defaults, used by --help.
std::string config_reference();

}  // namespace fits::cli
