#pragma once

#include "ppfa/em_trainer.hpp"
#include "ppfa/model_select.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ppfa::app {

/// Additive step on `channels` over rows [start, end), in units of each
/// channel's standard deviation in the clean simulated series.
struct FaultSpec
{
  Index start = 0;
  Index end = 0;
  std::vector<Index> channels;
  double magnitude = 0.0;
};

struct SimulateSpec
{
  Index n = 1000;
  Index m = 6;
  Index r = 2;
  Index s = 2;
  double sigma2 = 0.25;
  double max_root = 0.9;
  std::uint64_t seed = 0;
  std::optional<Eigen::MatrixXd> beta; // s × r; random stable when absent
  std::optional<FaultSpec> fault;

  void validate() const;
};

/// Settings for every command, read from an ini-style file:
///
///   [em]       max_iterations tol r s seed update_beta
///   [ga]       population_size generations crossover_rate mutation_rate
///              mutation_scale lambda elitism_count tournament_size seed
///              box_lo box_hi
///   [monitor]  alpha
///   [select]   r_candidates s_candidates magnitudes onset_fraction
///              split_fraction seed
///   [simulate] n m r s sigma2 max_root seed beta fault_start fault_end
///              fault_channels fault_magnitude
///
/// Lists are comma separated. Unknown keys and malformed values are config
/// errors naming the key.
struct RunConfig
{
  EmConfig em;
  double alpha = 0.99;
  SelectionGrid grid;
  SimulateSpec simulate;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

} // namespace ppfa::app
