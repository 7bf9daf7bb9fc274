#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "wats/dataset.hpp"

namespace wats {

// The six simulated two-group designs. Q* pairs quadratic mean curves,
// NQ* pairs the non-quadratic (sin/cos-log) curves. The second group in each
// id determines the comparison: group 2 differs in average slope, group 3
// matches the average slope with a different shape, group 1 repeats itself.
enum class ScenarioId { Q1vQ2, Q1vQ3, Q1vQ1, NQ1vNQ2, NQ1vNQ3, NQ1vNQ1 };

ScenarioId scenario_from_string(const std::string& s);
std::string to_string(ScenarioId id);

class TrajectoryScenario {
 public:
  static TrajectoryScenario make(ScenarioId id);

  ScenarioId id() const { return id_; }
  bool quadratic() const;
  const TimeGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& random_effect_cov() const { return D_; }

  // Mean trajectory of group 0 or 1 at time t.
  double mean(int group, double t) const;

  // (mu(t_m) - mu(t_1)) / (t_m - t_1) of the group mean curve.
  double average_slope(int group) const;

 private:
  TrajectoryScenario(ScenarioId id, TimeGrid grid, Eigen::MatrixXd D);

  ScenarioId id_;
  TimeGrid grid_;
  Eigen::MatrixXd D_;
};

// Complete two-group dataset: per subject y(t) = mu(t) + g_q(t)' b + eps with
// b ~ MVN(0, D) through the quadratic monomial basis and iid N(0, sigma^2)
// noise. Bit-identical output for identical (scenario, sigma, n, seed).
LongitudinalDataset generate(const TrajectoryScenario& scenario, double sigma,
                             int n_per_group, std::uint64_t seed);

}  // namespace wats
