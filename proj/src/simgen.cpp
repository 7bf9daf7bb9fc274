#include "wats/simgen.hpp"

#include <cmath>

#include "wats/rng.hpp"

namespace wats {

namespace {

// Quadratic fixed effects; group indices 1..3, group 4 duplicates group 1.
Eigen::Vector3d quad_beta(int g) {
  switch (g) {
    case 1: return {20.0, -2.0, 0.2};
    case 2: return {20.0, 1.2, -0.3};
    default: return {20.0, -4.8, 0.6};
  }
}

// Non-quadratic mean curves. Groups 2 and 3 share the intercept that matches
// group 1's baseline value (randomized designs have equal baseline means); the
// slope summaries are unaffected by the vertical shift.
double nq_mean(int g, double t) {
  switch (g) {
    case 1: return 15.0 - 2.0 * std::sin(t - 1.0) * std::log(t + 0.5);
    case 2: return 15.22 + 2.0 * std::cos(t) * std::log(t + 0.5);
    default: return 15.22 - 0.3 * t + 2.0 * std::cos(t) * std::log(t + 0.5);
  }
}

struct ScenarioShape {
  bool quadratic;
  int group_a;
  int group_b;
};

ScenarioShape shape_of(ScenarioId id) {
  switch (id) {
    case ScenarioId::Q1vQ2: return {true, 1, 2};
    case ScenarioId::Q1vQ3: return {true, 1, 3};
    case ScenarioId::Q1vQ1: return {true, 1, 1};
    case ScenarioId::NQ1vNQ2: return {false, 1, 2};
    case ScenarioId::NQ1vNQ3: return {false, 1, 3};
    default: return {false, 1, 1};
  }
}

}  // namespace

ScenarioId scenario_from_string(const std::string& s) {
  if (s == "Q1vQ2") return ScenarioId::Q1vQ2;
  if (s == "Q1vQ3") return ScenarioId::Q1vQ3;
  if (s == "Q1vQ1") return ScenarioId::Q1vQ1;
  if (s == "NQ1vNQ2") return ScenarioId::NQ1vNQ2;
  if (s == "NQ1vNQ3") return ScenarioId::NQ1vNQ3;
  if (s == "NQ1vNQ1") return ScenarioId::NQ1vNQ1;
  throw SpecError("unknown scenario id: " + s);
}

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::Q1vQ2: return "Q1vQ2";
    case ScenarioId::Q1vQ3: return "Q1vQ3";
    case ScenarioId::Q1vQ1: return "Q1vQ1";
    case ScenarioId::NQ1vNQ2: return "NQ1vNQ2";
    case ScenarioId::NQ1vNQ3: return "NQ1vNQ3";
    default: return "NQ1vNQ1";
  }
}

TrajectoryScenario::TrajectoryScenario(ScenarioId id, TimeGrid grid, Eigen::MatrixXd D)
    : id_(id), grid_(std::move(grid)), D_(std::move(D)) {}

TrajectoryScenario TrajectoryScenario::make(ScenarioId id) {
  Eigen::MatrixXd D(3, 3);
  D << 8.0, 3.0, -0.4,
       3.0, 1.5, -0.16,
      -0.4, -0.16, 0.03;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw SpecError("TrajectoryScenario: random-effect covariance is not PSD");
  return TrajectoryScenario(id, TimeGrid({0, 1, 2, 3, 4, 5, 6, 7}), std::move(D));
}

bool TrajectoryScenario::quadratic() const { return shape_of(id_).quadratic; }

double TrajectoryScenario::mean(int group, double t) const {
  const ScenarioShape s = shape_of(id_);
  const int g = group == 0 ? s.group_a : s.group_b;
  if (s.quadratic) {
    const Eigen::Vector3d beta = quad_beta(g);
    return beta[0] + t * (beta[1] + t * beta[2]);
  }
  return nq_mean(g, t);
}

double TrajectoryScenario::average_slope(int group) const {
  return (mean(group, grid_.last()) - mean(group, grid_.first())) /
         (grid_.last() - grid_.first());
}

LongitudinalDataset generate(const TrajectoryScenario& scenario, double sigma, int n_per_group,
                             std::uint64_t seed) {
  if (n_per_group < 1) throw ContractError("generate: n_per_group must be >= 1");
  if (!(sigma >= 0.0)) throw ContractError("generate: sigma must be nonnegative");

  const TimeGrid& grid = scenario.grid();
  const int m = grid.size();
  const Eigen::MatrixXd sqrt_d = psd_sqrt(scenario.random_effect_cov());

  // random effects act through the quadratic monomials for every scenario family
  Eigen::MatrixXd Xq(m, 3);
  for (int j = 0; j < m; ++j) {
    const double t = grid[j];
    Xq.row(j) << 1.0, t, t * t;
  }

  std::vector<SubjectRecord> subjects;
  subjects.reserve(2 * n_per_group);
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < n_per_group; ++i) {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i)}));
      Eigen::Vector3d b = sqrt_d * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      SubjectRecord rec;
      rec.id = std::to_string(k + 1) + "-" + std::to_string(i + 1);
      rec.group = k;
      rec.times = grid.points();
      rec.values.resize(m);
      for (int j = 0; j < m; ++j)
        rec.values[j] = scenario.mean(k, grid[j]) + Xq.row(j).dot(b) + sigma * rng.normal();
      subjects.push_back(std::move(rec));
    }
  }
  return LongitudinalDataset(grid, {"1", "2"}, std::move(subjects));
}

}  // namespace wats
