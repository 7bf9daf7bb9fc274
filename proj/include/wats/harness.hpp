#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wats/dataset.hpp"
#include "wats/inference.hpp"
#include "wats/missing.hpp"
#include "wats/simgen.hpp"
#include "wats/weight.hpp"

namespace wats {

enum class Handling { CRA, MI };
enum class Estimator { CS, MC, Slope, Ancova };

std::string to_string(Handling h);
std::string to_string(Estimator e);
Handling handling_from_string(const std::string& s);
Estimator estimator_from_string(const std::string& s);

// One simulation cell: scenario x noise x missingness x handling.
struct ScenarioSpec {
  ScenarioId scenario = ScenarioId::Q1vQ2;
  double sigma = 1.0;
  int n_per_group = 100;
  MissingnessSpec missingness;
  Handling handling = Handling::CRA;
  std::vector<Estimator> estimators = {Estimator::CS, Estimator::MC, Estimator::Slope,
                                       Estimator::Ancova};
  int reps = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  BasisSpec basis = BasisSpec::polynomial(2, 0.0, 7.0);
  int random_dim = -1;
  ImputationConfig mi;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct RejectionRow {
  std::string scenario;
  double sigma = 0.0;
  std::string mechanism;
  std::string handling;   // requested cell handling
  std::string estimator;
  std::string data_use;   // what the estimator consumed: complete | available | CRA | MI
  int reps = 0;
  int completed = 0;
  int rejections = 0;
  int failures = 0;

  double rate() const { return completed > 0 ? double(rejections) / completed : 0.0; }
  double se() const;
};

struct RejectionTable {
  std::vector<RejectionRow> rows;

  const RejectionRow* find(const std::string& estimator) const;
};

// Generate -> apply missingness -> handle -> estimate -> test -> count
// rejections at alpha, per estimator. Fit failures are excluded from the
// denominator and reported.
RejectionTable run_cell(const ScenarioSpec& spec);

struct SweepConfig {
  std::vector<ScenarioId> scenarios;
  std::vector<double> sigmas;
  std::vector<MissingnessSpec> missingness;
  Handling handling = Handling::CRA;
  int n_per_group = 100;
  int reps = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  BasisSpec basis = BasisSpec::polynomial(2, 0.0, 7.0);
  BasisSpec weight_basis = BasisSpec::cubic_bspline({7.0 / 3.0, 14.0 / 3.0}, 0.0, 7.0);
  int random_dim = -1;
  std::vector<Estimator> estimators = {Estimator::CS, Estimator::MC, Estimator::Slope,
                                       Estimator::Ancova};
  ImputationConfig mi;
  int threads = 0;

  static SweepConfig from_json(const nlohmann::json& j);
  static SweepConfig from_json_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// Runs every cell of the sweep (validating all of them first) and writes
// results.csv, power_panels.csv and manifest.json under out_dir.
RejectionTable run_sweep(const SweepConfig& config, const std::filesystem::path& out_dir);

void write_results_csv(const RejectionTable& table, const std::filesystem::path& path);
void write_power_panels_csv(const RejectionTable& table, const std::filesystem::path& path);

struct AnalysisOptions {
  BasisSpec basis = BasisSpec::polynomial(2, 0.0, 7.0);
  int random_dim = -1;
  Direction direction = Direction::Lower;
  bool lrt = true;
  bool wats = false;
  BasisSpec weight_basis = BasisSpec::cubic_bspline({7.0 / 3.0, 14.0 / 3.0}, 0.0, 7.0);
  std::uint64_t seed = 1;
};

// Two-group dataset pipeline: per-group fits, the four summary estimates,
// one- and two-sided tests, LRT, and optionally the estimated WATS weight with
// per-subject summary values. Writes weight_curve.csv and summaries.csv under
// out_dir when WATS is requested and out_dir is given.
nlohmann::json analyze(const LongitudinalDataset& data, const AnalysisOptions& options,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Sampled (t, w(t)) curve used for plotting.
void write_weight_curve_csv(const WeightModel& weight, const std::filesystem::path& path,
                            int n_points = 201);

}  // namespace wats
