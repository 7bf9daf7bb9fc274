#include "wats/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "wats/csv_io.hpp"
#include "wats/rng.hpp"
#include "wats/stats.hpp"

namespace wats {

namespace {

constexpr std::uint64_t kGenStream = 1;
constexpr std::uint64_t kMissStream = 2;
constexpr std::uint64_t kMiStream = 3;

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  const int workers = std::min(n, threads > 0 ? threads : hw);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Domain comes from the data grid; a knotless B-spline request gets the
// midpoint knot.
BasisSpec resolve_basis(BasisSpec spec, const TimeGrid& grid) {
  spec.lo = grid.first();
  spec.hi = grid.last();
  if (spec.kind == BasisSpec::Kind::CubicBspline && spec.interior_knots.empty())
    spec.interior_knots = {0.5 * (spec.lo + spec.hi)};
  return spec;
}

struct EstimatorOutcome {
  bool attempted = false;
  bool failed = false;
  bool rejected = false;
};

struct RepOutcome {
  EstimatorOutcome cs, mc, slope, ancova;
};

const EstimatorOutcome& slot(const RepOutcome& rep, Estimator e) {
  switch (e) {
    case Estimator::CS: return rep.cs;
    case Estimator::MC: return rep.mc;
    case Estimator::Slope: return rep.slope;
    default: return rep.ancova;
  }
}

bool wants(const ScenarioSpec& spec, Estimator e) {
  return std::find(spec.estimators.begin(), spec.estimators.end(), e) != spec.estimators.end();
}

}  // namespace

std::string to_string(Handling h) { return h == Handling::CRA ? "CRA" : "MI"; }

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::CS: return "CS";
    case Estimator::MC: return "MC";
    case Estimator::Slope: return "SLOPE";
    default: return "ANCOVA";
  }
}

Handling handling_from_string(const std::string& s) {
  if (s == "CRA") return Handling::CRA;
  if (s == "MI") return Handling::MI;
  throw SpecError("unknown handling: " + s);
}

Estimator estimator_from_string(const std::string& s) {
  if (s == "CS") return Estimator::CS;
  if (s == "MC") return Estimator::MC;
  if (s == "SLOPE") return Estimator::Slope;
  if (s == "ANCOVA") return Estimator::Ancova;
  throw SpecError("unknown estimator: " + s);
}

double RejectionRow::se() const {
  if (completed <= 0) return 0.0;
  const double r = rate();
  return std::sqrt(r * (1.0 - r) / completed);
}

const RejectionRow* RejectionTable::find(const std::string& estimator) const {
  for (const RejectionRow& row : rows) {
    if (row.estimator == estimator) return &row;
  }
  return nullptr;
}

void ScenarioSpec::validate() const {
  if (reps < 1) throw SpecError("scenario spec: reps must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw SpecError("scenario spec: alpha must be in (0,1)");
  if (n_per_group < 2) throw SpecError("scenario spec: n_per_group must be >= 2");
  if (estimators.empty()) throw SpecError("scenario spec: no estimators requested");
  if (mi.M < 2) throw SpecError("scenario spec: imputation count must be >= 2");
  const TrajectoryScenario sc = TrajectoryScenario::make(scenario);
  missingness.validate(sc.grid());
  Basis check(resolve_basis(basis, sc.grid()));
  if (check.dim() > sc.grid().size())
    throw SpecError("scenario spec: basis dimension exceeds the number of design times");
}

RejectionTable run_cell(const ScenarioSpec& spec) {
  spec.validate();
  const TrajectoryScenario scenario = TrajectoryScenario::make(spec.scenario);
  const Basis basis(resolve_basis(spec.basis, scenario.grid()));
  const Eigen::VectorXd G = endpoint_slope_vector(basis, scenario.grid());
  LmmOptions lmm_opts;
  lmm_opts.random_dim = spec.random_dim;

  const bool has_missing = spec.missingness.mechanism != MissingnessSpec::Mechanism::None;
  const bool use_mi = has_missing && spec.handling == Handling::MI;

  std::vector<RepOutcome> outcomes(spec.reps);

  parallel_for(spec.reps, spec.threads, [&](int rep) {
    RepOutcome& out = outcomes[rep];
    const std::uint64_t rep_seed = derive_seed(spec.seed, {static_cast<std::uint64_t>(rep)});
    LongitudinalDataset observed = [&]() {
      LongitudinalDataset complete =
          generate(scenario, spec.sigma, spec.n_per_group, derive_seed(rep_seed, {kGenStream}));
      return apply_missingness(complete, spec.missingness, derive_seed(rep_seed, {kMissStream}));
    }();

    // MC always runs on the observed (possibly incomplete) data.
    if (wants(spec, Estimator::MC)) {
      out.mc.attempted = true;
      try {
        LmmFit f1 = fit_lmm_group(observed, 0, basis, lmm_opts);
        LmmFit f2 = fit_lmm_group(observed, 1, basis, lmm_opts);
        if (!f1.converged || !f2.converged) {
          out.mc.failed = true;
        } else {
          TestResult t = wald_mc_test(mean_change(f1, G), mean_change(f2, G));
          out.mc.rejected = t.p_two_sided < spec.alpha;
        }
      } catch (const Error&) {
        out.mc.failed = true;
      }
    }

    std::vector<LongitudinalDataset> imputed;
    bool imputation_failed = false;
    if (use_mi &&
        (wants(spec, Estimator::CS) || wants(spec, Estimator::Slope) ||
         wants(spec, Estimator::Ancova))) {
      try {
        imputed = impute_mvn(observed, spec.mi, derive_seed(rep_seed, {kMiStream}));
      } catch (const Error&) {
        imputation_failed = true;
      }
    }

    auto pooled_reject = [&](const std::function<void(const LongitudinalDataset&, double&,
                                                      double&)>& estimate) {
      std::vector<double> est(imputed.size()), var(imputed.size());
      for (std::size_t m = 0; m < imputed.size(); ++m) estimate(imputed[m], est[m], var[m]);
      return mi_test(rubin_pool(est, var)).p_two_sided < spec.alpha;
    };

    if (wants(spec, Estimator::CS)) {
      out.cs.attempted = true;
      try {
        if (use_mi) {
          if (imputation_failed) throw DataError("imputation failed");
          out.cs.rejected = pooled_reject([](const LongitudinalDataset& d, double& e, double& v) {
            SummaryEstimate a = change_score(d, 0), b = change_score(d, 1);
            e = a.value - b.value;
            v = a.variance + b.variance;
          });
        } else {
          TestResult t = two_sample_t(change_score(observed, 0), change_score(observed, 1));
          out.cs.rejected = t.p_two_sided < spec.alpha;
        }
      } catch (const Error&) {
        out.cs.failed = true;
      }
    }

    if (wants(spec, Estimator::Slope)) {
      out.slope.attempted = true;
      try {
        if (use_mi) {
          if (imputation_failed) throw DataError("imputation failed");
          out.slope.rejected =
              pooled_reject([&](const LongitudinalDataset& d, double& e, double& v) {
                SummaryEstimate a = straight_line_slope(d, 0, lmm_opts);
                SummaryEstimate b = straight_line_slope(d, 1, lmm_opts);
                e = a.value - b.value;
                v = a.variance + b.variance;
              });
        } else {
          TestResult t = wald_mc_test(straight_line_slope(observed, 0, lmm_opts),
                                      straight_line_slope(observed, 1, lmm_opts));
          out.slope.rejected = t.p_two_sided < spec.alpha;
        }
      } catch (const Error&) {
        out.slope.failed = true;
      }
    }

    if (wants(spec, Estimator::Ancova)) {
      out.ancova.attempted = true;
      try {
        if (use_mi) {
          if (imputation_failed) throw DataError("imputation failed");
          out.ancova.rejected =
              pooled_reject([](const LongitudinalDataset& d, double& e, double& v) {
                AncovaFit f = ancova(d);
                e = f.alpha2;
                v = f.se2;
              });
        } else {
          out.ancova.rejected = ancova_test(ancova(observed)).p_two_sided < spec.alpha;
        }
      } catch (const Error&) {
        out.ancova.failed = true;
      }
    }
  });

  RejectionTable table;
  for (Estimator e : spec.estimators) {
    RejectionRow row;
    row.scenario = to_string(spec.scenario);
    row.sigma = spec.sigma;
    row.mechanism = spec.missingness.describe();
    row.handling = to_string(spec.handling);
    row.estimator = to_string(e);
    if (!has_missing) {
      row.data_use = "complete";
    } else if (e == Estimator::MC) {
      row.data_use = "available";
    } else if (use_mi) {
      row.data_use = "imputed";
    } else {
      row.data_use = e == Estimator::Ancova ? "complete-records" : "available";
    }
    row.reps = spec.reps;
    for (const RepOutcome& out : outcomes) {
      const EstimatorOutcome& o = slot(out, e);
      if (!o.attempted) continue;
      if (o.failed) {
        ++row.failures;
      } else {
        ++row.completed;
        if (o.rejected) ++row.rejections;
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace wats
