#include <cstdio>
#include <fstream>

#include "wats/harness.hpp"

namespace wats {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

nlohmann::json test_to_json(const TestResult& t) {
  nlohmann::json j;
  j["statistic"] = t.statistic;
  j["p_two_sided"] = t.p_two_sided;
  j["p_one_sided"] = t.p_one_sided;
  j["method"] = t.method;
  if (std::isfinite(t.df)) j["df"] = t.df;
  j["degenerate"] = t.degenerate;
  return j;
}

nlohmann::json estimate_to_json(const SummaryEstimate& e) {
  return {{"value", e.value}, {"variance", e.variance}, {"n", e.n}, {"excluded", e.excluded}};
}

BasisSpec with_domain(BasisSpec spec, const TimeGrid& grid) {
  spec.lo = grid.first();
  spec.hi = grid.last();
  if (spec.kind == BasisSpec::Kind::CubicBspline && spec.interior_knots.empty())
    spec.interior_knots = {0.5 * (spec.lo + spec.hi)};
  return spec;
}

}  // namespace

void write_weight_curve_csv(const WeightModel& weight, const std::filesystem::path& path,
                            int n_points) {
  std::ofstream out(path);
  if (!out) throw DataError("write_weight_curve_csv: cannot open " + path.string());
  out << "t,w\n";
  const double lo = weight.u_basis.lo(), hi = weight.u_basis.hi();
  for (int i = 0; i < n_points; ++i) {
    const double t = lo + (hi - lo) * i / (n_points - 1);
    out << fmt(t) << ',' << fmt(weight.weight(t)) << '\n';
  }
}

nlohmann::json analyze(const LongitudinalDataset& data, const AnalysisOptions& options,
                       const std::optional<std::filesystem::path>& out_dir) {
  if (data.n_groups() != 2)
    throw DataError("analyze: group comparison requires exactly two groups, got " +
                    std::to_string(data.n_groups()));

  const Basis basis(with_domain(options.basis, data.grid()));
  LmmOptions lmm_opts;
  lmm_opts.random_dim = options.random_dim;
  const Direction dir = options.direction;

  std::vector<LmmFit> fits = fit_lmm(data, basis, lmm_opts);
  const Eigen::VectorXd G = endpoint_slope_vector(basis, data.grid());

  nlohmann::json report;
  report["groups"] = data.group_labels();
  report["basis"] = basis.spec().describe();
  for (const LmmFit& f : fits) {
    nlohmann::json jf;
    jf["beta"] = std::vector<double>(f.beta.data(), f.beta.data() + f.beta.size());
    jf["sigma2"] = f.sigma2;
    jf["loglik"] = f.loglik;
    jf["converged"] = f.converged;
    jf["n_subjects"] = f.n_subjects();
    jf["n_obs"] = f.n_obs;
    report["fits"].push_back(std::move(jf));
  }

  SummaryEstimate cs1 = change_score(data, 0), cs2 = change_score(data, 1);
  SummaryEstimate mc1 = mean_change(fits[0], G), mc2 = mean_change(fits[1], G);
  SummaryEstimate sl1 = straight_line_slope(data, 0, lmm_opts);
  SummaryEstimate sl2 = straight_line_slope(data, 1, lmm_opts);
  AncovaFit anc = ancova(data);

  report["estimates"]["cs"] = {estimate_to_json(cs1), estimate_to_json(cs2)};
  report["estimates"]["mc"] = {estimate_to_json(mc1), estimate_to_json(mc2)};
  report["estimates"]["slope"] = {estimate_to_json(sl1), estimate_to_json(sl2)};
  report["estimates"]["ancova"] = {{"alpha0", anc.alpha0},
                                   {"alpha1", anc.alpha1},
                                   {"alpha2", anc.alpha2},
                                   {"se2", anc.se2},
                                   {"df", anc.df},
                                   {"n", anc.n},
                                   {"baseline_dropped", anc.baseline_dropped}};

  report["tests"]["cs"] = test_to_json(two_sample_t(cs1, cs2, dir));
  report["tests"]["mc"] = test_to_json(wald_mc_test(mc1, mc2, dir));
  report["tests"]["slope"] = test_to_json(wald_mc_test(sl1, sl2, dir));
  report["tests"]["ancova"] = test_to_json(ancova_test(anc, dir));
  if (options.lrt) report["tests"]["lrt"] = test_to_json(lrt_groups(data, basis, lmm_opts));

  if (options.wats) {
    const BasisSpec u_spec = with_domain(options.weight_basis, data.grid());
    WeightModel weight = optimize_weight(fits[0], fits[1], basis, u_spec, options.seed);
    nlohmann::json jw;
    jw["objective"] = weight.objective;
    jw["v"] = std::vector<double>(weight.v.data(), weight.v.data() + weight.v.size());
    jw["norm_const"] = weight.norm_const;
    jw["fallback_uniform"] = weight.fallback_uniform;
    jw["group_values"] = {wats_value(weight, basis, fits[0].beta),
                          wats_value(weight, basis, fits[1].beta)};
    report["wats"] = std::move(jw);

    if (out_dir) {
      std::filesystem::create_directories(*out_dir);
      write_weight_curve_csv(weight, *out_dir / "weight_curve.csv");

      // per-subject CS / MC / weighted-MC, the density-plot data
      std::ofstream out(*out_dir / "summaries.csv");
      out << "subject_id,group,cs,mc,wmc\n";
      const Eigen::VectorXd Sw = weight_slope_vector(weight, basis);
      for (int k = 0; k < 2; ++k) {
        const LmmFit& fit = fits[k];
        for (int i = 0; i < fit.n_subjects(); ++i) {
          const SubjectRecord& s = data.subjects()[fit.subject_index[i]];
          Eigen::VectorXd coef = individual_coefficients(fit, fit.blups[i]);
          const double cs = s.n_obs() >= 2 ? (s.values.back() - s.values.front()) /
                                                 (s.times.back() - s.times.front())
                                           : std::numeric_limits<double>::quiet_NaN();
          out << s.id << ',' << data.group_labels()[k] << ',' << fmt(cs) << ','
              << fmt(G.dot(coef)) << ',' << fmt(Sw.dot(coef)) << '\n';
        }
      }
    }
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ofstream rf(*out_dir / "report.json");
    rf << report.dump(2) << '\n';
  }
  return report;
}

}  // namespace wats
