// Acceptance suite. Each criterion prints one "criterion N: PASS|FAIL" line
// followed by indented diagnostics. Exit status is nonzero if any selected
// criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hdlda/classifiers.hpp"
#include "hdlda/estimators.hpp"
#include "hdlda/linalg.hpp"
#include "hdlda/lp.hpp"
#include "hdlda/normal.hpp"
#include "hdlda/population.hpp"
#include "hdlda/simharness.hpp"
#include "hdlda/theory.hpp"
#include "hdlda/tuning.hpp"
#include "oracles/quadrature.hpp"
#include "oracles/vertex_lp.hpp"

#ifdef HDLDA_HAVE_CLI
#include "commands.hpp"
#endif

using namespace hdlda;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { notes.push_back("     " + what); }
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

int workers() { return std::max(1u, std::thread::hardware_concurrency()); }

Mat gaussian(RngStream& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Mat random_spd(RngStream& rng, int p) {
  const Mat b = gaussian(rng, p, p);
  Mat a = b * b.transpose() / p + 0.5 * Mat::Identity(p, p);
  symmetrize_from_lower(a);
  return a;
}

const MethodAggregate& find_agg(const ExperimentResult& r, Method m) {
  for (const auto& a : r.aggregates)
    if (a.method == m) return a;
  throw std::runtime_error("method missing from aggregates");
}

void report_table(Outcome& out, const ExperimentResult& r) {
  for (const auto& a : r.aggregates) {
    out.note(std::string(method_name(a.method)) + " mean " + fmt(a.mean_error) + " sd " + fmt(a.sd_error) +
             " reps " + std::to_string(a.reps_used));
  }
}

// Model 1 at desk scale.
Outcome criterion1() {
  Outcome out;
  ExperimentConfig c;
  c.model_id = 1;
  c.p = 300;
  c.k = 3;
  c.n_train = 450;
  c.n_test = 450;
  c.reps = 10;
  c.master_seed = 20240601;
  const ExperimentResult r = run_experiment(c, workers());
  report_table(out, r);
  out.note("LPD lambda grid: full default 0.2..0.7 step 0.05");
  const struct {
    Method m;
    double target, tol;
  } rows[] = {{Method::Opt, 0.023, 0.010},
              {Method::Glda, 0.197, 0.040},
              {Method::Lpd, 0.027, 0.015},
              {Method::Slda2, 0.067, 0.035},
              {Method::Nsc, 0.052, 0.035}};
  for (const auto& row : rows) {
    const MethodAggregate& a = find_agg(r, row.m);
    out.check(a.reps_used == c.reps && std::abs(a.mean_error - row.target) <= row.tol,
              std::string(method_name(row.m)) + " " + fmt(a.mean_error) + " within " + fmt(row.target) + " +- " +
                  fmt(row.tol));
  }
  return out;
}

// Model 3 ordering.
Outcome criterion2() {
  Outcome out;
  ExperimentConfig c;
  c.model_id = 3;
  c.p = 300;
  c.k = 3;
  c.n_train = 450;
  c.n_test = 450;
  c.reps = 10;
  c.master_seed = 20240603;
  c.methods = {Method::Opt, Method::Lpd, Method::Slda2, Method::Glda, Method::Nsc};
  const ExperimentResult r = run_experiment(c, workers());
  report_table(out, r);
  for (std::size_t i = 0; i + 1 < c.methods.size(); ++i) {
    const MethodAggregate& lo = find_agg(r, c.methods[i]);
    const MethodAggregate& hi = find_agg(r, c.methods[i + 1]);
    const double se = std::sqrt(lo.sd_error * lo.sd_error / lo.reps_used + hi.sd_error * hi.sd_error / hi.reps_used);
    const double gap = hi.mean_error - lo.mean_error;
    out.check(gap > 2.0 * se, std::string(method_name(lo.method)) + " < " + std::string(method_name(hi.method)) +
                                  ": gap " + fmt(gap) + " vs 2 SE " + fmt(2.0 * se));
    // Diagnostic only: both methods share each replication's test sample.
    std::vector<double> diff;
    for (std::size_t row = 0; row + i + 1 < r.rows.size(); row += c.methods.size()) {
      const auto& a = r.rows[row + i];
      const auto& b = r.rows[row + i + 1];
      if (a.error && b.error) diff.push_back(*b.error - *a.error);
    }
    if (diff.size() >= 2) {
      double mean = 0.0, ss = 0.0;
      for (double d : diff) mean += d;
      mean /= static_cast<double>(diff.size());
      for (double d : diff) ss += (d - mean) * (d - mean);
      const double paired = std::sqrt(ss / static_cast<double>(diff.size() - 1) / static_cast<double>(diff.size()));
      out.note("paired-difference 2 SE " + fmt(2.0 * paired));
    }
  }
  return out;
}

// Two-class Bayes error against the closed form.
Outcome criterion3() {
  Outcome out;
  RngStream rng = rng_stream(303, 0);
  int agree = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const int p = 1 + static_cast<int>(rng.uniform_index(10));
    const Mat sigma = random_spd(rng, p);
    Mat means = gaussian(rng, 2, p) * (0.5 + rng.uniform());
    const PopulationModel model(means, sigma);
    const Vec delta = (means.row(1) - means.row(0)).transpose();
    const double maha = std::sqrt(delta.dot(sigma.ldlt().solve(delta)));
    const double exact = oracle::phi_cdf(-maha / 2.0);
    RngStream mc = rng_stream(303, 1 + inst);
    const ROptEstimate est = r_opt(model, 200000, mc);
    const double z = std::abs(est.estimate - exact) / std::max(est.std_error, 1e-300);
    worst = std::max(worst, z);
    const bool ok = std::abs(est.estimate - exact) <= 4.0 * est.std_error + 1e-12;
    agree += ok;
    if (!ok) out.note("instance " + std::to_string(inst) + " mc " + fmt(est.estimate, 6) + " exact " + fmt(exact, 6));
  }
  out.check(agree == 20, std::to_string(agree) + "/20 within 4 SE (worst |z| " + fmt(worst, 3) + ")");
  return out;
}

// Gap bound and the two-class identity on random instances.
Outcome criterion4() {
  Outcome out;
  RngStream rng = rng_stream(404, 0);
  int bound_ok = 0, bound_total = 0, k2_ok = 0, k2_total = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const int k = 2 + inst % 3;
    const int p = 2 + static_cast<int>(rng.uniform_index(19));
    const int n = (inst / 3) % 2 ? 400 : 100;
    const auto truth = std::make_shared<const PopulationModel>(gaussian(rng, k, p) * 0.7, random_spd(rng, p));
    std::vector<int> counts(static_cast<std::size_t>(k), n / k);
    for (int c = 0; c < n % k; ++c) ++counts[static_cast<std::size_t>(c)];
    RngStream data_rng = rng_stream(404, 1 + inst);
    const LabeledSample train = sample_dataset(*truth, counts, data_rng);
    for (Method m : {Method::Glda, Method::Slda2, Method::Lpd}) {
      FitParams params;
      if (is_tunable(m)) {
        RngStream fold_rng = data_rng;
        params = grid_search(m, train, Grid{}, 5, fold_rng).best_params;
      }
      const ClassifierModel model = fit(m, train, params);
      const PairGeometry geom = pair_geometry(*truth, model);
      BoundReport b = theorem1_bound(geom);
      RngStream mc = rng_stream(404, 1000 + 10 * inst + static_cast<int>(m));
      attach_mc_gap(b, *truth, model, 200000, mc);
      const bool ok = b.bound >= *b.gap_est - 3.0 * *b.gap_std_error;
      ++bound_total;
      bound_ok += ok;
      if (!ok) {
        out.note("instance " + std::to_string(inst) + " " + std::string(method_name(m)) + " bound " + fmt(b.bound) +
                 " gap " + fmt(*b.gap_est) + " se " + fmt(*b.gap_std_error));
      }
      if (k == 2) {
        const K2Check c2 = k2_equality_check(geom, *truth, model, 200000, mc);
        ++k2_total;
        k2_ok += c2.within_3se;
        if (!c2.within_3se) {
          out.note("instance " + std::to_string(inst) + " " + std::string(method_name(m)) + " identity residual " +
                   fmt(c2.residual) + " se " + fmt(c2.mc_gap_std_error));
        }
      }
    }
  }
  out.check(bound_ok == bound_total,
            "bound >= gap - 3 SE in " + std::to_string(bound_ok) + "/" + std::to_string(bound_total) + " fits");
  out.check(k2_ok == k2_total && k2_total > 0, "two-class identity within 3 SE in " + std::to_string(k2_ok) + "/" +
                                                   std::to_string(k2_total) + " fits");
  return out;
}

double small_int(RngStream& rng) { return static_cast<double>(rng.uniform_index(11)) - 5.0; }

// LP solver against exhaustive vertex enumeration and the soft-threshold form.
Outcome criterion5() {
  Outcome out;
  RngStream rng = rng_stream(505, 0);
  int match = 0, optimal = 0, unbounded = 0, infeasible = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int q = 1 + static_cast<int>(rng.uniform_index(6));
    const int m = 1 + static_cast<int>(rng.uniform_index(6));
    StandardLp lp{Vec(q), Mat(m, q), Vec(m)};
    for (int j = 0; j < q; ++j) lp.c(j) = small_int(rng);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < q; ++j) lp.g(i, j) = small_int(rng);
      lp.rhs(i) = small_int(rng);
    }
    const oracle::VertexResult want = oracle::vertex_enumeration(lp.c, lp.g, lp.rhs);
    const LpSolution got = solve_standard(lp);
    bool ok = false;
    switch (want.status) {
      case oracle::VertexStatus::Infeasible:
        ++infeasible;
        ok = got.status == LpStatus::Infeasible;
        break;
      case oracle::VertexStatus::Unbounded:
        ++unbounded;
        ok = got.status == LpStatus::Unbounded;
        break;
      case oracle::VertexStatus::Optimal:
        ++optimal;
        ok = got.status == LpStatus::Optimal && std::abs(got.objective_value - want.objective) <= 1e-8;
        if (got.status == LpStatus::Optimal) worst = std::max(worst, std::abs(got.objective_value - want.objective));
        break;
    }
    match += ok;
  }
  out.note(std::to_string(optimal) + " optimal, " + std::to_string(unbounded) + " unbounded, " +
           std::to_string(infeasible) + " infeasible; worst objective difference " + fmt(worst, 3));
  out.check(match == 200, "standard-form LPs matching vertex enumeration: " + std::to_string(match) + "/200");

  int soft_ok = 0;
  double soft_worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 1 + static_cast<int>(rng.uniform_index(10));
    const Vec d = gaussian(rng, p, 1) * 2.0;
    const double lambda = 0.05 + rng.uniform();
    const L1LinfResult r = solve_l1_linf(Mat::Identity(p, p), d, lambda);
    if (r.status != LpStatus::Optimal) continue;
    const double err = (r.beta - oracle::soft_threshold(d, lambda)).cwiseAbs().maxCoeff();
    soft_worst = std::max(soft_worst, err);
    soft_ok += err <= 1e-8;
  }
  out.check(soft_ok == 200, "l1/linf with A = I matching soft thresholding: " + std::to_string(soft_ok) +
                                "/200 (worst " + fmt(soft_worst, 3) + ")");
  return out;
}

// Linear algebra and normal probabilities.
Outcome criterion6() {
  Outcome out;
  RngStream rng = rng_stream(606, 0);
  double penrose = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + static_cast<int>(rng.uniform_index(30));
    const int rank = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p) + 1));
    Mat a = Mat::Zero(p, p);
    if (rank > 0) {
      const Mat b = gaussian(rng, p, rank);
      Vec ev(rank);
      for (int i = 0; i < rank; ++i) ev(i) = (i % 2 ? -1.0 : 1.0) * (0.5 + 2.0 * rng.uniform());
      a = b * ev.asDiagonal() * b.transpose();
      symmetrize_from_lower(a);
    }
    const Mat x = pinv(a);
    penrose = std::max({penrose, max_abs(a * x * a - a), max_abs(x * a * x - x),
                        max_abs((a * x).transpose() - a * x), max_abs((x * a).transpose() - x * a)});
  }
  out.check(penrose < 1e-8, "Penrose residual over 100 matrices " + fmt(penrose, 3));

  double chol = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + static_cast<int>(rng.uniform_index(30));
    const Mat a = random_spd(rng, p);
    const Mat l = cholesky(a);
    chol = std::max(chol, max_abs(l * l.transpose() - a));
  }
  out.check(chol < 1e-10, "Cholesky reconstruction residual " + fmt(chol, 3));

  double orthant = 0.0;
  for (int i = -9; i <= 9; ++i) {
    const double rho = i / 10.0;
    orthant = std::max(orthant, std::abs(bvn_lower_cdf(0.0, 0.0, rho) - (0.25 + std::asin(rho) / (2.0 * M_PI))));
  }
  out.check(orthant < 1e-7, "orthant identity error " + fmt(orthant, 3));

  const long draws = 10000000;
  int within = 0;
  double worst_z = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double h = -2.0 + 4.0 * rng.uniform();
    const double k = -2.0 + 4.0 * rng.uniform();
    const double rho = -0.95 + 1.9 * rng.uniform();
    const double s = std::sqrt(1.0 - rho * rho);
    RngStream mc = rng_stream(606, 1 + trial);
    long hits = 0;
    for (long i = 0; i < draws; ++i) {
      const double u = mc.normal();
      const double v = rho * u + s * mc.normal();
      hits += (u <= h) & (v <= k);
    }
    const double est = static_cast<double>(hits) / draws;
    const double se = std::sqrt(std::max(est * (1.0 - est), 1e-12) / draws);
    const double z = std::abs(est - bvn_lower_cdf(h, k, rho)) / se;
    worst_z = std::max(worst_z, z);
    within += z <= 3.0;
  }
  out.check(within == 50, "bvn_lower_cdf within 3 SE of 1e7-draw MC: " + std::to_string(within) + "/50 (worst |z| " +
                              fmt(worst_z, 3) + ")");
  return out;
}

// SLDA2 convergence trend on Model 3.
Outcome criterion7() {
  Outcome out;
  ConvergenceConfig c;
  c.method = Method::Slda2;
  c.model_id = 3;
  c.p = 100;
  c.k = 3;
  c.n_grid = {200, 400, 800, 1600};
  c.reps = 10;
  c.master_seed = 707;
  const ConvergenceTable t = convergence_experiment(c, workers());
  for (const auto& row : t.rows) {
    out.note("n " + std::to_string(row.n) + " mean ratio " + fmt(row.mean_ratio) + " sd " + fmt(row.sd_ratio) +
             " r_opt " + fmt(row.mean_r_opt) + " r_t " + fmt(row.mean_r_t) + " reps " + std::to_string(row.reps_used));
  }
  out.check(t.spearman <= -0.8, "Spearman correlation " + fmt(t.spearman) + " <= -0.8");
  out.check(!t.rows.empty() && t.rows.back().mean_ratio < 0.5,
            "mean ratio at n = 1600 is " + fmt(t.rows.back().mean_ratio) + " < 0.5");
  return out;
}

// Rate quantities on Model 1 against hand arithmetic.
Outcome criterion8() {
  Outcome out;
  const int p = 300, n = 450, k = 3;
  const PopulationModel model = make_sim_model(1, p, k);
  const RateReport r = sparsity_and_rates(model, n, k, 0.5, 0.5, 0.3, 2.0, 1.0);
  // Σ = ½I + ½11ᵀ, so Σ⁻¹ = 2(I - 11ᵀ/(1 + p)); mean differences sum to zero
  // and have 2·s₀ = 10 unit entries, giving δᵀΣ⁻¹δ = 2·10.
  const int s0 = 5;
  const double m_expected = 2.0 * (2 * s0);
  const double d_expected = 2 * s0;
  const double s_expected = p * std::sqrt(std::log(static_cast<double>(p)) / n) +
                            k / std::sqrt(m_expected) * std::sqrt(static_cast<double>(p) / n);
  out.check(std::abs(r.m_min - m_expected) <= 1e-6, "M_min " + fmt(r.m_min, 12) + " vs " + fmt(m_expected));
  out.check(std::abs(r.m_max - m_expected) <= 1e-6, "M_max " + fmt(r.m_max, 12) + " vs " + fmt(m_expected));
  out.check(std::abs(r.d_gp - d_expected) <= 1e-6, "D_gp " + fmt(r.d_gp, 12) + " vs " + fmt(d_expected));
  out.check(std::abs(r.s_n - s_expected) <= 1e-6, "s_n " + fmt(r.s_n, 12) + " vs " + fmt(s_expected, 12));
  return out;
}

// Worked two-class example on the prescribed grid.
Outcome criterion9() {
  Outcome out;
  double prev_ratio = INFINITY, prev_mix = INFINITY;
  bool ratio_down = true, mix_down = true;
  ExampleBounds last;
  for (int d = 2; d <= 20; d += 2) {
    last = example_bounds(d, 4.0 / std::sqrt(static_cast<double>(d)));
    out.note("d " + std::to_string(d) + " upper_ratio-1 " + fmt(last.upper_ratio_bound - 1.0, 3) + " mixing " +
             fmt(last.mixing_bound, 3));
    // once 1/Φ(d/2) rounds to exactly 1 it can only stay there
    const bool ratio_step = last.upper_ratio_bound < prev_ratio || (last.upper_ratio_bound == 1.0 && prev_ratio == 1.0);
    ratio_down = ratio_down && ratio_step && last.upper_ratio_bound >= 1.0;
    mix_down = mix_down && last.mixing_bound < prev_mix && last.mixing_bound > 0.0;
    prev_ratio = last.upper_ratio_bound;
    prev_mix = last.mixing_bound;
  }
  out.check(ratio_down, "upper_ratio_bound decreases toward 1");
  out.check(mix_down, "mixing_bound decreases toward 0");
  out.check(last.upper_ratio_bound - 1.0 < 1e-10, "upper_ratio_bound - 1 at d = 20 is " +
                                                      fmt(last.upper_ratio_bound - 1.0, 3) + " < 1e-10");
  const double limit = std::exp(-20.0) * 1.01;
  out.check(last.mixing_bound < limit,
            "mixing_bound at d = 20 is " + fmt(last.mixing_bound, 6) + " < e^-20 * 1.01 = " + fmt(limit, 6));
  return out;
}

#ifdef HDLDA_HAVE_CLI
std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hdlda");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream sink;
  return cli::run(static_cast<int>(argv.size()), argv.data(), sink, sink);
}

// CLI output is byte-identical across repeats and worker counts.
Outcome criterion10() {
  Outcome out;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "hdlda_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> invocations = {
      {"--model", "1", "--p", "300", "--k", "3", "--reps", "3", "--seed", "10"},
      {"--model", "3", "--p", "60", "--k", "4", "--reps", "4", "--seed", "11", "--n-train", "120", "--n-test",
       "80", "--methods", "glda,slda1,lpd,nsc", "--lpd-lambdas", "0.3,0.5"},
  };
  int case_id = 0;
  for (const auto& base : invocations) {
    std::vector<std::string> files;
    for (const auto& [tag, threads] : {std::pair{"a", 1}, std::pair{"b", 1}, std::pair{"c", 8}}) {
      const std::string file = (dir / ("case" + std::to_string(case_id) + tag + ".csv")).string();
      std::vector<std::string> args{"simulate"};
      args.insert(args.end(), base.begin(), base.end());
      args.insert(args.end(), {"--out", file, "--workers", std::to_string(threads)});
      const int code = cli(args);
      out.check(code == 0, "case " + std::to_string(case_id) + " run " + tag + " exit code " + std::to_string(code));
      files.push_back(file);
    }
    const std::string ref = slurp(files[0]);
    const std::string ref_agg = slurp(default_aggregate_path(files[0]));
    out.check(!ref.empty() && ref == slurp(files[1]) && ref_agg == slurp(default_aggregate_path(files[1])),
              "case " + std::to_string(case_id) + " repeated run byte-identical");
    out.check(ref == slurp(files[2]) && ref_agg == slurp(default_aggregate_path(files[2])),
              "case " + std::to_string(case_id) + " 1 vs 8 workers byte-identical");
    ++case_id;
  }
  fs::remove_all(dir);
  return out;
}
#else
Outcome criterion10() {
  Outcome out;
  out.check(false, "built without the command-line tool");
  return out;
}
#endif

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run (default all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
  if (only.empty()) {
    for (int i = 1; i <= 10; ++i) only.push_back(i);
  }
  bool all = true;
  for (int id : only) {
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(id - 1)]();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << '\n';
    for (const auto& line : o.notes) std::cout << "  " << line << '\n';
    std::cout.flush();
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
