#include "commands.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dataset_csv.hpp"
#include "hdlda/classifiers.hpp"
#include "hdlda/error.hpp"
#include "hdlda/estimators.hpp"
#include "hdlda/population.hpp"
#include "hdlda/simharness.hpp"
#include "hdlda/theory.hpp"
#include "hdlda/tuning.hpp"

namespace hdlda::cli {

namespace {

using nlohmann::json;

// Bad flag combinations detected after parsing; exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

std::vector<int> balanced_counts(int n, int k) {
  std::vector<int> counts(static_cast<std::size_t>(k), n / k);
  for (int c = 0; c < n % k; ++c) ++counts[static_cast<std::size_t>(c)];
  return counts;
}

Method method_flag(const std::string& name) {
  try {
    return parse_method(name);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void check_sim_model(int model_id, int p, int k) {
  if (model_id < 1 || model_id > 3) throw UsageError("--model must be 1, 2 or 3");
  if (k < 2) throw UsageError("need K ≥ 2 classes");
  if (model_id == 2 && p <= 100) throw UsageError("p must exceed 100 for model 2");
  const int s0 = sim_model_block(model_id);
  if (k * s0 > p) {
    throw UsageError("p must be at least " + std::to_string(k * s0) + " for model " +
                     std::to_string(model_id) + " with K = " + std::to_string(k));
  }
}

// Population from --population PATH or the --model/--p/--k triplet.
struct PopulationFlags {
  std::string path;
  int model = 0;
  int p = 0;
  int k = 0;

  void add(CLI::App& cmd) {
    cmd.add_option("--population", path, "population JSON");
    cmd.add_option("--model", model, "simulation design 1, 2 or 3");
    cmd.add_option("--p", p, "dimension for --model");
    cmd.add_option("--k", k, "number of classes for --model");
  }

  std::shared_ptr<const PopulationModel> load() const {
    if (!path.empty() && model != 0) throw UsageError("give either --population or --model, not both");
    if (!path.empty()) return std::make_shared<const PopulationModel>(load_population(path));
    if (model == 0) throw UsageError("need --population PATH or --model/--p/--k");
    check_sim_model(model, p, k);
    return std::make_shared<const PopulationModel>(make_sim_model(model, p, k));
  }
};

void print_aggregates(const ExperimentResult& result, std::ostream& out) {
  out << std::left << std::setw(8) << "method" << std::setw(12) << "mean_error" << std::setw(12)
      << "sd_error" << std::setw(12) << "mean_sec" << "reps_used\n";
  for (const MethodAggregate& a : result.aggregates) {
    std::ostringstream mean, sd, sec;
    mean << std::fixed << std::setprecision(4) << a.mean_error;
    sd << std::fixed << std::setprecision(4) << a.sd_error << (a.sd_defined ? "" : "*");
    if (a.mean_seconds) sec << std::fixed << std::setprecision(3) << *a.mean_seconds;
    else sec << "-";
    out << std::setw(8) << method_name(a.method) << std::setw(12)
        << (a.reps_used > 0 ? mean.str() : "-") << std::setw(12) << sd.str() << std::setw(12)
        << sec.str() << a.reps_used << '\n';
  }
  out << std::right;
}

// ---------------------------------------------------------------------------

struct SimulateCmd {
  std::string config_path;
  int model = 1, p = 300, k = 3, reps = 10, n_train = 450, n_test = 450, cv_folds = 5;
  std::uint64_t seed = 1;
  std::vector<std::string> methods;
  std::vector<double> lpd_lambdas;
  std::string out_path, aggregate_path;
  int workers = 0;
  bool timing = false;
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> overrides;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("simulate", "run the simulation study");
    cmd->add_option("--config", config_path, "experiment config JSON; flags override it");
    auto bind = [&](CLI::Option* opt, std::function<void(ExperimentConfig&)> apply) {
      overrides.emplace_back(opt, std::move(apply));
    };
    bind(cmd->add_option("--model", model, "simulation design 1, 2 or 3"),
         [this](ExperimentConfig& c) { c.model_id = model; });
    bind(cmd->add_option("--p", p, "dimension"), [this](ExperimentConfig& c) { c.p = p; });
    bind(cmd->add_option("--k", k, "number of classes"), [this](ExperimentConfig& c) { c.k = k; });
    bind(cmd->add_option("--reps", reps, "replications"), [this](ExperimentConfig& c) { c.reps = reps; });
    bind(cmd->add_option("--seed", seed, "master seed"),
         [this](ExperimentConfig& c) { c.master_seed = seed; });
    bind(cmd->add_option("--methods", methods, "comma-separated subset of opt,glda,slda1,slda2,lpd,nsc")
             ->delimiter(','),
         [this](ExperimentConfig& c) {
           c.methods.clear();
           for (const auto& m : methods) c.methods.push_back(method_flag(m));
         });
    bind(cmd->add_option("--n-train", n_train, "training size (multiple of K)"),
         [this](ExperimentConfig& c) { c.n_train = n_train; });
    bind(cmd->add_option("--n-test", n_test, "test size (multiple of K)"),
         [this](ExperimentConfig& c) { c.n_test = n_test; });
    bind(cmd->add_option("--cv-folds", cv_folds, "cross-validation folds"),
         [this](ExperimentConfig& c) { c.cv_folds = cv_folds; });
    bind(cmd->add_option("--lpd-lambdas", lpd_lambdas, "LPD tuning grid")->delimiter(','),
         [this](ExperimentConfig& c) { c.grid.lambdas = lpd_lambdas; });
    cmd->add_option("--out", out_path, "per-replication CSV")->required();
    cmd->add_option("--aggregate-out", aggregate_path, "aggregate CSV (default <out>_aggregate.csv)");
    cmd->add_option("--workers", workers, "worker threads (default: logical cores)");
    cmd->add_flag("--timing", timing, "record wall-clock seconds per method");
    self = cmd;
  }

  int run(std::ostream& out, std::ostream& err) {
    ExperimentConfig config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error(ErrorCode::IoError, "cannot open " + config_path);
      json doc;
      try {
        in >> doc;
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, config_path + ": " + e.what());
      }
      config = config_from_json(doc);
    } else {
      // Desk-scale profile unless told otherwise.
      config.reps = reps;
    }
    for (auto& [opt, apply] : overrides) {
      if (opt->count() > 0) apply(config);
    }
    config.timing = timing;
    check_sim_model(config.model_id, config.p, config.k);
    try {
      config.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (workers < 0) throw UsageError("--workers must be positive");
    const int n_workers = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    const ExperimentResult result = run_experiment(config, n_workers);
    for (const MethodRow& r : result.rows) {
      if (!r.error) err << "rep " << r.rep << " " << method_name(r.method) << " failed: " << r.failure << '\n';
    }
    write_results_csv(result, out_path, aggregate_path.empty() ? default_aggregate_path(out_path) : aggregate_path);
    print_aggregates(result, out);
    return 0;
  }

  CLI::App* self = nullptr;
};

struct FitCmd {
  std::string method, train_path, model_out;
  int cv_folds = 5;
  std::uint64_t seed = 1;
  std::vector<double> lpd_lambdas;
  CLI::App* self = nullptr;

  void add(CLI::App& app) {
    self = app.add_subcommand("fit", "tune by cross-validation and fit a classifier on a CSV");
    self->add_option("--method", method, "glda, slda1, slda2, lpd or nsc")->required();
    self->add_option("--train", train_path, "training CSV with a class column")->required();
    self->add_option("--cv-folds", cv_folds, "cross-validation folds");
    self->add_option("--seed", seed, "seed for the fold split");
    self->add_option("--lpd-lambdas", lpd_lambdas, "LPD tuning grid")->delimiter(',');
    self->add_option("--model-out", model_out, "model JSON to write")->required();
  }

  int run(std::ostream& out, std::ostream&) {
    const Method m = method_flag(method);
    if (m == Method::Opt) {
      throw UsageError("the optimal rule needs a population specification, not data; use oracle or bound");
    }
    if (cv_folds < 2) throw UsageError("--cv-folds must be at least 2");
    const DatasetCsv data = read_dataset_csv(train_path, true);
    json report;
    FitParams params;
    if (is_tunable(m)) {
      Grid grid;
      grid.lambdas = lpd_lambdas;
      RngStream rng = rng_stream(seed, 0);
      const CvResult cv = grid_search(m, data.sample, grid, cv_folds, rng);
      params = cv.best_params;
      report["cv_error"] = *cv.cv_error_table[cv.best_index];
      report["combos"] = cv.combos.size();
    }
    const ClassifierModel model = fit(m, data.sample, params);
    save_model(model, model_out);
    report["method"] = std::string(method_name(m));
    report["k"] = model.k;
    report["p"] = model.p;
    report["n"] = data.sample.n();
    report["params"] = params_to_json(m, model.params);
    report["training_error"] = evaluate(model, data.sample).error_rate;
    out << report.dump(2) << '\n';
    return 0;
  }
};

struct PredictCmd {
  std::string model_path, data_path, out_path;
  CLI::App* self = nullptr;

  void add(CLI::App& app) {
    self = app.add_subcommand("predict", "apply a saved model to a CSV");
    self->add_option("--model", model_path, "model JSON")->required();
    self->add_option("--data", data_path, "feature CSV; a class column is optional")->required();
    self->add_option("--out", out_path, "output CSV with a predicted column")->required();
  }

  int run(std::ostream& out, std::ostream&) {
    const ClassifierModel model = load_model(model_path);
    const DatasetCsv data = read_dataset_csv(data_path, false);
    const std::vector<int> predicted = predict_all(model, data.sample.x);
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw Error(ErrorCode::IoError, "cannot open " + out_path + " for writing");
    file << "predicted\n";
    for (int c : predicted) file << c << '\n';
    if (!file) throw Error(ErrorCode::IoError, "failed writing " + out_path);

    json report;
    report["n"] = data.sample.n();
    if (data.has_labels) {
      long wrong = 0;
      for (std::size_t r = 0; r < predicted.size(); ++r) {
        if (predicted[r] != data.sample.labels[r]) ++wrong;
      }
      report["error_rate"] = static_cast<double>(wrong) / data.sample.n();
    }
    out << report.dump(2) << '\n';
    return 0;
  }
};

struct OracleCmd {
  PopulationFlags pop;
  int mc = 200000;
  std::uint64_t seed = 1;
  int n = 0;
  double h = 0.5, g = 0.5, r = 2.0, alpha = 0.3, m2 = 1.0;
  CLI::App* self = nullptr;

  void add(CLI::App& app) {
    self = app.add_subcommand("oracle", "population diagnostics, Bayes error and rate quantities");
    self->set_help_flag("--help", "print this help message and exit");  // -h is taken by --h
    pop.add(*self);
    self->add_option("--mc", mc, "Monte Carlo samples for the Bayes error");
    self->add_option("--seed", seed, "seed");
    self->add_option("--n", n, "sample size for the rate quantities (omit to skip them)");
    self->add_option("--h", h, "covariance sparsity exponent");
    self->add_option("--g", g, "mean-difference sparsity exponent");
    self->add_option("--r", r, "exponent r");
    self->add_option("--alpha", alpha, "mean threshold exponent");
    self->add_option("--m2", m2, "mean threshold constant");
  }

  int run(std::ostream& out, std::ostream&) {
    if (mc < 1) throw UsageError("--mc must be positive");
    const auto truth = pop.load();
    const ConditionReport cond = check_conditions(*truth);
    const MahalanobisSummary maha = mahalanobis_matrix(*truth);
    RngStream rng = rng_stream(seed, 0);
    const ROptEstimate ropt = r_opt(*truth, mc, rng);

    json report;
    report["k"] = truth->k();
    report["p"] = truth->p();
    report["conditions"] = {{"lambda_min", cond.lambda_min}, {"lambda_max", cond.lambda_max},
                            {"c0_witness", cond.c0_witness}, {"m_min", cond.m_min},
                            {"m_max", cond.m_max},           {"c1_witness", cond.c1_witness},
                            {"k_le_p_plus_1", cond.k_le_p_plus_1}};
    report["mahalanobis"] = {{"squared", matrix_json(maha.squared)}, {"m_min", maha.m_min}, {"m_max", maha.m_max}};
    json ro = {{"estimate", ropt.estimate}, {"std_error", ropt.std_error}, {"samples", ropt.samples}};
    if (ropt.closed_form) {
      ro["closed_form"] = *ropt.closed_form;
      ro["closed_form_agrees"] = ropt.closed_form_agrees;
    }
    report["r_opt"] = ro;
    if (n > 0) {
      const RateReport rr = sparsity_and_rates(*truth, n, truth->k(), h, g, alpha, r, m2);
      report["rates"] = {{"n", n},
                         {"h", rr.h},
                         {"g", rr.g},
                         {"alpha", rr.alpha},
                         {"r", rr.r},
                         {"m2", rr.m2},
                         {"c_hp", rr.c_hp},
                         {"d_gp", rr.d_gp},
                         {"q_n", rr.q_n},
                         {"a_n", rr.a_n},
                         {"m_min", rr.m_min},
                         {"m_max", rr.m_max},
                         {"s_n", rr.s_n},
                         {"d_n", rr.d_n_rate},
                         {"b_n", rr.b_n},
                         {"r_n", rr.r_n},
                         {"l1_beta_max", rr.l1_beta_max},
                         {"lambda_n_unit", rr.lambda_n_unit}};
    }
    out << report.dump(2) << '\n';
    return 0;
  }
};

struct BoundCmd {
  PopulationFlags pop;
  std::string method;
  int n_train = 0;
  int mc = 200000;
  int cv_folds = 5;
  std::uint64_t seed = 1;
  bool example = false;
  double d = 0.0, eps = 0.0;
  CLI::App* self = nullptr;

  void add(CLI::App& app) {
    self = app.add_subcommand("bound", "misclassification-gap bound for one fitted rule");
    pop.add(*self);
    self->add_option("--method", method, "opt, glda, slda1, slda2, lpd or nsc");
    self->add_option("--n-train", n_train, "training sample size");
    self->add_option("--seed", seed, "seed");
    self->add_option("--mc", mc, "Monte Carlo samples for the gap");
    self->add_option("--cv-folds", cv_folds, "cross-validation folds for tunable methods");
    self->add_flag("--example", example, "evaluate the two-class worked example instead");
    self->add_option("--d", d, "example: Mahalanobis distance");
    self->add_option("--eps", eps, "example: perturbation size");
  }

  int run(std::ostream& out, std::ostream&) {
    if (example) {
      if (!(d > 0.0) || !(eps > 0.0)) throw UsageError("--example needs positive --d and --eps");
      const ExampleBounds eb = example_bounds(d, eps);
      const json report = {{"d", d},
                           {"eps", eps},
                           {"upper_ratio_bound", eb.upper_ratio_bound},
                           {"mixing_bound", eb.mixing_bound},
                           {"strip_prob", eb.strip_prob}};
      out << report.dump(2) << '\n';
      return 0;
    }
    if (method.empty()) throw UsageError("--method is required unless --example is given");
    const Method m = method_flag(method);
    if (mc < 1) throw UsageError("--mc must be positive");
    const auto truth = pop.load();
    if (m != Method::Opt && n_train < truth->k()) throw UsageError("--n-train must be at least K");

    RngStream rng = rng_stream(seed, 0);
    ClassifierModel model;
    if (m == Method::Opt) {
      model = fit_optimal(truth);
    } else {
      const LabeledSample train = sample_dataset(*truth, balanced_counts(n_train, truth->k()), rng);
      FitParams params;
      if (is_tunable(m)) params = grid_search(m, train, Grid{}, cv_folds, rng).best_params;
      model = fit(m, train, params);
    }
    const PairGeometry geom = pair_geometry(*truth, model);
    BoundReport br = theorem1_bound(geom);
    attach_mc_gap(br, *truth, model, mc, rng);

    json report;
    report["method"] = std::string(method_name(m));
    report["k"] = truth->k();
    report["p"] = truth->p();
    report["params"] = params_to_json(m, model.params);
    report["per_pair_probability"] = matrix_json(br.per_pair_probability);
    report["bound"] = br.bound;
    report["r_opt"] = *br.r_opt_est;
    report["r_t"] = *br.r_t_est;
    report["gap"] = *br.gap_est;
    report["gap_std_error"] = *br.gap_std_error;
    report["bound_holds"] = br.bound >= *br.gap_est - 3.0 * *br.gap_std_error;
    if (truth->k() == 2) {
      const K2Check k2 = k2_equality_check(geom, *truth, model, mc, rng);
      report["k2"] = {{"equality_value", k2.equality_value},
                      {"mc_gap", k2.mc_gap},
                      {"mc_gap_std_error", k2.mc_gap_std_error},
                      {"residual", k2.residual},
                      {"within_3se", k2.within_3se}};
    }
    out << report.dump(2) << '\n';
    return 0;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"High-dimensional linear discriminant analysis toolkit"};
  app.name("hdlda");
  app.require_subcommand(1);
  SimulateCmd simulate;
  FitCmd fit_cmd;
  PredictCmd predict_cmd;
  OracleCmd oracle;
  BoundCmd bound;
  simulate.add(app);
  fit_cmd.add(app);
  predict_cmd.add(app);
  oracle.add(app);
  bound.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (simulate.self->parsed()) return simulate.run(out, err);
    if (fit_cmd.self->parsed()) return fit_cmd.run(out, err);
    if (predict_cmd.self->parsed()) return predict_cmd.run(out, err);
    if (oracle.self->parsed()) return oracle.run(out, err);
    if (bound.self->parsed()) return bound.run(out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace hdlda::cli
