#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdlda/classifiers.hpp"
#include "hdlda/tuning.hpp"

namespace hdlda {

struct ExperimentConfig {
  int model_id = 1;
  int p = 300;
  int k = 3;
  int n_train = 450;
  int n_test = 450;
  int reps = 50;
  int cv_folds = 5;
  std::vector<Method> methods{Method::Opt, Method::Glda, Method::Slda1, Method::Slda2,
                              Method::Lpd, Method::Nsc};
  std::uint64_t master_seed = 1;
  Grid grid;
  int mc_samples = 200000;
  bool timing = false;  // wall-clock seconds make output machine-dependent

  /// Throws Error{InvalidArgument} on a malformed configuration.
  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Missing fields keep their defaults. Throws Error{ParseError}.
ExperimentConfig config_from_json(const nlohmann::json& doc);

struct MethodRow {
  Method method = Method::Opt;
  int rep = 0;
  std::uint64_t seed = 0;
  std::optional<double> error;    // missing when the fit failed
  std::optional<double> seconds;  // present only with timing enabled
  nlohmann::json params = nlohmann::json::object();
  std::string failure;
};

struct MethodAggregate {
  Method method = Method::Opt;
  double mean_error = 0.0;
  double sd_error = 0.0;
  std::optional<double> mean_seconds;
  std::optional<double> sd_seconds;
  int reps_used = 0;
  bool sd_defined = false;  // false when reps_used < 2 (sd reported as 0)
};

struct ExperimentResult {
  std::vector<MethodRow> rows;  // rep-major, methods in config order
  std::vector<MethodAggregate> aggregates;
};

/// One replication: train then test drawn from rng_stream(master_seed, rep_id);
/// CV folds come from the same stream after the test draw.
std::vector<MethodRow> run_replication(const ExperimentConfig& config, int rep_id);

/// Replications spread over `workers` threads and assembled in rep order.
/// The result does not depend on `workers`.
ExperimentResult run_experiment(const ExperimentConfig& config, int workers = 1);

/// Sample mean and sd (divisor count - 1) over the non-missing rows.
std::vector<MethodAggregate> aggregate_rows(const std::vector<MethodRow>& rows,
                                            const std::vector<Method>& methods);

struct ConvergenceRow {
  int n = 0;
  double mean_ratio = 0.0;  // mean over reps of R_T/R_OPT - 1
  double sd_ratio = 0.0;
  double mean_r_opt = 0.0;
  double mean_r_t = 0.0;
  int reps_used = 0;
};

struct ConvergenceTable {
  Method method = Method::Opt;
  std::vector<ConvergenceRow> rows;
  double spearman = 0.0;  // mean ratio against n
};

struct ConvergenceConfig {
  Method method = Method::Slda2;
  int model_id = 3;
  int p = 100;
  int k = 3;
  std::vector<int> n_grid{200, 400, 800, 1600};
  int reps = 10;
  int cv_folds = 5;
  std::uint64_t master_seed = 1;
  int mc_samples = 400000;
  Grid grid;
};

/// Stream for (n index, rep) is rng_stream(master_seed, (n_index << 32) | rep).
/// Class counts are as balanced as n allows.
ConvergenceTable convergence_experiment(const ConvergenceConfig& config, int workers = 1);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Writes `path` and the aggregate file. Throws Error{IoError}.
void write_results_csv(const ExperimentResult& result, const std::string& path,
                       const std::string& aggregate_path);

/// "<stem>_aggregate.csv" next to `path`.
std::string default_aggregate_path(const std::string& path);

/// Reads the per-replication file back. Throws Error{IoError} or Error{ParseError}.
std::vector<MethodRow> read_results_csv(const std::string& path);

/// Decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace hdlda
