#include "hdlda/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "hdlda/error.hpp"
#include "hdlda/population.hpp"

namespace hdlda {

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (model_id < 1 || model_id > 3) fail("model must be 1, 2 or 3");
  if (k < 2) fail("need K ≥ 2 classes");
  if (p < 1) fail("p must be positive");
  if (n_train < 1 || n_train % k != 0) fail("n_train must be a positive multiple of k");
  if (n_test < 1 || n_test % k != 0) fail("n_test must be a positive multiple of k");
  if (reps < 1) fail("reps must be >= 1");
  if (cv_folds < 2) fail("cv_folds must be >= 2");
  if (methods.empty()) fail("no methods selected");
  if (mc_samples < 1000) fail("mc_samples must be >= 1000");
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json doc;
  doc["model_id"] = c.model_id;
  doc["p"] = c.p;
  doc["k"] = c.k;
  doc["n_train"] = c.n_train;
  doc["n_test"] = c.n_test;
  doc["reps"] = c.reps;
  doc["cv_folds"] = c.cv_folds;
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : c.methods) methods.push_back(std::string(method_name(m)));
  doc["methods"] = methods;
  doc["master_seed"] = c.master_seed;
  doc["grids"] = {{"lambdas", c.grid.lambdas}, {"m1", c.grid.m1},
                  {"m2", c.grid.m2},           {"epsilons", c.grid.epsilons},
                  {"deltas", c.grid.deltas},   {"alpha", c.grid.alpha}};
  doc["mc_samples"] = c.mc_samples;
  return doc;
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  try {
    ExperimentConfig c;
    c.model_id = doc.value("model_id", c.model_id);
    c.p = doc.value("p", c.p);
    c.k = doc.value("k", c.k);
    c.n_train = doc.value("n_train", c.n_train);
    c.n_test = doc.value("n_test", c.n_test);
    c.reps = doc.value("reps", c.reps);
    c.cv_folds = doc.value("cv_folds", c.cv_folds);
    if (doc.contains("methods")) {
      c.methods.clear();
      for (const auto& m : doc.at("methods")) {
        try {
          c.methods.push_back(parse_method(m.get<std::string>()));
        } catch (const Error& e) {
          throw Error(ErrorCode::ParseError, std::string("malformed experiment config: ") + e.what());
        }
      }
    }
    c.master_seed = doc.value("master_seed", c.master_seed);
    if (doc.contains("grids")) {
      const auto& g = doc.at("grids");
      c.grid.lambdas = g.value("lambdas", c.grid.lambdas);
      c.grid.m1 = g.value("m1", c.grid.m1);
      c.grid.m2 = g.value("m2", c.grid.m2);
      c.grid.epsilons = g.value("epsilons", c.grid.epsilons);
      c.grid.deltas = g.value("deltas", c.grid.deltas);
      c.grid.alpha = g.value("alpha", c.grid.alpha);
    }
    c.mc_samples = doc.value("mc_samples", c.mc_samples);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed experiment config: ") + e.what());
  }
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<MethodRow> replicate(const ExperimentConfig& config,
                                 const std::shared_ptr<const PopulationModel>& truth, int rep_id) {
  RngStream rng = rng_stream(config.master_seed, static_cast<std::uint64_t>(rep_id));
  const std::uint64_t seed = rng.seed_word();
  const LabeledSample train = sample_dataset(*truth, config.n_train / config.k, rng);
  const LabeledSample test = sample_dataset(*truth, config.n_test / config.k, rng);
  // Every method draws its folds from this same snapshot.
  const RngStream cv_rng = rng;

  std::vector<MethodRow> rows;
  for (Method method : config.methods) {
    MethodRow row;
    row.method = method;
    row.rep = rep_id;
    row.seed = seed;
    const auto start = Clock::now();
    try {
      ClassifierModel model;
      if (method == Method::Opt) {
        model = fit_optimal(truth);
      } else if (is_tunable(method)) {
        RngStream fold_rng = cv_rng;
        const CvResult cv = grid_search(method, train, config.grid, config.cv_folds, fold_rng);
        model = fit(method, train, cv.best_params);
      } else {
        model = fit(method, train, FitParams{});
      }
      row.error = evaluate(model, test).error_rate;
      row.params = params_to_json(method, model.params);
    } catch (const Error& e) {
      row.failure = e.what();
    }
    if (config.timing) row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

// Runs task(i) for i in [0, count) on up to `workers` threads.
template <class Task>
void parallel_for(int count, int workers, Task task) {
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<MethodRow> run_replication(const ExperimentConfig& config, int rep_id) {
  config.validate();
  const auto truth = std::make_shared<const PopulationModel>(make_sim_model(config.model_id, config.p, config.k));
  return replicate(config, truth, rep_id);
}

std::vector<MethodAggregate> aggregate_rows(const std::vector<MethodRow>& rows,
                                            const std::vector<Method>& methods) {
  std::vector<MethodAggregate> out;
  for (Method m : methods) {
    std::vector<double> errs, secs;
    for (const MethodRow& r : rows) {
      if (r.method != m || !r.error) continue;
      errs.push_back(*r.error);
      if (r.seconds) secs.push_back(*r.seconds);
    }
    auto mean_sd = [](const std::vector<double>& v) {
      double sum = 0.0;
      for (double x : v) sum += x;
      const double mean = v.empty() ? 0.0 : sum / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = v.size() < 2 ? 0.0 : std::sqrt(ss / static_cast<double>(v.size() - 1));
      return std::pair{mean, sd};
    };
    MethodAggregate agg;
    agg.method = m;
    agg.reps_used = static_cast<int>(errs.size());
    std::tie(agg.mean_error, agg.sd_error) = mean_sd(errs);
    agg.sd_defined = errs.size() >= 2;
    if (!secs.empty() && secs.size() == errs.size()) {
      const auto [ms, ss] = mean_sd(secs);
      agg.mean_seconds = ms;
      agg.sd_seconds = ss;
    }
    out.push_back(agg);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, int workers) {
  config.validate();
  const auto truth = std::make_shared<const PopulationModel>(make_sim_model(config.model_id, config.p, config.k));
  std::vector<std::vector<MethodRow>> per_rep(static_cast<std::size_t>(config.reps));
  parallel_for(config.reps, workers,
               [&](int rep) { per_rep[static_cast<std::size_t>(rep)] = replicate(config, truth, rep); });
  ExperimentResult result;
  for (auto& rows : per_rep) {
    for (auto& r : rows) result.rows.push_back(std::move(r));
  }
  result.aggregates = aggregate_rows(result.rows, config.methods);
  return result;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "spearman: need two equal-length series of length >= 2");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

ConvergenceTable convergence_experiment(const ConvergenceConfig& config, int workers) {
  if (config.n_grid.empty() || config.reps < 1) {
    throw Error(ErrorCode::InvalidArgument, "convergence_experiment: empty n grid or reps < 1");
  }
  for (std::size_t i = 1; i < config.n_grid.size(); ++i) {
    if (config.n_grid[i] <= config.n_grid[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, "convergence_experiment: n grid must increase");
    }
  }
  const auto truth = std::make_shared<const PopulationModel>(make_sim_model(config.model_id, config.p, config.k));
  const int n_points = static_cast<int>(config.n_grid.size());
  const int tasks = n_points * config.reps;
  struct Cell {
    std::optional<double> ratio;
    double r_opt = 0.0;
    double r_t = 0.0;
  };
  std::vector<Cell> cells(static_cast<std::size_t>(tasks));

  parallel_for(tasks, workers, [&](int task) {
    const int ni = task / config.reps;
    const int rep = task % config.reps;
    const int n = config.n_grid[static_cast<std::size_t>(ni)];
    RngStream rng = rng_stream(config.master_seed,
                               (static_cast<std::uint64_t>(ni) << 32) | static_cast<std::uint64_t>(rep));
    std::vector<int> counts(static_cast<std::size_t>(config.k), n / config.k);
    for (int c = 0; c < n % config.k; ++c) ++counts[static_cast<std::size_t>(c)];
    const LabeledSample train = sample_dataset(*truth, counts, rng);
    Cell cell;
    try {
      ClassifierModel model;
      if (config.method == Method::Opt) {
        model = fit_optimal(truth);
      } else if (is_tunable(config.method)) {
        const CvResult cv = grid_search(config.method, train, config.grid, config.cv_folds, rng);
        model = fit(config.method, train, cv.best_params);
      } else {
        model = fit(config.method, train, FitParams{});
      }
      const GapEstimate gap = conditional_gap(model, *truth, config.mc_samples, rng);
      cell.r_opt = gap.r_opt.estimate;
      cell.r_t = gap.r_t.estimate;
      if (gap.r_opt.estimate > 0.0) cell.ratio = gap.r_t.estimate / gap.r_opt.estimate - 1.0;
    } catch (const Error&) {
      // A failed fit leaves the cell empty; reps_used records it.
    }
    cells[static_cast<std::size_t>(task)] = cell;
  });

  ConvergenceTable table;
  table.method = config.method;
  std::vector<double> ns, means;
  for (int ni = 0; ni < n_points; ++ni) {
    ConvergenceRow row;
    row.n = config.n_grid[static_cast<std::size_t>(ni)];
    std::vector<double> ratios;
    double sum_opt = 0.0, sum_t = 0.0;
    for (int rep = 0; rep < config.reps; ++rep) {
      const Cell& cell = cells[static_cast<std::size_t>(ni * config.reps + rep)];
      if (!cell.ratio) continue;
      ratios.push_back(*cell.ratio);
      sum_opt += cell.r_opt;
      sum_t += cell.r_t;
    }
    row.reps_used = static_cast<int>(ratios.size());
    if (!ratios.empty()) {
      const double m = static_cast<double>(ratios.size());
      row.mean_ratio = std::accumulate(ratios.begin(), ratios.end(), 0.0) / m;
      row.mean_r_opt = sum_opt / m;
      row.mean_r_t = sum_t / m;
      double ss = 0.0;
      for (double r : ratios) ss += (r - row.mean_ratio) * (r - row.mean_ratio);
      row.sd_ratio = ratios.size() < 2 ? 0.0 : std::sqrt(ss / (m - 1.0));
    }
    ns.push_back(row.n);
    means.push_back(row.mean_ratio);
    table.rows.push_back(row);
  }
  table.spearman = n_points >= 2 ? spearman(ns, means) : 0.0;
  return table;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string quote_csv(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

template <class T>
T parse_number(const std::string& s, const std::string& what) {
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "cannot parse " + what + " '" + s + "'");
  }
  return value;
}

}  // namespace

std::string default_aggregate_path(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  const std::size_t dot = path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return path.substr(0, dot) + "_aggregate" + path.substr(dot);
  }
  return path + "_aggregate.csv";
}

void write_results_csv(const ExperimentResult& result, const std::string& path,
                       const std::string& aggregate_path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << "method,rep,seed,error,seconds,params_json\n";
  for (const MethodRow& r : result.rows) {
    out << method_name(r.method) << ',' << r.rep << ',' << r.seed << ',' << optional_field(r.error) << ','
        << optional_field(r.seconds) << ',' << quote_csv(r.params.dump()) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);

  std::ofstream agg(aggregate_path, std::ios::binary);
  if (!agg) throw Error(ErrorCode::IoError, "cannot open " + aggregate_path + " for writing");
  agg << "method,mean_error,sd_error,mean_seconds,sd_seconds,reps_used\n";
  for (const MethodAggregate& a : result.aggregates) {
    agg << method_name(a.method) << ',';
    if (a.reps_used > 0) agg << format_double(a.mean_error) << ',' << format_double(a.sd_error);
    else agg << ',';
    agg << ',' << optional_field(a.mean_seconds) << ',' << optional_field(a.sd_seconds) << ','
        << a.reps_used << '\n';
  }
  if (!agg) throw Error(ErrorCode::IoError, "failed writing " + aggregate_path);
}

std::vector<MethodRow> read_results_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "method,rep,seed,error,seconds,params_json") {
    throw Error(ErrorCode::ParseError, path + ": unexpected header");
  }
  std::vector<MethodRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 6) throw Error(ErrorCode::ParseError, path + ": expected 6 fields");
    MethodRow r;
    r.method = parse_method(f[0]);
    r.rep = parse_number<int>(f[1], "rep");
    r.seed = parse_number<std::uint64_t>(f[2], "seed");
    if (!f[3].empty()) r.error = parse_number<double>(f[3], "error");
    if (!f[4].empty()) r.seconds = parse_number<double>(f[4], "seconds");
    try {
      r.params = nlohmann::json::parse(f[5]);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, path + ": bad params_json: " + e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace hdlda
