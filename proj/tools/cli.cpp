#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gasg/io.hpp"
#include "gasg/ksubspaces.hpp"
#include "gasg/metrics.hpp"
#include "gasg/recovery.hpp"
#include "gasg/synth.hpp"

namespace gasg::cli {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Options {
  // shared
  std::uint64_t seed = 1;
  long iters = -1;
  double passes = 10.0;
  std::optional<double> angle_tol;
  long rank = 1;
  StepParams params;
  std::string step_rule = "adaptive";
  double dim_scale = 1.0;
  double const_eta = 1.0;
  int repeats = 1;
  bool cyclic = false;
  bool json = false;

  // synth
  std::string mode = "low-rank";
  long n = 0;
  long m = 0;
  double outliers = 0.0;
  double observe = 1.0;
  double smin = 1.0;
  double smax = 1.0;
  double outlier_sigma = 1.0;
  double noise = 0.0;
  long k = 1;
  long per = 0;

  // cluster
  double q_factor = 10.0;
  long neighbors = 0;
  long max_iter = -1;

  // I/O
  std::string data;
  std::string mask;
  std::string truth;
  std::string truth_labels;
  std::string basis_out;
  std::string trace_out;
  std::string labels_out;
  std::string dense_out;
  std::string init;
  std::vector<std::string> basis;
  std::string labels;
};

void add_step_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--seed", o.seed, "Seed for every random stream")->capture_default_str();
  cmd.add_option("--iters", o.iters, "Total updates (overrides --passes)");
  cmd.add_option("--passes", o.passes, "Updates as a multiple of the column count")->capture_default_str();
  cmd.add_option("--angle-tol", o.angle_tol, "Stop once the angle to --truth is at most this");
  cmd.add_option("-d,--rank,--d", o.rank, "Subspace rank")->capture_default_str();
  cmd.add_option("--eta0", o.params.eta0)->capture_default_str();
  cmd.add_option("--mu-max", o.params.mu_max)->capture_default_str();
  cmd.add_option("--mu-min", o.params.mu_min)->capture_default_str();
  cmd.add_option("--fmax", o.params.f_max)->capture_default_str();
  cmd.add_option("--fmin", o.params.f_min)->capture_default_str();
  cmd.add_option("--omega", o.params.omega)->capture_default_str();
  cmd.add_option("--step-rule", o.step_rule)
      ->check(CLI::IsMember({"adaptive", "diminishing", "constant", "grouse"}))
      ->capture_default_str();
  cmd.add_option("--dim-scale", o.dim_scale, "C in the C/(1+j) schedule")->capture_default_str();
  cmd.add_option("--const-eta", o.const_eta, "Step for the constant and grouse rules")->capture_default_str();
  cmd.add_option("--repeats", o.repeats, "Independent runs with derived seeds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_flag("--cyclic", o.cyclic, "Shuffled passes instead of sampling with replacement");
  cmd.add_flag("--json", o.json, "Machine-readable summary");
  cmd.add_option("--data", o.data, "Observations (triplets or dense CSV)")->required();
  cmd.add_option("--mask", o.mask, "Restrict the data to these entries");
  cmd.add_option("--n", o.n, "Ambient dimension when triplets leave trailing rows empty");
  cmd.add_option("--truth", o.truth, "Ground-truth basis (bases side by side for clustering)");
  cmd.add_option("--basis-out", o.basis_out);
  cmd.add_option("--trace-out", o.trace_out);
  cmd.add_option("--init", o.init, "Initial basis instead of a random one");
}

StepRuleConfig step_config(const Options& o) {
  StepRuleConfig s;
  s.rule = parse_step_rule(o.step_rule);
  s.params = o.params;
  s.diminishing_scale = o.dim_scale;
  s.constant_eta = o.const_eta;
  return s;
}

long iteration_budget(const Options& o, Index columns) {
  if (o.iters >= 0) return o.iters;
  if (o.passes < 0) throw Error(ErrorCode::invalid_spec, "--passes must be >= 0");
  return std::lround(o.passes * static_cast<double>(columns));
}

std::uint64_t repeat_seed(const Options& o, int r) {
  return o.repeats == 1 ? o.seed : derive_seed(o.seed, stream::repeat, static_cast<std::uint64_t>(r));
}

std::string output_path(const std::string& path, const Options& o, int r) {
  return o.repeats == 1 ? path : io::indexed_path(path, static_cast<std::size_t>(r));
}

Dataset load_data(const Options& o) {
  Dataset data = io::read_dataset(o.data, o.mask.empty() ? std::nullopt : std::optional(o.mask), o.n);
  data.check();
  return data;
}

std::vector<Subspace> read_subspaces(const std::string& path, long rank, long k) {
  if (path.find("{}") != std::string::npos) {
    std::vector<Subspace> out;
    for (long i = 0; i < k; ++i) out.push_back(io::read_basis(io::indexed_path(path, static_cast<std::size_t>(i))));
    return out;
  }
  return io::read_bases(path, rank);
}

// Shared by `cluster` and `eval` so a stored run re-evaluates to the same text.
struct Report {
  std::optional<AngleReport> angles;
  std::optional<double> segmentation;
  std::optional<double> residual;
};

void print_report(std::ostream& out, const Report& r) {
  if (r.angles) {
    out << "angle_worst=" << io::format_real(r.angles->worst) << '\n'
        << "angle_median=" << io::format_real(r.angles->median) << '\n'
        << "angle_mean=" << io::format_real(r.angles->mean) << '\n';
  }
  if (r.segmentation) out << "segmentation_error=" << io::format_real(*r.segmentation) << '\n';
  if (r.residual) out << "relative_residual=" << io::format_real(*r.residual) << '\n';
}

Json report_json(const Report& r) {
  Json j = Json::object();
  if (r.angles) {
    j["angles"] = r.angles->angles;
    j["matching"] = r.angles->matching;
    j["angle_worst"] = r.angles->worst;
    j["angle_median"] = r.angles->median;
    j["angle_mean"] = r.angles->mean;
  }
  if (r.segmentation) j["segmentation_error"] = *r.segmentation;
  if (r.residual) j["relative_residual"] = *r.residual;
  return j;
}

std::vector<bool> outliers_of(const std::vector<int>& labels) {
  std::vector<bool> mask(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) mask[i] = labels[i] == kOutlierLabel;
  return mask;
}

int cmd_synth(const Options& o, std::ostream& out) {
  SyntheticProblem p;
  if (o.mode == "low-rank") {
    SyntheticSpec s;
    s.n = o.n;
    s.m = o.m;
    s.d = o.rank;
    s.s_min = o.smin;
    s.s_max = o.smax;
    s.outlier_fraction = o.outliers;
    s.observe_fraction = o.observe;
    s.outlier_sigma = o.outlier_sigma;
    s.inlier_noise_sigma = o.noise;
    s.rng_seed = o.seed;
    p = gen_low_rank(s);
  } else {
    UnionSpec s;
    s.k = o.k;
    s.d = o.rank;
    s.n = o.n;
    s.inliers_per_subspace = o.per;
    s.outlier_fraction = o.outliers;
    s.observe_fraction = o.observe;
    s.outlier_sigma = o.outlier_sigma;
    s.rng_seed = o.seed;
    p = gen_union(s);
  }
  io::write_observations(o.data, p.data);
  if (!o.mask.empty()) io::write_mask(o.mask, p.data);
  if (!o.truth.empty()) io::write_bases(o.truth, p.truth.subspaces);
  if (!o.truth_labels.empty()) io::write_labels(o.truth_labels, p.truth.labels);
  if (!o.dense_out.empty()) io::write_matrix(o.dense_out, p.dense);

  if (o.json) {
    out << Json{{"n", p.data.ambient_dim},
                {"columns", p.data.size()},
                {"outliers", p.truth.outlier_count()},
                {"subspaces", p.truth.subspaces.size()}}
               .dump()
        << '\n';
  } else {
    out << "n=" << p.data.ambient_dim << " columns=" << p.data.size()
        << " outliers=" << p.truth.outlier_count() << " subspaces=" << p.truth.subspaces.size() << '\n';
  }
  return kOk;
}

struct RecoverOutcome {
  RecoveryResult result;
  double seconds = 0.0;
  std::optional<double> angle;
};

int cmd_recover(const Options& o, std::ostream& out) {
  const Dataset data = load_data(o);
  RecoveryConfig base;
  base.rank = o.rank;
  base.step = step_config(o);
  base.max_iterations = iteration_budget(o, data.size());
  base.sampling = o.cyclic ? Sampling::cyclic_shuffled : Sampling::uniform;
  if (!o.truth.empty()) base.truth = io::read_basis(o.truth);
  if (!o.init.empty()) base.initial = io::read_basis(o.init);
  if (o.angle_tol) {
    if (!base.truth) throw Error(ErrorCode::invalid_spec, "--angle-tol needs --truth");
    base.angle_tolerance = o.angle_tol;
  }
  base.validate(data.ambient_dim);

  std::vector<std::optional<RecoverOutcome>> runs(static_cast<std::size_t>(o.repeats));
  std::vector<std::optional<Error>> failures(runs.size());
#pragma omp parallel for schedule(dynamic) if (o.repeats > 1)
  for (int r = 0; r < o.repeats; ++r) {
    const auto i = static_cast<std::size_t>(r);
    try {
      RecoveryConfig cfg = base;
      cfg.rng_seed = repeat_seed(o, r);
      const auto t0 = Clock::now();
      RecoverOutcome outcome{run(data, cfg), 0.0, std::nullopt};
      outcome.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      if (cfg.truth) outcome.angle = principal_angle(*cfg.truth, outcome.result.subspace);
      runs[i] = std::move(outcome);
    } catch (const Error& e) {
      failures[i] = e;
    }
  }
  for (const auto& f : failures) {
    if (f) throw *f;
  }

  Json all = Json::array();
  std::vector<double> angles;
  for (int r = 0; r < o.repeats; ++r) {
    const RecoverOutcome& res = *runs[static_cast<std::size_t>(r)];
    if (!o.basis_out.empty()) io::write_basis(output_path(o.basis_out, o, r), res.result.subspace);
    if (!o.trace_out.empty()) io::write_trace(output_path(o.trace_out, o, r), res.result.trace);
    const auto& records = res.result.trace.records;
    const long done = records.empty() ? 0 : records.back().iteration + 1;
    const double eta = records.empty() ? base.step.params.eta0 : records.back().eta;
    if (res.angle) angles.push_back(*res.angle);
    if (o.json) {
      Json j{{"seed", repeat_seed(o, r)}, {"iterations", done}, {"seconds", res.seconds}, {"eta", eta}};
      if (res.angle) j["angle"] = *res.angle;
      all.push_back(j);
    } else {
      out << "seed=" << repeat_seed(o, r) << " iterations=" << done;
      if (res.angle) out << " angle=" << io::format_real(*res.angle);
      out << " eta=" << io::format_real(eta) << " seconds=" << res.seconds << '\n';
    }
  }
  if (o.json) {
    Json j{{"runs", all}};
    if (!angles.empty()) j["median_angle"] = median(angles);
    out << j.dump() << '\n';
  } else if (o.repeats > 1 && !angles.empty()) {
    out << "median_angle=" << io::format_real(median(angles)) << '\n';
  }
  return kOk;
}

int cmd_cluster(const Options& o, std::ostream& out) {
  const Dataset data = load_data(o);
  ClusterConfig base;
  base.k = o.k;
  base.rank = o.rank;
  base.q = std::max<Index>(1, std::lround(o.q_factor * static_cast<double>(o.k)));
  base.neighborhood_size = o.neighbors;
  base.max_iterations = o.max_iter >= 0 ? o.max_iter : iteration_budget(o, data.size());
  base.step = step_config(o);
  base.sampling = o.cyclic ? Sampling::cyclic_shuffled : Sampling::uniform;
  if (!o.truth.empty()) base.truths = read_subspaces(o.truth, o.rank, o.k);
  if (!o.init.empty()) base.initial = read_subspaces(o.init, o.rank, o.k);
  base.validate(data);
  std::optional<std::vector<int>> truth_labels;
  if (!o.truth_labels.empty()) {
    truth_labels = io::read_labels(o.truth_labels);
    if (static_cast<Index>(truth_labels->size()) != data.size()) {
      throw Error(ErrorCode::shape_mismatch, "truth labels do not match the column count");
    }
  }

  Json all = Json::array();
  for (int r = 0; r < o.repeats; ++r) {
    ClusterConfig cfg = base;
    cfg.rng_seed = repeat_seed(o, r);
    const ClusterResult res = cluster(data, cfg);
    const auto& model = res.model;

    if (!o.basis_out.empty()) {
      const std::string path = output_path(o.basis_out, o, r);
      for (std::size_t i = 0; i < model.subspaces.size(); ++i) {
        io::write_basis(io::indexed_path(path, i), model.subspaces[i]);
      }
    }
    if (!o.trace_out.empty()) {
      const std::string path = output_path(o.trace_out, o, r);
      for (std::size_t i = 0; i < res.traces.size(); ++i) io::write_trace(io::indexed_path(path, i), res.traces[i]);
    }
    if (!o.labels_out.empty()) io::write_labels(output_path(o.labels_out, o, r), model.assignments);

    Report report;
    if (!cfg.truths.empty()) report.angles = match_and_angles(cfg.truths, model.subspaces);
    if (truth_labels) {
      report.segmentation = segmentation_error(*truth_labels, model.assignments, outliers_of(*truth_labels));
    }
    const auto& t = res.timings;
    if (o.json) {
      Json j = report_json(report);
      j["seed"] = cfg.rng_seed;
      j["q"] = cfg.q;
      j["iterations"] = cfg.max_iterations;
      j["seconds"] = {{"seeding", t.seeding_seconds}, {"selection", t.selection_seconds},
                      {"refine", t.refine_seconds}};
      all.push_back(j);
    } else {
      out << "seed=" << cfg.rng_seed << " k=" << cfg.k << " q=" << cfg.q << " iterations=" << cfg.max_iterations
          << " seeding_seconds=" << t.seeding_seconds << " selection_seconds=" << t.selection_seconds
          << " refine_seconds=" << t.refine_seconds << '\n';
      print_report(out, report);
    }
  }
  if (o.json) out << (o.repeats == 1 ? all.front() : Json{{"runs", all}}).dump() << '\n';
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  Report report;
  std::vector<Subspace> recovered;
  for (const std::string& path : o.basis) {
    for (Subspace& s : read_subspaces(path, o.rank, o.k)) recovered.push_back(std::move(s));
  }
  if (!o.truth.empty()) {
    if (recovered.empty()) throw Error(ErrorCode::invalid_spec, "--truth needs --basis");
    const std::vector<Subspace> truths = read_subspaces(o.truth, o.rank, o.k);
    report.angles = match_and_angles(truths, recovered);
  }
  if (!o.labels.empty() || !o.truth_labels.empty()) {
    if (o.labels.empty() || o.truth_labels.empty()) {
      throw Error(ErrorCode::invalid_spec, "segmentation error needs --labels and --truth-labels");
    }
    const std::vector<int> truth = io::read_labels(o.truth_labels);
    const std::vector<int> predicted = io::read_labels(o.labels);
    report.segmentation = segmentation_error(truth, predicted, outliers_of(truth));
  }
  if (!o.data.empty()) {
    if (recovered.empty()) throw Error(ErrorCode::invalid_spec, "--data needs --basis");
    const Dataset data = io::read_dataset(o.data, std::nullopt, o.n);
    std::vector<Index> full;
    for (const ObservedVector& x : data.columns) {
      if (x.observed() == data.ambient_dim) full.push_back(x.column_id);
    }
    if (full.empty()) throw Error(ErrorCode::shape_mismatch, "no fully observed columns to reconstruct");
    Eigen::MatrixXd x(data.ambient_dim, static_cast<Index>(full.size()));
    for (std::size_t j = 0; j < full.size(); ++j) {
      x.col(static_cast<Index>(j)) = data.columns[static_cast<std::size_t>(full[j])].values;
    }
    Eigen::MatrixXd fitted(x.rows(), x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
      // Each column is reconstructed by whichever subspace represents it best.
      double best = std::numeric_limits<double>::infinity();
      for (const Subspace& s : recovered) {
        if (s.ambient_dim() != x.rows()) throw Error(ErrorCode::shape_mismatch, "basis does not match the data");
        const Eigen::VectorXd p = project_columns(s, x.col(j));
        const double err = (x.col(j) - p).norm();
        if (err < best) {
          best = err;
          fitted.col(j) = p;
        }
      }
    }
    report.residual = relative_residual(x, fitted);
  }
  if (!report.angles && !report.segmentation && !report.residual) {
    throw Error(ErrorCode::invalid_spec, "nothing to evaluate");
  }
  if (o.json) {
    out << report_json(report).dump() << '\n';
  } else {
    print_report(out, report);
  }
  return kOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_spec:
      return kUsage;
    case ErrorCode::io:
    case ErrorCode::parse:
    case ErrorCode::shape_mismatch:
    case ErrorCode::invalid_shape:
    case ErrorCode::too_few_columns:
    case ErrorCode::index_out_of_range:
    case ErrorCode::empty_inliers:
      return kData;
    case ErrorCode::zero_vector:
    case ErrorCode::underdetermined:
    case ErrorCode::rank_deficient:
    case ErrorCode::degenerate_gradient:
    case ErrorCode::all_columns_unusable:
    case ErrorCode::zero_denominator:
      return kNumerical;
  }
  return kNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust subspace recovery and clustering with adaptive Grassmannian SGD", "gasg21"};
  app.require_subcommand(1);
  Options o;

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic problem with ground truth");
  synth->add_option("--mode", o.mode)->check(CLI::IsMember({"low-rank", "union"}))->capture_default_str();
  synth->add_option("--seed", o.seed)->capture_default_str();
  synth->add_option("-d,--rank,--d", o.rank, "Rank of each subspace")->capture_default_str();
  synth->add_option("--n", o.n, "Ambient dimension")->required();
  synth->add_option("--m", o.m, "Columns (low-rank)");
  synth->add_option("--outliers", o.outliers, "Fraction of columns that are outliers")->capture_default_str();
  synth->add_option("--observe", o.observe, "Fraction of rows observed per column")->capture_default_str();
  synth->add_option("--smin", o.smin)->capture_default_str();
  synth->add_option("--smax", o.smax)->capture_default_str();
  synth->add_option("--outlier-sigma", o.outlier_sigma)->capture_default_str();
  synth->add_option("--noise", o.noise, "Inlier noise standard deviation (low-rank)")->capture_default_str();
  synth->add_option("--k", o.k, "Subspaces (union)")->capture_default_str();
  synth->add_option("--per", o.per, "Inliers per subspace (union)");
  synth->add_option("--data", o.data, "Observed entries as triplets")->required();
  synth->add_option("--mask", o.mask, "Observation mask");
  synth->add_option("--truth", o.truth, "Ground-truth bases side by side");
  synth->add_option("--truth-labels", o.truth_labels, "Subspace index per column, -1 for outliers");
  synth->add_option("--dense-out", o.dense_out, "Full matrix before masking (dense CSV)");
  synth->add_flag("--json", o.json);

  CLI::App* recover = app.add_subcommand("recover", "Recover a single subspace");
  add_step_flags(*recover, o);

  CLI::App* clus = app.add_subcommand("cluster", "Recover a union of K subspaces");
  add_step_flags(*clus, o);
  clus->add_option("--k", o.k)->required();
  clus->add_option("--q-factor", o.q_factor, "Candidates Q as a multiple of K")->capture_default_str();
  clus->add_option("--neighbors", o.neighbors, "Neighbours per candidate fit (default rank + 3)");
  clus->add_option("--max-iter", o.max_iter, "Refinement updates (overrides --iters and --passes)");
  clus->add_option("--truth-labels", o.truth_labels);
  clus->add_option("--labels-out", o.labels_out);

  CLI::App* eval = app.add_subcommand("eval", "Score saved bases and labels");
  eval->add_option("--basis", o.basis, "Recovered basis file(s); `{}` expands to 0..k-1");
  eval->add_option("--truth", o.truth);
  eval->add_option("-d,--rank,--d", o.rank, "Split files holding several bases into rank-d blocks")
      ->capture_default_str();
  eval->add_option("--k", o.k, "Count for `{}` expansion")->capture_default_str();
  eval->add_option("--labels", o.labels);
  eval->add_option("--truth-labels", o.truth_labels);
  eval->add_option("--data", o.data, "Relative residual on the fully observed columns");
  eval->add_option("--n", o.n);
  eval->add_flag("--json", o.json);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) return cmd_synth(o, out);
    if (*recover) return cmd_recover(o, out);
    if (*clus) return cmd_cluster(o, out);
    return cmd_eval(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
}

}  // namespace gasg::cli
