// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
// followed by indented detail. Run with a criterion number to run only that
// one; with no argument all eight run and the exit status is nonzero if any
// fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "gasg/kernels.hpp"
#include "gasg/ksubspaces.hpp"
#include "gasg/metrics.hpp"
#include "gasg/recovery.hpp"
#include "gasg/synth.hpp"

using namespace gasg;

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeeds = 5;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SyntheticProblem low_rank(Index n, Index d, double s_min, double s_max, double outliers, double observe,
                          std::uint64_t seed) {
  SyntheticSpec s;
  s.n = n;
  s.m = n;
  s.d = d;
  s.s_min = s_min;
  s.s_max = s_max;
  s.outlier_fraction = outliers;
  s.observe_fraction = observe;
  s.rng_seed = seed;
  return gen_low_rank(s);
}

struct RunSummary {
  double angle = 0.0;
  long iterations = 0;
  double seconds = 0.0;
  RunTrace trace;
};

RunSummary recover(const SyntheticProblem& p, Index d, long iterations, std::uint64_t seed, StepRuleConfig step = {},
                   std::optional<double> tolerance = {}, bool trace_angles = false) {
  RecoveryConfig c;
  c.rank = d;
  c.step = step;
  c.max_iterations = iterations;
  c.rng_seed = seed;
  c.truth = p.truth.subspaces.front();
  c.angle_tolerance = tolerance;
  c.trace_angles = trace_angles || tolerance.has_value();
  const auto t0 = Clock::now();
  RecoveryResult r = run(p.data, c);
  RunSummary s;
  s.seconds = seconds_since(t0);
  s.angle = principal_angle(p.truth.subspaces.front(), r.subspace);
  s.iterations = static_cast<long>(r.trace.records.size());
  s.trace = std::move(r.trace);
  return s;
}

// Least-squares slope of log10(angle) against iteration.
double log_angle_slope(const RunTrace& t) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (const TraceRecord& r : t.records) {
    if (!r.angle || *r.angle <= 0.0) continue;
    const double x = static_cast<double>(r.iteration);
    const double y = std::log10(*r.angle);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
  return s + "]";
}

// Each criterion appends detail lines and returns whether every check held.
struct Report {
  std::vector<std::string> lines;
  bool ok = true;

  void check(bool condition, const std::string& what) {
    ok = ok && condition;
    lines.push_back(std::string(condition ? "ok   " : "MISS ") + what);
  }
  void note(const std::string& what) { lines.push_back("     " + what); }
};

void criterion1(Report& r) {
  // 200 x 200, rank 5, fully observed; 20 passes with a 1e-3 stopping rule.
  const long budget = 20 * 200;
  for (double rho : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.65, 0.7, 0.8}) {
    std::vector<double> angles, times, iters;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
      const SyntheticProblem p = low_rank(200, 5, 2000, 10000, rho, 1.0, seed);
      const RunSummary s = recover(p, 5, budget, seed, {}, 1e-3);
      angles.push_back(s.angle);
      times.push_back(s.seconds);
      iters.push_back(static_cast<double>(s.iterations));
    }
    const std::string tag = "outliers " + fmt(rho) + ": median angle " + fmt(median(angles)) +
                            " median iterations " + fmt(median(iters)) + " max seconds " +
                            fmt(*std::max_element(times.begin(), times.end()));
    if (rho <= 0.65) {
      r.check(median(angles) <= 1e-3 && *std::max_element(times.begin(), times.end()) < 1.0, tag);
    } else {
      r.note(tag + " (not required)");
    }
  }
}

void criterion2(Report& r) {
  // 500 x 500, rank 10, singular values in [9000, 10000], 65% outliers, 70% observed, 2 passes.
  const long budget = 2 * 500;
  std::vector<double> adaptive, dim, slopes;
  StepRuleConfig ad;
  ad.params.mu_max = 15;
  StepRuleConfig di;
  di.rule = StepRule::diminishing;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const SyntheticProblem p = low_rank(500, 10, 9000, 10000, 0.65, 0.7, seed);
    const RunSummary a = recover(p, 10, budget, seed, ad, {}, true);
    adaptive.push_back(a.angle);
    slopes.push_back(log_angle_slope(a.trace));
    dim.push_back(recover(p, 10, budget, seed, di).angle);
  }
  r.check(median(adaptive) <= 1e-4, "adaptive median angle " + fmt(median(adaptive)) + " <= 1e-4 " + list(adaptive));
  r.check(median(dim) >= 10 * median(adaptive),
          "diminishing median angle " + fmt(median(dim)) + " >= 10x adaptive " + list(dim));
  r.check(std::all_of(slopes.begin(), slopes.end(), [](double s) { return s < 0.0; }),
          "adaptive log-angle slope < 0 " + list(slopes));
}

void criterion3(Report& r) {
  // Constant GROUSE step on the data of criterion 2, with and without outliers, 20 passes.
  const long budget = 20 * 500;
  StepRuleConfig g;
  g.rule = StepRule::grouse;
  g.constant_eta = 1.0;
  std::vector<double> dirty, clean;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    dirty.push_back(recover(low_rank(500, 10, 9000, 10000, 0.65, 0.7, seed), 10, budget, seed, g).angle);
    clean.push_back(recover(low_rank(500, 10, 9000, 10000, 0.0, 0.7, seed), 10, budget, seed, g).angle);
  }
  r.check(median(dirty) > 1e-1, "65% outliers: median angle " + fmt(median(dirty)) + " > 1e-1 " + list(dirty));
  r.check(median(clean) <= 1e-6, "no outliers: median angle " + fmt(median(clean)) + " <= 1e-6 " + list(clean));
}

void criterion4(Report& r) {
  // 500 x 500, rank 5, 2 passes.
  const long budget = 2 * 500;
  for (double rho : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.65, 0.7}) {
    std::vector<double> angles;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
      angles.push_back(recover(low_rank(500, 5, 2000, 10000, rho, 0.7, seed), 5, budget, seed).angle);
    }
    const std::string tag = "observed 0.7, outliers " + fmt(rho) + ": median angle " + fmt(median(angles));
    if (rho <= 0.65) {
      r.check(median(angles) <= 1e-2, tag);
    } else {
      r.note(tag + " (not required)");
    }
  }
  for (double obs : {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
    std::vector<double> angles;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
      angles.push_back(recover(low_rank(500, 5, 2000, 10000, 0.5, obs, seed), 5, budget, seed).angle);
    }
    const std::string tag = "outliers 0.5, observed " + fmt(obs) + ": median angle " + fmt(median(angles));
    if (obs >= 0.5) {
      r.check(median(angles) <= 1e-2, tag);
    } else {
      r.note(tag + " (not required)");
    }
  }
}

void criterion5(Report& r) {
  // 500 x 500, rank 10, 65% outliers, 70% observed.
  auto rule = [](double mu_max) {
    StepRuleConfig c;
    c.params.mu_max = mu_max;
    return c;
  };
  std::vector<double> fast10, fast50;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const SyntheticProblem p = low_rank(500, 10, 9000, 10000, 0.65, 0.7, seed);
    fast10.push_back(static_cast<double>(recover(p, 10, 100000, seed, rule(10), 1e-4).iterations));
    fast50.push_back(static_cast<double>(recover(p, 10, 100000, seed, rule(50), 1e-4).iterations));
  }
  r.check(median(fast10) < median(fast50), "[9000,10000]: iterations to 1e-4, mu_max 10 " + fmt(median(fast10)) +
                                               " < mu_max 50 " + fmt(median(fast50)));

  const long budget = 100 * 500;
  std::vector<double> a10, a50;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const SyntheticProblem p = low_rank(500, 10, 1000, 10000, 0.65, 0.7, seed);
    a10.push_back(recover(p, 10, budget, seed, rule(10)).angle);
    a50.push_back(recover(p, 10, budget, seed, rule(50)).angle);
  }
  r.check(median(a50) <= 1e-3, "[1000,10000]: mu_max 50 median angle " + fmt(median(a50)) + " <= 1e-3 " + list(a50));
  r.check(median(a10) >= 100 * median(a50),
          "[1000,10000]: mu_max 10 median angle " + fmt(median(a10)) + " >= 100x mu_max 50 " + list(a10));
}

UnionSpec union_spec(double outliers, std::uint64_t seed) {
  UnionSpec s;
  s.k = 20;
  s.d = 3;
  s.n = 100;
  s.inliers_per_subspace = 50;
  s.outlier_fraction = outliers;
  s.observe_fraction = 0.7;
  s.rng_seed = seed;
  return s;
}

struct ClusterSummary {
  AngleReport angles;
  double seconds = 0.0;
};

ClusterSummary cluster_run(const SyntheticProblem& p, Index q, long iterations, std::uint64_t seed) {
  ClusterConfig c;
  c.k = 20;
  c.rank = 3;
  c.q = q;
  c.max_iterations = iterations;
  c.rng_seed = seed;
  const auto t0 = Clock::now();
  const ClusterResult res = cluster(p.data, c);
  ClusterSummary s;
  s.seconds = seconds_since(t0);
  s.angles = match_and_angles(p.truth.subspaces, res.model.subspaces);
  return s;
}

std::string describe(const ClusterSummary& s) {
  return "worst " + fmt(s.angles.worst) + " median " + fmt(s.angles.median) + " mean " + fmt(s.angles.mean) +
         " seconds " + fmt(s.seconds);
}

void criterion6(Report& r) {
  // K = 20, d = 3, n = 100, 50 inliers each, 50% outliers, 70% observed, 20 passes over 2000 columns.
  const long budget = 20 * 2000;
  int good = 0;
  double slowest = 0.0;
  std::vector<double> medians2k, means2k;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const SyntheticProblem p = gen_union(union_spec(0.5, seed));
    const ClusterSummary s = cluster_run(p, 200, budget, seed);
    const bool pass = s.angles.worst <= 1e-3 && s.angles.mean <= 1e-4;
    good += pass;
    slowest = std::max(slowest, s.seconds);
    r.note("Q=10K seed " + std::to_string(seed) + ": " + describe(s) + (pass ? "" : " (miss)"));
    const ClusterSummary half = cluster_run(p, 40, budget, seed);
    medians2k.push_back(half.angles.median);
    means2k.push_back(half.angles.mean);
    r.note("Q=2K seed " + std::to_string(seed) + ": " + describe(half));
  }
  r.check(good >= 4, "Q=10K: " + std::to_string(good) + " of 5 seeds with worst <= 1e-3 and mean <= 1e-4 (need 4)");
  r.check(slowest < 120.0, "Q=10K: slowest run " + fmt(slowest) + " s < 120 s");
  r.check(median(medians2k) <= 1e-4, "Q=2K: median over seeds of the median angle " + fmt(median(medians2k)) +
                                         " <= 1e-4");
  r.check(median(means2k) >= 1e-2, "Q=2K: median over seeds of the mean angle " + fmt(median(means2k)) +
                                       " >= 1e-2 " + list(means2k));
}

void criterion7(Report& r) {
  const long budget = 20 * 2000;
  std::vector<double> qk, q2k, q10k, q20k;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const SyntheticProblem light = gen_union(union_spec(0.1, seed));
    qk.push_back(cluster_run(light, 20, budget, seed).angles.mean);
    q2k.push_back(cluster_run(light, 40, budget, seed).angles.mean);
    const SyntheticProblem heavy = gen_union(union_spec(0.7, seed));
    q10k.push_back(cluster_run(heavy, 200, budget, seed).angles.mean);
    q20k.push_back(cluster_run(heavy, 400, 2 * budget, seed).angles.mean);
  }
  r.check(median(qk) >= 1e-2, "10% outliers, Q=K: median mean angle " + fmt(median(qk)) + " >= 1e-2 " + list(qk));
  r.check(median(q2k) <= 1e-4, "10% outliers, Q=2K: median mean angle " + fmt(median(q2k)) + " <= 1e-4 " + list(q2k));
  r.check(median(q10k) >= 1e-2,
          "70% outliers, Q=10K: median mean angle " + fmt(median(q10k)) + " >= 1e-2 " + list(q10k));
  r.check(median(q20k) <= 1e-3, "70% outliers, Q=20K, doubled budget: median mean angle " + fmt(median(q20k)) +
                                    " <= 1e-3 " + list(q20k));
}

Eigen::MatrixXd gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = n01(rng);
  }
  return m;
}

ObservedVector random_observed(Index n, Index count, Rng& rng) {
  const std::vector<Index> rows = sample_mask(n, static_cast<double>(count) / static_cast<double>(n), rng);
  const Eigen::VectorXd full = gaussian(n, 1, rng).col(0);
  ObservedVector x;
  x.indices = rows;
  x.values.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) x.values(static_cast<Index>(i)) = full(rows[i]);
  return x;
}

void criterion8(Report& r) {
  Rng rng(2024);

  {
    Subspace u = Subspace::from_span(gaussian(20, 4, rng));
    StepRuleConfig c;
    StepController steps(c);
    double worst = 0.0;
    for (long it = 0; it < 100000; ++it) {
      process_vector(u, random_observed(20, 12, rng), steps, it);
      worst = std::max(worst, u.orthonormality_error());
    }
    r.check(worst <= 1e-8, "orthonormality over 1e5 steps " + fmt(worst) + " <= 1e-8");
  }

  double ortho = 0.0, ls = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Subspace u = Subspace::from_span(gaussian(30, 5, rng));
    const ObservedVector x = spherize(random_observed(30, 15, rng));
    const Eigen::VectorXd w = least_squares_weights(u, x);
    const Eigen::MatrixXd a = restricted_basis(u, x.indices);
    const Eigen::VectorXd normal = (a.transpose() * a).inverse() * (a.transpose() * x.values);
    ls = std::max(ls, (w - normal).norm());
    const RankOneGradient g = residual_gradient(u, x, w);
    ortho = std::max(ortho, (u.basis().transpose() * g.e).norm());
  }
  r.check(ortho <= 1e-10, "gradient orthogonal to U " + fmt(ortho) + " <= 1e-10");
  r.check(ls <= 1e-10, "least squares vs normal equations " + fmt(ls) + " <= 1e-10");

  const StepParams p;
  const double s0 = sigmoid(0.0, p);
  const double hi = sigmoid(1e3, p);
  const double lo = sigmoid(-1e3, p);
  r.check(s0 == 0.0 && std::abs(hi - p.f_max) <= 1e-6 && std::abs(lo - p.f_min) <= 1e-6,
          "sigmoid(0) " + fmt(s0) + ", saturation " + fmt(hi) + " and " + fmt(lo));

  double inner = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::VectorXd e1 = gaussian(25, 1, rng).col(0), e2 = gaussian(25, 1, rng).col(0);
    const Eigen::VectorXd w1 = gaussian(4, 1, rng).col(0), w2 = gaussian(4, 1, rng).col(0);
    const double dense = ((e1 * w1.transpose()).array() * (e2 * w2.transpose()).array()).sum();
    inner = std::max(inner, std::abs(gradient_inner_product(e1, w1, e2, w2) - dense) / std::max(1.0, std::abs(dense)));
  }
  r.check(inner <= 1e-12, "rank-one inner product vs dense " + fmt(inner) + " <= 1e-12");

  double worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    UnionSpec s;
    s.k = 3;
    s.d = 3;
    s.n = 40;
    s.inliers_per_subspace = 40;
    s.outlier_fraction = 0.3;
    s.observe_fraction = 0.8;
    s.rng_seed = seed;
    const SyntheticProblem prob = gen_union(s);
    Rng seeding = make_rng(seed, stream::seeding);
    const CandidateSet set = seed_candidates(zero_filled(prob.data), 8, 3, 6, seeding);
    const Eigen::MatrixXd res = kernels::serial::residual_matrix(set.candidates, spherize_all(prob.data.columns));
    auto loss = [&](const std::vector<Index>& rows) {
      double total = 0.0;
      for (Index j = 0; j < res.cols(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (Index c : rows) best = std::min(best, res(c, j));
        total += best;
      }
      return total;
    };
    double best = std::numeric_limits<double>::infinity();
    for (Index a = 0; a < 8; ++a) {
      for (Index b = a + 1; b < 8; ++b) {
        for (Index c = b + 1; c < 8; ++c) best = std::min(best, loss({a, b, c}));
      }
    }
    worst_ratio = std::max(worst_ratio, loss(greedy_select_indices(res, 3)) / best);
  }
  r.check(worst_ratio <= 1.1, "greedy vs exhaustive (Q=8, K=3, 20 seeds) worst ratio " + fmt(worst_ratio) + " <= 1.1");

  {
    std::uniform_int_distribution<int> label(0, 4);
    std::vector<int> truth(300), pred(300);
    std::vector<bool> outliers(300);
    for (std::size_t j = 0; j < truth.size(); ++j) {
      outliers[j] = j % 10 == 0;
      truth[j] = outliers[j] ? kOutlierLabel : label(rng);
      pred[j] = label(rng) < 2 ? label(rng) : std::max(truth[j], 0);
    }
    const double base = segmentation_error(truth, pred, outliers);
    std::vector<int> perm{3, 0, 4, 1, 2};
    bool same = true;
    for (int t = 0; t < 10; ++t) {
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<int> relabelled = pred;
      for (int& l : relabelled) l = perm[static_cast<std::size_t>(l)];
      same = same && segmentation_error(truth, relabelled, outliers) == base;
    }
    r.check(same, "segmentation error invariant under relabelling (" + fmt(base) + "%)");
  }

  {
    const SyntheticProblem prob = low_rank(60, 4, 1, 5, 0.4, 0.6, 3);
    const RunSummary a = recover(prob, 4, 3000, 9, {}, {}, true);
    const RunSummary b = recover(prob, 4, 3000, 9, {}, {}, true);
    r.check(a.trace == b.trace, "identical traces under a fixed seed");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void(Report&)>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                           criterion5, criterion6, criterion7, criterion8};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty()) {
    selected.resize(criteria.size());
    std::iota(selected.begin(), selected.end(), 1);
  }

  bool all = true;
  for (int c : selected) {
    if (c < 1 || c > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    Report report;
    const auto t0 = Clock::now();
    criteria[static_cast<std::size_t>(c - 1)](report);
    std::printf("criterion %d: %s (%.1f s)\n", c, report.ok ? "PASS" : "FAIL", seconds_since(t0));
    for (const std::string& line : report.lines) std::printf("  %s\n", line.c_str());
    std::fflush(stdout);
    all = all && report.ok;
  }
  return all ? 0 : 1;
}
