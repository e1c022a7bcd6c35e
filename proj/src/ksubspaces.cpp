#include "gasg/ksubspaces.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <string>

#include "gasg/kernels.hpp"

namespace gasg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool has_signal(const ObservedVector& x) {
  return x.observed() > 0 && x.values.norm() >= kZeroVectorNorm;
}

double nearest_truth_angle(const Subspace& u, const std::vector<Subspace>& truths) {
  double best = std::numeric_limits<double>::infinity();
  for (const Subspace& t : truths) {
    if (t.ambient_dim() == u.ambient_dim() && t.rank() == u.rank()) {
      best = std::min(best, principal_angle(t, u));
    }
  }
  return best;
}

}  // namespace

std::vector<ObservedVector> spherize_all(std::span<const ObservedVector> columns) {
  std::vector<ObservedVector> out;
  out.reserve(columns.size());
  for (const ObservedVector& x : columns) out.push_back(has_signal(x) ? spherize(x) : x);
  return out;
}

Eigen::MatrixXd zero_filled(const Dataset& data) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(data.ambient_dim, data.size());
  for (Index j = 0; j < data.size(); ++j) {
    const ObservedVector& x = data.columns[static_cast<std::size_t>(j)];
    if (!has_signal(x)) continue;
    const ObservedVector unit = spherize(x);
    for (std::size_t i = 0; i < unit.indices.size(); ++i) {
      z(unit.indices[i], j) = unit.values(static_cast<Index>(i));
    }
  }
  return z;
}

CandidateSet seed_candidates(const Eigen::MatrixXd& z, Index q, Index d, Index neighborhood_size,
                             Rng& rng) {
  const Index m = z.cols();
  if (q < 1 || q > m) {
    throw Error(ErrorCode::too_few_columns,
                "need 1 <= Q <= " + std::to_string(m) + " columns, got Q = " + std::to_string(q));
  }
  if (d < 1 || d > z.rows()) throw Error(ErrorCode::invalid_shape, "candidate rank out of range");

  CandidateSet set;
  set.neighborhood_size = neighborhood_size;
  std::vector<double> min_d2(static_cast<std::size_t>(m), std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(static_cast<std::size_t>(m), false);

  const auto pick = [&](Index j) {
    set.seed_columns.push_back(j);
    chosen[static_cast<std::size_t>(j)] = true;
    kernels::omp::update_min_sq_distance(z, j, min_d2);
  };

  pick(std::uniform_int_distribution<Index>(0, m - 1)(rng));
  while (static_cast<Index>(set.seed_columns.size()) < q) {
    double total = 0.0;
    for (Index j = 0; j < m; ++j) {
      if (!chosen[static_cast<std::size_t>(j)]) total += min_d2[static_cast<std::size_t>(j)];
    }
    Index next = -1;
    if (total > 0.0) {
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double cumulative = 0.0;
      for (Index j = 0; j < m; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (chosen[k] || min_d2[k] <= 0.0) continue;
        cumulative += min_d2[k];
        next = j;
        if (cumulative > target) break;
      }
    } else {
      // Every remaining column coincides with a seed: draw uniformly.
      const Index remaining = m - static_cast<Index>(set.seed_columns.size());
      Index skip = std::uniform_int_distribution<Index>(0, remaining - 1)(rng);
      for (Index j = 0; j < m; ++j) {
        if (chosen[static_cast<std::size_t>(j)]) continue;
        if (skip-- == 0) {
          next = j;
          break;
        }
      }
    }
    pick(next);
  }

  set.candidates = kernels::omp::local_fits(z, set.seed_columns, neighborhood_size, d);
  return set;
}

double candidate_loss(const Subspace& s, std::span<const ObservedVector> columns) {
  double total = 0.0;
  for (const ObservedVector& x : columns) total += kernels::fit_residual(s, x);
  return total;
}

std::vector<Index> greedy_select_indices(const Eigen::MatrixXd& residuals, Index k) {
  const Index q = residuals.rows();
  if (k < 1 || k > q) {
    throw Error(ErrorCode::invalid_spec,
                "cannot select K = " + std::to_string(k) + " of " + std::to_string(q) + " candidates");
  }
  std::vector<double> current(static_cast<std::size_t>(residuals.cols()),
                              std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(static_cast<std::size_t>(q), false);
  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(k));
  while (static_cast<Index>(picked.size()) < k) {
    const Eigen::VectorXd totals = kernels::omp::facility_totals(residuals, current, chosen);
    Index best = 0;
    for (Index c = 1; c < q; ++c) {
      if (totals(c) < totals(best)) best = c;
    }
    picked.push_back(best);
    chosen[static_cast<std::size_t>(best)] = true;
    for (Index j = 0; j < residuals.cols(); ++j) {
      auto& cur = current[static_cast<std::size_t>(j)];
      cur = std::min(cur, residuals(best, j));
    }
  }
  return picked;
}

std::vector<Subspace> greedy_select(const CandidateSet& candidates,
                                    std::span<const ObservedVector> columns, Index k) {
  const Eigen::MatrixXd residuals = kernels::omp::residual_matrix(candidates.candidates, columns);
  std::vector<Subspace> out;
  for (Index c : greedy_select_indices(residuals, k)) {
    out.push_back(candidates.candidates[static_cast<std::size_t>(c)]);
  }
  return out;
}

Assignment assign_vector(const ObservedVector& x, std::span<const Subspace> subspaces) {
  if (subspaces.empty()) throw Error(ErrorCode::invalid_spec, "no subspaces to assign to");
  Index max_rank = 0;
  for (const Subspace& s : subspaces) max_rank = std::max(max_rank, s.rank());
  if (x.observed() < max_rank) {
    throw Error(ErrorCode::underdetermined,
                "column " + std::to_string(x.column_id) + " has too few observed rows");
  }
  Assignment best;
  best.residual = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < subspaces.size(); ++i) {
    Projection fit = project(subspaces[i], x);
    if (fit.status != FitStatus::ok) continue;
    if (!found || fit.residual_norm < best.residual) {
      best.index = static_cast<Index>(i);
      best.weights = std::move(fit.weights);
      best.residual = fit.residual_norm;
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::rank_deficient,
                "column " + std::to_string(x.column_id) + " cannot be fitted by any subspace");
  }
  return best;
}

RefineResult refine(std::vector<Subspace> subspaces, const Dataset& data,
                    const RefineConfig& config) {
  if (subspaces.empty()) throw Error(ErrorCode::invalid_spec, "refine needs at least one subspace");
  for (const Subspace& s : subspaces) {
    if (s.ambient_dim() != data.ambient_dim) {
      throw Error(ErrorCode::shape_mismatch, "subspace ambient dimension differs from the data");
    }
  }
  RefineResult result;
  result.traces.resize(subspaces.size());
  if (config.max_iterations <= 0) {
    result.subspaces = std::move(subspaces);
    return result;
  }

  std::vector<StepController> controllers(subspaces.size(), StepController(config.step));
  ColumnSampler sampler(data.size(), config.sampling, config.rng_seed);
  const bool log_angle = !config.truths.empty();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Projection> fits(subspaces.size());

  const auto log_skip = [&](long it, Index column) {
    for (std::size_t i = 0; i < subspaces.size(); ++i) {
      TraceRecord rec;
      rec.iteration = it;
      rec.column_id = column;
      rec.eta = controllers[i].eta();
      rec.mu = controllers[i].mu();
      rec.level = controllers[i].level();
      rec.residual_norm = nan;
      rec.skipped = true;
      if (log_angle) rec.angle = nearest_truth_angle(subspaces[i], config.truths);
      result.traces[i].records.push_back(rec);
    }
  };

  for (long it = 0; it < config.max_iterations; ++it) {
    const ObservedVector& x = data.columns[static_cast<std::size_t>(sampler.next())];
    if (!has_signal(x)) {
      log_skip(it, x.column_id);
      continue;
    }
    const ObservedVector unit = spherize(x);
    std::size_t winner = subspaces.size();
    for (std::size_t i = 0; i < subspaces.size(); ++i) {
      fits[i] = project(subspaces[i], unit);
      if (fits[i].status != FitStatus::ok) continue;
      if (winner == subspaces.size() || fits[i].residual_norm < fits[winner].residual_norm) winner = i;
    }
    if (winner == subspaces.size()) {
      log_skip(it, x.column_id);
      continue;
    }
    TraceRecord rec = apply_fit(subspaces[winner], unit, fits[winner], controllers[winner], it);
    if (log_angle) rec.angle = nearest_truth_angle(subspaces[winner], config.truths);
    result.traces[winner].records.push_back(rec);
  }
  result.subspaces = std::move(subspaces);
  return result;
}

void ClusterConfig::validate(const Dataset& data) const {
  if (k < 1) throw Error(ErrorCode::invalid_spec, "K must be positive");
  if (rank < 1 || rank > data.ambient_dim) throw Error(ErrorCode::invalid_shape, "rank out of range");
  if (max_iterations < 0) throw Error(ErrorCode::invalid_spec, "max_iterations must be >= 0");
  if (!initial.empty()) {
    if (static_cast<Index>(initial.size()) != k) {
      throw Error(ErrorCode::shape_mismatch, "initial subspaces must number K");
    }
    return;
  }
  if (q < k) throw Error(ErrorCode::invalid_spec, "Q must be at least K");
  if (q > data.size()) throw Error(ErrorCode::too_few_columns, "Q exceeds the number of columns");
}

ClusterResult cluster(const Dataset& data, const ClusterConfig& config) {
  config.validate(data);
  ClusterResult result;
  const std::vector<ObservedVector> unit = spherize_all(data.columns);

  std::vector<Subspace> start;
  if (!config.initial.empty()) {
    start = config.initial;
  } else {
    auto t0 = Clock::now();
    Rng rng = make_rng(config.rng_seed, stream::seeding);
    const Index neighbors = config.neighborhood_size > 0 ? config.neighborhood_size : config.rank + 3;
    const CandidateSet candidates = seed_candidates(zero_filled(data), config.q, config.rank, neighbors, rng);
    result.timings.seeding_seconds = seconds_since(t0);

    t0 = Clock::now();
    const Eigen::MatrixXd residuals = kernels::omp::residual_matrix(candidates.candidates, unit);
    result.selected_candidates = greedy_select_indices(residuals, config.k);
    for (Index c : result.selected_candidates) {
      start.push_back(candidates.candidates[static_cast<std::size_t>(c)]);
    }
    result.timings.selection_seconds = seconds_since(t0);
  }

  const auto t0 = Clock::now();
  RefineConfig rc;
  rc.max_iterations = config.max_iterations;
  rc.step = config.step;
  rc.rng_seed = config.rng_seed;
  rc.sampling = config.sampling;
  rc.truths = config.truths;
  RefineResult refined = refine(std::move(start), data, rc);
  result.timings.refine_seconds = seconds_since(t0);

  kernels::AssignmentPass pass = kernels::omp::assign_columns(refined.subspaces, unit);
  result.model.subspaces = std::move(refined.subspaces);
  result.model.assignments = std::move(pass.labels);
  result.model.residuals = std::move(pass.residuals);
  result.traces = std::move(refined.traces);
  return result;
}

}  // namespace gasg
