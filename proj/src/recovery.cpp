#include "gasg/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gasg {

void Dataset::check() const {
  if (ambient_dim < 1) throw Error(ErrorCode::invalid_shape, "dataset needs ambient_dim >= 1");
  for (const auto& c : columns) c.check(ambient_dim);
}

const char* to_string(StepRule rule) noexcept {
  switch (rule) {
    case StepRule::adaptive: return "adaptive";
    case StepRule::diminishing: return "diminishing";
    case StepRule::constant: return "constant";
    case StepRule::grouse: return "grouse";
  }
  return "unknown";
}

StepRule parse_step_rule(const std::string& name) {
  for (StepRule r : {StepRule::adaptive, StepRule::diminishing, StepRule::constant,
                     StepRule::grouse}) {
    if (name == to_string(r)) return r;
  }
  throw Error(ErrorCode::invalid_spec, "unknown step rule '" + name + "'");
}

StepController::StepController(const StepRuleConfig& config)
    : config_(config), adaptive_(AdaptiveStepState::initial(config.params)) {
  config_.params.validate();
  switch (config_.rule) {
    case StepRule::adaptive:
      eta_ = adaptive_.eta;
      mu_ = adaptive_.mu;
      break;
    case StepRule::diminishing:
      eta_ = diminishing(0, config_.diminishing_scale);
      break;
    case StepRule::constant:
    case StepRule::grouse:
      eta_ = config_.constant_eta;
      break;
  }
}

double StepController::step_angle(const RankOneGradient& g, long iteration) {
  switch (config_.rule) {
    case StepRule::adaptive:
      adaptive_ = adapt(adaptive_, g, config_.params);
      eta_ = adaptive_.eta;
      mu_ = adaptive_.mu;
      level_ = adaptive_.level;
      return eta_ * g.sigma;
    case StepRule::diminishing:
      eta_ = diminishing(iteration, config_.diminishing_scale);
      mu_ = static_cast<double>(iteration);
      return eta_ * g.sigma;
    case StepRule::constant:
      return eta_ * g.sigma;
    case StepRule::grouse:
      // Same direction, but the magnitude of the l2 gradient ||r|| ||w||.
      return eta_ * g.residual_norm * g.sigma;
  }
  return 0.0;
}

bool TraceRecord::operator==(const TraceRecord& o) const {
  const auto same = [](double a, double b) {
    return a == b || (std::isnan(a) && std::isnan(b));
  };
  return iteration == o.iteration && column_id == o.column_id && same(eta, o.eta) &&
         same(mu, o.mu) && level == o.level && same(residual_norm, o.residual_norm) &&
         angle.has_value() == o.angle.has_value() && (!angle || same(*angle, *o.angle)) &&
         skipped == o.skipped;
}

void RecoveryConfig::validate(Index ambient_dim) const {
  if (rank < 1 || rank > ambient_dim) {
    throw Error(ErrorCode::invalid_shape, "rank must lie in [1, n]");
  }
  if (max_iterations < 0) throw Error(ErrorCode::invalid_spec, "max_iterations must be >= 0");
  step.params.validate();
  if (step.rule == StepRule::diminishing && !(step.diminishing_scale > 0.0)) {
    throw Error(ErrorCode::invalid_spec, "diminishing scale must be positive");
  }
  if ((step.rule == StepRule::constant || step.rule == StepRule::grouse) &&
      !(step.constant_eta >= 0.0)) {
    throw Error(ErrorCode::invalid_spec, "constant eta must be non-negative");
  }
  const auto check_shape = [&](const std::optional<Subspace>& s, const char* what) {
    if (s && (s->ambient_dim() != ambient_dim || s->rank() != rank)) {
      throw Error(ErrorCode::shape_mismatch, std::string(what) + " subspace has the wrong shape");
    }
  };
  check_shape(truth, "truth");
  check_shape(initial, "initial");
}

Subspace init_subspace(Index n, Index d, Rng& rng) {
  if (d < 1 || d > n) throw Error(ErrorCode::invalid_shape, "init_subspace needs 1 <= d <= n");
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  return Subspace::from_span(g);
}

namespace {

TraceRecord skipped_record(const StepController& steps, long iteration, Index column,
                           double residual) {
  TraceRecord rec;
  rec.iteration = iteration;
  rec.column_id = column;
  rec.eta = steps.eta();
  rec.mu = steps.mu();
  rec.level = steps.level();
  rec.residual_norm = residual;
  rec.skipped = true;
  return rec;
}

bool usable(const ObservedVector& x, Index rank) {
  return x.observed() >= rank && x.values.norm() >= kZeroVectorNorm;
}

}  // namespace

TraceRecord apply_fit(Subspace& u, const ObservedVector& x, const Projection& fit,
                      StepController& steps, long iteration) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (fit.status != FitStatus::ok) return skipped_record(steps, iteration, x.column_id, nan);
  const RankOneGradient g = gradient_from_projection(u.ambient_dim(), x, fit);
  if (g.degenerate) return skipped_record(steps, iteration, x.column_id, g.residual_norm);

  const double angle = steps.step_angle(g, iteration);
  u = rotate_toward(u, g.e, g.w, angle);

  TraceRecord rec;
  rec.iteration = iteration;
  rec.column_id = x.column_id;
  rec.eta = steps.eta();
  rec.mu = steps.mu();
  rec.level = steps.level();
  rec.residual_norm = g.residual_norm;
  return rec;
}

TraceRecord process_vector(Subspace& u, const ObservedVector& x, StepController& steps,
                           long iteration) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (!usable(x, 1)) return skipped_record(steps, iteration, x.column_id, nan);
  const ObservedVector unit = spherize(x);
  return apply_fit(u, unit, project(u, unit), steps, iteration);
}

ColumnSampler::ColumnSampler(Index columns, Sampling mode, std::uint64_t seed)
    : columns_(columns), mode_(mode), rng_(make_rng(seed, stream::sampling)) {
  if (columns_ < 1) throw Error(ErrorCode::too_few_columns, "cannot sample from no columns");
  if (mode_ == Sampling::cyclic_shuffled) {
    order_.resize(static_cast<std::size_t>(columns_));
    std::iota(order_.begin(), order_.end(), Index{0});
    cursor_ = order_.size();
  }
}

Index ColumnSampler::next() {
  if (mode_ == Sampling::uniform) {
    return std::uniform_int_distribution<Index>(0, columns_ - 1)(rng_);
  }
  if (cursor_ == order_.size()) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    cursor_ = 0;
  }
  return order_[cursor_++];
}

RecoveryResult run(const Dataset& data, const RecoveryConfig& config) {
  config.validate(data.ambient_dim);
  RecoveryResult result;
  if (config.initial) {
    result.subspace = *config.initial;
  } else {
    Rng init_rng = make_rng(config.rng_seed, stream::init);
    result.subspace = init_subspace(data.ambient_dim, config.rank, init_rng);
  }
  if (config.max_iterations == 0) return result;

  const bool any_usable = std::any_of(data.columns.begin(), data.columns.end(),
                                      [&](const ObservedVector& x) { return usable(x, config.rank); });
  if (!any_usable) {
    throw Error(ErrorCode::all_columns_unusable,
                "no column has a nonzero value on at least rank observed rows");
  }

  StepController steps(config.step);
  ColumnSampler sampler(data.size(), config.sampling, config.rng_seed);
  const bool log_angle = config.truth.has_value() && config.trace_angles;
  result.trace.records.reserve(static_cast<std::size_t>(config.max_iterations));

  for (long it = 0; it < config.max_iterations; ++it) {
    const ObservedVector& x = data.columns[static_cast<std::size_t>(sampler.next())];
    TraceRecord rec = process_vector(result.subspace, x, steps, it);
    if (log_angle) rec.angle = principal_angle(*config.truth, result.subspace);
    result.trace.records.push_back(rec);
    if (config.angle_tolerance && config.truth) {
      const double angle = rec.angle ? *rec.angle : principal_angle(*config.truth, result.subspace);
      if (angle <= *config.angle_tolerance) break;
    }
  }
  return result;
}

}  // namespace gasg
