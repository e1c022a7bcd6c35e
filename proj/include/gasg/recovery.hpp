#pragma once

// Single-subspace robust recovery: stochastic L2,1 descent on the
// Grassmannian with the adaptive multi-level step size, plus the diminishing,
// constant and GROUSE-style step rules used as baselines.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gasg/grassmann.hpp"
#include "gasg/rng.hpp"
#include "gasg/stepsize.hpp"

namespace gasg {

/// A collection of possibly incomplete columns of an n-row matrix.
struct Dataset {
  Index ambient_dim = 0;
  std::vector<ObservedVector> columns;

  Index size() const noexcept { return static_cast<Index>(columns.size()); }
  void check() const;
};

enum class StepRule { adaptive, diminishing, constant, grouse };
enum class Sampling { uniform, cyclic_shuffled };

const char* to_string(StepRule rule) noexcept;
StepRule parse_step_rule(const std::string& name);

struct StepRuleConfig {
  StepRule rule = StepRule::adaptive;
  StepParams params;
  double diminishing_scale = 1.0;
  double constant_eta = 1.0;
};

/// Turns gradients into rotation angles according to the configured rule.
class StepController {
 public:
  explicit StepController(const StepRuleConfig& config);

  /// Consumes the gradient of iteration `iteration` and returns the geodesic
  /// angle to rotate by.
  double step_angle(const RankOneGradient& g, long iteration);

  double eta() const noexcept { return eta_; }
  double mu() const noexcept { return mu_; }
  int level() const noexcept { return level_; }
  const AdaptiveStepState& adaptive_state() const noexcept { return adaptive_; }

 private:
  StepRuleConfig config_;
  AdaptiveStepState adaptive_;
  double eta_ = 0.0;
  double mu_ = 0.0;
  int level_ = 0;
};

struct TraceRecord {
  long iteration = 0;
  Index column_id = 0;
  double eta = 0.0;
  double mu = 0.0;
  int level = 0;
  double residual_norm = 0.0;  // NaN when the column could not be fitted
  std::optional<double> angle;
  bool skipped = false;

  bool operator==(const TraceRecord& other) const;
};

struct RunTrace {
  std::vector<TraceRecord> records;

  bool operator==(const RunTrace& other) const = default;
};

struct RecoveryConfig {
  Index rank = 1;
  StepRuleConfig step;
  long max_iterations = 1;
  std::uint64_t rng_seed = 1;
  Sampling sampling = Sampling::uniform;
  std::optional<Subspace> truth;
  bool trace_angles = true;              // only meaningful with a truth
  std::optional<double> angle_tolerance; // stop once angle <= tolerance
  std::optional<Subspace> initial;       // overrides init_subspace

  void validate(Index ambient_dim) const;
};

/// Orthonormalised standard-Gaussian n x d matrix. Throws InvalidShape.
Subspace init_subspace(Index n, Index d, Rng& rng);

/// One update with an observed column. On zero, underdetermined, rank
/// deficient or already-fitted columns the subspace is left alone and the
/// record is flagged skipped.
TraceRecord process_vector(Subspace& u, const ObservedVector& x, StepController& steps,
                           long iteration);

/// Applies the update for an existing fit of the spherized column `x`.
/// Shared by the single and K-subspace drivers.
TraceRecord apply_fit(Subspace& u, const ObservedVector& x, const Projection& fit,
                      StepController& steps, long iteration);

struct RecoveryResult {
  Subspace subspace;
  RunTrace trace;
};

/// Runs max_iterations updates on columns drawn with the seeded sampler.
/// Throws AllColumnsUnusable if no column can ever be fitted.
RecoveryResult run(const Dataset& data, const RecoveryConfig& config);

/// Streams of column indices for the two sampling modes.
class ColumnSampler {
 public:
  ColumnSampler(Index columns, Sampling mode, std::uint64_t seed);
  Index next();

 private:
  Index columns_;
  Sampling mode_;
  Rng rng_;
  std::vector<Index> order_;
  std::size_t cursor_ = 0;
};

}  // namespace gasg
