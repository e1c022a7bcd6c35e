#pragma once

#include <Eigen/Dense>

#include "gasg/grassmann.hpp"

namespace gasg {

/// Constants of the multi-level adaptive step-size controller.
struct StepParams {
  double f_max = 0.5;
  double f_min = -1.0;
  double omega = 0.1;
  double mu_min = 0.0;
  double mu_max = 15.0;
  double eta0 = 1.0;

  /// Throws InvalidSpec unless f_min < 0 < f_max, omega > 0, mu_min < mu_max
  /// and eta0 > 0.
  void validate() const;

  /// Value mu is reset to after a level change, also used as the initial mu.
  double mu_reset() const noexcept { return 0.5 * (mu_min + mu_max); }
};

/// Controller state. The previous gradient is kept as its two rank-one
/// factors, so the state is O(n + d).
struct AdaptiveStepState {
  double mu = 7.5;
  int level = 0;
  double eta = 1.0;  // always eta0 * 2^-level
  bool has_previous = false;
  Eigen::VectorXd prev_e;
  Eigen::VectorXd prev_w;

  static AdaptiveStepState initial(const StepParams& p);
};

/// F_min + (F_max - F_min) / (1 - (F_max / F_min) exp(-x / omega)).
double sigmoid(double x, const StepParams& p);

/// Frobenius inner product <-e1 w1^T, -e2 w2^T> = (e1.e2)(w1.w2).
double gradient_inner_product(const Eigen::VectorXd& e1, const Eigen::VectorXd& w1,
                              const Eigen::VectorXd& e2, const Eigen::VectorXd& w2);
double gradient_inner_product(const RankOneGradient& previous, const RankOneGradient& current);

/// One controller update with the current gradient. The first call only
/// records the gradient. Otherwise mu moves by sigmoid(-<g_prev, g_cur>),
/// crossing mu_max raises the level (halving eta), reaching mu_min lowers it
/// (doubling eta), and mu is reset after either.
AdaptiveStepState adapt(const AdaptiveStepState& state, const RankOneGradient& current,
                        const StepParams& p);

/// Classic C / (1 + j) schedule.
double diminishing(long iteration, double scale);

}  // namespace gasg
