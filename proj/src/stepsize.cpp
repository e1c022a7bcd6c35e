#include "gasg/stepsize.hpp"

#include <algorithm>
#include <cmath>

namespace gasg {

void StepParams::validate() const {
  if (!(f_min < 0.0 && f_max > 0.0)) {
    throw Error(ErrorCode::invalid_spec, "step params need F_min < 0 < F_max");
  }
  if (!(omega > 0.0)) throw Error(ErrorCode::invalid_spec, "step params need omega > 0");
  if (!(mu_min < mu_max)) throw Error(ErrorCode::invalid_spec, "step params need mu_min < mu_max");
  if (!(eta0 > 0.0)) throw Error(ErrorCode::invalid_spec, "step params need eta0 > 0");
}

AdaptiveStepState AdaptiveStepState::initial(const StepParams& p) {
  AdaptiveStepState s;
  s.mu = p.mu_reset();
  s.level = 0;
  s.eta = p.eta0;
  return s;
}

double sigmoid(double x, const StepParams& p) {
  return p.f_min + (p.f_max - p.f_min) / (1.0 - (p.f_max / p.f_min) * std::exp(-x / p.omega));
}

double gradient_inner_product(const Eigen::VectorXd& e1, const Eigen::VectorXd& w1,
                              const Eigen::VectorXd& e2, const Eigen::VectorXd& w2) {
  if (e1.size() != e2.size() || w1.size() != w2.size()) {
    throw Error(ErrorCode::shape_mismatch, "gradients have different shapes");
  }
  return e1.dot(e2) * w1.dot(w2);
}

double gradient_inner_product(const RankOneGradient& previous, const RankOneGradient& current) {
  return gradient_inner_product(previous.e, previous.w, current.e, current.w);
}

AdaptiveStepState adapt(const AdaptiveStepState& state, const RankOneGradient& current,
                        const StepParams& p) {
  AdaptiveStepState next = state;
  if (state.has_previous) {
    const double inner = gradient_inner_product(state.prev_e, state.prev_w, current.e, current.w);
    double mu = std::max(state.mu + sigmoid(-inner, p), p.mu_min);
    if (mu >= p.mu_max) {
      ++next.level;
      mu = p.mu_reset();
    } else if (mu <= p.mu_min) {
      --next.level;
      mu = p.mu_reset();
    }
    next.mu = mu;
    next.eta = std::ldexp(p.eta0, -next.level);
  }
  next.prev_e = current.e;
  next.prev_w = current.w;
  next.has_previous = true;
  return next;
}

double diminishing(long iteration, double scale) {
  return scale / (1.0 + static_cast<double>(iteration));
}

}  // namespace gasg
