#include "ppfa/pipeline.hpp"

#include "ppfa/error.hpp"

namespace ppfa {

TrainResult train_model(const Eigen::MatrixXd& raw, const EmConfig& cfg, double alpha)
{
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw config_error("alpha must lie in (0, 1)");
  }
  cfg.validate(raw.cols());

  TrainResult out;
  out.model.whitening = fit_whitening(raw);
  const Eigen::MatrixXd X = out.model.whitening.apply_rows(raw);

  FitResult fitted = fit(X, cfg);
  out.model.params = std::move(fitted.params);
  out.trace = std::move(fitted.trace);
  validate(out.model.params);

  out.log_likelihood = log_likelihood(out.model.params, X);
  out.model.dynamics = estimate_D(e_step(out.model.params, X));
  out.model.limits = calibrate(out.model.params, out.model.dynamics, X, alpha);
  return out;
}

} // namespace ppfa
