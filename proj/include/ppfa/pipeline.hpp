#pragma once

#include "ppfa/em_trainer.hpp"
#include "ppfa/monitoring.hpp"

namespace ppfa {

struct TrainResult
{
  PpfaModel model;
  TrainingTrace trace;
  double log_likelihood = 0.0; // of the returned parameters, whitened units
};

/// Offline stage on raw normal data: whitening, EM, D from the final
/// smoothed moments, and KDE control limits at confidence `alpha`.
TrainResult train_model(const Eigen::MatrixXd& raw, const EmConfig& cfg, double alpha);

} // namespace ppfa
