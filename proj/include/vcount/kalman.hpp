#pragma once

#include <Eigen/Dense>

#include "vcount/core.hpp"

namespace vcount {

using StateVector = Eigen::Matrix<double, 7, 1>;
using StateMatrix = Eigen::Matrix<double, 7, 7>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;
using MeasurementMatrix = Eigen::Matrix<double, 4, 7>;
using MeasurementCovariance = Eigen::Matrix<double, 4, 4>;

// Noise parameterization of the constant-velocity box filter. Measurement
// noise scales with the measured box; the rest are absolute variances.
struct KalmanConfig {
  double init_position_var = 10.0;     // u, v, s, r at track birth
  double init_rate_var = 1e4;          // u', v', s' at track birth
  double meas_position_factor = 0.05;  // sigma_u = f * width, sigma_v = f * height
  double meas_area_factor = 0.1;       // sigma_s = f * area
  double meas_ratio_factor = 0.05;     // sigma_r = f * aspect
  double process_position_var = 1.0;   // u, v, s, r per frame
  double process_velocity_var = 0.01;  // u', v' per frame
  double process_area_rate_var = 1.0;  // s' per frame

  void validate() const;
};

// Predicted area never drops below this many square pixels.
inline constexpr double kMinPredictedArea = 1.0;

// mean = (u, v, s, r, u', v', s'): center, area, width/height and per-frame rates.
struct KalmanState {
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Identity();
  bool area_clamped = false;  // set by predict when the area floor was applied
};

StateMatrix transition_matrix();
MeasurementMatrix measurement_matrix();
StateMatrix process_noise(const KalmanConfig& cfg);
MeasurementCovariance measurement_noise(const BoundingBox& measured, const KalmanConfig& cfg);
StateMatrix initial_covariance(const KalmanConfig& cfg);

MeasurementVector box_to_measurement(const BoundingBox& box);

KalmanState box_to_state(const BoundingBox& box, const KalmanConfig& cfg = {});

// Throws DegenerateStateError for non-positive or non-finite area/aspect.
BoundingBox state_to_box(const KalmanState& st);

KalmanState predict(const KalmanState& st, const KalmanConfig& cfg = {});

// Throws DegenerateStateError when the innovation covariance is not
// numerically positive definite.
KalmanState update(const KalmanState& st, const BoundingBox& measurement, const KalmanConfig& cfg = {});

}  // namespace vcount
