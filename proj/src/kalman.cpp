#include "vcount/kalman.hpp"

#include <cmath>
#include <string>

#include "vcount/error.hpp"

namespace vcount {

void KalmanConfig::validate() const {
  const double values[] = {init_position_var,    init_rate_var,       meas_position_factor,
                           meas_area_factor,     meas_ratio_factor,   process_position_var,
                           process_velocity_var, process_area_rate_var};
  for (double v : values)
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("kalman noise parameters must be finite and >= 0");
}

StateMatrix transition_matrix() {
  StateMatrix f = StateMatrix::Identity();
  f(0, 4) = 1.0;
  f(1, 5) = 1.0;
  f(2, 6) = 1.0;
  return f;
}

MeasurementMatrix measurement_matrix() {
  MeasurementMatrix h = MeasurementMatrix::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  return h;
}

StateMatrix process_noise(const KalmanConfig& cfg) {
  StateVector d;
  d << cfg.process_position_var, cfg.process_position_var, cfg.process_position_var,
      cfg.process_position_var, cfg.process_velocity_var, cfg.process_velocity_var,
      cfg.process_area_rate_var;
  return d.asDiagonal();
}

MeasurementCovariance measurement_noise(const BoundingBox& measured, const KalmanConfig& cfg) {
  const double w = measured.width(), h = measured.height();
  const double su = cfg.meas_position_factor * w;
  const double sv = cfg.meas_position_factor * h;
  const double ss = cfg.meas_area_factor * w * h;
  const double sr = cfg.meas_ratio_factor * (w / h);
  MeasurementVector d;
  d << su * su, sv * sv, ss * ss, sr * sr;
  return d.asDiagonal();
}

StateMatrix initial_covariance(const KalmanConfig& cfg) {
  StateVector d;
  d << cfg.init_position_var, cfg.init_position_var, cfg.init_position_var, cfg.init_position_var,
      cfg.init_rate_var, cfg.init_rate_var, cfg.init_rate_var;
  return d.asDiagonal();
}

MeasurementVector box_to_measurement(const BoundingBox& box) {
  MeasurementVector z;
  z << 0.5 * (box.x_min + box.x_max), 0.5 * (box.y_min + box.y_max), box.area(),
      box.width() / box.height();
  return z;
}

KalmanState box_to_state(const BoundingBox& box, const KalmanConfig& cfg) {
  validate(box);
  KalmanState st;
  st.mean.setZero();
  st.mean.head<4>() = box_to_measurement(box);
  st.covariance = initial_covariance(cfg);
  return st;
}

BoundingBox state_to_box(const KalmanState& st) {
  const double u = st.mean(0), v = st.mean(1), s = st.mean(2), r = st.mean(3);
  if (!(s > 0.0) || !(r > 0.0) || !std::isfinite(s) || !std::isfinite(r) || !std::isfinite(u) ||
      !std::isfinite(v))
    throw DegenerateStateError("degenerate kalman state: area=" + std::to_string(s) +
                               " aspect=" + std::to_string(r));
  const double w = std::sqrt(s * r);
  const double h = s / w;
  return {u - 0.5 * w, v - 0.5 * h, u + 0.5 * w, v + 0.5 * h};
}

KalmanState predict(const KalmanState& st, const KalmanConfig& cfg) {
  static const StateMatrix f = transition_matrix();
  KalmanState out;
  out.mean = f * st.mean;
  if (out.mean(2) <= 0.0) {
    out.mean(2) = kMinPredictedArea;
    out.area_clamped = true;
  }
  out.covariance = f * st.covariance * f.transpose() + process_noise(cfg);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

KalmanState update(const KalmanState& st, const BoundingBox& measurement, const KalmanConfig& cfg) {
  validate(measurement);
  static const MeasurementMatrix h = measurement_matrix();
  const MeasurementCovariance r = measurement_noise(measurement, cfg);
  const MeasurementCovariance s = h * st.covariance * h.transpose() + r;

  Eigen::LLT<MeasurementCovariance> llt(s);
  if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 1e-12))
    throw DegenerateStateError("innovation covariance is numerically singular; check measurement noise");

  // K = P H^T S^-1, solved as (S^-1 H P)^T since S and P are symmetric.
  const Eigen::Matrix<double, 7, 4> gain = llt.solve(h * st.covariance).transpose();
  const MeasurementVector innovation = box_to_measurement(measurement) - h * st.mean;

  KalmanState out;
  out.mean = st.mean + gain * innovation;
  const StateMatrix i_kh = StateMatrix::Identity() - gain * h;
  out.covariance = i_kh * st.covariance * i_kh.transpose() + gain * r * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

}  // namespace vcount
