#ifndef DECONFUSE_MOTION_HPP_
#define DECONFUSE_MOTION_HPP_

#include <Eigen/Dense>

#include "deconfuse/core.hpp"

namespace deconfuse {

// Noise model following the SORT/ByteTrack convention: position and extent
// standard deviations proportional to box height. The scale factors let
// tests run the filter with (near) zero injected noise.
struct KalmanNoise {
  double position_weight = 1.0 / 20.0;
  double velocity_weight = 1.0 / 160.0;
  double process_scale = 1.0;
  double measurement_scale = 1.0;
};

// Constant-velocity state over (cx, cy, w, h) plus per-component velocities.
struct KalmanState {
  Eigen::Matrix<double, 8, 1> mean = Eigen::Matrix<double, 8, 1>::Zero();
  Eigen::Matrix<double, 8, 8> covariance = Eigen::Matrix<double, 8, 8>::Zero();
};

KalmanState kf_init(const BBox& box, const KalmanNoise& noise = {});
KalmanState kf_predict(const KalmanState& s, const KalmanNoise& noise = {});
// Standard measurement correction with z = (cx, cy, w, h).
// Throws on non-finite measurement.
KalmanState kf_update(const KalmanState& s, const BBox& z,
                      const KalmanNoise& noise = {});

// Box view of the state's position components, extents clamped to stay
// usable as an IoU operand after long predict-only stretches.
BBox state_box(const KalmanState& s);

}  // namespace deconfuse

#endif  // DECONFUSE_MOTION_HPP_
