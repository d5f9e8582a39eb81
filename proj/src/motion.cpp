#include "deconfuse/motion.hpp"

#include <cmath>
#include <stdexcept>

namespace deconfuse {

namespace {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

Mat8 transition() {
  Mat8 f = Mat8::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

void symmetrize(Mat8& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

KalmanState kf_init(const BBox& box, const KalmanNoise& noise) {
  KalmanState s;
  s.mean << box.cx, box.cy, box.w, box.h, 0.0, 0.0, 0.0, 0.0;
  const double h = box.h;
  Vec8 std;
  const double sp = 2.0 * noise.position_weight * h;
  const double sv = 10.0 * noise.velocity_weight * h;
  std << sp, sp, sp, sp, sv, sv, sv, sv;
  s.covariance = std.array().square().matrix().asDiagonal();
  return s;
}

KalmanState kf_predict(const KalmanState& s, const KalmanNoise& noise) {
  const Mat8 f = transition();
  const double h = s.mean(3);
  const double sp = noise.position_weight * h * noise.process_scale;
  const double sv = noise.velocity_weight * h * noise.process_scale;
  Vec8 std;
  std << sp, sp, sp, sp, sv, sv, sv, sv;

  KalmanState out;
  out.mean = f * s.mean;
  out.covariance = f * s.covariance * f.transpose();
  out.covariance += Mat8(std.array().square().matrix().asDiagonal());
  symmetrize(out.covariance);
  return out;
}

KalmanState kf_update(const KalmanState& s, const BBox& z,
                      const KalmanNoise& noise) {
  Vec4 meas;
  meas << z.cx, z.cy, z.w, z.h;
  if (!meas.allFinite()) {
    throw std::invalid_argument("kf_update: non-finite measurement");
  }

  const double h = s.mean(3);
  const double sm = noise.position_weight * h * noise.measurement_scale;
  Vec4 rstd;
  rstd << sm, sm, sm, sm;
  const Mat4 r = rstd.array().square().matrix().asDiagonal();

  // H = [I4 0], so projections are plain block reads.
  const Mat4 innovation_cov = s.covariance.topLeftCorner<4, 4>() + r;
  const Eigen::Matrix<double, 8, 4> pht = s.covariance.leftCols<4>();
  const Eigen::Matrix<double, 8, 4> gain =
      innovation_cov.ldlt().solve(pht.transpose()).transpose();

  KalmanState out;
  out.mean = s.mean + gain * (meas - s.mean.head<4>());
  out.covariance = s.covariance - gain * innovation_cov * gain.transpose();
  symmetrize(out.covariance);
  return out;
}

BBox state_box(const KalmanState& s) {
  constexpr double kMinExtent = 1e-6;
  return BBox{s.mean(0), s.mean(1), std::max(s.mean(2), kMinExtent),
              std::max(s.mean(3), kMinExtent)};
}

}  // namespace deconfuse
