#pragma once

#include <Eigen/Dense>

#include "immtrack/motion.hpp"

namespace immtrack {

using Mat4 = Eigen::Matrix4d;

struct Gaussian {
    StateVec mean = StateVec::Zero();
    StateMat cov = StateMat::Zero();
};

/// Scaled unscented-transform parameters for the 9-dim state.
struct UtParams {
    double ut_alpha = 0.5;
    double ut_beta = 2.0;
    double ut_kappa = 0.0;

    double lambda() const {
        return ut_alpha * ut_alpha * (kStateDim + ut_kappa) - kStateDim;
    }
};

inline constexpr int kNumSigmaPoints = 2 * kStateDim + 1;

struct SigmaPoints {
    Eigen::Matrix<double, kStateDim, kNumSigmaPoints> points;
    Eigen::Matrix<double, kNumSigmaPoints, 1> wm;  // mean weights
    Eigen::Matrix<double, kNumSigmaPoints, 1> wc;  // covariance weights
};

struct UpdateResult {
    Gaussian posterior;
    double likelihood = 0.0;  // Gaussian density of the innovation under N(0, S)
    Vec4 innovation = Vec4::Zero();
    Mat4 innovation_cov = Mat4::Zero();
};

/// (P + P^T)/2, applied after every covariance-producing step.
StateMat symmetrize(const StateMat& p);

/// 2n+1 scaled sigma points. Factorization is pivoted Cholesky with a
/// jitter-and-retry policy (3 attempts of 1e-9*trace/n on the diagonal);
/// throws DegeneracyError when that fails.
SigmaPoints sigma_points(const Gaussian& g, const UtParams& p);

/// Unscented predict: propagate sigma points through the model transition,
/// re-estimate moments, add process noise.
Gaussian predict(const Gaussian& g, ModelId model, double dt, const UtParams& p,
                 const NoiseConfig& noise);

/// Unscented measurement update with z = [cx, cy, w, h].
UpdateResult update(const Gaussian& g, const Vec4& z, const Mat4& measurement_noise,
                    const UtParams& p);

/// Measurement-space moments of a state Gaussian: predicted measurement and
/// innovation covariance S. Association gates against this.
void predict_measurement(const Gaussian& g, const Mat4& measurement_noise,
                         const UtParams& p, Vec4* z_pred, Mat4* s_out);

}  // namespace immtrack
