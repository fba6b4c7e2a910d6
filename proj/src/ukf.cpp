#include "immtrack/ukf.hpp"

#include <cmath>

#include "immtrack/errors.hpp"

namespace immtrack {

namespace {

constexpr int kJitterAttempts = 3;
constexpr double kJitterScale = 1e-9;

// Pivoted-Cholesky square root: returns S with S*S^T = m. Exactly singular
// PSD inputs (zero covariance included) factor cleanly; indefinite ones fail.
bool psd_sqrt(const StateMat& m, StateMat* out) {
    Eigen::LDLT<StateMat> ldlt(m);
    if (ldlt.info() != Eigen::Success) return false;
    StateVec d = ldlt.vectorD();
    const double tol = -1e-12 * std::max(1.0, m.trace());
    for (int i = 0; i < kStateDim; ++i) {
        if (d(i) < tol) return false;
        d(i) = std::sqrt(std::max(d(i), 0.0));
    }
    StateMat l = ldlt.matrixL();
    *out = ldlt.transpositionsP().transpose() * StateMat(l * d.asDiagonal());
    return true;
}

void fill_weights(const UtParams& p, SigmaPoints* sp) {
    const double lambda = p.lambda();
    const double denom = kStateDim + lambda;
    sp->wm.setConstant(1.0 / (2.0 * denom));
    sp->wc.setConstant(1.0 / (2.0 * denom));
    sp->wm(0) = lambda / denom;
    sp->wc(0) = lambda / denom + (1.0 - p.ut_alpha * p.ut_alpha + p.ut_beta);
}

}  // namespace

StateMat symmetrize(const StateMat& p) {
    return (p + p.transpose()) / 2.0;
}

SigmaPoints sigma_points(const Gaussian& g, const UtParams& p) {
    SigmaPoints sp;
    fill_weights(p, &sp);

    const double scale = kStateDim + p.lambda();  // alpha^2 (n + kappa) > 0
    StateMat scaled = scale * g.cov;
    StateMat root;
    bool ok = psd_sqrt(scaled, &root);
    for (int attempt = 0; !ok && attempt < kJitterAttempts; ++attempt) {
        scaled += StateMat::Identity() * (kJitterScale * scaled.trace() / kStateDim);
        ok = psd_sqrt(scaled, &root);
    }
    if (!ok) {
        throw DegeneracyError("sigma_points: covariance not factorizable after jitter");
    }

    sp.points.col(0) = g.mean;
    for (int i = 0; i < kStateDim; ++i) {
        sp.points.col(1 + i) = g.mean + root.col(i);
        sp.points.col(1 + kStateDim + i) = g.mean - root.col(i);
    }
    return sp;
}

Gaussian predict(const Gaussian& g, ModelId model, double dt, const UtParams& p,
                 const NoiseConfig& noise) {
    SigmaPoints sp = sigma_points(g, p);
    for (int i = 0; i < kNumSigmaPoints; ++i) {
        sp.points.col(i) = transition(model, sp.points.col(i), dt);
    }

    Gaussian out;
    out.mean = sp.points * sp.wm;
    StateMat cov = StateMat::Zero();
    for (int i = 0; i < kNumSigmaPoints; ++i) {
        const StateVec d = sp.points.col(i) - out.mean;
        cov += sp.wc(i) * d * d.transpose();
    }
    out.cov = symmetrize(cov + process_noise(model, dt, noise));
    // Overshot extents must not reach box geometry as non-positive sizes.
    out.mean(kIdxW) = std::max(out.mean(kIdxW), 1e-3);
    out.mean(kIdxH) = std::max(out.mean(kIdxH), 1e-3);
    return out;
}

namespace {

bool chol4(const Mat4& s, Eigen::LLT<Mat4>* llt) {
    llt->compute(s);
    return llt->info() == Eigen::Success;
}

}  // namespace

UpdateResult update(const Gaussian& g, const Vec4& z, const Mat4& measurement_noise,
                    const UtParams& p) {
    SigmaPoints sp = sigma_points(g, p);
    Eigen::Matrix<double, kMeasDim, kNumSigmaPoints> zs;
    for (int i = 0; i < kNumSigmaPoints; ++i) {
        zs.col(i) = measurement_fn(sp.points.col(i));
    }

    const Vec4 z_pred = zs * sp.wm;
    Mat4 s = measurement_noise;
    Eigen::Matrix<double, kStateDim, kMeasDim> cross =
        Eigen::Matrix<double, kStateDim, kMeasDim>::Zero();
    for (int i = 0; i < kNumSigmaPoints; ++i) {
        const Vec4 dz = zs.col(i) - z_pred;
        s += sp.wc(i) * dz * dz.transpose();
        cross += sp.wc(i) * (sp.points.col(i) - g.mean) * dz.transpose();
    }
    s = (s + s.transpose()) / 2.0;

    Eigen::LLT<Mat4> llt;
    bool ok = chol4(s, &llt);
    for (int attempt = 0; !ok && attempt < kJitterAttempts; ++attempt) {
        s += Mat4::Identity() * (kJitterScale * s.trace() / kMeasDim);
        ok = chol4(s, &llt);
    }
    if (!ok) {
        throw DegeneracyError("update: singular innovation covariance after jitter");
    }

    const Eigen::Matrix<double, kStateDim, kMeasDim> gain =
        llt.solve(cross.transpose()).transpose();

    UpdateResult r;
    r.innovation = z - z_pred;
    r.innovation_cov = s;
    r.posterior.mean = g.mean + gain * r.innovation;
    r.posterior.cov = symmetrize(g.cov - gain * s * gain.transpose());

    const double d2 = r.innovation.dot(llt.solve(r.innovation));
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    constexpr double kLog2Pi = 1.8378770664093453;
    r.likelihood = std::exp(-0.5 * (d2 + log_det + kMeasDim * kLog2Pi));
    return r;
}

void predict_measurement(const Gaussian& g, const Mat4& measurement_noise,
                         const UtParams& p, Vec4* z_pred, Mat4* s_out) {
    SigmaPoints sp = sigma_points(g, p);
    Eigen::Matrix<double, kMeasDim, kNumSigmaPoints> zs;
    for (int i = 0; i < kNumSigmaPoints; ++i) {
        zs.col(i) = measurement_fn(sp.points.col(i));
    }
    *z_pred = zs * sp.wm;
    Mat4 s = measurement_noise;
    for (int i = 0; i < kNumSigmaPoints; ++i) {
        const Vec4 dz = zs.col(i) - *z_pred;
        s += sp.wc(i) * dz * dz.transpose();
    }
    *s_out = (s + s.transpose()) / 2.0;
}

}  // namespace immtrack
