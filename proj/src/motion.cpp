#include "immtrack/motion.hpp"

#include <cmath>

namespace immtrack {

namespace {

// Diagonal floor for state components a model leaves untouched.
constexpr double kQFloor = 1e-12;

// Per-axis (pos, vel) block for a white-noise-acceleration random walk.
void add_pos_vel_noise(StateMat& q, double sigma2, double dt, int pos, int vel) {
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    q(pos, pos) += sigma2 * dt3 / 3.0;
    q(pos, vel) += sigma2 * dt2 / 2.0;
    q(vel, pos) += sigma2 * dt2 / 2.0;
    q(vel, vel) += sigma2 * dt;
}

// Per-axis (pos, vel, acc) block for a white-noise-jerk random walk.
void add_pos_vel_acc_noise(StateMat& q, double sigma2, double dt, int pos, int vel, int acc) {
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    const double dt4 = dt3 * dt;
    const double dt5 = dt4 * dt;
    q(pos, pos) += sigma2 * dt5 / 20.0;
    q(pos, vel) += sigma2 * dt4 / 8.0;
    q(vel, pos) += sigma2 * dt4 / 8.0;
    q(pos, acc) += sigma2 * dt3 / 6.0;
    q(acc, pos) += sigma2 * dt3 / 6.0;
    q(vel, vel) += sigma2 * dt3 / 3.0;
    q(vel, acc) += sigma2 * dt2 / 2.0;
    q(acc, vel) += sigma2 * dt2 / 2.0;
    q(acc, acc) += sigma2 * dt;
}

}  // namespace

const char* model_name(ModelId m) {
    switch (m) {
        case ModelId::kCv: return "CV";
        case ModelId::kCa: return "CA";
        case ModelId::kCt: return "CT";
    }
    return "?";
}

StateVec transition(ModelId model, const StateVec& s, double dt) {
    StateVec out = s;
    switch (model) {
        case ModelId::kCv:
            out(kIdxCx) += s(kIdxVx) * dt;
            out(kIdxCy) += s(kIdxVy) * dt;
            break;
        case ModelId::kCa: {
            const double half_dt2 = 0.5 * dt * dt;
            out(kIdxCx) += s(kIdxVx) * dt + s(kIdxAx) * half_dt2;
            out(kIdxCy) += s(kIdxVy) * dt + s(kIdxAy) * half_dt2;
            out(kIdxVx) += s(kIdxAx) * dt;
            out(kIdxVy) += s(kIdxAy) * dt;
            break;
        }
        case ModelId::kCt: {
            const double omega = s(kIdxOmega);
            const double theta = omega * dt;
            double sin_term;  // sin(w dt) / w
            double cos_term;  // (1 - cos(w dt)) / w
            if (std::abs(theta) < 1e-6) {
                // Series limit; exact CV at omega = 0.
                sin_term = dt * (1.0 - theta * theta / 6.0);
                cos_term = 0.5 * omega * dt * dt;
            } else {
                sin_term = std::sin(theta) / omega;
                cos_term = (1.0 - std::cos(theta)) / omega;
            }
            const double vx = s(kIdxVx);
            const double vy = s(kIdxVy);
            out(kIdxCx) += vx * sin_term - vy * cos_term;
            out(kIdxCy) += vx * cos_term + vy * sin_term;
            const double c = std::cos(theta);
            const double sn = std::sin(theta);
            out(kIdxVx) = vx * c - vy * sn;
            out(kIdxVy) = vx * sn + vy * c;
            break;
        }
    }
    return out;
}

Vec4 measurement_fn(const StateVec& s) {
    return Vec4(s(kIdxCx), s(kIdxCy), s(kIdxW), s(kIdxH));
}

StateMat process_noise(ModelId model, double dt, const NoiseConfig& cfg) {
    StateMat q = StateMat::Zero();
    const double s_vel2 = cfg.sigma_cv_vel * cfg.sigma_cv_vel;
    const double s_acc2 = cfg.sigma_ca_acc * cfg.sigma_ca_acc;
    const double s_omega2 = cfg.sigma_ct_omega * cfg.sigma_ct_omega;
    const double s_wh2 = cfg.sigma_wh * cfg.sigma_wh;

    switch (model) {
        case ModelId::kCv:
            add_pos_vel_noise(q, s_vel2, dt, kIdxCx, kIdxVx);
            add_pos_vel_noise(q, s_vel2, dt, kIdxCy, kIdxVy);
            q(kIdxAx, kIdxAx) = kQFloor;
            q(kIdxAy, kIdxAy) = kQFloor;
            q(kIdxOmega, kIdxOmega) = kQFloor;
            break;
        case ModelId::kCa:
            add_pos_vel_acc_noise(q, s_acc2, dt, kIdxCx, kIdxVx, kIdxAx);
            add_pos_vel_acc_noise(q, s_acc2, dt, kIdxCy, kIdxVy, kIdxAy);
            q(kIdxOmega, kIdxOmega) = kQFloor;
            break;
        case ModelId::kCt:
            // Speed noise shares the velocity scale; turn rate random-walks.
            add_pos_vel_noise(q, s_vel2, dt, kIdxCx, kIdxVx);
            add_pos_vel_noise(q, s_vel2, dt, kIdxCy, kIdxVy);
            q(kIdxOmega, kIdxOmega) = s_omega2 * dt;
            q(kIdxAx, kIdxAx) = kQFloor;
            q(kIdxAy, kIdxAy) = kQFloor;
            break;
    }
    q(kIdxW, kIdxW) = s_wh2 * dt;
    q(kIdxH, kIdxH) = s_wh2 * dt;
    return q;
}

}  // namespace immtrack
