#include "immtrack/imm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "immtrack/errors.hpp"

namespace immtrack {

namespace {

constexpr double kProbFloor = 1e-300;
constexpr double kDominanceRatio = 10.0;
constexpr int kDominanceFrames = 3;
constexpr double kSharpSelf = 0.98;

double box_diagonal(const StateVec& mean) {
    return std::hypot(mean(kIdxW), mean(kIdxH));
}

}  // namespace

Mat3 sharpen_tpm(const Mat3& base, int model) {
    Mat3 out = base;
    const double off = 1.0 - base(model, model);
    // "Raise to": an already-sharper row stays put.
    if (off <= 0.0 || base(model, model) >= kSharpSelf) return out;
    const double scale = (1.0 - kSharpSelf) / off;
    for (int j = 0; j < kNumModels; ++j) {
        out(model, j) = (j == model) ? kSharpSelf : base(model, j) * scale;
    }
    return out;
}

Mat3 ImmConfig::tpm_from_self(double self) {
    const double off = (1.0 - self) / (kNumModels - 1);
    Mat3 m = Mat3::Constant(off);
    m.diagonal().setConstant(self);
    return m;
}

ImmState make_imm_state(const Gaussian& init, const ImmConfig& cfg) {
    ImmState s;
    s.models.fill(init);
    s.mu = cfg.mu_init;
    s.tpm = cfg.tpm;
    s.combined = combined_estimate(s.models, s.mu);
    s.uncertainty = std::sqrt(std::max(0.0, s.combined.cov(kIdxCx, kIdxCx) +
                                                s.combined.cov(kIdxCy, kIdxCy))) /
                    std::max(box_diagonal(s.combined.mean), 1e-9);
    return s;
}

MixResult mix(const ImmState& s) {
    MixResult r;
    r.c = s.tpm.transpose() * s.mu;

    const Gaussian fallback = combined_estimate(s.models, s.mu);
    for (int j = 0; j < kNumModels; ++j) {
        if (r.c(j) < kProbFloor) {
            r.mixed[j] = fallback;
            continue;
        }
        Vec3 w;  // mixing weights mu_{i|j}
        for (int i = 0; i < kNumModels; ++i) {
            w(i) = s.tpm(i, j) * s.mu(i) / r.c(j);
        }
        StateVec mean = StateVec::Zero();
        for (int i = 0; i < kNumModels; ++i) {
            mean += w(i) * s.models[i].mean;
        }
        StateMat cov = StateMat::Zero();
        for (int i = 0; i < kNumModels; ++i) {
            const StateVec d = s.models[i].mean - mean;
            cov += w(i) * (s.models[i].cov + d * d.transpose());
        }
        r.mixed[j].mean = mean;
        r.mixed[j].cov = symmetrize(cov);
    }
    return r;
}

Gaussian combined_estimate(const std::array<Gaussian, kNumModels>& models, const Vec3& mu) {
    Gaussian g;
    for (int j = 0; j < kNumModels; ++j) {
        g.mean += mu(j) * models[j].mean;
    }
    StateMat cov = StateMat::Zero();
    for (int j = 0; j < kNumModels; ++j) {
        const StateVec d = models[j].mean - g.mean;
        cov += mu(j) * (models[j].cov + d * d.transpose());
    }
    g.cov = symmetrize(cov);
    return g;
}

Gaussian combined_estimate(const ImmState& s) {
    return combined_estimate(s.models, s.mu);
}

ImmState step(const ImmState& s, const std::optional<Vec4>& z, double dt,
              const ImmConfig& cfg, const UtParams& ut, const NoiseConfig& noise,
              const Mat4& measurement_noise) {
    const MixResult mr = mix(s);

    ImmState out = s;
    Vec3 likelihood = Vec3::Ones();
    for (int j = 0; j < kNumModels; ++j) {
        const ModelId model = static_cast<ModelId>(j);
        try {
            Gaussian predicted = predict(mr.mixed[j], model, dt, ut, noise);
            if (z) {
                UpdateResult u = update(predicted, *z, measurement_noise, ut);
                out.models[j] = u.posterior;
                likelihood(j) = std::max(u.likelihood, kProbFloor);
            } else {
                out.models[j] = predicted;
            }
        } catch (const DegeneracyError& e) {
            throw DegeneracyError(std::string(e.what()) + " [model " + model_name(model) + "]");
        }
    }

    if (z) {
        Vec3 mu = likelihood.cwiseProduct(mr.c);
        const double total = mu.sum();
        out.mu = (total > 0.0) ? Vec3(mu / total) : Vec3::Constant(1.0 / kNumModels);
    }
    // Coasting keeps mu frozen: no likelihood evidence to re-weight with.

    if (cfg.adaptive_tpm && z) {
        int best = 0;
        likelihood.maxCoeff(&best);
        bool dominant = true;
        for (int j = 0; j < kNumModels; ++j) {
            if (j != best && likelihood(best) < kDominanceRatio * likelihood(j)) {
                dominant = false;
            }
        }
        for (int j = 0; j < kNumModels; ++j) {
            out.dominance_run[j] = (dominant && j == best) ? out.dominance_run[j] + 1 : 0;
        }
        out.tpm = cfg.tpm;
        if (dominant && out.dominance_run[best] >= kDominanceFrames) {
            out.tpm = sharpen_tpm(cfg.tpm, best);
        }
    } else {
        out.tpm = cfg.tpm;
        if (!z) out.dominance_run = s.dominance_run;
    }

    out.combined = combined_estimate(out.models, out.mu);
    out.uncertainty = std::sqrt(std::max(0.0, out.combined.cov(kIdxCx, kIdxCx) +
                                                  out.combined.cov(kIdxCy, kIdxCy))) /
                      std::max(box_diagonal(out.combined.mean), 1e-9);
    return out;
}

ManeuverScore maneuver_score(std::span<const Vec3> mu_history, const ImmConfig& cfg) {
    ManeuverScore ms;
    if (mu_history.empty()) {
        ms.score = 1.0;
        ms.is_stable = false;
        return ms;
    }
    const std::size_t window = std::min<std::size_t>(mu_history.size(), cfg.stability_window);
    double mean_cv = 0.0;
    for (std::size_t i = mu_history.size() - window; i < mu_history.size(); ++i) {
        mean_cv += mu_history[i](static_cast<int>(ModelId::kCv));
    }
    mean_cv /= static_cast<double>(window);
    ms.score = 1.0 - mean_cv;
    ms.is_stable = mean_cv >= cfg.theta_stable;
    return ms;
}

}  // namespace immtrack
