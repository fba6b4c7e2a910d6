#include "immtrack/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "immtrack/errors.hpp"

namespace immtrack {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void key_error(const std::string& key, const std::string& what) {
    throw ParseError("config key '" + key + "': " + what);
}

double to_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        key_error(key, "expected a number, got '" + value + "'");
    }
    return v;
}

long long to_int(const std::string& key, const std::string& value) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        key_error(key, "expected an integer, got '" + value + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "on" || value == "1") return true;
    if (value == "false" || value == "off" || value == "0") return false;
    key_error(key, "expected true/false, got '" + value + "'");
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

void parse_lines(std::istream& in, const std::map<std::string, Setter>& setters) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                             "'");
        }
        it->second(key, value);
    }
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ParseError("config: " + message);
}

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

PipelineConfig load_pipeline_config(std::istream& in) {
    PipelineConfig cfg;
    double tpm_self = -1.0;  // sentinel: only rebuild the matrix if set

    const auto dbl = [](double* field) {
        return [field](const std::string& key, const std::string& value) {
            *field = to_double(key, value);
        };
    };
    const auto intval = [](int* field) {
        return [field](const std::string& key, const std::string& value) {
            *field = static_cast<int>(to_int(key, value));
        };
    };
    const auto boolean = [](bool* field) {
        return [field](const std::string& key, const std::string& value) {
            *field = to_bool(key, value);
        };
    };

    const std::map<std::string, Setter> setters = {
        {"ut_alpha", dbl(&cfg.ut.ut_alpha)},
        {"ut_beta", dbl(&cfg.ut.ut_beta)},
        {"ut_kappa", dbl(&cfg.ut.ut_kappa)},
        {"sigma_cv_vel", dbl(&cfg.noise.sigma_cv_vel)},
        {"sigma_ca_acc", dbl(&cfg.noise.sigma_ca_acc)},
        {"sigma_ct_omega", dbl(&cfg.noise.sigma_ct_omega)},
        {"sigma_wh", dbl(&cfg.noise.sigma_wh)},
        {"r_pos", dbl(&cfg.r_pos)},
        {"r_wh", dbl(&cfg.r_wh)},
        {"dt", dbl(&cfg.dt)},
        {"tpm_self", dbl(&tpm_self)},
        {"adaptive_tpm", boolean(&cfg.imm.adaptive_tpm)},
        {"theta_stable", dbl(&cfg.imm.theta_stable)},
        {"stability_window", intval(&cfg.imm.stability_window)},
        {"alpha_min", dbl(&cfg.auf.alpha_min)},
        {"alpha_max", dbl(&cfg.auf.alpha_max)},
        {"u_ref", dbl(&cfg.auf.u_ref)},
        {"lambda_stable", dbl(&cfg.auf.lambda_stable)},
        {"lambda_maneuver", dbl(&cfg.auf.lambda_maneuver)},
        {"gate_chi2", dbl(&cfg.auf.gate_chi2)},
        {"stage1_iou_min", dbl(&cfg.auf.stage1_iou_min)},
        {"stage2_iou_min", dbl(&cfg.auf.stage2_iou_min)},
        {"stage3_iou_min", dbl(&cfg.auf.stage3_iou_min)},
        {"stage3_gate_scale", dbl(&cfg.auf.stage3_gate_scale)},
        {"n_init", intval(&cfg.tracker.n_init)},
        {"max_age_lost", intval(&cfg.tracker.max_age_lost)},
        {"det_conf_min", dbl(&cfg.tracker.det_conf_min)},
        {"det_conf_high", dbl(&cfg.tracker.det_conf_high)},
        {"low_conf_stage", boolean(&cfg.tracker.low_conf_stage)},
    };
    parse_lines(in, setters);

    if (tpm_self >= 0.0) {
        require(tpm_self > 0.0 && tpm_self <= 1.0,
                "'tpm_self' (" + num(tpm_self) + ") must be in (0, 1]");
        cfg.imm.tpm = ImmConfig::tpm_from_self(tpm_self);
    }
    require(cfg.ut.ut_alpha > 0.0 && cfg.ut.ut_alpha <= 1.0,
            "'ut_alpha' (" + num(cfg.ut.ut_alpha) + ") must be in (0, 1]");
    require(cfg.noise.sigma_cv_vel >= 0.0 && cfg.noise.sigma_ca_acc >= 0.0 &&
                cfg.noise.sigma_ct_omega >= 0.0 && cfg.noise.sigma_wh >= 0.0,
            "noise scales 'sigma_*' must be >= 0");
    require(cfg.r_pos > 0.0 && cfg.r_wh > 0.0, "'r_pos' and 'r_wh' must be > 0");
    require(cfg.dt > 0.0, "'dt' must be > 0");
    require(cfg.imm.theta_stable > 0.0 && cfg.imm.theta_stable < 1.0,
            "'theta_stable' (" + num(cfg.imm.theta_stable) + ") must be in (0, 1)");
    require(cfg.imm.stability_window >= 1, "'stability_window' must be >= 1");
    require(cfg.auf.alpha_min >= 0.0 && cfg.auf.alpha_max <= 1.0 &&
                cfg.auf.alpha_min <= cfg.auf.alpha_max,
            "'alpha_min' (" + num(cfg.auf.alpha_min) + ") must be <= 'alpha_max' (" +
                num(cfg.auf.alpha_max) + ") within [0, 1]");
    require(cfg.auf.u_ref > 0.0, "'u_ref' must be > 0");
    require(cfg.auf.lambda_stable > 0.0 && cfg.auf.lambda_maneuver > 0.0,
            "'lambda_stable' and 'lambda_maneuver' must be > 0");
    require(cfg.auf.gate_chi2 > 0.0, "'gate_chi2' must be > 0");
    require(cfg.auf.stage1_iou_min >= 0.0 && cfg.auf.stage1_iou_min <= 1.0 &&
                cfg.auf.stage2_iou_min >= 0.0 && cfg.auf.stage2_iou_min <= 1.0 &&
                cfg.auf.stage3_iou_min >= 0.0 && cfg.auf.stage3_iou_min <= 1.0,
            "'stage*_iou_min' must be in [0, 1]");
    require(cfg.auf.stage3_gate_scale >= 1.0, "'stage3_gate_scale' must be >= 1");
    require(cfg.tracker.n_init >= 1, "'n_init' must be >= 1");
    require(cfg.tracker.max_age_lost >= 1, "'max_age_lost' must be >= 1");
    require(cfg.tracker.det_conf_min >= 0.0 &&
                cfg.tracker.det_conf_min <= cfg.tracker.det_conf_high &&
                cfg.tracker.det_conf_high <= 1.0,
            "'det_conf_min' (" + num(cfg.tracker.det_conf_min) + ") must be <= 'det_conf_high' (" +
                num(cfg.tracker.det_conf_high) + ") within [0, 1]");
    return cfg;
}

SimConfig load_sim_config(std::istream& in) {
    SimConfig cfg;

    const auto dbl = [](double* field) {
        return [field](const std::string& key, const std::string& value) {
            *field = to_double(key, value);
        };
    };
    const auto intval = [](int* field) {
        return [field](const std::string& key, const std::string& value) {
            *field = static_cast<int>(to_int(key, value));
        };
    };
    const auto boolean = [](bool* field) {
        return [field](const std::string& key, const std::string& value) {
            *field = to_bool(key, value);
        };
    };

    const std::map<std::string, Setter> setters = {
        {"n_targets", intval(&cfg.n_targets)},
        {"n_frames", intval(&cfg.n_frames)},
        {"arena_width", dbl(&cfg.arena_width)},
        {"arena_height", dbl(&cfg.arena_height)},
        {"regime_dwell", dbl(&cfg.regime_dwell)},
        {"weight_cv", dbl(&cfg.regime_weights[0])},
        {"weight_ca", dbl(&cfg.regime_weights[1])},
        {"weight_ct", dbl(&cfg.regime_weights[2])},
        {"speed_min", dbl(&cfg.speed_min)},
        {"speed_max", dbl(&cfg.speed_max)},
        {"turn_rate_min", dbl(&cfg.turn_rate_min)},
        {"turn_rate_max", dbl(&cfg.turn_rate_max)},
        {"box_size_min", dbl(&cfg.box_size_min)},
        {"box_size_max", dbl(&cfg.box_size_max)},
        {"seed",
         [&cfg](const std::string& key, const std::string& value) {
             cfg.seed = static_cast<std::uint64_t>(to_int(key, value));
         }},
        {"process_sigma", dbl(&cfg.process_sigma)},
        {"jitter_sigma", dbl(&cfg.jitter_sigma)},
        {"dropout_prob", dbl(&cfg.dropout_prob)},
        {"occlusion_merge", boolean(&cfg.occlusion_merge)},
        {"conf_mean", dbl(&cfg.conf_mean)},
        {"conf_sigma", dbl(&cfg.conf_sigma)},
    };
    parse_lines(in, setters);

    require(cfg.n_targets >= 0, "'n_targets' must be >= 0");
    require(cfg.n_frames >= 0, "'n_frames' must be >= 0");
    require(cfg.arena_width > 0.0 && cfg.arena_height > 0.0,
            "'arena_width' and 'arena_height' must be > 0");
    require(cfg.regime_dwell >= 1.0, "'regime_dwell' must be >= 1");
    require(cfg.regime_weights[0] >= 0.0 && cfg.regime_weights[1] >= 0.0 &&
                cfg.regime_weights[2] >= 0.0 &&
                cfg.regime_weights[0] + cfg.regime_weights[1] + cfg.regime_weights[2] > 0.0,
            "'weight_*' must be >= 0 and sum to > 0");
    require(cfg.speed_min >= 0.0 && cfg.speed_min <= cfg.speed_max,
            "'speed_min' (" + num(cfg.speed_min) + ") must be <= 'speed_max' (" +
                num(cfg.speed_max) + ")");
    require(cfg.turn_rate_min >= 0.0 && cfg.turn_rate_min <= cfg.turn_rate_max,
            "'turn_rate_min' (" + num(cfg.turn_rate_min) + ") must be <= 'turn_rate_max' (" +
                num(cfg.turn_rate_max) + ")");
    require(cfg.box_size_min > 0.0 && cfg.box_size_min <= cfg.box_size_max,
            "'box_size_min' (" + num(cfg.box_size_min) + ") must be <= 'box_size_max' (" +
                num(cfg.box_size_max) + ") and > 0");
    require(cfg.process_sigma >= 0.0, "'process_sigma' must be >= 0");
    require(cfg.jitter_sigma >= 0.0, "'jitter_sigma' must be >= 0");
    require(cfg.dropout_prob >= 0.0 && cfg.dropout_prob <= 1.0,
            "'dropout_prob' must be in [0, 1]");
    require(cfg.conf_mean >= 0.0 && cfg.conf_mean <= 1.0, "'conf_mean' must be in [0, 1]");
    require(cfg.conf_sigma >= 0.0, "'conf_sigma' must be >= 0");
    return cfg;
}

namespace {

template <typename T>
T load_path(const std::string& path, T (*loader)(std::istream&)) {
    if (path.empty()) {
        std::istringstream empty;
        return loader(empty);
    }
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    try {
        return loader(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace

PipelineConfig load_pipeline_config_path(const std::string& path) {
    return load_path(path, load_pipeline_config);
}

SimConfig load_sim_config_path(const std::string& path) {
    return load_path(path, load_sim_config);
}

}  // namespace immtrack
