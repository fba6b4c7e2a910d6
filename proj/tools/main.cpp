#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "immtrack/config.hpp"
#include "immtrack/errors.hpp"
#include "immtrack/metrics.hpp"
#include "immtrack/mot_io.hpp"
#include "immtrack/synth.hpp"
#include "immtrack/tracker.hpp"

namespace {

using namespace immtrack;

int cmd_track(const std::string& det_path, const std::string& config_path,
              const std::string& out_path, const AblationFlags& ablation) {
    const PipelineConfig cfg = load_pipeline_config_path(config_path);
    const SequenceData dets = parse_mot_path(det_path, FileKind::kDetections);
    const TrackRun run = run_tracker(dets, cfg, ablation);
    write_results_path(run.results, out_path);
    std::cout << "frames = " << run.frames << "\n";
    std::cout << "tracks_live = " << run.live_tracks << "\n";
    std::cout << "tracks_removed = " << run.removed_tracks << "\n";
    std::cout << "ids_created = " << run.ids_created << "\n";
    std::cout << "output_rows = " << run.results.box_count() << "\n";
    return 0;
}

int cmd_eval(const std::string& gt_path, const std::string& res_path, double iou_min) {
    const SequenceData gt = parse_mot_path(gt_path, FileKind::kGroundTruth);
    SequenceData res = parse_mot_path(res_path, FileKind::kGroundTruth);

    if (!gt.empty() && !res.empty() &&
        (res.min_frame() < gt.min_frame() || res.max_frame() > gt.max_frame())) {
        std::cerr << "warning: result frames [" << res.min_frame() << ", " << res.max_frame()
                  << "] extend beyond ground truth [" << gt.min_frame() << ", " << gt.max_frame()
                  << "]; evaluating over the ground-truth range\n";
        std::erase_if(res.frames, [&gt](const auto& entry) {
            return entry.first < gt.min_frame() || entry.first > gt.max_frame();
        });
    }

    const SequenceMetrics m = evaluate(gt, res, iou_min);
    std::cout << format_metrics_table(m, gt.name) << "\n" << format_metrics_kv(m);
    return 0;
}

int cmd_stats(const std::string& gt_path) {
    const SequenceData gt = parse_mot_path(gt_path, FileKind::kGroundTruth);
    if (gt.empty()) throw ParseError(gt_path + ": no identities in ground truth");
    const DatasetStats s = dataset_stats(gt);
    char buf[96];
    std::snprintf(buf, sizeof buf, "gpr = %.6f\n", s.gpr);
    std::cout << buf;
    std::snprintf(buf, sizeof buf, "mmso_like = %.6f\n", s.mmso_like);
    std::cout << buf;
    std::snprintf(buf, sizeof buf, "mmsao_like = %.6f\n", s.mmsao_like);
    std::cout << buf;
    std::cout << "frames = " << s.seq_len << "\n";
    for (const auto& [id, frames] : s.presence) {
        std::cout << "id " << id << ": " << frames << "/" << s.seq_len << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, std::int64_t seed, const std::string& gt_path,
                 const std::string& det_path, const std::string& regime_path) {
    SimConfig cfg = load_sim_config_path(config_path);
    cfg.seed = static_cast<std::uint64_t>(seed);
    const SimOutput out = generate_sequence(cfg);
    write_results_path(out.gt, gt_path);
    write_detections_path(out.det, det_path);
    if (!regime_path.empty()) {
        std::ofstream log(regime_path, std::ios::binary);
        if (!log) throw std::runtime_error(regime_path + ": cannot open for writing");
        write_regime_log(out.regimes, log);
    }
    std::cout << "targets = " << cfg.n_targets << "\n";
    std::cout << "frames = " << cfg.n_frames << "\n";
    std::cout << "gt_rows = " << out.gt.box_count() << "\n";
    std::cout << "det_rows = " << out.det.box_count() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-model unscented tracking, evaluation, and synthetic data"};
    app.require_subcommand(1);

    std::string det_path, config_path, out_path;
    AblationFlags ablation;
    CLI::App* track = app.add_subcommand("track", "Run the tracker over a detection file");
    track->add_option("--det", det_path, "MOT detection file")->required();
    track->add_option("--config", config_path, "key=value configuration file");
    track->add_option("--out", out_path, "output result file")->required();
    track->add_flag("--no-imm", ablation.single_motion_model,
                    "single constant-velocity filter instead of the model bank");
    track->add_flag("--no-msdc", ablation.single_stage,
                    "single association stage instead of the motion-state cascade");
    track->add_flag("--no-auf", ablation.fixed_fusion_weights,
                    "fixed fusion weights instead of uncertainty adaptation");

    std::string gt_path, res_path;
    double iou_min = 0.5;
    CLI::App* eval = app.add_subcommand("eval", "Score a result file against ground truth");
    eval->add_option("--gt", gt_path, "MOT ground-truth file")->required();
    eval->add_option("--res", res_path, "MOT result file")->required();
    eval->add_option("--iou-min", iou_min, "matching IoU threshold")->capture_default_str();

    std::string stats_gt_path;
    CLI::App* stats = app.add_subcommand("stats", "Presence and motion statistics of ground truth");
    stats->add_option("--gt", stats_gt_path, "MOT ground-truth file")->required();

    std::string sim_config_path, sim_gt_path, sim_det_path, regime_path;
    std::int64_t seed = 0;
    CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic sequence");
    simulate->add_option("--config", sim_config_path, "key=value simulation config");
    simulate->add_option("--seed", seed, "generator seed")->required();
    simulate->add_option("--out-gt", sim_gt_path, "output ground-truth file")->required();
    simulate->add_option("--out-det", sim_det_path, "output detection file")->required();
    simulate->add_option("--regime-log", regime_path, "output per-frame motion-regime CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(track)) {
            return cmd_track(det_path, config_path, out_path, ablation);
        }
        if (app.got_subcommand(eval)) return cmd_eval(gt_path, res_path, iou_min);
        if (app.got_subcommand(stats)) return cmd_stats(stats_gt_path);
        return cmd_simulate(sim_config_path, seed, sim_gt_path, sim_det_path, regime_path);
    } catch (const DegeneracyError& e) {
        std::cerr << "error: numerical degeneracy: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
