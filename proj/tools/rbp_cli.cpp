// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// Command line front end: resonate / doa / locate / sweep / rmse, all driven
// by JSON config files plus flags, no interactive prompts.

#include "rbp/config_io.hpp"
#include "rbp/csv.hpp"
#include "rbp/rng.hpp"
#include "rbp/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string out_dir;
    std::string format = "csv";
    unsigned threads = std::thread::hardware_concurrency();
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_seed = true) {
    cmd->add_option("--out-dir", flags.out_dir, "Output directory (default results/<name>/<timestamp>)");
    cmd->add_option("--format", flags.format, "Result table format: csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    cmd->add_option("--threads", flags.threads, "Worker threads");
    if (with_seed) {
        auto* opt = cmd->add_option("--seed", flags.seed, "Override the seed");
        opt->each([&flags](const std::string&) { flags.seed_set = true; });
    }
}

fs::path make_out_dir(const CommonFlags& flags, const std::string& name) {
    fs::path dir;
    if (!flags.out_dir.empty()) {
        dir = flags.out_dir;
    } else {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&t, &tm);
        std::ostringstream stamp;
        stamp << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
        dir = fs::path("results") / name / stamp.str();
    }
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    fn(os);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

json direction_json(const rbp::SphericalDirection& d) {
    return json{{"theta_deg", d.theta * 180.0 / M_PI}, {"phi_deg", d.phi * 180.0 / M_PI}};
}

json tx_report_json(const rbp::TxTrialReport& r) {
    return json{{"doa_local", direction_json(r.doa_local.direction)},
                {"doa_world", direction_json(r.doa_world)},
                {"truth_local", direction_json(r.truth_local)},
                {"doa_error_deg", r.doa_error_deg},
                {"echo_power_w", r.echo_power},
                {"resonance_converged", r.converged},
                {"resonance_iterations", r.iterations}};
}

int cmd_resonate(const std::string& config_path, const CommonFlags& flags) {
    const rbp::PipelineConfig cfg = rbp::load_pipeline_config(config_path);
    const fs::path dir = make_out_dir(flags, fs::path(config_path).stem().string());
    write_file(dir / "spec.json", rbp::canonical_json(cfg) + "\n");

    const rbp::PipelineContext ctx = rbp::prepare_pipeline(cfg, nullptr, /*with_doa=*/false);

    write_stream(dir / "power_history_tx1.csv", [&](std::ostream& os) {
        rbp::export_power_history_csv(ctx.tx1.state.power_history, os);
    });
    write_stream(dir / "power_history_tx2.csv", [&](std::ostream& os) {
        rbp::export_power_history_csv(ctx.tx2.state.power_history, os);
    });

    if (cfg.field_map.enabled) {
        rbp::FieldMapGrid grid{cfg.field_map.lo, cfg.field_map.hi, cfg.field_map.nx,
                               cfg.field_map.ny, cfg.field_map.nz};
        rbp::FieldMap map1 =
            rbp::compute_field_map(ctx.tx1.state.tx_amplitudes, ctx.scenario.tx1, ctx.pattern,
                                   ctx.scenario.wavelength, grid, ctx.tx1.state.iterations,
                                   flags.threads);
        const rbp::FieldMap map2 =
            rbp::compute_field_map(ctx.tx2.state.tx_amplitudes, ctx.scenario.tx2, ctx.pattern,
                                   ctx.scenario.wavelength, grid, ctx.tx2.state.iterations,
                                   flags.threads);
        write_stream(dir / "field_map_tx1.csv",
                     [&](std::ostream& os) { rbp::export_field_map_csv(map1, os); });
        write_stream(dir / "field_map_tx2.csv",
                     [&](std::ostream& os) { rbp::export_field_map_csv(map2, os); });
        rbp::accumulate_field_map(map1, map2);  // the two resonators are incoherent
        write_stream(dir / "field_map.csv",
                     [&](std::ostream& os) { rbp::export_field_map_csv(map1, os); });
        write_stream(dir / "field_map.grid",
                     [&](std::ostream& os) { rbp::export_field_map_grid(map1, os); });
    }

    json summary;
    for (const auto* tx : {&ctx.tx1, &ctx.tx2}) {
        json t{{"converged", tx->state.converged},
               {"iterations", tx->state.iterations},
               {"steady_efficiency", tx->steady_efficiency}};
        if (!tx->state.power_history.empty()) {
            t["p_tx_total_w"] = tx->state.power_history.back().p_tx_total;
            t["p_rx_total_w"] = tx->state.power_history.back().p_rx_total;
        }
        summary[tx == &ctx.tx1 ? "tx1" : "tx2"] = t;
    }
    write_file(dir / "summary.json", summary.dump(2) + "\n");

    std::cout << "resonate: tx1 " << (ctx.tx1.state.converged ? "converged" : "NOT converged")
              << " after " << ctx.tx1.state.iterations << " iterations, efficiency "
              << ctx.tx1.steady_efficiency << "; tx2 "
              << (ctx.tx2.state.converged ? "converged" : "NOT converged") << " after "
              << ctx.tx2.state.iterations << " iterations, efficiency "
              << ctx.tx2.steady_efficiency << "\n";
    std::cout << "artifacts in " << dir.string() << "\n";
    return 0;
}

int cmd_doa(const std::string& config_path, const CommonFlags& flags) {
    const rbp::PipelineConfig cfg = rbp::load_pipeline_config(config_path);
    const fs::path dir = make_out_dir(flags, fs::path(config_path).stem().string());
    write_file(dir / "spec.json", rbp::canonical_json(cfg) + "\n");

    const rbp::PipelineContext ctx = rbp::prepare_pipeline(cfg);
    const std::uint64_t seed = flags.seed_set ? flags.seed : 20260810u;

    rbp::Rng seeder(seed);
    json estimates;
    const struct {
        const rbp::TxContext* tx;
        const rbp::MusicEstimator* est;
        const char* name;
    } sides[2] = {{&ctx.tx1, ctx.estimator_tx1.get(), "tx1"},
                  {&ctx.tx2, ctx.estimator_tx2.get(), "tx2"}};
    for (const auto& side : sides) {
        const std::uint64_t tx_seed = seeder.next_u64();
        const rbp::SnapshotBatch batch = rbp::synthesize_snapshots(
            side.tx->subarray, side.tx->truth_local, ctx.scenario.wavelength,
            side.tx->echo_power, cfg.doa.noise_power_w, cfg.doa.snapshots, tx_seed);
        const rbp::CMatrix r = rbp::sample_covariance(batch);
        const rbp::SubspaceSplit split = rbp::subspace_split(r, batch.source_count);
        const rbp::MusicSpectrum spectrum = side.est->spectrum(split.noise_basis);
        write_stream(dir / (std::string("spectrum_") + side.name + ".csv"),
                     [&](std::ostream& os) { rbp::export_music_spectrum_csv(spectrum, os); });
        estimates[side.name] = {{"estimate", direction_json(spectrum.peak.direction)},
                                {"truth", direction_json(side.tx->truth_local)},
                                {"peak_value", spectrum.peak.peak_value},
                                {"echo_power_w", side.tx->echo_power}};
        std::cout << side.name << ": theta "
                  << spectrum.peak.direction.theta * 180.0 / M_PI << " deg, phi "
                  << spectrum.peak.direction.phi * 180.0 / M_PI << " deg\n";
    }
    estimates["seed"] = seed;
    write_file(dir / "estimates.json", estimates.dump(2) + "\n");
    std::cout << "artifacts in " << dir.string() << "\n";
    return 0;
}

int cmd_locate(const std::string& config_path, const CommonFlags& flags) {
    const rbp::PipelineConfig cfg = rbp::load_pipeline_config(config_path);
    const fs::path dir = make_out_dir(flags, fs::path(config_path).stem().string());
    write_file(dir / "spec.json", rbp::canonical_json(cfg) + "\n");

    const std::uint64_t seed = flags.seed_set ? flags.seed : 20260810u;
    const rbp::PipelineResult res = rbp::run_pipeline(cfg, seed);

    json out{{"seed", seed},
             {"tx1", tx_report_json(res.tx1)},
             {"tx2", tx_report_json(res.tx2)},
             {"position",
              {{"x_m", res.position.coordinates.x()},
               {"y_m", res.position.coordinates.y()},
               {"z_m", res.position.coordinates.z()},
               {"range_r1_m", res.position.range_r1},
               {"gamma1_deg", res.position.angles.gamma1 * 180.0 / M_PI},
               {"gamma2_deg", res.position.angles.gamma2 * 180.0 / M_PI},
               {"ray_skew_m", res.position.ray_skew_distance},
               {"condition",
                res.position.condition == rbp::ConditionFlag::ok ? "ok" : "near_degenerate"}}},
             {"truth",
              {{"x_m", res.rx_truth.x()}, {"y_m", res.rx_truth.y()}, {"z_m", res.rx_truth.z()}}},
             {"position_error_m", res.position_error}};
    write_file(dir / "locate.json", out.dump(2) + "\n");

    std::cout << "position: (" << rbp::format_double(res.position.coordinates.x()) << ", "
              << rbp::format_double(res.position.coordinates.y()) << ", "
              << rbp::format_double(res.position.coordinates.z()) << ") m, error "
              << rbp::format_double(res.position_error) << " m\n";
    std::cout << "artifacts in " << dir.string() << "\n";
    return 0;
}

int cmd_sweep(const std::string& spec_path, const CommonFlags& flags, bool force_rmse) {
    rbp::ExperimentSpec spec = rbp::load_experiment_spec(spec_path);
    if (flags.seed_set) spec.master_seed = flags.seed;
    if (force_rmse) spec.metric = rbp::SweepMetric::rmse;

    const fs::path dir = make_out_dir(flags, spec.name);
    write_file(dir / "spec.json", rbp::canonical_json(spec) + "\n");

    const rbp::SweepOutcome outcome = spec.metric == rbp::SweepMetric::rmse
                                          ? rbp::sweep_rmse(spec, flags.threads)
                                          : rbp::sweep_efficiency(spec, flags.threads);

    if (flags.format == "csv" || flags.format == "both")
        rbp::export_results(outcome.table, rbp::ExportFormat::csv, dir / "result.csv");
    if (flags.format == "json" || flags.format == "both")
        rbp::export_results(outcome.table, rbp::ExportFormat::json, dir / "result.json");

    if (spec.metric == rbp::SweepMetric::rmse) {
        for (std::size_t i = 0; i < outcome.trials.size(); ++i) {
            if (outcome.trials[i].empty()) continue;
            const rbp::PipelineConfig cfg =
                rbp::apply_sweep_value(spec.pipeline, spec.sweep, spec.sweep.values[i]);
            std::ostringstream name;
            name << "trials_" << std::setw(3) << std::setfill('0') << i << ".csv";
            write_stream(dir / name.str(), [&](std::ostream& os) {
                rbp::export_trials_csv(outcome.trials[i], cfg.scenario.rx.origin, os);
            });
        }
    }

    int failed = 0;
    for (const auto& row : outcome.table.rows) {
        std::cout << spec.sweep.parameter << "=" << rbp::format_double(row.sweep_value);
        if (row.ok()) {
            if (spec.metric == rbp::SweepMetric::rmse)
                std::cout << "  rmse=" << rbp::format_double(row.rmse_m) << " m";
            std::cout << "  efficiency=" << rbp::format_double(row.mean_efficiency) << "\n";
        } else {
            std::cout << "  FAILED: " << row.status << "\n";
            ++failed;
        }
    }
    std::cout << "artifacts in " << dir.string() << "\n";
    if (failed == static_cast<int>(outcome.table.rows.size())) return 3;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"resonant-beam positioning simulator"};
    app.set_version_flag("--version", rbp::kVersionString);
    app.require_subcommand(1);

    std::string config_path;
    CommonFlags flags;

    auto* resonate = app.add_subcommand("resonate", "Power cycle to steady state; "
                                                    "power history and field maps");
    resonate->add_option("scenario", config_path, "Pipeline config JSON")->required();
    add_common(resonate, flags, false);

    auto* doa = app.add_subcommand("doa", "MUSIC pseudospectrum and DOA estimate per Tx");
    doa->add_option("scenario", config_path, "Pipeline config JSON")->required();
    add_common(doa, flags);

    auto* locate = app.add_subcommand("locate", "Single end-to-end positioning run");
    locate->add_option("scenario", config_path, "Pipeline config JSON")->required();
    add_common(locate, flags);

    auto* sweep = app.add_subcommand("sweep", "Seeded Monte Carlo sweep from an experiment spec");
    sweep->add_option("experiment", config_path, "Experiment spec JSON")->required();
    add_common(sweep, flags);

    auto* rmse = app.add_subcommand("rmse", "Position RMSE sweep (metric forced to rmse)");
    rmse->add_option("experiment", config_path, "Experiment spec JSON")->required();
    add_common(rmse, flags);

    CLI11_PARSE(app, argc, argv);
    if (flags.threads == 0) flags.threads = 1;

    try {
        if (resonate->parsed()) return cmd_resonate(config_path, flags);
        if (doa->parsed()) return cmd_doa(config_path, flags);
        if (locate->parsed()) return cmd_locate(config_path, flags);
        if (sweep->parsed()) return cmd_sweep(config_path, flags, false);
        if (rmse->parsed()) return cmd_sweep(config_path, flags, true);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
