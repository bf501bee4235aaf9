// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// Seeded Monte Carlo sweeps over the pipeline and structured result export.

#pragma once

#include "rbp/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rbp {

/// Recognized sweep parameters: rx_x, rx_y, rx_z, baseline_d, elevation,
/// distance, array_size, noise_power.
struct SweepSpec {
    std::string parameter = "rx_x";
    std::vector<double> values;
    double azimuth_deg = 15.0;  // elevation sweeps: fixed azimuth
    double range_m = 3.0;       // elevation sweeps: fixed Tx1-Rx distance
    double theta_deg = 30.0;    // distance sweeps: fixed direction from Tx1
    double phi_deg = 45.0;
};

enum class SweepMetric { rmse, efficiency };

struct ExperimentSpec {
    std::string name = "experiment";
    PipelineConfig pipeline;
    SweepSpec sweep;
    SweepMetric metric = SweepMetric::rmse;
    int monte_carlo_k = 100;
    std::uint64_t master_seed = 20260810u;
    std::vector<std::string> outputs;  // artifact hints for the CLI
};

/// Applies one sweep value to a copy of the pipeline config.
PipelineConfig apply_sweep_value(const PipelineConfig& base, const SweepSpec& sweep,
                                 double value);

struct TrialRecord {
    int trial = 0;
    Vec3 estimate = Vec3::Zero();
    Vec3 error = Vec3::Zero();
    double error_norm = 0.0;
    double doa_err_tx1_deg = 0.0;
    double doa_err_tx2_deg = 0.0;
};

struct ResultRow {
    double sweep_value = 0.0;
    double rmse_m = 0.0;
    double err_min_m = 0.0;
    double err_max_m = 0.0;
    double err_median_m = 0.0;
    double mean_doa_err_deg = 0.0;
    double mean_efficiency = 0.0;
    std::string status = "ok";  // "ok" or the failure message

    bool ok() const { return status == "ok"; }
};

struct ResultMetadata {
    std::string experiment;
    std::string code_version;
    std::string spec_hash;      // hex FNV-1a of the canonical spec JSON
    std::string timestamp;      // set at run start; omitted from CSV output
    std::string sweep_parameter;
    std::string metric;
    int monte_carlo_k = 0;
    std::uint64_t master_seed = 0;
};

struct ResultTable {
    ResultMetadata metadata;
    std::vector<ResultRow> rows;
};

struct SweepOutcome {
    ResultTable table;
    /// Per sweep point, per trial; empty rows for failed points.
    std::vector<std::vector<TrialRecord>> trials;
};

/// Monte Carlo position sweep: per value, monte_carlo_k seeded pipeline
/// trials. Per-point failures are recorded in the row status and the sweep
/// continues. Result is identical for any thread count.
SweepOutcome sweep_rmse(const ExperimentSpec& spec, unsigned threads = 1);

/// Deterministic steady-state transmission efficiency (Tx1 resonator) per
/// sweep value; no Monte Carlo, rmse columns are zero.
SweepOutcome sweep_efficiency(const ExperimentSpec& spec, unsigned threads = 1);

enum class ExportFormat { csv, json };

/// CSV: '#'-prefixed metadata (no timestamp), fixed column order
/// sweep_value, rmse_m, err_min_m, err_max_m, err_median_m,
/// mean_doa_err_deg, mean_efficiency, status. JSON: metadata object
/// (including timestamp) plus a rows array. Byte-identical for identical
/// inputs. Throws on an empty table.
void export_results(const ResultTable& table, ExportFormat format, std::ostream& os);
void export_results(const ResultTable& table, ExportFormat format,
                    const std::filesystem::path& path);

/// Parses the CSV produced by export_results (round-trip checked in tests).
ResultTable import_results_csv(std::istream& is);

void export_trials_csv(const std::vector<TrialRecord>& trials, const Vec3& truth,
                       std::ostream& os);

std::string to_string(SweepMetric metric);
SweepMetric sweep_metric_from_string(const std::string& name);

/// FNV-1a 64-bit, used for spec hashes.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace rbp
