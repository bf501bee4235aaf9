// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator

#include "rbp/experiment.hpp"

#include "rbp/config_io.hpp"
#include "rbp/csv.hpp"
#include "rbp/rng.hpp"
#include "rbp/thread_pool.hpp"
#include "rbp/version.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace rbp {

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string sanitize_status(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

ResultMetadata make_metadata(const ExperimentSpec& spec) {
    ResultMetadata md;
    md.experiment = spec.name;
    md.code_version = kVersionString;
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(canonical_json(spec));
    md.spec_hash = hash.str();
    md.timestamp = utc_timestamp();
    md.sweep_parameter = spec.sweep.parameter;
    md.metric = to_string(spec.metric);
    md.monte_carlo_k = spec.monte_carlo_k;
    md.master_seed = spec.master_seed;
    return md;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string to_string(SweepMetric metric) {
    return metric == SweepMetric::rmse ? "rmse" : "efficiency";
}

SweepMetric sweep_metric_from_string(const std::string& name) {
    if (name == "rmse") return SweepMetric::rmse;
    if (name == "efficiency") return SweepMetric::efficiency;
    throw std::invalid_argument("unknown sweep metric: " + name);
}

PipelineConfig apply_sweep_value(const PipelineConfig& base, const SweepSpec& sweep,
                                 double value) {
    PipelineConfig cfg = base;
    const std::string& p = sweep.parameter;
    if (p == "rx_x") {
        cfg.scenario.rx.origin.x() = value;
    } else if (p == "rx_y") {
        cfg.scenario.rx.origin.y() = value;
    } else if (p == "rx_z") {
        cfg.scenario.rx.origin.z() = value;
    } else if (p == "baseline_d") {
        Vec3 axis = cfg.scenario.tx2.origin - cfg.scenario.tx1.origin;
        if (axis.norm() == 0.0) axis = Vec3::UnitX();
        cfg.scenario.tx2.origin = cfg.scenario.tx1.origin + axis.normalized() * value;
    } else if (p == "elevation") {
        const SphericalDirection dir{value * M_PI / 180.0, sweep.azimuth_deg * M_PI / 180.0};
        cfg.scenario.rx.origin =
            cfg.scenario.tx1.origin + sweep.range_m * direction_to_unit_vector(dir);
    } else if (p == "distance") {
        const SphericalDirection dir{sweep.theta_deg * M_PI / 180.0,
                                     sweep.phi_deg * M_PI / 180.0};
        cfg.scenario.rx.origin =
            cfg.scenario.tx1.origin + value * direction_to_unit_vector(dir);
    } else if (p == "array_size") {
        const int n = static_cast<int>(std::llround(value));
        if (n < 1) throw std::invalid_argument("array_size sweep value must be >= 1");
        cfg.scenario.tx1.rows = cfg.scenario.tx1.cols = n;
        cfg.scenario.tx2.rows = cfg.scenario.tx2.cols = n;
        cfg.scenario.rx.rows = cfg.scenario.rx.cols = n;
    } else if (p == "noise_power") {
        cfg.doa.noise_power_w = value;
    } else {
        throw std::invalid_argument("unknown sweep parameter: " + p);
    }
    return cfg;
}

SweepOutcome sweep_rmse(const ExperimentSpec& spec, unsigned threads) {
    if (spec.monte_carlo_k < 1)
        throw std::invalid_argument("monte_carlo_k must be >= 1");
    if (spec.sweep.values.empty())
        throw std::invalid_argument("sweep has no values");

    SweepOutcome outcome;
    outcome.table.metadata = make_metadata(spec);
    outcome.trials.resize(spec.sweep.values.size());

    ThreadPool pool(threads);
    std::shared_ptr<const MusicEstimator> shared_estimator;

    for (std::size_t si = 0; si < spec.sweep.values.size(); ++si) {
        const double value = spec.sweep.values[si];
        ResultRow row;
        row.sweep_value = value;
        try {
            const PipelineConfig cfg = apply_sweep_value(spec.pipeline, spec.sweep, value);
            const PipelineContext ctx = prepare_pipeline(cfg, shared_estimator);
            shared_estimator = ctx.estimator_tx1;

            const int k = spec.monte_carlo_k;
            std::vector<TrialRecord> records(k);
            pool.parallel_for(static_cast<std::size_t>(k), [&](std::size_t ti) {
                const std::uint64_t seed = derive_seed(spec.master_seed, si, ti);
                const PipelineResult res = run_trial(ctx, seed);
                TrialRecord rec;
                rec.trial = static_cast<int>(ti);
                rec.estimate = res.position.coordinates;
                rec.error = res.position.coordinates - res.rx_truth;
                rec.error_norm = res.position_error;
                rec.doa_err_tx1_deg = res.tx1.doa_error_deg;
                rec.doa_err_tx2_deg = res.tx2.doa_error_deg;
                records[ti] = rec;
            });

            std::vector<Vec3> estimates;
            std::vector<double> norms;
            estimates.reserve(records.size());
            norms.reserve(records.size());
            double doa_acc = 0.0;
            for (const auto& rec : records) {
                estimates.push_back(rec.estimate);
                norms.push_back(rec.error_norm);
                doa_acc += 0.5 * (rec.doa_err_tx1_deg + rec.doa_err_tx2_deg);
            }
            row.rmse_m = rmse(estimates, ctx.scenario.rx.origin);
            row.err_min_m = *std::min_element(norms.begin(), norms.end());
            row.err_max_m = *std::max_element(norms.begin(), norms.end());
            row.err_median_m = median(norms);
            row.mean_doa_err_deg = doa_acc / static_cast<double>(records.size());
            row.mean_efficiency =
                0.5 * (ctx.tx1.steady_efficiency + ctx.tx2.steady_efficiency);
            outcome.trials[si] = std::move(records);
        } catch (const std::exception& e) {
            row = ResultRow{};
            row.sweep_value = value;
            row.status = sanitize_status(e.what());
        }
        outcome.table.rows.push_back(std::move(row));
    }
    return outcome;
}

SweepOutcome sweep_efficiency(const ExperimentSpec& spec, unsigned threads) {
    if (spec.sweep.values.empty())
        throw std::invalid_argument("sweep has no values");

    SweepOutcome outcome;
    outcome.table.metadata = make_metadata(spec);
    outcome.trials.resize(spec.sweep.values.size());
    outcome.table.rows.resize(spec.sweep.values.size());

    ThreadPool pool(threads);
    pool.parallel_for(spec.sweep.values.size(), [&](std::size_t si) {
        const double value = spec.sweep.values[si];
        ResultRow row;
        row.sweep_value = value;
        try {
            const PipelineConfig cfg = apply_sweep_value(spec.pipeline, spec.sweep, value);
            const PipelineContext ctx =
                prepare_pipeline(cfg, nullptr, /*with_doa=*/false, /*tx1_only=*/true);
            row.mean_efficiency = ctx.tx1.steady_efficiency;
        } catch (const std::exception& e) {
            row = ResultRow{};
            row.sweep_value = value;
            row.status = sanitize_status(e.what());
        }
        outcome.table.rows[si] = std::move(row);
    });
    return outcome;
}

void export_results(const ResultTable& table, ExportFormat format, std::ostream& os) {
    if (table.rows.empty()) throw std::invalid_argument("refusing to export an empty table");
    const auto& md = table.metadata;
    if (format == ExportFormat::csv) {
        os << "# experiment=" << md.experiment << '\n';
        os << "# code_version=" << md.code_version << '\n';
        os << "# spec_hash=" << md.spec_hash << '\n';
        os << "# sweep_parameter=" << md.sweep_parameter << '\n';
        os << "# metric=" << md.metric << '\n';
        os << "# monte_carlo_k=" << md.monte_carlo_k << '\n';
        os << "# master_seed=" << md.master_seed << '\n';
        os << "sweep_value,rmse_m,err_min_m,err_max_m,err_median_m,mean_doa_err_deg,"
              "mean_efficiency,status\n";
        for (const auto& r : table.rows) {
            os << format_double(r.sweep_value) << ',' << format_double(r.rmse_m) << ','
               << format_double(r.err_min_m) << ',' << format_double(r.err_max_m) << ','
               << format_double(r.err_median_m) << ',' << format_double(r.mean_doa_err_deg)
               << ',' << format_double(r.mean_efficiency) << ',' << sanitize_status(r.status)
               << '\n';
        }
        return;
    }
    // JSON
    os << "{\n  \"metadata\": {\n";
    os << "    \"experiment\": \"" << md.experiment << "\",\n";
    os << "    \"code_version\": \"" << md.code_version << "\",\n";
    os << "    \"spec_hash\": \"" << md.spec_hash << "\",\n";
    os << "    \"timestamp\": \"" << md.timestamp << "\",\n";
    os << "    \"sweep_parameter\": \"" << md.sweep_parameter << "\",\n";
    os << "    \"metric\": \"" << md.metric << "\",\n";
    os << "    \"monte_carlo_k\": " << md.monte_carlo_k << ",\n";
    os << "    \"master_seed\": " << md.master_seed << "\n  },\n";
    os << "  \"rows\": [\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        os << "    {\"sweep_value\": " << format_double(r.sweep_value)
           << ", \"rmse_m\": " << format_double(r.rmse_m)
           << ", \"err_min_m\": " << format_double(r.err_min_m)
           << ", \"err_max_m\": " << format_double(r.err_max_m)
           << ", \"err_median_m\": " << format_double(r.err_median_m)
           << ", \"mean_doa_err_deg\": " << format_double(r.mean_doa_err_deg)
           << ", \"mean_efficiency\": " << format_double(r.mean_efficiency)
           << ", \"status\": \"" << sanitize_status(r.status) << "\"}"
           << (i + 1 < table.rows.size() ? ",\n" : "\n");
    }
    os << "  ]\n}\n";
}

void export_results(const ResultTable& table, ExportFormat format,
                    const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    export_results(table, format, os);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

ResultTable import_results_csv(std::istream& is) {
    ResultTable table;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(2, eq - 2);
            const std::string value = line.substr(eq + 1);
            if (key == "experiment") table.metadata.experiment = value;
            else if (key == "code_version") table.metadata.code_version = value;
            else if (key == "spec_hash") table.metadata.spec_hash = value;
            else if (key == "sweep_parameter") table.metadata.sweep_parameter = value;
            else if (key == "metric") table.metadata.metric = value;
            else if (key == "monte_carlo_k") table.metadata.monte_carlo_k = std::stoi(value);
            else if (key == "master_seed") table.metadata.master_seed = std::stoull(value);
            continue;
        }
        if (!header_seen) {  // column header
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 8) throw std::runtime_error("malformed result row: " + line);
        auto num = [](const std::string& s) {
            double v = 0.0;
            const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc()) throw std::runtime_error("bad numeric field: " + s);
            return v;
        };
        ResultRow r;
        r.sweep_value = num(fields[0]);
        r.rmse_m = num(fields[1]);
        r.err_min_m = num(fields[2]);
        r.err_max_m = num(fields[3]);
        r.err_median_m = num(fields[4]);
        r.mean_doa_err_deg = num(fields[5]);
        r.mean_efficiency = num(fields[6]);
        r.status = fields[7];
        table.rows.push_back(std::move(r));
    }
    return table;
}

void export_trials_csv(const std::vector<TrialRecord>& trials, const Vec3& truth,
                       std::ostream& os) {
    os << "# truth=" << format_double(truth.x()) << ' ' << format_double(truth.y()) << ' '
       << format_double(truth.z()) << '\n';
    os << "trial,x_m,y_m,z_m,err_x_m,err_y_m,err_z_m,err_norm_m\n";
    for (const auto& t : trials) {
        os << t.trial << ',' << format_double(t.estimate.x()) << ','
           << format_double(t.estimate.y()) << ',' << format_double(t.estimate.z()) << ','
           << format_double(t.error.x()) << ',' << format_double(t.error.y()) << ','
           << format_double(t.error.z()) << ',' << format_double(t.error_norm) << '\n';
    }
}

}  // namespace rbp
