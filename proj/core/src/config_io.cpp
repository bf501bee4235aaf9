// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator

#include "rbp/config_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace rbp {

using nlohmann::json;

namespace {

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument("expected a 3-element array for a vector");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

template <typename T>
T get_or(const json& j, const char* key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

Vec3 get_vec_or(const json& j, const char* key, const Vec3& fallback) {
    if (!j.contains(key)) return fallback;
    return vec_from_json(j.at(key));
}

json array_to_json(const ArrayConfig& a) {
    return json{{"origin", vec_to_json(a.origin)},
                {"rows", a.rows},
                {"cols", a.cols},
                {"spacing_m", a.spacing_m},
                {"boresight", vec_to_json(a.boresight)},
                {"in_plane_axis", vec_to_json(a.in_plane_axis)}};
}

ArrayConfig array_from_json(const json& j, const ArrayConfig& defaults) {
    ArrayConfig a = defaults;
    a.origin = get_vec_or(j, "origin", a.origin);
    a.rows = get_or(j, "rows", a.rows);
    a.cols = get_or(j, "cols", a.cols);
    a.spacing_m = get_or(j, "spacing_m", a.spacing_m);
    a.boresight = get_vec_or(j, "boresight", a.boresight);
    a.in_plane_axis = get_vec_or(j, "in_plane_axis", a.in_plane_axis);
    return a;
}

}  // namespace

json to_json(const ScenarioConfig& c) {
    return json{{"frequency_hz", c.frequency_hz}, {"wavelength_m", c.wavelength_m},
                {"tx1", array_to_json(c.tx1)},    {"tx2", array_to_json(c.tx2)},
                {"rx", array_to_json(c.rx)}};
}

ScenarioConfig scenario_config_from_json(const json& j) {
    ScenarioConfig c;
    c.frequency_hz = get_or(j, "frequency_hz", 0.0);
    c.wavelength_m = get_or(j, "wavelength_m", c.frequency_hz > 0.0 ? 0.0 : 0.01);
    if (j.contains("tx1")) c.tx1 = array_from_json(j.at("tx1"), c.tx1);
    if (j.contains("tx2")) c.tx2 = array_from_json(j.at("tx2"), c.tx2);
    if (j.contains("rx")) c.rx = array_from_json(j.at("rx"), c.rx);
    return c;
}

json to_json(const PipelineConfig& c) {
    json j;
    j["scenario"] = to_json(c.scenario);
    j["gain"] = {{"g_max_dbi", c.gain.g_max_dbi},
                 {"rolloff_exponent", c.gain.rolloff_exponent}};
    j["resonance"] = {{"amplifier_gain_db", c.resonance.amplifier_gain_db},
                      {"p_saturation_w", c.resonance.p_saturation_w},
                      {"reflection_ratio", c.resonance.reflection_ratio},
                      {"initial_tx_power_w", c.resonance.initial_tx_power_w},
                      {"delta_phi_rx", c.resonance.delta_phi_rx},
                      {"delta_phi_tx", c.resonance.delta_phi_tx},
                      {"tolerance", c.resonance.tolerance},
                      {"max_iterations", c.resonance.max_iterations}};
    j["doa"] = {{"noise_power_w", c.doa.noise_power_w},
                {"snapshots", c.doa.snapshots},
                {"subarray_rows", c.doa.subarray_rows},
                {"subarray_cols", c.doa.subarray_cols},
                {"source_count", c.doa.source_count},
                {"search",
                 {{"theta_min_deg", c.doa.search.theta_min_deg},
                  {"theta_max_deg", c.doa.search.theta_max_deg},
                  {"phi_min_deg", c.doa.search.phi_min_deg},
                  {"phi_max_deg", c.doa.search.phi_max_deg},
                  {"coarse_step_deg", c.doa.search.coarse_step_deg},
                  {"refine_step_deg", c.doa.search.refine_step_deg}}}};
    j["field_map"] = {{"enabled", c.field_map.enabled},
                      {"lo", vec_to_json(c.field_map.lo)},
                      {"hi", vec_to_json(c.field_map.hi)},
                      {"nx", c.field_map.nx},
                      {"ny", c.field_map.ny},
                      {"nz", c.field_map.nz}};
    j["phase_offset"] = c.phase_offset;
    return j;
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig c;
    if (j.contains("scenario")) c.scenario = scenario_config_from_json(j.at("scenario"));
    if (j.contains("gain")) {
        const json& g = j.at("gain");
        c.gain.g_max_dbi = get_or(g, "g_max_dbi", c.gain.g_max_dbi);
        c.gain.rolloff_exponent = get_or(g, "rolloff_exponent", c.gain.rolloff_exponent);
    }
    if (j.contains("resonance")) {
        const json& r = j.at("resonance");
        auto& rc = c.resonance;
        rc.amplifier_gain_db = get_or(r, "amplifier_gain_db", rc.amplifier_gain_db);
        rc.p_saturation_w = get_or(r, "p_saturation_w", rc.p_saturation_w);
        rc.reflection_ratio = get_or(r, "reflection_ratio", rc.reflection_ratio);
        rc.initial_tx_power_w = get_or(r, "initial_tx_power_w", rc.initial_tx_power_w);
        rc.delta_phi_rx = get_or(r, "delta_phi_rx", rc.delta_phi_rx);
        rc.delta_phi_tx = get_or(r, "delta_phi_tx", rc.delta_phi_tx);
        rc.tolerance = get_or(r, "tolerance", rc.tolerance);
        rc.max_iterations = get_or(r, "max_iterations", rc.max_iterations);
    }
    if (j.contains("doa")) {
        const json& d = j.at("doa");
        auto& dc = c.doa;
        dc.noise_power_w = get_or(d, "noise_power_w", dc.noise_power_w);
        dc.snapshots = get_or(d, "snapshots", dc.snapshots);
        dc.subarray_rows = get_or(d, "subarray_rows", dc.subarray_rows);
        dc.subarray_cols = get_or(d, "subarray_cols", dc.subarray_cols);
        dc.source_count = get_or(d, "source_count", dc.source_count);
        if (d.contains("search")) {
            const json& s = d.at("search");
            auto& sg = dc.search;
            sg.theta_min_deg = get_or(s, "theta_min_deg", sg.theta_min_deg);
            sg.theta_max_deg = get_or(s, "theta_max_deg", sg.theta_max_deg);
            sg.phi_min_deg = get_or(s, "phi_min_deg", sg.phi_min_deg);
            sg.phi_max_deg = get_or(s, "phi_max_deg", sg.phi_max_deg);
            sg.coarse_step_deg = get_or(s, "coarse_step_deg", sg.coarse_step_deg);
            sg.refine_step_deg = get_or(s, "refine_step_deg", sg.refine_step_deg);
        }
    }
    if (j.contains("field_map")) {
        const json& f = j.at("field_map");
        auto& fc = c.field_map;
        fc.enabled = get_or(f, "enabled", fc.enabled);
        fc.lo = get_vec_or(f, "lo", fc.lo);
        fc.hi = get_vec_or(f, "hi", fc.hi);
        fc.nx = get_or(f, "nx", fc.nx);
        fc.ny = get_or(f, "ny", fc.ny);
        fc.nz = get_or(f, "nz", fc.nz);
    }
    c.phase_offset = get_or(j, "phase_offset", c.phase_offset);
    return c;
}

json to_json(const ExperimentSpec& s) {
    json j;
    j["name"] = s.name;
    j["pipeline"] = to_json(s.pipeline);
    j["sweep"] = {{"parameter", s.sweep.parameter}, {"values", s.sweep.values},
                  {"azimuth_deg", s.sweep.azimuth_deg}, {"range_m", s.sweep.range_m},
                  {"theta_deg", s.sweep.theta_deg},     {"phi_deg", s.sweep.phi_deg}};
    j["metric"] = to_string(s.metric);
    j["monte_carlo_k"] = s.monte_carlo_k;
    j["master_seed"] = s.master_seed;
    j["outputs"] = s.outputs;
    return j;
}

ExperimentSpec experiment_spec_from_json(const json& j) {
    ExperimentSpec s;
    s.name = get_or<std::string>(j, "name", s.name);
    if (j.contains("pipeline")) s.pipeline = pipeline_config_from_json(j.at("pipeline"));
    if (j.contains("sweep")) {
        const json& w = j.at("sweep");
        s.sweep.parameter = get_or<std::string>(w, "parameter", s.sweep.parameter);
        s.sweep.values = get_or(w, "values", s.sweep.values);
        s.sweep.azimuth_deg = get_or(w, "azimuth_deg", s.sweep.azimuth_deg);
        s.sweep.range_m = get_or(w, "range_m", s.sweep.range_m);
        s.sweep.theta_deg = get_or(w, "theta_deg", s.sweep.theta_deg);
        s.sweep.phi_deg = get_or(w, "phi_deg", s.sweep.phi_deg);
    }
    s.metric = sweep_metric_from_string(get_or<std::string>(j, "metric", "rmse"));
    s.monte_carlo_k = get_or(j, "monte_carlo_k", s.monte_carlo_k);
    s.master_seed = get_or(j, "master_seed", s.master_seed);
    s.outputs = get_or(j, "outputs", s.outputs);
    return s;
}

namespace {

json load_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("parse error in " + path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    // Accept either a bare pipeline config or an experiment file.
    if (j.contains("pipeline")) return pipeline_config_from_json(j.at("pipeline"));
    return pipeline_config_from_json(j);
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    return experiment_spec_from_json(load_json_file(path));
}

std::string canonical_json(const ExperimentSpec& spec) { return to_json(spec).dump(); }
std::string canonical_json(const PipelineConfig& config) { return to_json(config).dump(); }

}  // namespace rbp
