#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "ahss/experiment.hpp"

namespace ahss {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) ok = true;
        if (!ok) throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

Mat parse_matrix(const json& rows, const char* name) {
    if (!rows.is_array() || rows.empty())
        throw ConfigError(std::string(name) + " must be a non-empty array of rows");
    const std::size_t cols = rows[0].size();
    Mat out(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw ConfigError(std::string(name) + " rows must be equal length");
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = rows[i][j].get<double>();
    }
    return out;
}

Vec parse_vector(const json& arr, const char* name) {
    if (!arr.is_array()) throw ConfigError(std::string(name) + " must be an array");
    Vec out(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) out(i) = arr[i].get<double>();
    return out;
}

CMat parse_complex_matrix(const json& rows, const char* name) {
    // Each entry is a [re, im] pair.
    if (!rows.is_array() || rows.empty())
        throw ConfigError(std::string(name) + " must be a non-empty array of rows");
    const std::size_t cols = rows[0].size();
    CMat out(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const json& e = rows[i][j];
            if (!e.is_array() || e.size() != 2)
                throw ConfigError(std::string(name) + " entries must be [re, im] pairs");
            out(i, j) = std::complex<double>(e[0].get<double>(), e[1].get<double>());
        }
    return out;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    check_keys(root, "config",
               {"plant", "tones", "controller", "timing", "gains", "rho", "outputs", "seed"});
    ExperimentConfig cfg;

    const json& plant = root.at("plant");
    const std::string ptype = plant.at("type").get<std::string>();
    if (ptype == "duct") {
        check_keys(plant, "plant", {"type", "geometry", "inputs", "outputs"});
        DuctGeometry g;
        if (plant.contains("geometry")) {
            const json& geo = plant["geometry"];
            check_keys(geo, "plant.geometry",
                       {"length", "xi_disturbance", "xi_speakers", "xi_microphones",
                        "phase_speed", "air_density", "speaker_area", "mode_count", "damping"});
            if (geo.contains("length")) g.length = geo["length"].get<double>();
            if (geo.contains("xi_disturbance")) g.xi_disturbance = geo["xi_disturbance"].get<double>();
            if (geo.contains("xi_speakers")) g.xi_speakers = geo["xi_speakers"].get<std::vector<double>>();
            if (geo.contains("xi_microphones"))
                g.xi_microphones = geo["xi_microphones"].get<std::vector<double>>();
            if (geo.contains("phase_speed")) g.phase_speed = geo["phase_speed"].get<double>();
            if (geo.contains("air_density")) g.air_density = geo["air_density"].get<double>();
            if (geo.contains("speaker_area")) g.speaker_area = geo["speaker_area"].get<double>();
            if (geo.contains("mode_count")) g.mode_count = geo["mode_count"].get<int>();
            if (geo.contains("damping")) g.damping = geo["damping"].get<std::vector<double>>();
            else g.damping.assign(g.mode_count, 0.2);
        }
        cfg.duct = g;
        if (plant.contains("inputs")) cfg.duct_inputs = plant["inputs"].get<std::vector<int>>();
        if (plant.contains("outputs")) cfg.duct_outputs = plant["outputs"].get<std::vector<int>>();
    } else if (ptype == "explicit") {
        check_keys(plant, "plant", {"type", "A", "B", "C", "D", "D1", "D2", "x0"});
        const Mat A = parse_matrix(plant.at("A"), "A");
        const Mat B = parse_matrix(plant.at("B"), "B");
        const Mat C = parse_matrix(plant.at("C"), "C");
        const Mat D1 = parse_matrix(plant.at("D1"), "D1");
        const Mat D = plant.contains("D") ? parse_matrix(plant["D"], "D") : Mat::Zero(C.rows(), B.cols());
        const Mat D2 =
            plant.contains("D2") ? parse_matrix(plant["D2"], "D2") : Mat::Zero(C.rows(), D1.cols());
        const Vec x0 =
            plant.contains("x0") ? parse_vector(plant["x0"], "x0") : Vec::Zero(A.rows());
        try {
            cfg.plant_matrices.emplace(A, B, C, D, D1, D2, x0);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid plant matrices: ") + e.what());
        }
    } else {
        throw ConfigError("plant.type must be 'duct' or 'explicit'");
    }

    std::vector<Tone> tones;
    for (const json& t : root.at("tones")) {
        check_keys(t, "tones[]", {"omega", "dc", "ds"});
        tones.push_back({t.at("omega").get<double>(), parse_vector(t.at("dc"), "dc"),
                         parse_vector(t.at("ds"), "ds")});
    }
    try {
        cfg.tones = TonalDisturbance(std::move(tones));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid tones: ") + e.what());
    }

    if (root.contains("controller")) {
        const json& ctl = root["controller"];
        check_keys(ctl, "controller", {"type", "initial_estimates"});
        const std::string kind = ctl.at("type").get<std::string>();
        if (kind == "none") cfg.controller = ControllerKind::None;
        else if (kind == "hss") cfg.controller = ControllerKind::Hss;
        else if (kind == "ahss") cfg.controller = ControllerKind::Ahss;
        else throw ConfigError("controller.type must be none, hss, or ahss");
        if (ctl.contains("initial_estimates")) {
            for (const json& e : ctl["initial_estimates"]) {
                check_keys(e, "initial_estimates[]", {"value", "scale", "theta"});
                InitialEstimate est;
                if (e.contains("value")) {
                    est.value = parse_complex_matrix(e["value"], "initial estimate");
                } else {
                    if (e.contains("scale")) {
                        if (e["scale"].is_array()) est.scale_entries = parse_matrix(e["scale"], "scale");
                        else est.scale = e["scale"].get<double>();
                    }
                    if (e.contains("theta")) {
                        if (e["theta"].is_array()) est.theta_entries = parse_matrix(e["theta"], "theta");
                        else est.theta = e["theta"].get<double>();
                    }
                }
                cfg.initial_estimates.push_back(est);
            }
        }
    }

    if (root.contains("timing")) {
        const json& tm = root["timing"];
        check_keys(tm, "timing", {"sample_rate", "window", "duration", "control_enable"});
        if (tm.contains("sample_rate")) cfg.timing.sample_rate = tm["sample_rate"].get<double>();
        if (tm.contains("window")) cfg.timing.window = tm["window"].get<double>();
        if (tm.contains("duration")) cfg.timing.duration = tm["duration"].get<double>();
        if (tm.contains("control_enable")) cfg.timing.control_enable = tm["control_enable"].get<double>();
    }

    if (root.contains("gains")) {
        const json& g = root["gains"];
        check_keys(g, "gains", {"mu", "gamma", "nu1", "nu2"});
        AhssGains gains{g.at("mu").get<double>(), g.at("gamma").get<double>(),
                        g.at("nu1").get<double>(), g.at("nu2").get<double>()};
        try {
            gains.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid gains: ") + e.what());
        }
        cfg.gains = gains;
    }
    if (root.contains("rho")) cfg.rho = root["rho"].get<double>();
    if (root.contains("outputs")) {
        check_keys(root["outputs"], "outputs", {"dir"});
        if (root["outputs"].contains("dir")) cfg.output_dir = root["outputs"]["dir"].get<std::string>();
    }
    if (root.contains("seed")) cfg.seed = root["seed"].get<long>();

    cfg.validate();
    return cfg;
}

void write_csv(const RunResult& result, const std::string& dir) {
    std::filesystem::create_directories(dir);

    {
        std::ofstream out(dir + "/timeseries.csv");
        out << "t";
        for (long i = 0; i < result.y.rows(); ++i) out << ",y_" << (i + 1);
        for (long i = 0; i < result.u.rows(); ++i) out << ",u_" << (i + 1);
        out << "\n";
        for (long s = 0; s < result.t.size(); ++s) {
            out << format_number(result.t(s));
            for (long i = 0; i < result.y.rows(); ++i) out << "," << format_number(result.y(i, s));
            for (long i = 0; i < result.u.rows(); ++i) out << "," << format_number(result.u(i, s));
            out << "\n";
        }
    }

    {
        std::ofstream out(dir + "/phasors.csv");
        out << "k,tone_index";
        if (!result.tones.empty() && !result.tones.front().y.empty()) {
            const auto& t0 = result.tones.front();
            for (long i = 0; i < t0.y.front().size(); ++i)
                out << ",y_re_" << (i + 1) << ",y_im_" << (i + 1);
            for (long i = 0; i < t0.u.front().size(); ++i)
                out << ",u_re_" << (i + 1) << ",u_im_" << (i + 1);
            for (long i = 0; i < t0.M.front().rows(); ++i)
                for (long j = 0; j < t0.M.front().cols(); ++j)
                    out << ",M_re_" << (i + 1) << "_" << (j + 1) << ",M_im_" << (i + 1) << "_" << (j + 1);
        }
        out << "\n";
        std::size_t max_steps = 0;
        for (const auto& tone : result.tones) max_steps = std::max(max_steps, tone.u.size());
        for (std::size_t k = 0; k < max_steps; ++k) {
            for (std::size_t ti = 0; ti < result.tones.size(); ++ti) {
                const auto& tone = result.tones[ti];
                if (k >= tone.u.size()) continue;
                out << (k + 1) << "," << ti;
                for (long i = 0; i < tone.y[k].size(); ++i)
                    out << "," << format_number(tone.y[k](i).real()) << ","
                        << format_number(tone.y[k](i).imag());
                for (long i = 0; i < tone.u[k].size(); ++i)
                    out << "," << format_number(tone.u[k](i).real()) << ","
                        << format_number(tone.u[k](i).imag());
                for (long i = 0; i < tone.M[k].rows(); ++i)
                    for (long j = 0; j < tone.M[k].cols(); ++j)
                        out << "," << format_number(tone.M[k](i, j).real()) << ","
                            << format_number(tone.M[k](i, j).imag());
                out << "\n";
            }
        }
    }

    {
        std::ofstream out(dir + "/oracles.csv");
        out << "k,prop1_gap,dV,dV_bound_margin,abs_M,c2\n";
        for (const auto& row : result.oracle_rows)
            out << row.k << "," << format_number(row.prop1_gap) << "," << format_number(row.dV)
                << "," << format_number(row.dV_bound_margin) << "," << format_number(row.abs_M)
                << "," << format_number(row.c2) << "\n";
    }
}

}  // namespace ahss
