#include "ahss/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>

namespace ahss {

namespace {

long samples_per_window(const Timing& t) { return std::lround(t.window * t.sample_rate); }

bool nearly_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

}  // namespace

CMat InitialEstimate::resolve(const CMat& M_star) const {
    if (value) {
        if (value->rows() != M_star.rows() || value->cols() != M_star.cols())
            throw ConfigError("explicit initial estimate has wrong dimensions");
        return *value;
    }
    if (scale_entries || theta_entries) {
        const Mat s = scale_entries ? *scale_entries : Mat::Constant(M_star.rows(), M_star.cols(), scale);
        const Mat th = theta_entries ? *theta_entries : Mat::Constant(M_star.rows(), M_star.cols(), theta);
        if (s.rows() != M_star.rows() || s.cols() != M_star.cols() ||
            th.rows() != M_star.rows() || th.cols() != M_star.cols())
            throw ConfigError("entrywise scale/theta must match the plant-map shape");
        CMat M0(M_star.rows(), M_star.cols());
        for (long i = 0; i < M0.rows(); ++i)
            for (long j = 0; j < M0.cols(); ++j)
                M0(i, j) = s(i, j) * std::polar(1.0, th(i, j)) * M_star(i, j);
        return M0;
    }
    return scale * std::polar(1.0, theta) * M_star;
}

void ExperimentConfig::validate() const {
    if (plant_matrices.has_value() == duct.has_value())
        throw ConfigError("exactly one plant source (matrices or duct) must be given");
    if (tones.tones.empty()) throw ConfigError("at least one disturbance tone is required");
    if (timing.sample_rate <= 0.0 || timing.window <= 0.0 || timing.duration <= 0.0)
        throw ConfigError("timing values must be positive");
    if (!nearly_integer(timing.window * timing.sample_rate))
        throw ConfigError("window length must be a whole number of samples");
    if (timing.control_enable < 0.0 || !nearly_integer(timing.control_enable / timing.window))
        throw ConfigError("control enable time must be a multiple of the window length");
    if (timing.duration < timing.control_enable)
        throw ConfigError("duration must cover the control enable time");

    double omega_max = 0.0, omega_min = std::numeric_limits<double>::infinity();
    for (const auto& tone : tones.tones) {
        omega_max = std::max(omega_max, tone.omega);
        omega_min = std::min(omega_min, tone.omega);
    }
    if (timing.sample_rate < 10.0 * omega_max / (2.0 * M_PI) - 1e-9)
        throw ConfigError("sample rate under-resolves the fastest tone (need >= 10 samples/period)");
    if (timing.window < 2.0 * M_PI / omega_min - 1e-9)
        throw ConfigError("window must span at least one period of every tone");

    if (controller != ControllerKind::None &&
        initial_estimates.size() != tones.tones.size())
        throw ConfigError("one initial estimate per tone is required");
    if (gains) gains->validate();
    if (rho && *rho <= 0.0) throw ConfigError("rho must be positive");
}

StateSpaceModel ExperimentConfig::build_plant() const {
    if (plant_matrices) return *plant_matrices;
    StateSpaceModel full = ahss::build_duct(*duct);
    for (int j : duct_inputs)
        if (j < 0 || j >= full.m()) throw ConfigError("duct input index out of range");
    for (int j : duct_outputs)
        if (j < 0 || j >= full.l()) throw ConfigError("duct output index out of range");
    Mat B(full.n(), duct_inputs.size()), C(duct_outputs.size(), full.n());
    for (std::size_t j = 0; j < duct_inputs.size(); ++j) B.col(j) = full.B.col(duct_inputs[j]);
    for (std::size_t j = 0; j < duct_outputs.size(); ++j) C.row(j) = full.C.row(duct_outputs[j]);
    return StateSpaceModel(full.A, B, C, Mat::Zero(C.rows(), B.cols()), full.D1,
                           Mat::Zero(C.rows(), full.p()), full.x0);
}

RunResult run(const ExperimentConfig& config) {
    config.validate();
    const StateSpaceModel plant = config.build_plant();
    if (plant.p() != config.tones.channels())
        throw ConfigError("disturbance channel count does not match the plant");

    const Timing& tm = config.timing;
    const long spw = samples_per_window(tm);
    const long total_windows = static_cast<long>(std::floor(tm.duration / tm.window + 1e-9));
    const long enable_window = std::lround(tm.control_enable / tm.window);

    const double settling = 4.0 / slowest_decay_rate(plant);
    if (tm.window < settling)
        std::cerr << "warning: window " << tm.window << " s is below the settling-time guidance "
                  << settling << " s; the steady-state assumption may be degraded\n";

    const std::size_t q = config.tones.tones.size();
    std::vector<CMat> M_star(q);
    for (std::size_t i = 0; i < q; ++i)
        M_star[i] = transfer_at(plant, config.tones.tones[i].omega, Port::Control);

    ToneBank bank;
    std::vector<Phasor> commands;
    if (config.controller != ControllerKind::None) {
        for (std::size_t i = 0; i < q; ++i) {
            const CMat M0 = config.initial_estimates[i].resolve(M_star[i]);
            const AhssGains g = config.gains ? *config.gains : default_gains(M0);
            const CVec u0 = CVec::Zero(plant.m());
            if (config.controller == ControllerKind::Hss) {
                const double rho = config.rho ? *config.rho : default_rho(M0, g);
                bank.add(config.tones.tones[i].omega, HssController(M0, rho, u0));
            } else {
                bank.add(config.tones.tones[i].omega, AhssController(M0, u0, g));
            }
        }
        commands = bank.commands();
    }

    RunResult result;
    result.t.resize(total_windows * spw);
    result.y.resize(plant.l(), total_windows * spw);
    result.u.resize(plant.m(), total_windows * spw);
    result.tones.resize(q);
    for (std::size_t i = 0; i < q; ++i) result.tones[i].omega = config.tones.tones[i].omega;

    const SignalSource d_fn = [&](double t) { return config.tones(t); };
    const SignalSource zero_fn = [&](double) { return Vec::Zero(plant.m()); };
    const SignalSource cmd_fn = [&](double t) {
        return synthesize(std::span<const Phasor>(commands.data(), commands.size()), t);
    };

    Vec x = plant.x0;
    std::vector<double> first_norms(q, -1.0);
    long filled = 0;

    for (long w = 0; w < total_windows; ++w) {
        const bool active = config.controller != ControllerKind::None && w >= enable_window;
        const double t0 = w * tm.window;
        const double t1 = (w + 1) * tm.window;
        const SignalSource& u_fn = active ? cmd_fn : zero_fn;

        SimResult sim = simulate(plant, u_fn, d_fn, t0, t1, tm.sample_rate, &x);
        x = sim.x_end;
        result.t.segment(filled, spw) = sim.t;
        result.y.middleCols(filled, spw) = sim.y;
        for (long s = 0; s < spw; ++s) result.u.col(filled + s) = u_fn(sim.t(s));
        filled += spw;
        ++result.windows;

        if (!active) continue;

        // Extract y_{k+1} from the samples generated under the command u_k,
        // then step every controller.
        bool overflow = !sim.y.allFinite();
        if (!overflow) {
            for (std::size_t i = 0; i < q; ++i) {
                const Phasor y_ph = extract(sim.y, sim.t, config.tones.tones[i].omega);
                if (first_norms[i] < 0.0) first_norms[i] = y_ph.value.norm();
                if (y_ph.value.norm() > 1e3 * std::max(first_norms[i], 1e-300)) overflow = true;
                result.tones[i].y.push_back(y_ph.value);
            }
        }
        if (overflow) {
            result.diverged = true;
            break;
        }
        for (std::size_t i = 0; i < q; ++i) {
            const CVec& y_value = result.tones[i].y.back();
            ToneController& entry = bank.controller(i);
            std::visit([&](auto& ctl) { ctl.step(y_value); }, entry);
            result.tones[i].u.push_back(
                std::visit([](const auto& ctl) { return ctl.command(); }, entry));
            result.tones[i].M.push_back(
                std::visit([](const auto& ctl) { return ctl.estimate(); }, entry));
        }
        commands = bank.commands();
    }

    result.t.conservativeResize(filled);
    result.y.conservativeResize(Eigen::NoChange, filled);
    result.u.conservativeResize(Eigen::NoChange, filled);

    // Analysis oracles for the SISO single-tone adaptive case, report-only.
    if (config.controller == ControllerKind::Ahss && q == 1 && plant.l() == 1 &&
        plant.m() == 1 && !result.tones[0].M.empty()) {
        const Complex Ms = M_star[0](0, 0);
        const CMat M0 = config.initial_estimates[0].resolve(M_star[0]);
        const AhssGains g = config.gains ? *config.gains : default_gains(M0);
        try {
            const LyapunovConstants c =
                lyap_constants(M0(0, 0), Ms, g.mu, g.gamma, g.nu1, g.nu2);
            const auto& tr = result.tones[0];
            const long K = static_cast<long>(tr.M.size());
            for (long k = 1; k + 1 <= K; ++k) {
                const Complex M_prev = (k == 1) ? M0(0, 0) : tr.M[k - 2](0, 0);
                const Complex M_k = tr.M[k - 1](0, 0);
                const Complex y_k = tr.y[k - 1](0);
                const Complex y_next = tr.y[k](0);
                OracleRow row{};
                row.k = k;
                row.prop1_gap = prop1_gap((CMat(1, 1) << M_prev).finished(),
                                          (CMat(1, 1) << M_k).finished(),
                                          (CMat(1, 1) << Ms).finished(),
                                          (CVec(1) << y_k).finished(), g.gamma, g.nu2);
                const double V_k = lyap_V(y_k, M_prev - Ms, c.a, c.b_conv);
                const double V_next = lyap_V(y_next, M_k - Ms, c.a, c.b_conv);
                row.dV = V_next - V_k;
                row.dV_bound_margin = row.dV + c.c1 * std::norm(y_k) / (1.0 + c.a * std::norm(y_k));
                row.abs_M = std::abs(M_k);
                row.c2 = c.c2;
                if (row.prop1_gap > 1e-12 || row.dV_bound_margin > 1e-12 ||
                    row.abs_M < c.c2 - 1e-12)
                    ++result.oracle_violations;
                result.oracle_rows.push_back(row);
            }
        } catch (const std::domain_error&) {
            // degenerate constants (estimate on the real ray of M_*); skip
        }
    }
    return result;
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;
    cfg.duct = DuctGeometry{};
    cfg.controller = ControllerKind::Ahss;
    cfg.output_dir = name;
    const double w1 = 251.0, w2 = 628.0;

    auto one_tone = [&] {  // d = sin(w1 t) + 2 cos(w1 t)
        cfg.tones = TonalDisturbance({{w1, (Vec(1) << 2.0).finished(), (Vec(1) << 1.0).finished()}});
    };
    auto two_tones = [&] {  // d = sin + cos at both frequencies
        cfg.tones = TonalDisturbance({{w1, (Vec(1) << 1.0).finished(), (Vec(1) << 1.0).finished()},
                                      {w2, (Vec(1) << 1.0).finished(), (Vec(1) << 1.0).finished()}});
    };
    auto uniform = [](double s, double th) {
        InitialEstimate e;
        e.scale = s;
        e.theta = th;
        return e;
    };

    if (name == "ex1a" || name == "ex1b") {
        cfg.duct_inputs = {0};
        cfg.duct_outputs = {0};
        one_tone();
        cfg.initial_estimates = {uniform(2.0, name == "ex1a" ? M_PI / 3.0 : 2.0 * M_PI / 3.0)};
    } else if (name == "ex2a" || name == "ex2b") {
        cfg.duct_inputs = {0};
        cfg.duct_outputs = {0, 1};
        one_tone();
        InitialEstimate e;
        e.scale_entries = (Mat(2, 1) << 1.5, 0.5).finished();
        e.theta_entries = name == "ex2a" ? (Mat(2, 1) << M_PI / 4.0, M_PI / 3.0).finished()
                                         : (Mat(2, 1) << 3.0 * M_PI / 4.0, 2.0 * M_PI / 3.0).finished();
        cfg.initial_estimates = {e};
    } else if (name == "ex3a" || name == "ex3b") {
        cfg.duct_inputs = {0, 1};
        cfg.duct_outputs = {0, 1};
        two_tones();
        if (name == "ex3a")
            cfg.initial_estimates = {uniform(0.6, M_PI / 6.0), uniform(0.9, M_PI / 3.0)};
        else
            cfg.initial_estimates = {uniform(0.2, M_PI / 7.0), uniform(0.6, M_PI / 14.0)};
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    return cfg;
}

namespace {

double rms_tail(const RunResult& r, double seconds) {
    if (r.t.size() == 0) return 0.0;
    const double t_end = r.t(r.t.size() - 1);
    long start = 0;
    while (start < r.t.size() && r.t(start) < t_end - seconds) ++start;
    const long count = r.t.size() - start;
    if (count <= 0) return 0.0;
    return std::sqrt(r.y.middleCols(start, count).squaredNorm() / static_cast<double>(count));
}

}  // namespace

Metrics metrics(const RunResult& result, const RunResult& baseline) {
    Metrics m;
    m.diverged = result.diverged;
    m.oracle_violations = result.oracle_violations;
    m.open_loop_rms = rms_tail(baseline, 1.0);
    m.trailing_rms = rms_tail(result, 1.0);
    if (m.open_loop_rms == 0.0) {
        m.no_disturbance = true;
        return m;
    }
    m.rms_ratio = m.trailing_rms / m.open_loop_rms;

    for (const auto& tone : result.tones) {
        const long K = static_cast<long>(tone.u.size());
        if (K == 0) continue;
        const long take = std::min<long>(10, K);
        CVec mean = CVec::Zero(tone.u.back().size());
        for (long k = K - take; k < K; ++k) mean += tone.u[k];
        m.u_inf.push_back(mean / static_cast<double>(take));
    }

    // First controller window whose RMS drops below 1% of the baseline.
    if (result.windows > 0 && !result.diverged) {
        const long spw = result.t.size() / result.windows;
        long step = 0;
        for (long w = 0; w < result.windows; ++w) {
            const double rms = std::sqrt(result.y.middleCols(w * spw, spw).squaredNorm() /
                                         static_cast<double>(spw));
            const bool controlled = !result.tones.empty() &&
                                    static_cast<long>(result.tones.front().y.size()) > 0 &&
                                    w >= result.windows - static_cast<long>(result.tones.front().y.size());
            if (controlled) ++step;
            if (controlled && rms < 0.01 * m.open_loop_rms) {
                m.convergence_step = step;
                break;
            }
        }
    }
    return m;
}

std::vector<SweepRow> sweep_phase_grid(const ExperimentConfig& base, int points, long steps) {
    if (points < 1) throw ConfigError("sweep needs at least one grid point");
    ExperimentConfig cfg = base;
    cfg.validate();
    const StateSpaceModel plant = cfg.build_plant();
    if (plant.l() != 1 || plant.m() != 1 || cfg.tones.tones.size() != 1)
        throw ConfigError("phase sweep is defined for SISO single-tone setups");

    const double omega = cfg.tones.tones[0].omega;
    const Complex Ms = transfer_at(plant, omega, Port::Control)(0, 0);
    const CVec d_ph = cfg.tones.tones[0].d_c.cast<std::complex<double>>() -
                      std::complex<double>(0, 1) * cfg.tones.tones[0].d_s.cast<std::complex<double>>();
    const Complex d_hat = (transfer_at(plant, omega, Port::Disturbance) * d_ph)(0);
    const double scale = cfg.initial_estimates.empty() ? 1.0 : cfg.initial_estimates[0].scale;

    std::vector<SweepRow> rows;
    rows.reserve(points);
    for (int i = 0; i < points; ++i) {
        SweepRow row{};
        row.theta = -M_PI + 2.0 * M_PI * (i + 0.5) / points;
        const Complex M0 = scale * std::polar(1.0, row.theta) * Ms;
        const CMat M0m = (CMat(1, 1) << M0).finished();
        const AhssGains g = cfg.gains ? *cfg.gains : default_gains(M0m);
        const GainBound bound = hss_gain_bound(M0m, (CMat(1, 1) << Ms).finished());
        row.rho_max = bound.stabilizable() ? *bound.rho_max : -1.0;
        row.hss_stable = bound.stabilizable() && default_rho(M0m, g) < *bound.rho_max;
        const StepTrace tr = siso_closed_loop_iterate(Ms, d_hat, 0.0, M0, g, steps);
        const double y1 = std::abs(tr.y1);
        row.ahss_final_ratio = y1 == 0.0 ? 0.0 : std::abs(tr.steps.back().y) / y1;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ahss
