#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ahss/controllers.hpp"
#include "ahss/duct.hpp"
#include "ahss/stability.hpp"
#include "ahss/state_space.hpp"

namespace ahss {

/// Invalid experiment configuration (bad file, bad field, unmet timing rule).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ControllerKind { None, Hss, Ahss };

/// Per-tone initial plant estimate: either an explicit complex matrix or
/// scale * e^{j theta} * M_*, resolved against the true plant at load time.
/// scale/theta may be uniform or given entrywise (matching M_*'s shape).
struct InitialEstimate {
    std::optional<CMat> value;
    double scale = 1.0;
    double theta = 0.0;
    std::optional<Mat> scale_entries;
    std::optional<Mat> theta_entries;

    CMat resolve(const CMat& M_star) const;
};

struct Timing {
    double sample_rate = 1000.0;   // Hz
    double window = 0.1;           // update period T_s, s
    double duration = 12.0;        // s
    double control_enable = 1.0;   // s
};

struct ExperimentConfig {
    // Exactly one of the two plant sources is set.
    std::optional<StateSpaceModel> plant_matrices;
    std::optional<DuctGeometry> duct;
    std::vector<int> duct_inputs{0};    // control speaker selection
    std::vector<int> duct_outputs{0};   // microphone selection

    TonalDisturbance tones;
    ControllerKind controller = ControllerKind::None;
    std::vector<InitialEstimate> initial_estimates;  // one per tone
    Timing timing;
    std::optional<AhssGains> gains;  // default: mu=gamma=0.2, nu=0.1||M0||_F^2
    std::optional<double> rho;       // default: mu/(nu1+||M0||_F^2)
    std::string output_dir = "out";
    long seed = 0;

    void validate() const;
    StateSpaceModel build_plant() const;
};

struct ToneTrace {
    double omega;
    std::vector<CVec> y;  // y_k, k from 1
    std::vector<CVec> u;  // u_k, command applied after step k
    std::vector<CMat> M;  // estimate after step k (AHSS; M_e for HSS)
};

struct OracleRow {
    long k;
    double prop1_gap;
    double dV;
    double dV_bound_margin;
    double abs_M;
    double c2;
};

struct RunResult {
    Vec t;
    Mat y;  // l x N
    Mat u;  // m x N
    std::vector<ToneTrace> tones;
    std::vector<OracleRow> oracle_rows;  // SISO single-tone AHSS runs only
    long windows = 0;
    bool diverged = false;
    long oracle_violations = 0;  // report-only in time-domain runs
};

RunResult run(const ExperimentConfig& config);

/// Paper-example configurations: ex1a/ex1b (SISO), ex2a/ex2b (two outputs),
/// ex3a/ex3b (2x2, two tones). The trailing letter selects the initial
/// estimate: 'a' inside the fixed-gain stability region, 'b' outside.
ExperimentConfig preset(const std::string& name);

ExperimentConfig load_config(const std::string& path);

/// timeseries.csv, phasors.csv, oracles.csv under dir (created if needed).
void write_csv(const RunResult& result, const std::string& dir);

struct Metrics {
    bool no_disturbance = false;
    double open_loop_rms = 0.0;
    double trailing_rms = 0.0;
    double rms_ratio = 0.0;
    std::vector<CVec> u_inf;       // per tone, mean over the final 10 windows
    long convergence_step = -1;    // first window with RMS < 1% of baseline
    bool diverged = false;
    long oracle_violations = 0;
};

/// Summary against a controller-free baseline run of the same plant.
Metrics metrics(const RunResult& result, const RunResult& baseline);

struct SweepRow {
    double theta;
    bool hss_stable;          // gain condition holds at the default rho
    double rho_max;           // negative when unstable for every rho
    double ahss_final_ratio;  // |y_K| / |y_1| from the phasor-domain loop
};

/// Vary the initial-estimate phase over a grid and map out fixed-gain
/// stability vs adaptive convergence, in phasor space (single tone, SISO).
std::vector<SweepRow> sweep_phase_grid(const ExperimentConfig& base, int points, long steps);

}  // namespace ahss
