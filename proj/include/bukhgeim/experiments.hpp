#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bukhgeim/grid.hpp"

namespace bukhgeim {

/// One config drives every experiment; identical config + seed reruns are
/// byte-identical. Loaded from JSON with defaults for absent keys.
struct ExperimentConfig {
    // grid
    double L = 2.0;
    int N = 128;
    std::string domain = "disk";
    double domain_size = 1.0;
    double R = 1.25;
    // standard bump potential
    double bump_cx = 0.1, bump_cy = -0.05;
    double bump_width = 0.55;
    double bump_amplitude = 1.0;
    double cgo_amplitude = 4.0;
    // stationary-phase rate study
    std::vector<double> statphase_taus{4, 8, 16, 32, 64, 128, 256, 512, 1024};
    std::vector<double> s_values{0.25, 0.75, 1.0};
    int fields_per_s = 5;
    double statphase_ratio_limit = 1.25;
    double slope_window = 0.15;
    double family_exponent_offset = 0.12;
    double window_r0 = 0.7, window_r1 = 0.95;
    // cgo threshold study
    std::vector<double> threshold_amplitudes{8, 16, 32};
    double threshold_tau_lo = 0.05, threshold_tau_hi = 64.0;
    int threshold_bisect_iters = 20;
    // cgo remainder sweep
    std::vector<double> cgo_taus{8, 16, 32, 64};
    // stability
    std::vector<double> eps_list{1e-1, 1e-2, 1e-3, 1e-4};
    double stability_s = 1.0;
    double alpha = 0.5;
    double noise = 0.0;
    // uniqueness / recon
    std::vector<double> uniqueness_taus{8, 16, 32, 64, 128};
    double recon_eps = 0.4;
    int scan_stride = 2;
    // misc
    std::uint64_t seed = 20240801;
    int workers = 0;
    std::string outdir = "out";

    static ExperimentConfig from_json_file(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json() const;       // canonical (sorted keys) dump
    std::string config_hash() const;   // fnv1a of the canonical dump

    GridPtr make_grid_from() const;
};

/// Spectrally generated test field of prescribed regularity s, supported
/// in X via a flat-top window (filter exponent carries a small calibration
/// offset so the realized decay matches the label on the finite grid).
Field s_regular_field(const GridPtr& g, double s, double exponent_offset, double r0, double r1,
                      std::uint64_t seed);

struct StatphaseRateResult {
    bool ratios_ok = true;
    bool slopes_ok = true;
    double max_ratio = 0.0;
    std::vector<double> slopes;  // one per (s, field)
    std::string csv_path, fits_path;
};
StatphaseRateResult run_statphase_rate(const ExperimentConfig& cfg);

struct CgoThresholdResult {
    std::vector<double> amplitudes;
    std::vector<double> q_norms;     // L^p of q per amplitude
    std::vector<double> thresholds;  // smallest tau with all ratios <= 1/2
    bool nondecreasing = true;
    bool strictly_increasing = true;
    std::string csv_path;
};
CgoThresholdResult run_cgo_threshold(const ExperimentConfig& cfg);

struct StabilityCurveResult {
    std::vector<double> eps, distances, true_diffs, bounds;
    double calibrated_C = 0.0;
    bool distances_decreasing = true;
    bool bound_holds_within3 = true;
    std::string csv_path, svg_path;
};
StabilityCurveResult run_stability_curve(const ExperimentConfig& cfg);

struct UniquenessResult {
    std::vector<double> taus, errors;  // relative L2 recon error per tau
    bool nonincreasing_to_floor = true;
    double total_reduction = 0.0;      // err(first)/err(last)
    std::string csv_path, svg_path;
};
UniquenessResult run_uniqueness(const ExperimentConfig& cfg);

/// least-squares slope of log(y) against log(x)
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bukhgeim
