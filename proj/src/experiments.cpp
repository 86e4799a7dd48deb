#include "bukhgeim/experiments.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bukhgeim/cgo.hpp"
#include "bukhgeim/fft.hpp"
#include "bukhgeim/io.hpp"
#include "bukhgeim/norms.hpp"
#include "bukhgeim/recon.hpp"
#include "bukhgeim/rng.hpp"

namespace bukhgeim {

using nlohmann::json;

namespace {

json to_json_obj(const ExperimentConfig& c) {
    json j;
    j["grid"] = {{"L", c.L}, {"N", c.N}, {"domain", c.domain},
                 {"domain_size", c.domain_size}, {"R", c.R}};
    j["bump"] = {{"cx", c.bump_cx}, {"cy", c.bump_cy}, {"width", c.bump_width},
                 {"amplitude", c.bump_amplitude}};
    j["cgo"] = {{"amplitude", c.cgo_amplitude}, {"taus", c.cgo_taus}};
    j["statphase"] = {{"taus", c.statphase_taus}, {"s_values", c.s_values},
                      {"fields_per_s", c.fields_per_s},
                      {"ratio_limit", c.statphase_ratio_limit},
                      {"slope_window", c.slope_window},
                      {"family_exponent_offset", c.family_exponent_offset},
                      {"window_r0", c.window_r0}, {"window_r1", c.window_r1}};
    j["threshold"] = {{"amplitudes", c.threshold_amplitudes},
                      {"tau_lo", c.threshold_tau_lo}, {"tau_hi", c.threshold_tau_hi},
                      {"bisect_iters", c.threshold_bisect_iters}};
    j["stability"] = {{"eps_list", c.eps_list}, {"s", c.stability_s}, {"alpha", c.alpha},
                      {"noise", c.noise}};
    j["uniqueness"] = {{"taus", c.uniqueness_taus}, {"eps", c.recon_eps},
                       {"scan_stride", c.scan_stride}};
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["outdir"] = c.outdir;
    return j;
}

void from_json_obj(const json& j, ExperimentConfig& c) {
    auto get = [&](const json& o, const char* k, auto& dst) {
        if (o.contains(k)) dst = o[k].get<std::decay_t<decltype(dst)>>();
    };
    if (j.contains("grid")) {
        get(j["grid"], "L", c.L);
        get(j["grid"], "N", c.N);
        get(j["grid"], "domain", c.domain);
        get(j["grid"], "domain_size", c.domain_size);
        get(j["grid"], "R", c.R);
    }
    if (j.contains("bump")) {
        get(j["bump"], "cx", c.bump_cx);
        get(j["bump"], "cy", c.bump_cy);
        get(j["bump"], "width", c.bump_width);
        get(j["bump"], "amplitude", c.bump_amplitude);
    }
    if (j.contains("cgo")) {
        get(j["cgo"], "amplitude", c.cgo_amplitude);
        get(j["cgo"], "taus", c.cgo_taus);
    }
    if (j.contains("statphase")) {
        const auto& o = j["statphase"];
        get(o, "taus", c.statphase_taus);
        get(o, "s_values", c.s_values);
        get(o, "fields_per_s", c.fields_per_s);
        get(o, "ratio_limit", c.statphase_ratio_limit);
        get(o, "slope_window", c.slope_window);
        get(o, "family_exponent_offset", c.family_exponent_offset);
        get(o, "window_r0", c.window_r0);
        get(o, "window_r1", c.window_r1);
    }
    if (j.contains("threshold")) {
        const auto& o = j["threshold"];
        get(o, "amplitudes", c.threshold_amplitudes);
        get(o, "tau_lo", c.threshold_tau_lo);
        get(o, "tau_hi", c.threshold_tau_hi);
        get(o, "bisect_iters", c.threshold_bisect_iters);
    }
    if (j.contains("stability")) {
        const auto& o = j["stability"];
        get(o, "eps_list", c.eps_list);
        get(o, "s", c.stability_s);
        get(o, "alpha", c.alpha);
        get(o, "noise", c.noise);
    }
    if (j.contains("uniqueness")) {
        const auto& o = j["uniqueness"];
        get(o, "taus", c.uniqueness_taus);
        get(o, "eps", c.recon_eps);
        get(o, "scan_stride", c.scan_stride);
    }
    get(j, "seed", c.seed);
    get(j, "workers", c.workers);
    get(j, "outdir", c.outdir);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    ExperimentConfig c;
    json j = json::parse(text);
    from_json_obj(j, c);
    if (c.N < 16) throw std::invalid_argument("config: N too small");
    for (std::size_t i = 1; i < c.uniqueness_taus.size(); ++i)
        if (c.uniqueness_taus[i] <= c.uniqueness_taus[i - 1])
            throw std::invalid_argument("config: tau grid must be strictly increasing");
    return c;
}

std::string ExperimentConfig::to_json() const { return to_json_obj(*this).dump(2); }

std::string ExperimentConfig::config_hash() const { return fnv1a_hex(to_json()); }

GridPtr ExperimentConfig::make_grid_from() const {
    DomainDescriptor d;
    d.kind = domain == "square" ? DomainKind::Square : DomainKind::Disk;
    d.size = domain_size;
    return make_grid(L, N, d, R);
}

Field s_regular_field(const GridPtr& g, double s, double exponent_offset, double r0, double r1,
                      std::uint64_t seed) {
    const int N = g->N;
    Rng rng(seed);
    Field noise(g, SupportTag::WholeGrid);
    for (auto& v : noise.values) v = rng.normal();
    Field win = flattop_window(g, r0, r1);
    Field inner = pointwise_mul(win, noise);
    Fft2D fft(N);
    std::vector<cplx> hat(g->nodes());
    fft.forward(inner.values.data(), hat.data());
    const double ex = -(1.0 + s - exponent_offset) / 2.0;
    for (int i = 0; i < N; ++i) {
        double x1 = g->xi(i);
        for (int j = 0; j < N; ++j) {
            double x2 = g->xi(j);
            hat[g->idx(i, j)] *= std::pow(1.0 + x1 * x1 + x2 * x2, ex);
        }
    }
    Field filt(g, SupportTag::WholeGrid);
    fft.backward(hat.data(), filt.values.data());
    const double scale = 1.0 / (static_cast<double>(N) * N);
    for (auto& v : filt.values) v = v.real() * scale;
    Field out = pointwise_mul(win, filt);
    out.support = SupportTag::XSupported;
    double nrm = lp_norm(out, 2.0);
    if (nrm > 0)
        for (auto& v : out.values) v /= nrm;
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        double lx = std::log(x[i]), ly = std::log(std::max(y[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StatphaseRateResult run_statphase_rate(const ExperimentConfig& cfg) {
    StatphaseRateResult res;
    auto g = cfg.make_grid_from();
    const std::string hash = cfg.config_hash();
    std::filesystem::create_directories(cfg.outdir);
    std::string csv = "config_hash,s,field,tau,measured,bound,ratio\n";
    std::string fits = "config_hash,s,field,slope,target,within\n";
    for (double s : cfg.s_values) {
        for (int fidx = 0; fidx < cfg.fields_per_s; ++fidx) {
            std::uint64_t seed =
                derive_seed(cfg.seed, "statphase/s=" + fmt_g(s) + "/f=" + std::to_string(fidx));
            Field Q = s_regular_field(g, s, cfg.family_exponent_offset, cfg.window_r0,
                                      cfg.window_r1, seed);
            std::vector<double> errs;
            for (double tau : cfg.statphase_taus) {
                StatPhaseError e = stat_phase_error(extend_zero(Q), tau, s);
                double ratio = e.bound > 0 ? e.measured / e.bound : 0.0;
                res.max_ratio = std::max(res.max_ratio, ratio);
                if (ratio > cfg.statphase_ratio_limit) res.ratios_ok = false;
                errs.push_back(e.measured);
                csv += hash + "," + fmt_g(s) + "," + std::to_string(fidx) + "," + fmt_g(tau) +
                       "," + fmt_g(e.measured) + "," + fmt_g(e.bound) + "," + fmt_g(ratio) + "\n";
            }
            // drop the smallest tau (pre-asymptotic) for the fit
            std::vector<double> xs(cfg.statphase_taus.begin() + 1, cfg.statphase_taus.end());
            std::vector<double> ys(errs.begin() + 1, errs.end());
            double slope = loglog_slope(xs, ys);
            res.slopes.push_back(slope);
            bool within = std::abs(slope + s / 2.0) <= cfg.slope_window;
            if (!within) res.slopes_ok = false;
            fits += hash + "," + fmt_g(s) + "," + std::to_string(fidx) + "," + fmt_g(slope) +
                    "," + fmt_g(-s / 2.0) + "," + (within ? "1" : "0") + "\n";
        }
    }
    res.csv_path = cfg.outdir + "/statphase_rate.csv";
    res.fits_path = cfg.outdir + "/statphase_fits.csv";
    write_text_atomic(res.csv_path, csv);
    write_text_atomic(res.fits_path, fits);
    return res;
}

namespace {

double max_series_ratio(CauchyWorkspace& ws, const Potential& q, double tau, cplx z0) {
    PhaseParams p{tau, z0, +1};
    CgoOptions opt;
    opt.j_max = 12;
    try {
        CGOSolution sol = build_cgo(ws, q, p, CgoSide::Phase, opt);
        double worst = 0.0;
        for (double r : sol.term_ratios) worst = std::max(worst, r);
        return worst;
    } catch (const CgoNonConvergence&) {
        return 2.0;
    }
}

}  // namespace

CgoThresholdResult run_cgo_threshold(const ExperimentConfig& cfg) {
    CgoThresholdResult res;
    auto g = cfg.make_grid_from();
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    const std::string hash = cfg.config_hash();
    std::filesystem::create_directories(cfg.outdir);
    std::string csv = "config_hash,amplitude,q_lp,threshold_tau\n";
    cplx z0(0.05, -0.03);
    for (double amp : cfg.threshold_amplitudes) {
        Potential q;
        q.field = bump_field(g, cplx(cfg.bump_cx, cfg.bump_cy), cfg.bump_width, amp);
        q.p = 4.0;
        double qn = lp_norm(q.field, 4.0);
        double thr = 0.0;
        if (amp != 0.0) {
            double lo = cfg.threshold_tau_lo, hi = cfg.threshold_tau_hi;
            if (max_series_ratio(ws, q, hi, z0) > 0.5) {
                thr = std::numeric_limits<double>::infinity();
            } else if (max_series_ratio(ws, q, lo, z0) <= 0.5) {
                thr = lo;
            } else {
                for (int it = 0; it < cfg.threshold_bisect_iters; ++it) {
                    double mid = std::sqrt(lo * hi);
                    if (max_series_ratio(ws, q, mid, z0) <= 0.5) hi = mid;
                    else lo = mid;
                }
                thr = hi;
            }
        }
        res.amplitudes.push_back(amp);
        res.q_norms.push_back(qn);
        res.thresholds.push_back(thr);
        csv += hash + "," + fmt_g(amp) + "," + fmt_g(qn) + "," + fmt_g(thr) + "\n";
    }
    for (std::size_t i = 1; i < res.thresholds.size(); ++i) {
        if (res.thresholds[i] < res.thresholds[i - 1]) res.nondecreasing = false;
        if (res.thresholds[i] <= res.thresholds[i - 1]) res.strictly_increasing = false;
    }
    res.csv_path = cfg.outdir + "/cgo_threshold.csv";
    write_text_atomic(res.csv_path, csv);
    return res;
}

StabilityCurveResult run_stability_curve(const ExperimentConfig& cfg) {
    StabilityCurveResult res;
    auto g = cfg.make_grid_from();
    ForwardSolver solver(g);
    const std::string hash = cfg.config_hash();
    std::filesystem::create_directories(cfg.outdir);

    Potential q1;
    q1.field = Field(g, SupportTag::XSupported);
    Field bmp = bump_field(g, cplx(cfg.bump_cx, cfg.bump_cy), cfg.bump_width, 1.0);
    DNMap dn1 = solver.assemble_dn(q1);

    std::string csv = "config_hash,eps,dn_opnorm,distance,true_diff,bound,within3\n";
    int idx = 0;
    for (double eps : cfg.eps_list) {
        Potential q2;
        q2.field = cplx(eps, 0.0) * bmp;
        q2.field.support = SupportTag::XSupported;
        DNMap dn2 = solver.assemble_dn(q2);
        if (cfg.noise > 0.0)
            add_dn_noise(dn2, cfg.noise, derive_seed(cfg.seed, "dn_noise/" + fmt_g(eps)));
        double opn = dn_operator_norm(dn1, dn2);
        double dist = cauchy_distance_data(dn1, dn2);
        double diff = lp_norm(restrict_to_x(q2.field - q1.field), 2.0);
        res.eps.push_back(eps);
        res.distances.push_back(dist);
        res.true_diffs.push_back(diff);
        if (idx == 0) {
            res.calibrated_C = diff * std::pow(1.0 + std::log(1.0 / dist), cfg.stability_s / 2.0);
            res.bounds.push_back(diff);
        } else {
            double b = stability_bound(dist, cfg.stability_s, 0.0, res.calibrated_C);
            res.bounds.push_back(b);
            if (diff > 3.0 * b) res.bound_holds_within3 = false;
        }
        ++idx;
    }
    for (std::size_t i = 1; i < res.distances.size(); ++i)
        if (res.distances[i] >= res.distances[i - 1]) res.distances_decreasing = false;
    for (std::size_t i = 0; i < res.eps.size(); ++i) {
        bool within = i == 0 || res.true_diffs[i] <= 3.0 * res.bounds[i];
        csv += hash + "," + fmt_g(res.eps[i]) + "," +
               fmt_g(res.distances[i] / (trace_constant(g) * trace_constant(g))) + "," +
               fmt_g(res.distances[i]) + "," + fmt_g(res.true_diffs[i]) + "," +
               fmt_g(res.bounds[i]) + "," + (within ? "1" : "0") + "\n";
    }
    res.csv_path = cfg.outdir + "/stability.csv";
    write_text_atomic(res.csv_path, csv);
    // simple log-log polyline chart: distance vs diff and bound
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\">\n";
    svg += "<!-- config_hash=" + hash + " -->\n";
    auto mapx = [&](double d) {
        double lo = std::log(res.distances.back()), hi = std::log(res.distances.front());
        return 40.0 + 400.0 * (std::log(d) - lo) / (hi - lo);
    };
    auto mapy = [&](double v) {
        double lo = std::log(*std::min_element(res.true_diffs.begin(), res.true_diffs.end()));
        double hi = std::log(*std::max_element(res.bounds.begin(), res.bounds.end()));
        return 320.0 - 280.0 * (std::log(v) - lo) / (hi - lo);
    };
    for (int series = 0; series < 2; ++series) {
        const auto& ys = series == 0 ? res.true_diffs : res.bounds;
        svg += "<polyline fill=\"none\" stroke=\"" +
               std::string(series == 0 ? "#d33" : "#36c") + "\" points=\"";
        for (std::size_t i = 0; i < res.eps.size(); ++i)
            svg += fmt_g(mapx(res.distances[i])) + "," + fmt_g(mapy(ys[i])) + " ";
        svg += "\"/>\n";
    }
    svg += "</svg>\n";
    res.svg_path = cfg.outdir + "/stability.svg";
    write_text_atomic(res.svg_path, svg);
    return res;
}

UniquenessResult run_uniqueness(const ExperimentConfig& cfg) {
    UniquenessResult res;
    auto g = cfg.make_grid_from();
    ForwardSolver solver(g);
    const std::string hash = cfg.config_hash();
    std::filesystem::create_directories(cfg.outdir);

    Potential qref;
    qref.field = Field(g, SupportTag::XSupported);
    Potential q;
    q.field = cplx(cfg.recon_eps, 0.0) *
              bump_field(g, cplx(cfg.bump_cx, cfg.bump_cy), cfg.bump_width, 1.0);
    q.field.support = SupportTag::XSupported;

    DNMap dn_ref = solver.assemble_dn(qref);
    DNMap dn_q = solver.assemble_dn(q);
    if (cfg.noise > 0.0) add_dn_noise(dn_q, cfg.noise, derive_seed(cfg.seed, "dn_noise/uniq"));

    std::string csv = "config_hash,tau,recon_err_rel\n";
    double best_err = std::numeric_limits<double>::infinity();
    Field best_field(g);
    for (double tau : cfg.uniqueness_taus) {
        ReconReport rep = reconstruct_from_dn(dn_q, dn_ref, qref, tau, cfg.scan_stride,
                                              cfg.workers);
        // relative L2 error against the true potential over the scan nodes
        std::vector<cplx> diffv(rep.scan_nodes.size()), truth(rep.scan_nodes.size());
        for (std::size_t s = 0; s < rep.scan_nodes.size(); ++s) {
            truth[s] = q.field.values[rep.scan_nodes[s]];
            diffv[s] = rep.recon_field.values[rep.scan_nodes[s]] - truth[s];
        }
        double tn = scan_l2(g, rep.scan_nodes, truth, rep.stride);
        double err = tn > 0 ? scan_l2(g, rep.scan_nodes, diffv, rep.stride) / tn
                            : std::numeric_limits<double>::infinity();
        res.taus.push_back(tau);
        res.errors.push_back(err);
        if (std::isfinite(err) && err < best_err) {
            best_err = err;
            best_field = rep.recon_field;
        }
        csv += hash + "," + fmt_g(tau) + "," + fmt_g(err) + "\n";
    }
    const double floor_slack = 1.05;  // nonincreasing up to 5% jitter near the floor
    for (std::size_t i = 1; i < res.errors.size(); ++i)
        if (!(res.errors[i] <= res.errors[i - 1] * floor_slack)) res.nonincreasing_to_floor = false;
    if (!res.errors.empty() && std::isfinite(res.errors.back()) && res.errors.back() > 0)
        res.total_reduction = res.errors.front() / res.errors.back();
    res.csv_path = cfg.outdir + "/uniqueness.csv";
    write_text_atomic(res.csv_path, csv);
    double vmax = lp_norm(q.field, std::numeric_limits<double>::infinity());
    write_svg_heatmap(cfg.outdir + "/uniqueness_recon.svg", best_field, vmax, hash);
    write_svg_heatmap(cfg.outdir + "/uniqueness_truth.svg", q.field, vmax, hash);
    res.svg_path = cfg.outdir + "/uniqueness_recon.svg";
    return res;
}

}  // namespace bukhgeim
