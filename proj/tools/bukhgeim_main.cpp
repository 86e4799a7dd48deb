#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "bukhgeim/cgo.hpp"
#include "bukhgeim/experiments.hpp"
#include "bukhgeim/io.hpp"
#include "bukhgeim/norms.hpp"
#include "bukhgeim/recon.hpp"
#include "bukhgeim/rng.hpp"

using namespace bukhgeim;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPropertyViolation = 2;

struct RunContext {
    ExperimentConfig cfg;
    std::string config_path;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
};

void write_manifest(const RunContext& ctx, const std::string& subcommand,
                    const std::vector<std::string>& outputs) {
    json j;
    j["subcommand"] = subcommand;
    j["config_path"] = ctx.config_path;
    j["config_hash"] = ctx.cfg.config_hash();
    j["outputs"] = outputs;
    j["wall_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - ctx.t0)
                       .count();
    j["version"] = "1.0.0";
    write_text_atomic(ctx.cfg.outdir + "/manifest_" + subcommand + ".json", j.dump(2));
}

ExperimentConfig load_config(const std::string& path, const std::string& outdir_flag) {
    ExperimentConfig cfg =
        path.empty() ? ExperimentConfig{} : ExperimentConfig::from_json_file(path);
    if (!outdir_flag.empty()) cfg.outdir = outdir_flag;
    if (const char* env = std::getenv("BUKHGEIM_OUT")) cfg.outdir = env;
    std::filesystem::create_directories(cfg.outdir);
    return cfg;
}

std::vector<double> parse_tau_sweep(const std::string& spec) {
    // a:b:n -> n logarithmically spaced values from a to b
    auto c1 = spec.find(':');
    auto c2 = spec.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("tau sweep must be a:b:n");
    double a = std::stod(spec.substr(0, c1));
    double b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    int n = std::stoi(spec.substr(c2 + 1));
    if (a <= 0 || b <= a || n < 2) throw std::invalid_argument("tau sweep must satisfy 0<a<b, n>=2");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    return out;
}

int cmd_statphase(RunContext& ctx) {
    auto res = run_statphase_rate(ctx.cfg);
    write_manifest(ctx, "statphase", {res.csv_path, res.fits_path});
    if (!res.ratios_ok || !res.slopes_ok) {
        std::cerr << "statphase: property violation (max ratio " << res.max_ratio << ")\n";
        return kExitPropertyViolation;
    }
    return kExitOk;
}

int cmd_cgo(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    auto g = cfg.make_grid_from();
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    Potential q;
    q.field = bump_field(g, cplx(cfg.bump_cx, cfg.bump_cy), cfg.bump_width, cfg.cgo_amplitude);
    q.p = 4.0;
    std::vector<cplx> z0s{cplx(-0.1, 0.05), cplx(0.2, -0.15), cplx(0.0, 0.3)};
    auto rep = remainder_report(ws, q, cfg.cgo_taus, z0s);
    bool growth = growth_check(ws, q, cfg.cgo_taus, cplx(0.3, -0.2), g->R);

    std::string csv = "config_hash,tau,rem_l2,rem_l4\n";
    for (std::size_t i = 0; i < rep.taus.size(); ++i)
        csv += cfg.config_hash() + "," + fmt_g(rep.taus[i]) + "," + fmt_g(rep.l2[i]) + "," +
               fmt_g(rep.l4[i]) + "\n";
    std::string csv_path = cfg.outdir + "/cgo_remainder.csv";
    write_text_atomic(csv_path, csv);

    PhaseParams p{cfg.cgo_taus.back(), cplx(-0.1, 0.05), +1};
    CGOSolution sol = build_cgo(ws, q, p, CgoSide::Phase);
    double resid = residual(sol, q);
    std::string diag_path = cfg.outdir + "/cgo_diag.json";
    write_text_atomic(diag_path, cgo_diagnostics_json(sol, resid));

    auto thr = run_cgo_threshold(cfg);
    write_manifest(ctx, "cgo", {csv_path, diag_path, thr.csv_path});
    if (!rep.pass(q.p) || !growth || !thr.nondecreasing) {
        std::cerr << "cgo: property violation (remainder exponents " << rep.exponent_l2 << ", "
                  << rep.exponent_l4 << ", growth " << growth << ")\n";
        return kExitPropertyViolation;
    }
    return kExitOk;
}

int cmd_forward(RunContext& ctx, const std::string& emit_dn, double noise) {
    const auto& cfg = ctx.cfg;
    auto g = cfg.make_grid_from();
    ForwardSolver solver(g);
    Potential q;
    q.field = bump_field(g, cplx(cfg.bump_cx, cfg.bump_cy), cfg.bump_width, cfg.bump_amplitude);
    if (!solver.eigenvalue_guard(q)) {
        std::cerr << "forward: eigenvalue guard failed for the configured potential\n";
        return kExitError;
    }
    DNMap dn = solver.assemble_dn(q);
    // symmetry defect
    double num = 0.0, den = 0.0;
    for (int r = 0; r < dn.size(); ++r)
        for (int c = 0; c < dn.size(); ++c) {
            num += std::norm(dn.at(r, c) - dn.at(c, r));
            den += std::norm(dn.at(r, c));
        }
    double defect = den > 0 ? std::sqrt(num / den) : 0.0;
    std::vector<std::string> outputs;
    if (!emit_dn.empty()) {
        if (noise > 0.0) add_dn_noise(dn, noise, derive_seed(cfg.seed, "cli_dn_noise"));
        std::string path = cfg.outdir + "/" + emit_dn;
        write_dnmap(path, dn);
        outputs.push_back(path);
    }
    write_manifest(ctx, "forward", outputs);
    if (defect > 1e-6) {
        std::cerr << "forward: DN symmetry defect " << defect << " above 1e-6\n";
        return kExitPropertyViolation;
    }
    return kExitOk;
}

int cmd_recon(RunContext& ctx, const std::string& dn_path, const std::string& dn_ref_path,
              double tau_flag, const std::string& tau_sweep) {
    const auto& cfg = ctx.cfg;
    auto g = cfg.make_grid_from();
    std::vector<double> taus;
    if (!tau_sweep.empty()) taus = parse_tau_sweep(tau_sweep);
    else taus.push_back(tau_flag > 0 ? tau_flag : 64.0);

    std::vector<std::string> outputs;
    if (!dn_path.empty() || !dn_ref_path.empty()) {
        if (dn_path.empty() || dn_ref_path.empty())
            throw std::invalid_argument("recon: provide both --dn and --dn-ref");
        DNMap dn_q = read_dnmap(dn_path, g);
        DNMap dn_ref = read_dnmap(dn_ref_path, g);
        Potential qref;
        qref.field = Field(g, SupportTag::XSupported);
        std::string csv = "config_hash,tau,central_norm\n";
        for (double tau : taus) {
            ReconReport rep =
                reconstruct_from_dn(dn_q, dn_ref, qref, tau, cfg.scan_stride, cfg.workers);
            std::string fpath = cfg.outdir + "/recon_tau" + fmt_g(tau) + ".bfld";
            write_field(fpath, rep.recon_field);
            outputs.push_back(fpath);
            csv += cfg.config_hash() + "," + fmt_g(tau) + "," +
                   fmt_g(rep.terms.central_pairing) + "\n";
        }
        std::string cpath = cfg.outdir + "/recon_sweep.csv";
        write_text_atomic(cpath, csv);
        outputs.push_back(cpath);
        write_manifest(ctx, "recon", outputs);
        return kExitOk;
    }
    // synthetic identity mode with the standard pair
    Potential q1, q2;
    q1.field = Field(g, SupportTag::XSupported);
    q2.field = cplx(cfg.recon_eps, 0.0) *
               bump_field(g, cplx(cfg.bump_cx, cfg.bump_cy), cfg.bump_width, 1.0);
    q2.field.support = SupportTag::XSupported;
    bool ok = true;
    std::string csv =
        "config_hash,tau,identity_defect,statphase_defect,central,corr_dbar,corr_d,tail\n";
    for (double tau : taus) {
        ReconReport rep = identity_check(q1, q2, tau, cfg.scan_stride, cfg.workers);
        double wnorm = lp_norm(restrict_to_x(q1.field - q2.field), 2.0);
        csv += cfg.config_hash() + "," + fmt_g(tau) + "," + fmt_g(rep.terms.identity_defect) +
               "," + fmt_g(rep.terms.statphase_defect) + "," +
               fmt_g(rep.terms.central_pairing) + "," + fmt_g(rep.terms.corr_dbar) + "," +
               fmt_g(rep.terms.corr_d) + "," + fmt_g(rep.terms.tail) + "\n";
        if (rep.terms.identity_defect > 0.02 * wnorm) ok = false;
        if (rep.terms.tail > 0.5 * wnorm) ok = false;
    }
    std::string cpath = cfg.outdir + "/identity_check.csv";
    write_text_atomic(cpath, csv);
    outputs.push_back(cpath);
    write_manifest(ctx, "recon", outputs);
    if (!ok) {
        std::cerr << "recon: identity or tail property violated\n";
        return kExitPropertyViolation;
    }
    return kExitOk;
}

int cmd_stability(RunContext& ctx) {
    auto res = run_stability_curve(ctx.cfg);
    write_manifest(ctx, "stability", {res.csv_path, res.svg_path});
    if (!res.distances_decreasing || !res.bound_holds_within3) {
        std::cerr << "stability: property violation\n";
        return kExitPropertyViolation;
    }
    return kExitOk;
}

int cmd_uniqueness(RunContext& ctx) {
    auto res = run_uniqueness(ctx.cfg);
    write_manifest(ctx, "uniqueness", {res.csv_path, res.svg_path});
    if (!res.nonincreasing_to_floor || res.total_reduction < 3.0) {
        std::cerr << "uniqueness: error-vs-tau curve violates the expected decrease "
                     "(reduction "
                  << res.total_reduction << "); see README on the tau range\n";
        return kExitPropertyViolation;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bukhgeim: CGO machinery and experiments for a 2D inverse boundary value problem"};
    app.require_subcommand(0, 1);

    std::string config_path, outdir_flag;
    bool print_config = false;
    int workers_flag = -1;
    app.add_option("--config", config_path, "JSON config path");
    app.add_option("--out", outdir_flag, "output directory (overrides config)");
    app.add_option("--workers", workers_flag, "worker threads (default: hardware)");
    app.add_flag("--print-config", print_config, "print the resolved config and exit");

    auto* sp = app.add_subcommand("statphase", "stationary-phase rate study");
    auto* cg = app.add_subcommand("cgo", "CGO series, remainder and threshold study");
    auto* fw = app.add_subcommand("forward", "forward solves and DN assembly");
    std::string emit_dn;
    double noise = 0.0;
    fw->add_option("--emit-dn", emit_dn, "write the DN map to this file (inside outdir)");
    fw->add_option("--noise", noise, "relative DN noise level");
    auto* rc = app.add_subcommand("recon", "reconstruction identity / data-driven recon");
    std::string dn_path, dn_ref_path, tau_sweep;
    double tau_flag = 0.0;
    rc->add_option("--dn", dn_path, "DN map file for the unknown potential");
    rc->add_option("--dn-ref", dn_ref_path, "DN map file for the reference potential");
    rc->add_option("--tau", tau_flag, "single tau value");
    rc->add_option("--tau-sweep", tau_sweep, "a:b:n logarithmic tau sweep");
    auto* st = app.add_subcommand("stability", "stability curve experiment");
    auto* un = app.add_subcommand("uniqueness", "uniqueness (error vs tau) experiment");

    CLI11_PARSE(app, argc, argv);

    try {
        RunContext ctx;
        ctx.cfg = load_config(config_path, outdir_flag);
        ctx.config_path = config_path;
        if (workers_flag >= 0) ctx.cfg.workers = workers_flag;
        if (print_config) {
            std::cout << ctx.cfg.to_json() << "\n";
            return kExitOk;
        }
        if (sp->parsed()) return cmd_statphase(ctx);
        if (cg->parsed()) return cmd_cgo(ctx);
        if (fw->parsed()) return cmd_forward(ctx, emit_dn, noise);
        if (rc->parsed()) return cmd_recon(ctx, dn_path, dn_ref_path, tau_flag, tau_sweep);
        if (st->parsed()) return cmd_stability(ctx);
        if (un->parsed()) return cmd_uniqueness(ctx);
        std::cout << app.help() << "\n";
        return kExitOk;
    } catch (const GridMismatch& e) {
        std::cerr << "GRID_MISMATCH: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::string msg = e.what();
        if (msg.find("GRID_MISMATCH") != std::string::npos)
            std::cerr << msg << "\n";
        else
            std::cerr << "error: " << msg << "\n";
        return kExitError;
    }
}
