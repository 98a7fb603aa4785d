// smallgain: check, path, certify, simulate, verify.
// Exit codes: 0 success, 1 analysis failure, 2 usage or config error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "smallgain/omega_path.hpp"
#include "smallgain/smallgain.hpp"

using namespace smallgain;
using sgcli::NetworkConfig;

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::optional<double> rmax;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid;
    std::string mode;
    double scale_sigma = 1.0;
    std::size_t samples = 10000;
    std::size_t runs = 50;
};

std::uint64_t seed_of(const Flags& f, std::uint64_t fallback) {
    if (const char* env = std::getenv("SMALLGAIN_SEED")) return std::strtoull(env, nullptr, 10);
    return f.seed.value_or(fallback);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string tuple(const Vec& v) {
    const double m = norm_inf(v);
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt(m > 0 ? v[i] / m : v[i]);
    }
    return s + ")";
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + p.string());
    return f;
}

PathOptions path_options(const Flags& f) {
    PathOptions o;
    if (f.rmax) o.r_max = *f.rmax;
    if (f.grid) o.validation_points = *f.grid;
    o.seed = seed_of(f, o.seed);
    return o;
}

ExternalMode mode_of(const Flags& f, const NetworkConfig& cfg) {
    if (!f.mode.empty()) return *sgcli::parse_mode(f.mode);
    return cfg.mode.value_or(ExternalMode::General);
}

std::optional<DiagOp> diag_of(ExternalMode mode, const NetworkConfig& cfg) {
    if (mode != ExternalMode::Additive && mode != ExternalMode::Separated) return std::nullopt;
    if (!cfg.alpha) throw sgcli::ConfigError("/alpha", std::string("missing; mode ") + external_mode_name(mode) + " needs it");
    DiagOp d{*cfg.alpha, std::nullopt};
    if (mode == ExternalMode::Separated) {
        if (!cfg.separation) throw sgcli::ConfigError("/separation", "missing; mode separated needs it");
        d.separation = cfg.separation;
    }
    return d;
}

PathResult build_path(const GainNetwork& net, const std::optional<DiagOp>& diag, const PathOptions& o) {
    return diag ? construct_path(GainOperator(net, *diag, DiagSide::Outer), o) : construct_path(net, o);
}

struct Certificate {
    PathResult path;
    CompositeLyapunov cl;
};

Certificate build_certificate(const Flags& f, const NetworkConfig& cfg) {
    const GainNetwork net = sgcli::network_of(cfg);
    const PathOptions po = path_options(f);
    ComposeOptions co;
    co.mode = mode_of(f, cfg);
    co.diag = diag_of(co.mode, cfg);
    co.radii = po.validation_radii();
    PathResult path = build_path(net, co.diag, po);
    CompositeLyapunov cl = compose(net, path.sigma, sgcli::subsystems_of(cfg), co);
    if (f.scale_sigma != 1.0) cl = cl.with_scaled_sigma(f.scale_sigma);
    return {std::move(path), std::move(cl)};
}

int cmd_check(const Flags& f) {
    const NetworkConfig cfg = sgcli::load_config(f.config);
    const GainNetwork net = sgcli::network_of(cfg);
    bool holds = false, fails = false;
    auto note = [&](const SgcVerdict& v) {
        holds = holds || v.status == SgcStatus::CertifiedHolds;
        fails = fails || v.status == SgcStatus::CertifiedFails;
    };

    if (net.all_maf(Maf::Kind::Max)) {
        const SgcVerdict v = check_cycle_condition(net);
        note(v);
        if (v.status == SgcStatus::CertifiedHolds) {
            std::cout << "cycle condition: holds\n";
        } else {
            std::string c;
            for (std::size_t i : v.cycle) c += std::to_string(i + 1) + " -> ";
            if (!v.cycle.empty()) c += std::to_string(v.cycle.front() + 1);
            std::cout << "cycle condition: fails on " << c << ", witness " << tuple(v.witness) << "\n";
        }
    }
    if (linearize(net)) {
        const SgcVerdict v = check_linear_spectral(net);
        note(v);
        std::cout << "spectral radius: " << fmt(*v.spectral_radius) << " ("
                  << (v.status == SgcStatus::CertifiedHolds ? "holds" : "fails") << ")";
        if (!v.witness.empty()) std::cout << ", witness " << tuple(v.witness);
        std::cout << "\n";
    }
    try {
        const PerronResult pr = nonlinear_perron(net);
        std::cout << "perron eigenvalue: " << fmt(pr.lambda) << ", eigenvector " << tuple(pr.eigvec) << "\n";
    } catch (const Error&) {
        // Not homogeneous or not irreducible: the Perron test does not apply.
    }
    GridSpec grid;
    grid.seed = seed_of(f, grid.seed);
    const SgcVerdict fal = falsify_sgc(net, grid);
    note(fal);
    if (fal.status == SgcStatus::CertifiedFails) {
        std::cout << "falsification: witness " << tuple(fal.witness) << "\n";
    } else {
        std::cout << "falsification: no witness in " << fal.samples << " samples (closest ratio "
                  << fmt(fal.closest_ratio) << ")\n";
    }
    if (cfg.alpha) {
        const SgcVerdict v = check_strong_sgc(net, DiagOp{*cfg.alpha, std::nullopt}, DiagSide::Outer, grid);
        fails = fails || v.status == SgcStatus::CertifiedFails;
        std::cout << "strong condition: " << sgc_status_name(v.status) << "\n";
    }

    if (fails) {
        std::cout << "verdict: CertifiedFails\n";
        return 1;
    }
    if (holds) {
        std::cout << "verdict: CertifiedHolds\n";
        return 0;
    }
    try {
        const PathResult p = construct_path(net, path_options(f));
        std::cout << "path: " << p.method << "\nverdict: Inconclusive, path constructed\n";
        return 0;
    } catch (const Error& e) {
        std::cout << "path: " << e.name() << "\nverdict: Inconclusive\n";
        return 1;
    }
}

void print_report(const PathReport& rep) {
    double m = INFINITY, at = 0.0;
    for (std::size_t k = 0; k < rep.radii.size(); ++k) {
        if (rep.margin_min[k] < m) {
            m = rep.margin_min[k];
            at = rep.radii[k];
        }
    }
    std::cout << "min margin: " << fmt(m) << " at r=" << fmt(at) << "\n"
              << "worst relative margin: " << fmt(rep.worst_relative) << " over " << rep.radii.size() << " radii\n";
}

int cmd_path(const Flags& f) {
    const NetworkConfig cfg = sgcli::load_config(f.config);
    const GainNetwork net = sgcli::network_of(cfg);
    const PathResult p = build_path(net, diag_of(mode_of(f, cfg), cfg), path_options(f));
    std::cout << "method: " << p.method << "\n";
    print_report(p.report);
    if (!f.out.empty()) {
        auto out = open_out(f.out);
        write_path_csv(out, p.sigma, p.report);
        std::cout << "path written to " << f.out << "\n";
    }
    return p.report.valid() ? 0 : 1;
}

int cmd_certify(const Flags& f) {
    const NetworkConfig cfg = sgcli::load_config(f.config);
    const Certificate c = build_certificate(f, cfg);
    const CompositeLyapunov& cl = c.cl;
    std::cout << "method: " << c.path.method << "\nmode: " << external_mode_name(cl.mode()) << "\n";
    if (cl.phi().is_identity()) {
        std::cout << "phi: identity (no external gains)\n";
    } else {
        std::cout << "phi: " << cl.phi().x().size() << " knots, phi(1)=" << fmt(cl.phi()(1.0)) << "\n";
        std::string th;
        try {
            th = fmt(cl.iss_threshold(1.0));
        } catch (const Error& e) {
            th = std::string("beyond the certified range (") + e.what() + ")";
        }
        std::cout << "iss threshold at |u|=1: " << th << "\n";
    }
    const GeneralCondTable& t = cl.general_condition();
    double m = INFINITY;
    for (double v : t.margin_min) m = std::min(m, v);
    std::cout << "general condition: min margin " << fmt(m) << " over " << t.radii.size() << " radii\n";
    print_report(c.path.report);

    if (!f.out.empty()) {
        const std::filesystem::path dir(f.out);
        std::filesystem::create_directories(dir);
        {
            auto out = open_out(dir / "path.csv");
            write_path_csv(out, c.path.sigma, c.path.report);
        }
        {
            auto out = open_out(dir / "phi.csv");
            out << "r,phi\n";
            char buf[64];
            for (std::size_t k = 0; k < t.radii.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", t.radii[k], t.phi[k]);
                out << buf;
            }
        }
        {
            auto out = open_out(dir / "margins.csv");
            out << "r,phi,margin_min\n";
            char buf[96];
            for (std::size_t k = 0; k < t.radii.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", t.radii[k], t.phi[k], t.margin_min[k]);
                out << buf;
            }
        }
        std::cout << "certificate written to " << dir.string() << "\n";
    }
    return 0;
}

const sgcli::SimulationConfig& simulation_of(const NetworkConfig& cfg) {
    if (!cfg.simulation) throw sgcli::ConfigError("/simulation", "missing; this command needs x0 and an input");
    return *cfg.simulation;
}

int cmd_simulate(const Flags& f) {
    const NetworkConfig cfg = sgcli::load_config(f.config);
    const SystemModel model = sgcli::model_of(cfg);
    const sgcli::SimulationConfig& sim = simulation_of(cfg);
    std::optional<CompositeLyapunov> cl;
    try {
        cl = build_certificate(f, cfg).cl;
    } catch (const sgcli::ConfigError&) {
        throw;
    } catch (const Error& e) {
        std::cout << "V: unavailable (" << e.name() << ": " << e.what() << ")\n";
    }
    const Trajectory tr = integrate(model, sim.x0, sim.input, sim.T, sim.dt, cl ? &*cl : nullptr);
    const std::string out_path = f.out.empty() ? "trajectory.csv" : f.out;
    {
        auto out = open_out(out_path);
        write_trajectory_csv(out, tr);
    }
    std::cout << "samples: " << tr.t.size() << "\n";
    if (tr.diverged) {
        std::cout << "trajectory written to " << out_path << "\n";
        throw Error(ErrorKind::Diverged, "|x| exceeded 1e12 at t=" + fmt(tr.diverged_at));
    }
    std::cout << "final |x|: " << fmt(norm_inf(tr.x.back())) << "\n";
    if (!tr.V.empty()) std::cout << "final V: " << fmt(tr.V.back()) << "\n";
    std::cout << "trajectory written to " << out_path << "\n";
    return 0;
}

int cmd_verify(const Flags& f) {
    const NetworkConfig cfg = sgcli::load_config(f.config);
    const SystemModel model = sgcli::model_of(cfg);
    const CompositeLyapunov cl = build_certificate(f, cfg).cl;
    bool ok = true;

    DecreaseSpec ds;
    ds.samples = f.samples;
    ds.seed = seed_of(f, ds.seed);
    const DecreaseReport zero = check_decrease(model, cl, ds);
    std::cout << "decrease: " << zero.summary() << " input=zero\n";
    ok = ok && zero.pass();
    if (!cl.phi().is_identity() && model.input_dim > 0) {
        ds.matched_input = true;
        const DecreaseReport matched = check_decrease(model, cl, ds);
        std::cout << "decrease: " << matched.summary() << " input=matched\n";
        ok = ok && matched.pass();
    }

    IssSpec is;
    is.runs = f.runs;
    is.seed = seed_of(f, is.seed);
    if (cfg.simulation) {
        is.T = cfg.simulation->T;
        is.dt = cfg.simulation->dt;
    }
    const IssReport gas = check_iss_bound(model, cl, is);
    std::cout << "trajectory: " << gas.summary() << "\n";
    ok = ok && gas.pass();

    if (cfg.simulation && cfg.simulation->input.dim() > 0 && cfg.simulation->input.sup_norm() > 0.0) {
        is.u_norm = cfg.simulation->input.sup_norm();
        const IssReport iss = check_iss_bound(model, cl, is);
        std::cout << "iss bound: " << iss.summary() << " threshold=" << fmt(iss.threshold) << "\n";
        ok = ok && iss.pass();
    }
    if (cfg.simulation) {
        // The configured run itself: V nonincreasing under zero input.
        const auto& sim = *cfg.simulation;
        if (sim.input.sup_norm() == 0.0) {
            const Trajectory tr = integrate(model, sim.x0, sim.input, sim.T, sim.dt, &cl);
            double inc = 0.0;
            for (std::size_t k = 1; k < tr.V.size(); ++k) inc = std::max(inc, tr.V[k] - tr.V[k - 1]);
            const bool pass = !tr.diverged && inc <= 1e-8;
            std::cout << "configured run: verdict=" << (pass ? "pass" : "fail") << " max_increase=" << fmt(inc) << "\n";
            ok = ok && pass;
        }
    }
    std::cout << "verdict: " << (ok ? "pass" : "fail") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small-gain ISS certification for networks of nonlinear systems"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App* sub) {
        sub->add_option("config", f.config, "network config (JSON)")->required();
        sub->add_option("--seed", f.seed, "random seed (SMALLGAIN_SEED overrides)");
        sub->add_option("--rmax", f.rmax, "upper radius for path construction")->check(CLI::PositiveNumber);
        sub->add_option("--grid", f.grid, "number of validation radii")->check(CLI::Range(2, 1000000));
        sub->add_option("--mode", f.mode, "external input mode")
            ->check(CLI::IsMember({"sum", "max", "separated", "general"}));
    };
    auto* check = app.add_subcommand("check", "small-gain condition verdicts");
    common(check);
    auto* path = app.add_subcommand("path", "construct and validate an Omega-path");
    common(path);
    path->add_option("--out", f.out, "path CSV");
    auto* certify = app.add_subcommand("certify", "composite ISS Lyapunov certificate");
    common(certify);
    certify->add_option("--out", f.out, "certificate directory");
    auto* simulate = app.add_subcommand("simulate", "integrate the configured model");
    common(simulate);
    simulate->add_option("--out", f.out, "trajectory CSV (default trajectory.csv)");
    auto* verify = app.add_subcommand("verify", "decrease and trajectory checks of the certificate");
    common(verify);
    verify->add_option("--samples", f.samples, "annulus samples for the decrease check");
    verify->add_option("--runs", f.runs, "random initial conditions for the trajectory check");
    for (auto* sub : {certify, simulate, verify}) {
        sub->add_option("--scale-sigma", f.scale_sigma, "multiply sigma (testing the negative control)")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (*check) return cmd_check(f);
        if (*path) return cmd_path(f);
        if (*certify) return cmd_certify(f);
        if (*simulate) return cmd_simulate(f);
        return cmd_verify(f);
    } catch (const Error& e) {
        std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
        if (e.kind() == ErrorKind::OutOfRange) {
            std::cerr << "note: an external gain is bounded below the level the condition needs; "
                         "a certificate exists only for a restricted input range\n";
        }
        return e.kind() == ErrorKind::ConfigError ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
