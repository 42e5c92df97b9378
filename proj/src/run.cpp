#include "impulse/run.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "impulse/intervention.hpp"
#include "impulse/obstacle_solver.hpp"
#include "impulse/penalty.hpp"
#include "impulse/probe.hpp"
#include "impulse/qvi_solver.hpp"
#include "impulse/report_io.hpp"
#include "impulse/version.hpp"

namespace impulse {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    GridFunction u;
    json report;
    bool converged = false;
    std::string summary;
    std::optional<DecayReport> decay;
};

SolverOptions solver_options(const ExperimentConfig& c) {
    SolverOptions o;
    o.tol = c.solver.tol;
    o.max_iter = c.solver.max_iter;
    o.relaxation = c.solver.relaxation;
    return o;
}

void check_probe_modes(const ExperimentConfig& c, const ProblemData& d) {
    const bool obstacle_mode = d.mode != Mode::QVI;
    for (const auto& name : c.probe.probes) {
        if (name == "separation" && obstacle_mode) throw ConfigError("probe.probes", "separation requires mode qvi");
        if ((name == "growth_constant" || name == "contact_oscillation") &&
            (!obstacle_mode || d.side != ObstacleSide::Lower)) {
            throw ConfigError("probe.probes", name + " requires a lower obstacle problem");
        }
    }
}

/// Runs a probe; a probe that cannot be evaluated on this solution reports its reason instead.
template <typename F>
json guarded(F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return json{{"error", e.what()}};
    }
}

json run_probes(const ExperimentConfig& c, const ProblemData& d, const GridFunction& u,
                std::vector<std::pair<std::string, ProbeReport>>& sampled) {
    json out = json::object();
    const Grid& g = *d.grid;
    const double tol = c.probe.contact_tol.value_or(default_probe_tol(u));
    const ModulusFamily modulus{c.probe.modulus_constant, c.probe.modulus_exponent};
    std::optional<GridFunction> Mu;
    if (d.mode == Mode::QVI) Mu = intervention_operator(u, CostFunction(*d.cost));
    const GridFunction& target = Mu ? *Mu : *d.obstacle;

    const auto keep = [&](const std::string& name, ProbeReport r) {
        json j = to_json(r);
        sampled.emplace_back(name, std::move(r));
        return j;
    };

    for (const auto& name : c.probe.probes) {
        if (name == "contact_set") {
            out[name] = guarded([&] {
                const ContactSet cs = extract_contact_set(u, target, d.side, tol);
                return json{{"nodes", cs.nodes.size()}, {"free_boundary", cs.free_boundary.size()}, {"tol", cs.tol}};
            });
        } else if (name == "growth_constant") {
            out[name] = guarded([&] {
                const ContactSet cs = extract_contact_set(u, target, d.side, tol);
                return keep(name, growth_constant(u, target, cs, modulus));
            });
        } else if (name == "contact_oscillation") {
            out[name] = guarded([&] {
                const ContactSet cs = extract_contact_set(u, target, d.side, tol);
                return keep(name, contact_oscillation(u, target, cs, modulus, {}, c.probe.seed));
            });
        } else if (name == "semiconcavity_modulus") {
            out[name] = guarded([&] {
                const GridFunction& w = Mu ? *Mu : u;
                return keep(name, semiconcavity_modulus(w, NodeSet(d.grid, g.interior_nodes()), c.probe.steps,
                                                        c.probe.modulus_exponent));
            });
        } else if (name == "separation") {
            out[name] = guarded([&] {
                const double ct = c.probe.contact_tol.value_or(default_contact_tol(u));
                return to_json(separation_delta(u, CostFunction(*d.cost), ct));
            });
        } else if (name == "holder_seminorm") {
            out[name] = guarded([&] {
                const HessianField H = hessian_field(u, 0.1 * g.diameter());
                return to_json(holder_seminorm(H, d.alpha, c.probe.sample_budget, c.probe.seed));
            });
        }
    }
    return out;
}

Outcome run_obstacle(const ExperimentConfig& c, const ProblemData& d) {
    const ObstacleProblem p{d.spec, d.side, *d.obstacle, d.f, d.boundary};
    Solution s = solve_obstacle(p, solver_options(c));
    const double res = max_abs_interior(complementarity_residual(d.spec, s.u, *d.obstacle, d.f, d.side));
    Outcome o{std::move(s.u), json::object(), s.report.converged, "", std::nullopt};
    o.report["solve"] = to_json(s.report);
    o.report["complementarity_residual"] = res;
    o.summary = "obstacle: " + std::to_string(s.report.iterations) + " sweeps";
    return o;
}

Outcome run_qvi(const ExperimentConfig& c, const ProblemData& d) {
    const QVIProblem p{d.spec, CostFunction(*d.cost), d.f, d.boundary};
    QVIOptions qo;
    qo.outer_tol = c.solver.outer_tol;
    qo.inner_tol = c.solver.tol;
    qo.max_outer = c.solver.max_outer;
    qo.inner_max_iter = c.solver.max_iter;
    qo.relaxation = c.solver.relaxation;
    QVISolution s = solve_qvi(p, qo);
    const double tol = c.solver.tol.value_or(default_tolerance(d.f));
    Outcome o{std::move(s.u), json::object(), s.report.converged && !s.report.inner_failure, "", std::nullopt};
    o.report["qvi"] = to_json(s.report);
    o.report["check"] = to_json(check_qvi(o.u, p, tol));
    o.summary = "qvi: " + std::to_string(s.report.outer_iterations) + " outer iterations";
    return o;
}

Outcome run_penalized(const ExperimentConfig& c, const ProblemData& d) {
    const PenaltyFamily fam{*d.penalty_kind, *c.penalty.epsilon, c.penalty.cap_N};
    fam.validate();
    Solution s = solve_penalized(d.spec, *d.obstacle, fam, d.f, d.boundary, solver_options(c));
    double max_beta = 0.0;
    for (std::size_t n : d.grid->interior_nodes())
        max_beta = std::max(max_beta, std::abs(beta(fam, s.u[n] - (*d.obstacle)[n])));
    Outcome o{std::move(s.u), json::object(), s.report.converged, "", std::nullopt};
    o.report["solve"] = to_json(s.report);
    o.report["max_abs_beta"] = max_beta;
    o.summary = "penalized: " + std::to_string(s.report.iterations) + " sweeps";
    return o;
}

Outcome run_sweep(const ExperimentConfig& c, const ProblemData& d) {
    SweepOptions so;
    so.solver = solver_options(c);
    so.cap_N = c.penalty.cap_N;
    so.sample_budget = c.probe.sample_budget;
    so.seed = c.probe.seed;
    DecayReport rep = epsilon_sweep(d.spec, *d.obstacle, *d.penalty_kind, d.eps_list, d.alpha, so);
    bool converged = true;
    const DecayPoint* last = nullptr;
    for (const DecayPoint& p : rep.points) {
        if (!p.resolved) continue;
        converged = converged && p.converged;
        if (!last || p.epsilon < last->epsilon) last = &p;
    }
    Outcome o{last->u, json::object(), converged, "", std::nullopt};
    o.report["decay"] = to_json(rep);
    o.report["solution_epsilon"] = last->epsilon;
    o.summary = "sweep: slope " + std::to_string(rep.slope) + ", r2 " + std::to_string(rep.r2);
    o.decay = std::move(rep);
    return o;
}

}  // namespace

int run(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    try {
        const ProblemData d = resolve_problem(config, opts.base_dir);
        check_probe_modes(config, d);
        const fs::path dir = opts.output ? *opts.output : fs::path(config.output.directory);
        fs::create_directories(dir);

        Outcome o = [&] {
            try {
                switch (d.mode) {
                    case Mode::Obstacle: return run_obstacle(config, d);
                    case Mode::QVI: return run_qvi(config, d);
                    case Mode::Penalized: return run_penalized(config, d);
                    case Mode::Sweep: return run_sweep(config, d);
                }
            } catch (const std::invalid_argument& e) {
                throw ConfigError("problem", e.what());
            }
            throw ConfigError("problem.mode", "unsupported mode");
        }();

        std::vector<std::pair<std::string, ProbeReport>> sampled;
        json report = o.report;
        report["mode"] = to_string(d.mode);
        report["converged"] = o.converged;
        report["probes"] = run_probes(config, d, o.u, sampled);

        const bool csv = std::find(config.output.formats.begin(), config.output.formats.end(), "csv") !=
                         config.output.formats.end();
        std::vector<std::string> files{"solution.csv", "report.json"};
        write_csv((dir / "solution.csv").string(), o.u);
        write_json_file(dir / "report.json", report);
        if (o.decay) {
            json dj = to_json(*o.decay);
            write_json_file(dir / "decay.json", dj);
            files.push_back("decay.json");
            if (csv) {
                write_decay_csv(dir / "decay.csv", *o.decay);
                files.push_back("decay.csv");
            }
        }
        if (csv) {
            for (const auto& [name, r] : sampled) {
                const std::string f = "probe_" + name + ".csv";
                write_samples_csv(dir / f, r);
                files.push_back(f);
            }
        }

        const int code = o.converged ? kExitOk : kExitNotConverged;
        json manifest;
        manifest["config"] = config_to_json(config);
        manifest["tool"] = "impulse";
        manifest["version"] = kVersion;
        manifest["exit_code"] = code;
        manifest["output_directory"] = dir.string();
        json inputs = json::array();
        for (const fs::path& p : d.inputs) inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
        manifest["inputs"] = inputs;
        json outputs = json::array();
        for (const auto& f : files) outputs.push_back({{"file", f}, {"sha256", sha256_file(dir / f)}});
        manifest["outputs"] = outputs;
        manifest["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_json_file(dir / "manifest.json", manifest);

        if (!opts.quiet) {
            out << o.summary << (o.converged ? ", converged" : ", NOT converged") << "; outputs in " << dir.string()
                << '\n';
        }
        if (!o.converged) err << "warning: solver did not converge (outputs written)\n";
        return code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

int run_file(const fs::path& config_path, RunOptions opts, std::ostream& out, std::ostream& err) {
    ExperimentConfig c;
    try {
        c = load_config(config_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    opts.base_dir = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
    return run(c, opts, out, err);
}

}  // namespace impulse
