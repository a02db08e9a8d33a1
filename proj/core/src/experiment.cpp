#include "stripflow/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

#include "stripflow/brownian.hpp"
#include "stripflow/error.hpp"
#include "stripflow/exhaustion.hpp"
#include "stripflow/heat_engine.hpp"
#include "stripflow/quotients.hpp"
#include "stripflow/serialization.hpp"
#include "stripflow/spectrum.hpp"
#include "stripflow/subordination.hpp"

#ifndef STRIPFLOW_VERSION
#define STRIPFLOW_VERSION "0.0.0"
#endif

namespace stripflow {

using nlohmann::json;

namespace {

json parse(const std::string& text, const std::string& path) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path, e.what());
    }
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ValidationError(path, "expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ValidationError(path + "." + it.key(), "unknown key");
}

template <class T>
T opt(const json& j, const char* key, T fallback, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(path + "." + key, e.what());
    }
}

template <class T>
T req(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(path + "." + key, "missing");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(path + "." + key, e.what());
    }
}

Fiber fiber_from(const json& j, const std::string& path) {
    allow_keys(j, path, {"kind", "L"});
    const auto kind = req<std::string>(j, "kind", path);
    if (kind == "point") return Fiber::point();
    const double L = req<double>(j, "L", path);
    try {
        if (kind == "circle") return Fiber::circle(L);
        if (kind == "interval") return Fiber::interval(L);
    } catch (const ParameterError& e) {
        throw ValidationError(path + ".L", e.what());
    }
    throw ValidationError(path + ".kind", "unknown fiber kind '" + kind + "'");
}

double level_weight(const json& b, int level, int k_min, const std::string& path) {
    if (b.is_number()) return b.get<double>();
    if (!b.is_array() || b.empty()) throw ValidationError(path, "number or non-empty array");
    const auto i = static_cast<std::size_t>(std::clamp(level - k_min, 0, static_cast<int>(b.size()) - 1));
    if (!b[i].is_number()) throw ValidationError(path + "[" + std::to_string(i) + "]", "expected a number");
    return b[i].get<double>();
}

StripComplex space_from(const json& j, const std::filesystem::path& base) {
    const std::string path = "$.space";
    const auto kind = req<std::string>(j, "kind", path);
    try {
        if (kind == "treebolic") {
            allow_keys(j, path, {"kind", "p", "q", "alpha", "beta", "k_min", "k_max", "R"});
            TreebolicParams tp;
            tp.p = opt(j, "p", tp.p, path);
            tp.q = opt(j, "q", tp.q, path);
            tp.alpha = opt(j, "alpha", tp.alpha, path);
            tp.beta = opt(j, "beta", tp.beta, path);
            tp.k_min = opt(j, "k_min", tp.k_min, path);
            tp.k_max = opt(j, "k_max", tp.k_max, path);
            tp.R = opt(j, "R", tp.R, path);
            return build_treebolic(tp);
        }
        if (kind == "tree") {
            allow_keys(j, path, {"kind", "p", "q", "alpha", "beta", "k_min", "k_max"});
            return build_tree_complex(opt(j, "p", 2, path), opt(j, "q", 2.0, path),
                                      opt(j, "alpha", 0.0, path), opt(j, "beta", 1.0, path),
                                      opt(j, "k_min", -1, path), opt(j, "k_max", 1, path));
        }
        if (kind == "weighted-tree") {
            allow_keys(j, path, {"kind", "p", "k_min", "k_max", "b"});
            const int k_min = opt(j, "k_min", -1, path);
            const json b = j.contains("b") ? j["b"] : json(1.0);
            return build_weighted_tree(opt(j, "p", 2, path), k_min, opt(j, "k_max", 1, path),
                                       [&](int k) { return level_weight(b, k, k_min + 1, path + ".b"); });
        }
        if (kind == "path" || kind == "star") {
            allow_keys(j, path, {"kind", "lengths", "fiber", "phi", "psi"});
            auto lengths = req<std::vector<double>>(j, "lengths", path);
            Fiber f = j.contains("fiber") ? fiber_from(j["fiber"], path + ".fiber") : Fiber::point();
            MetricGraph g = kind == "path" ? build_path(lengths) : build_star(lengths);
            return build_uniform_complex(std::move(g), f, Profile::constant(opt(j, "phi", 1.0, path)),
                                         Profile::constant(opt(j, "psi", 1.0, path)));
        }
        if (kind == "file") {
            allow_keys(j, path, {"kind", "path"});
            auto p = std::filesystem::path(req<std::string>(j, "path", path));
            if (p.is_relative()) p = base / p;
            return complex_from_json(read_text(p));
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const ParameterError& e) {
        throw ValidationError(path, e.what());
    } catch (const DomainError& e) {
        throw ValidationError(path, e.what());
    }
    throw ValidationError(path + ".kind", "unknown space kind '" + kind + "'");
}

BoundaryPolicy boundary_from(const json& j, const std::string& path) {
    auto one = [&](const std::string& s, const std::string& p) {
        if (s == "reflecting") return Boundary::Reflecting;
        if (s == "absorbing") return Boundary::Absorbing;
        throw ValidationError(p, "expected reflecting or absorbing");
    };
    if (j.is_string()) {
        Boundary b = one(j.get<std::string>(), path);
        return {b, b};
    }
    allow_keys(j, path, {"graph", "fiber"});
    return {one(opt<std::string>(j, "graph", "reflecting", path), path + ".graph"),
            one(opt<std::string>(j, "fiber", "reflecting", path), path + ".fiber")};
}

Discretization disc_from(const StripComplex& sc, const json& j) {
    const std::string path = "$.discretization";
    allow_keys(j, path, {"nodes_per_edge", "fiber_nodes", "spacing", "boundary"});
    GridOptions o;
    o.nodes_per_edge = opt<std::size_t>(j, "nodes_per_edge", o.nodes_per_edge, path);
    o.fiber_nodes = opt<std::size_t>(j, "fiber_nodes", o.fiber_nodes, path);
    const auto sp = opt<std::string>(j, "spacing", "automatic", path);
    if (sp == "automatic")
        o.spacing = SSpacing::Automatic;
    else if (sp == "uniform")
        o.spacing = SSpacing::Uniform;
    else if (sp == "geometric")
        o.spacing = SSpacing::Geometric;
    else
        throw ValidationError(path + ".spacing", "unknown spacing '" + sp + "'");
    BoundaryPolicy policy = j.contains("boundary") ? boundary_from(j["boundary"], path + ".boundary")
                                                   : BoundaryPolicy::reflecting();
    try {
        return assemble(sc, o, policy);
    } catch (const ParameterError& e) {
        throw ValidationError(path, e.what());
    }
}

VertexId origin_vertex(const MetricGraph& g) {
    try {
        return tree_origin(g);
    } catch (const Error&) {
        return 0;
    }
}

std::size_t node_param(const Discretization& d, const json& params, const char* key,
                       const std::string& path) {
    auto it = params.find(key);
    if (it == params.end() || (it->is_string() && it->get<std::string>() == "origin")) {
        const VertexId v = origin_vertex(d.complex.graph());
        return d.grid.vertex_node(v, d.grid.fiber_count() / 2);
    }
    if (!it->is_number_unsigned()) throw ValidationError(path + "." + key, "node id or \"origin\"");
    const auto n = it->get<std::size_t>();
    if (n >= d.dof_count()) throw ValidationError(path + "." + key, "node out of range");
    return n;
}

Scheme scheme_param(const json& params, const std::string& path) {
    const auto s = opt<std::string>(params, "scheme", "cn", path);
    if (s == "cn") return Scheme::CrankNicolson;
    if (s == "ie") return Scheme::ImplicitEuler;
    throw ValidationError(path + ".scheme", "expected cn or ie");
}

void node_columns(const Discretization& d, std::size_t k, std::vector<std::string>& row) {
    const NodeInfo& n = d.grid.info(k);
    EdgeId e = n.edge;
    double s = n.s;
    if (n.kind == NodeInfo::Kind::Vertex) {
        GraphPoint gp = GraphPoint::at_vertex(d.complex.graph(), n.vertex);
        e = gp.edge;
        s = gp.s;
    }
    row.push_back(std::to_string(k));
    row.push_back(std::to_string(e));
    row.push_back(format_double(s));
    row.push_back(format_double(n.x));
}

struct Job {
    json params;
    std::string ppath = "$.params";
    std::uint64_t seed;
    unsigned threads;
    std::filesystem::path out;
    ExperimentResult* result;

    void emit(const std::string& name, const CsvTable& t) {
        const auto p = out / name;
        t.write(p);
        result->manifest.outputs.push_back({name, file_digest(p)});
    }
    void emit_text(const std::string& name, const std::string& text) {
        const auto p = out / name;
        write_text(p, text);
        result->manifest.outputs.push_back({name, file_digest(p)});
    }
};

void task_heat(Job& job, const Discretization& d) {
    allow_keys(job.params, job.ppath, {"source", "t", "dt", "scheme"});
    const double t = req<double>(job.params, "t", job.ppath);
    if (!(t > 0)) throw ValidationError(job.ppath + ".t", "must be positive");
    const double dt = opt(job.params, "dt", t / 256.0, job.ppath);
    const std::size_t src = node_param(d, job.params, "source", job.ppath);
    HeatKernelSlice h = heat_kernel(d, src, t, dt, scheme_param(job.params, job.ppath));
    CsvTable csv({"node_id", "edge_id", "s", "x", "mass", "value"},
                 {"1", "1", "length", "length", "volume", "1/volume"});
    for (std::size_t k = 0; k < d.dof_count(); ++k) {
        std::vector<std::string> row;
        node_columns(d, k, row);
        row.push_back(format_double(d.mass[static_cast<Eigen::Index>(k)]));
        row.push_back(format_double(h.values[static_cast<Eigen::Index>(k)]));
        csv.add_row(std::move(row));
    }
    job.emit("kernel.csv", csv);
    job.result->summary.push_back("source " + std::to_string(src) + ", retained mass " +
                                  format_double(h.retained_mass(d)));
}

void task_spectrum(Job& job, const Discretization& d) {
    allow_keys(job.params, job.ppath, {"tolerance"});
    SpectrumOptions so;
    so.tolerance = opt(job.params, "tolerance", so.tolerance, job.ppath);
    SpectralBottom sb = spectral_bottom(d, so);
    CsvTable csv({"lambda", "residual", "iterations", "free_dofs"}, {"1/time", "1", "1", "1"});
    csv.add_row(std::vector<double>{sb.lambda, sb.residual, static_cast<double>(sb.iterations),
                                    static_cast<double>(d.free_dofs().size())});
    job.emit("spectrum.csv", csv);
    job.result->summary.push_back("lambda " + format_double(sb.lambda));
}

void task_mc(Job& job, const Discretization& d) {
    allow_keys(job.params, job.ppath,
               {"mode", "source", "target", "t", "dt", "paths", "horizons", "max_jumps"});
    const auto mode = opt<std::string>(job.params, "mode", "ctmc", job.ppath);
    const auto paths = opt<std::size_t>(job.params, "paths", 10000, job.ppath);
    if (paths == 0) throw ValidationError(job.ppath + ".paths", "must be positive");
    McOptions mo{job.seed, job.threads};
    const std::size_t src = node_param(d, job.params, "source", job.ppath);
    if (mode == "ctmc" || mode == "sde") {
        const double t = req<double>(job.params, "t", job.ppath);
        EmpiricalMeasure em;
        if (mode == "ctmc") {
            em = sample_ctmc(d, src, t, paths, mo);
        } else {
            const NodeInfo& n = d.grid.info(src);
            PointOnComplex p = n.kind == NodeInfo::Kind::Vertex
                                   ? PointOnComplex(ManifoldPoint{n.vertex, n.x})
                                   : PointOnComplex(StripPoint{n.edge, n.s, n.x});
            em = sample_sde(d.complex, p, t, opt(job.params, "dt", t / 1000.0, job.ppath), paths, d,
                            mo);
        }
        Field dens = em.density();
        CsvTable csv({"node_id", "count", "density"}, {"1", "walkers", "1/volume"});
        for (std::size_t k = 0; k < d.dof_count(); ++k)
            csv.add_row(std::vector<std::string>{std::to_string(k), std::to_string(em.counts[k]),
                                                 format_double(dens[static_cast<Eigen::Index>(k)])});
        job.emit("measure.csv", csv);
        job.result->summary.push_back("surviving " + std::to_string(em.surviving()) + " of " +
                                      std::to_string(em.total));
    } else if (mode == "exit") {
        std::vector<std::size_t> region = d.free_dofs();
        ExitLaw law = exit_distribution(d, region, src, paths, mo,
                                        opt<std::size_t>(job.params, "max_jumps", 1000000, job.ppath));
        CsvTable csv({"node_id", "probability"}, {"1", "1"});
        for (std::size_t k = 0; k < law.probability.size(); ++k)
            if (law.probability[k] > 0)
                csv.add_row(std::vector<std::string>{std::to_string(k),
                                                     format_double(law.probability[k])});
        job.emit("exit.csv", csv);
        job.result->summary.push_back("capped fraction " + format_double(law.capped));
    } else if (mode == "green") {
        const std::size_t tgt = node_param(d, job.params, "target", job.ppath);
        auto horizons = opt<std::vector<double>>(job.params, "horizons", {1, 2, 4, 8, 16}, job.ppath);
        GreenCurve gc = green_estimate(d, src, tgt, horizons, paths, mo);
        CsvTable csv({"horizon", "estimate", "std_error"}, {"time", "time/volume", "time/volume"});
        for (std::size_t i = 0; i < gc.horizons.size(); ++i)
            csv.add_row(std::vector<double>{gc.horizons[i], gc.estimate[i], gc.std_error[i]});
        job.emit("green.csv", csv);
    } else {
        throw ValidationError(job.ppath + ".mode", "expected ctmc, sde, exit or green");
    }
}

void task_project(Job& job, const StripComplex& sc, const Discretization& d) {
    allow_keys(job.params, job.ppath, {"map", "t", "source", "dt", "b"});
    const auto kind = req<std::string>(job.params, "map", job.ppath);
    if (kind != "collapse-fiber" && kind != "slice-plane" && kind != "horocyclic")
        throw ValidationError(job.ppath + ".map", "expected collapse-fiber, slice-plane or horocyclic");
    Quotient q = [&] {
        if (kind == "collapse-fiber") return collapse_fiber(sc);
        if (kind == "slice-plane") return slice_plane(sc);
        int k_min = std::numeric_limits<int>::max();
        for (const Edge& e : sc.graph().edges())
            if (e.level) k_min = std::min(k_min, *e.level);
        if (k_min == std::numeric_limits<int>::max())
            throw ValidationError(job.ppath + ".map", "horocyclic collapse needs a levelled tree");
        const json b = job.params.contains("b") ? job.params["b"] : json(1.0);
        const std::string bpath = job.ppath + ".b";
        return horocyclic_collapse(sc, [&](int k) { return level_weight(b, k, k_min, bpath); });
    }();
    job.emit_text("quotient.json", quotient_map_to_json(q.map));
    job.emit_text("target.json", complex_to_json(q.target));
    if (!job.params.contains("t")) return;
    const double t = req<double>(job.params, "t", job.ppath);
    GridOptions o = d.grid.options();
    if (q.map.collapses_fiber) o.fiber_nodes = 1;
    Discretization dt = assemble(q.target, o, d.policy);
    ProjectionOptions po;
    po.dt = opt(job.params, "dt", 0.0, job.ppath);
    po.seed = job.seed;
    po.threads = job.threads;
    ProjectionReport r = compare_projected_heat(d, dt, q.map, node_param(d, job.params, "source", job.ppath), t, po);
    CsvTable csv({"target_node", "aggregated", "target"}, {"1", "probability", "probability"});
    for (Eigen::Index k = 0; k < r.target.size(); ++k)
        csv.add_row(std::vector<double>{static_cast<double>(k), r.aggregated[k], r.target[k]});
    job.emit("projection.csv", csv);
    job.result->summary.push_back("relative L1 " + format_double(r.relative_l1));
}

void task_exhaust(Job& job, const StripComplex& sc, const Discretization& d) {
    allow_keys(job.params, job.ppath, {"kind", "epsilon", "n"});
    const auto kind = opt<std::string>(job.params, "kind", sc.treebolic() ? "treebolic" : "edge",
                                       job.ppath);
    Field rho;
    if (kind == "edge") {
        const double eps = opt(job.params, "epsilon", 0.1, job.ppath);
        rho = sample_exhaustion(d, edge_exhaustion(sc.graph(), eps, origin_vertex(sc.graph())));
    } else if (kind == "treebolic") {
        rho = sample_exhaustion(d, TreebolicExhaustion(sc));
    } else {
        throw ValidationError(job.ppath + ".kind", "expected edge or treebolic");
    }
    const int n = opt(job.params, "n", 0, job.ppath);
    Field chi = n > 0 ? approx_unity(d, rho, n) : Field();
    CsvTable csv({"node_id", "edge_id", "s", "x", "rho", "chi"},
                 {"1", "1", "length", "length", "1", "1"});
    for (std::size_t k = 0; k < d.dof_count(); ++k) {
        std::vector<std::string> row;
        node_columns(d, k, row);
        row.push_back(format_double(rho[static_cast<Eigen::Index>(k)]));
        row.push_back(n > 0 ? format_double(chi[static_cast<Eigen::Index>(k)]) : "");
        csv.add_row(std::move(row));
    }
    job.emit("exhaustion.csv", csv);
    job.result->summary.push_back("gradient sup " + format_double(gradient_sup(d, rho)));
}

void task_subord(Job& job) {
    allow_keys(job.params, job.ppath, {"fiber", "L", "x", "y"});
    const auto f = opt<std::string>(job.params, "fiber", "circle", job.ppath);
    KernelFiber kf;
    if (f == "circle")
        kf = KernelFiber::circle(opt(job.params, "L", 2.0 * std::numbers::pi, job.ppath));
    else if (f == "line")
        kf = KernelFiber::line();
    else
        throw ValidationError(job.ppath + ".fiber", "expected circle or line");
    const double x = opt(job.params, "x", 0.0, job.ppath);
    std::vector<double> ys;
    if (job.params.contains("y") && job.params["y"].is_number())
        ys.push_back(job.params["y"].get<double>());
    else
        ys = opt<std::vector<double>>(job.params, "y", {0.5, 1.0, 2.0}, job.ppath);
    CsvTable csv({"x", "y", "G"}, {"length", "length", "1/length"});
    for (double y : ys) {
        try {
            csv.add_row(std::vector<double>{x, y, resolvent_kernel_G(kf, x, y)});
        } catch (const DomainError& e) {
            throw ValidationError(job.ppath + ".y", e.what());
        }
    }
    job.emit("G.csv", csv);
}

void task_acceptance(Job& job) {
    allow_keys(job.params, job.ppath, {"only"});
    AcceptanceOptions ao;
    ao.seed = job.seed;
    ao.threads = job.threads;
    ao.only = opt<std::vector<int>>(job.params, "only", {}, job.ppath);
    for (int id : ao.only)
        if (id < 1 || id > criterion_count())
            throw ValidationError(job.ppath + ".only", "no criterion " + std::to_string(id));
    ExperimentResult& r = *job.result;
    r.acceptance = run_acceptance(ao);
    CsvTable csv({"id", "name", "pass", "detail"}, {"1", "1", "1", "1"});
    for (const auto& c : r.acceptance) {
        csv.add_row(std::vector<std::string>{std::to_string(c.id), c.name, c.pass ? "1" : "0",
                                             "\"" + c.detail + "\""});
        r.summary.push_back(c.line());
        if (!c.pass) r.exit_code = 4;
    }
    job.emit("acceptance.csv", csv);
}

}  // namespace

std::string library_version() { return STRIPFLOW_VERSION; }

std::string RunManifest::to_json() const {
    json in = json::object(), out = json::array();
    for (const auto& [p, dg] : inputs) in[p] = dg;
    for (const auto& [p, dg] : outputs) out.push_back({{"path", p}, {"digest", dg}});
    json j = {{"command_line", command_line}, {"task", task},   {"config_digest", config_digest},
              {"seed", seed},                 {"threads", threads}, {"version", version},
              {"inputs", in},                 {"outputs", out},
              {"wall_clock_seconds", wall_clock_seconds}};
    return j.dump(2);
}

StripComplex space_from_config(const std::string& space_json, const std::filesystem::path& base) {
    return space_from(parse(space_json, "$.space"), base);
}

Discretization discretization_from_config(const StripComplex& sc,
                                          const std::string& discretization_json) {
    return disc_from(sc, parse(discretization_json, "$.discretization"));
}

ExperimentResult run_experiment(const std::string& config_json, const RunContext& ctx) {
    const auto start = std::chrono::steady_clock::now();
    const json cfg = parse(config_json, "$");
    allow_keys(cfg, "$", {"task", "seed", "threads", "space", "discretization", "disc", "params"});
    const auto task = req<std::string>(cfg, "task", "$");
    static const std::set<std::string> tasks = {"assemble", "heat",    "spectrum", "mc",
                                                "project",  "exhaust", "subord",   "acceptance"};
    if (!tasks.count(task)) throw ValidationError("$.task", "unknown task '" + task + "'");

    ExperimentResult result;
    RunManifest& m = result.manifest;
    m.command_line = ctx.command_line;
    m.task = task;
    m.config_digest = digest(cfg.dump());
    m.seed = ctx.seed ? *ctx.seed : opt<std::uint64_t>(cfg, "seed", 1, "$");
    m.threads = ctx.threads ? *ctx.threads : opt<unsigned>(cfg, "threads", 1, "$");
    if (m.threads == 0) throw ValidationError("$.threads", "must be >= 1");
    m.version = library_version();
    std::filesystem::create_directories(ctx.out_dir);

    Job job{cfg.contains("params") ? cfg["params"] : json::object(), "$.params", m.seed,
            m.threads, ctx.out_dir, &result};
    if (!job.params.is_object()) throw ValidationError("$.params", "expected an object");

    if (task == "subord") {
        task_subord(job);
    } else if (task == "acceptance") {
        task_acceptance(job);
    } else {
        std::optional<Discretization> d;
        const json disc_cfg = cfg.contains("discretization") ? cfg["discretization"] : json::object();
        if (cfg.contains("disc")) {
            auto p = std::filesystem::path(req<std::string>(cfg, "disc", "$"));
            if (p.is_relative()) p = ctx.base_dir / p;
            m.inputs.push_back({(p / "discretization.json").string(),
                                file_digest(p / "discretization.json")});
            d = read_discretization(p);
            if (disc_cfg.contains("boundary")) {
                allow_keys(disc_cfg, "$.discretization", {"boundary"});
                d = assemble(d->complex, d->grid.options(),
                             boundary_from(disc_cfg["boundary"], "$.discretization.boundary"));
            }
        } else {
            if (!cfg.contains("space")) throw ValidationError("$.space", "missing");
            const json& sp = cfg["space"];
            if (sp.is_object() && sp.value("kind", "") == "file" && sp.contains("path")) {
                auto p = std::filesystem::path(sp["path"].get<std::string>());
                if (p.is_relative()) p = ctx.base_dir / p;
                m.inputs.push_back({p.string(), file_digest(p)});
            }
            StripComplex sc = space_from(sp, ctx.base_dir);
            d = disc_from(sc, disc_cfg);
        }
        if (task == "assemble") {
            for (const auto& p : write_discretization(*d, ctx.out_dir))
                m.outputs.push_back({std::filesystem::relative(p, ctx.out_dir).string(), file_digest(p)});
            result.summary.push_back(std::to_string(d->dof_count()) + " DOFs, " +
                                     std::to_string(d->stiffness.nonZeros()) + " stiffness entries");
        } else if (task == "heat") {
            task_heat(job, *d);
        } else if (task == "spectrum") {
            task_spectrum(job, *d);
        } else if (task == "mc") {
            task_mc(job, *d);
        } else if (task == "project") {
            task_project(job, d->complex, *d);
        } else if (task == "exhaust") {
            task_exhaust(job, d->complex, *d);
        }
    }

    m.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(ctx.out_dir / "manifest.json", m.to_json());
    return result;
}

}  // namespace stripflow
