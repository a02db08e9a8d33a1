// stripflow command line: thin layer that turns flags into experiment configs.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stripflow/error.hpp"
#include "stripflow/experiment.hpp"
#include "stripflow/metric_graph.hpp"
#include "stripflow/serialization.hpp"
#include "stripflow/strip_complex.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace stripflow;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
    std::string command_line;
};

bool names_file(const fs::path& p) { return p.has_extension(); }

// Runs a config. When --out names a file, the task writes next to it and the
// primary output is renamed to that file.
int run_config(const json& cfg, const Globals& g, const std::string& default_out,
               const std::string& primary = {}) {
    const fs::path out = g.out.empty() ? fs::path(default_out) : fs::path(g.out);
    RunContext ctx;
    ctx.command_line = g.command_line;
    ctx.seed = g.seed;
    ctx.threads = g.threads;
    const bool as_file = !primary.empty() && names_file(out);
    ctx.out_dir = as_file ? (out.has_parent_path() ? out.parent_path() : fs::path(".")) : out;

    ExperimentResult r = run_experiment(cfg.dump(), ctx);
    if (as_file) {
        fs::rename(ctx.out_dir / primary, out);
        for (auto& [path, dg] : r.manifest.outputs)
            if (path == primary) path = out.filename().string();
        write_text(ctx.out_dir / "manifest.json", r.manifest.to_json());
    }
    for (const auto& line : r.summary) std::cout << line << "\n";
    std::cout << "wrote " << (as_file ? out : ctx.out_dir).string() << "\n";
    return r.exit_code;
}

json space_file(const std::string& path) { return {{"kind", "file"}, {"path", path}}; }

json boundary_json(const std::string& graph, const std::string& fiber) {
    return {{"graph", graph}, {"fiber", fiber.empty() ? std::string("reflecting") : fiber}};
}

// Either a saved discretization or a space file plus grid flags.
struct Input {
    std::string disc;
    std::string space;
    std::size_t nodes_per_edge = 9;
    std::size_t fiber_nodes = 9;
    std::string boundary = "reflecting";
    std::string fiber_boundary;

    void add(CLI::App* app, bool with_grid = true) {
        app->add_option("--disc", disc, "saved discretization directory");
        app->add_option("--space", space, "complex JSON");
        if (!with_grid) return;
        app->add_option("--nodes-per-edge", nodes_per_edge);
        app->add_option("--fiber-nodes", fiber_nodes);
        app->add_option("--boundary", boundary, "reflecting or absorbing (graph ends)")
            ->check(CLI::IsMember({"reflecting", "absorbing"}));
        app->add_option("--fiber-boundary", fiber_boundary)->check(CLI::IsMember({"reflecting", "absorbing"}));
    }
    void into(json& cfg) const {
        if (!disc.empty()) {
            cfg["disc"] = disc;
            return;
        }
        if (space.empty()) throw ValidationError("--space", "either --disc or --space is required");
        cfg["space"] = space_file(space);
        cfg["discretization"] = {{"nodes_per_edge", nodes_per_edge},
                                 {"fiber_nodes", fiber_nodes},
                                 {"boundary", boundary_json(boundary, fiber_boundary)}};
    }
};

std::string joined(int argc, char** argv) {
    std::ostringstream os;
    for (int i = 0; i < argc; ++i) os << (i ? " " : "") << argv[i];
    return os.str();
}

json source_value(const std::string& s) {
    if (s.empty() || s == "origin") return "origin";
    return static_cast<std::size_t>(std::stoull(s));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stripflow: heat flow and Brownian motion on strip complexes"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    g.command_line = joined(argc, argv);
    app.add_option("--seed", g.seed, "random seed (overrides the config)");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output directory or file");

    int code = 0;

    // run
    auto* run = app.add_subcommand("run", "execute a config document");
    std::string config_path;
    run->add_option("config", config_path)->required()->check(CLI::ExistingFile);
    run->callback([&] {
        RunContext ctx;
        ctx.command_line = g.command_line;
        ctx.seed = g.seed;
        ctx.threads = g.threads;
        ctx.out_dir = g.out.empty() ? fs::path("out") : fs::path(g.out);
        ctx.base_dir = fs::path(config_path).parent_path();
        ExperimentResult r = run_experiment(read_text(config_path), ctx);
        for (const auto& line : r.summary) std::cout << line << "\n";
        code = r.exit_code;
    });

    // graph
    auto* graph = app.add_subcommand("graph", "metric graphs");
    graph->require_subcommand(1);
    auto* build_tree_cmd = graph->add_subcommand("build-tree", "truncated horocyclic tree");
    int p = 2, kmin = -1, kmax = 1;
    double q = 2.0;
    build_tree_cmd->add_option("--p", p);
    build_tree_cmd->add_option("--q", q);
    build_tree_cmd->add_option("--kmin", kmin);
    build_tree_cmd->add_option("--kmax", kmax);
    build_tree_cmd->callback([&] {
        const std::string out = g.out.empty() ? "graph.json" : g.out;
        write_text(out, graph_to_json(build_tree(p, q, kmin, kmax)));
        std::cout << "wrote " << out << "\n";
    });

    // space
    auto* space = app.add_subcommand("space", "strip complexes");
    space->require_subcommand(1);
    auto* build_tb = space->add_subcommand("build-treebolic", "treebolic space");
    TreebolicParams tp;
    build_tb->add_option("--p", tp.p);
    build_tb->add_option("--q", tp.q);
    build_tb->add_option("--alpha", tp.alpha);
    build_tb->add_option("--beta", tp.beta);
    build_tb->add_option("--kmin", tp.k_min);
    build_tb->add_option("--kmax", tp.k_max);
    build_tb->add_option("--R", tp.R, "half width of the truncated line fiber");
    build_tb->callback([&] {
        const std::string out = g.out.empty() ? "space.json" : g.out;
        write_text(out, complex_to_json(build_treebolic(tp)));
        std::cout << "wrote " << out << "\n";
    });
    auto* sp_ex = space->add_subcommand("exhaustion", "exhaustion function at one point");
    std::string sp_file, point;
    double sp_eps = 0.1;
    sp_ex->add_option("--space", sp_file)->required()->check(CLI::ExistingFile);
    sp_ex->add_option("--point", point, "edge,s,x")->required();
    sp_ex->add_option("--epsilon", sp_eps, "edge exhaustion flat radius (non-treebolic spaces)");
    sp_ex->callback([&] {
        const StripComplex sc = complex_from_json(read_text(sp_file));
        StripPoint sp;
        char c1 = 0, c2 = 0;
        std::istringstream is(point);
        if (!(is >> sp.edge >> c1 >> sp.s >> c2 >> sp.x) || c1 != ',' || c2 != ',')
            throw ValidationError("--point", "expected edge,s,x");
        check_point(sc, sp);
        double value = 0.0;
        if (sc.treebolic()) {
            value = TreebolicExhaustion(sc)(sp);
        } else {
            const EdgeExhaustion rho(sc.graph(), sp_eps, tree_origin(sc.graph()));
            value = rho.value(sp.edge, sp.s);
        }
        std::cout << format_double(value) << "\n";
    });

    // assemble
    auto* asm_cmd = app.add_subcommand("assemble", "discretize a complex");
    Input asm_in;
    std::string spacing = "automatic";
    asm_in.add(asm_cmd);
    asm_cmd->add_option("--spacing", spacing)->check(CLI::IsMember({"automatic", "uniform", "geometric"}));
    asm_cmd->callback([&] {
        json cfg = {{"task", "assemble"}};
        asm_in.into(cfg);
        if (cfg.contains("discretization")) cfg["discretization"]["spacing"] = spacing;
        code = run_config(cfg, g, "disc");
    });

    // heat
    auto* heat = app.add_subcommand("heat", "heat kernel slice");
    Input heat_in;
    std::string source;
    double t = 1.0;
    std::optional<double> dt;
    std::string scheme = "cn";
    heat_in.add(heat);
    heat->add_option("--source", source, "node id or 'origin'");
    heat->add_option("--t", t)->required();
    heat->add_option("--dt", dt);
    heat->add_option("--scheme", scheme)->check(CLI::IsMember({"cn", "ie"}));
    heat->callback([&] {
        json cfg = {{"task", "heat"}};
        heat_in.into(cfg);
        cfg["params"] = {{"source", source_value(source)}, {"t", t}, {"scheme", scheme}};
        if (dt) cfg["params"]["dt"] = *dt;
        code = run_config(cfg, g, "heat", "kernel.csv");
    });

    // spectrum
    auto* spec = app.add_subcommand("spectrum", "bottom of the spectrum");
    Input spec_in;
    std::string mode;
    std::optional<double> tol;
    spec_in.add(spec);
    spec->add_option("--mode", mode, "boundary used for the eigenproblem")
        ->check(CLI::IsMember({"reflecting", "absorbing"}));
    spec->add_option("--tolerance", tol);
    spec->callback([&] {
        json cfg = {{"task", "spectrum"}};
        spec_in.into(cfg);
        if (!mode.empty()) {
            if (cfg.contains("disc"))
                cfg["discretization"] = {{"boundary", boundary_json(mode, spec_in.fiber_boundary)}};
            else
                cfg["discretization"]["boundary"] = boundary_json(mode, spec_in.fiber_boundary);
        }
        cfg["params"] = json::object();
        if (tol) cfg["params"]["tolerance"] = *tol;
        code = run_config(cfg, g, "spectrum", "spectrum.csv");
    });

    // mc
    auto* mc = app.add_subcommand("mc", "Monte Carlo samplers");
    Input mc_in;
    std::string mc_mode, mc_target;
    std::optional<double> mc_t, mc_dt;
    std::size_t paths = 10000;
    std::vector<double> horizons;
    mc_in.add(mc);
    mc->add_option("mode", mc_mode)->required()->check(CLI::IsMember({"ctmc", "sde", "exit", "green"}));
    mc->add_option("--source", source, "node id or 'origin'");
    mc->add_option("--target", mc_target, "node id (green)");
    mc->add_option("--t", mc_t);
    mc->add_option("--dt", mc_dt, "sde step");
    mc->add_option("--paths", paths);
    mc->add_option("--horizons", horizons)->delimiter(',');
    mc->callback([&] {
        json cfg = {{"task", "mc"}};
        mc_in.into(cfg);
        json& prm = cfg["params"] = {{"mode", mc_mode}, {"source", source_value(source)}, {"paths", paths}};
        if (mc_t) prm["t"] = *mc_t;
        if (mc_dt) prm["dt"] = *mc_dt;
        if (!mc_target.empty()) prm["target"] = source_value(mc_target);
        if (!horizons.empty()) prm["horizons"] = horizons;
        const char* primary = mc_mode == "exit" ? "exit.csv" : mc_mode == "green" ? "green.csv" : "measure.csv";
        code = run_config(cfg, g, "mc", primary);
    });

    // project
    auto* proj = app.add_subcommand("project", "quotient maps");
    Input proj_in;
    std::string map_kind, compare_map = "collapse-fiber";
    std::optional<double> proj_t, proj_dt;
    std::vector<double> b;
    proj_in.add(proj);
    proj->add_option("kind", map_kind)
        ->required()
        ->check(CLI::IsMember({"collapse-fiber", "slice-plane", "horocyclic", "compare"}));
    proj->add_option("--map", compare_map, "map used by 'compare'")
        ->check(CLI::IsMember({"collapse-fiber", "slice-plane", "horocyclic"}));
    proj->add_option("--t", proj_t);
    proj->add_option("--dt", proj_dt);
    proj->add_option("--source", source, "node id or 'origin'");
    proj->add_option("--b", b, "per-level weights b_k from the first edge level")->delimiter(',');
    proj->callback([&] {
        const bool compare = map_kind == "compare";
        if (compare && !proj_t) throw ValidationError("--t", "compare needs a time");
        json cfg = {{"task", "project"}};
        proj_in.into(cfg);
        json& prm = cfg["params"] = {{"map", compare ? compare_map : map_kind}};
        if (proj_t) {
            prm["t"] = *proj_t;
            prm["source"] = source_value(source);
        }
        if (proj_dt) prm["dt"] = *proj_dt;
        if (!b.empty()) prm["b"] = b;
        code = run_config(cfg, g, "project", compare ? "projection.csv" : "quotient.json");
    });

    // exhaust
    auto* ex = app.add_subcommand("exhaust", "exhaustion functions on the grid");
    Input ex_in;
    std::string ex_kind;
    std::optional<double> ex_eps;
    int ex_n = 0;
    ex_in.add(ex);
    ex->add_option("--kind", ex_kind)->check(CLI::IsMember({"edge", "treebolic"}));
    ex->add_option("--epsilon", ex_eps);
    ex->add_option("--n", ex_n, "also emit the cutoff theta(rho/n)");
    ex->callback([&] {
        json cfg = {{"task", "exhaust"}};
        ex_in.into(cfg);
        json& prm = cfg["params"] = json::object();
        if (!ex_kind.empty()) prm["kind"] = ex_kind;
        if (ex_eps) prm["epsilon"] = *ex_eps;
        if (ex_n > 0) prm["n"] = ex_n;
        code = run_config(cfg, g, "exhaust", "exhaustion.csv");
    });

    // subord
    auto* sub = app.add_subcommand("subord", "subordinated resolvent kernel");
    sub->require_subcommand(1);
    auto* subg = sub->add_subcommand("G", "kernel of (Id + sqrt(-Laplacian))^-1 on the fiber");
    std::string fiber = "circle";
    double L = 6.283185307179586, x = 0.0;
    std::vector<double> ys;
    subg->add_option("--fiber", fiber)->check(CLI::IsMember({"circle", "line"}));
    subg->add_option("--L", L);
    subg->add_option("--x", x);
    subg->add_option("--y", ys)->delimiter(',');
    subg->callback([&] {
        json cfg = {{"task", "subord"}, {"params", {{"fiber", fiber}, {"x", x}}}};
        if (fiber == "circle") cfg["params"]["L"] = L;
        if (!ys.empty()) cfg["params"]["y"] = ys;
        code = run_config(cfg, g, "subord", "G.csv");
    });

    // accept
    auto* acc = app.add_subcommand("accept", "acceptance suite");
    std::vector<int> only;
    acc->add_option("--only", only, "criterion ids")->delimiter(',');
    acc->callback([&] {
        json cfg = {{"task", "acceptance"}, {"params", json::object()}};
        if (!only.empty()) cfg["params"]["only"] = only;
        RunContext ctx;
        ctx.command_line = g.command_line;
        ctx.seed = g.seed;
        ctx.threads = g.threads;
        ctx.out_dir = g.out.empty() ? fs::path("acceptance") : fs::path(g.out);
        ExperimentResult r = run_experiment(cfg.dump(), ctx);
        for (const auto& c : r.acceptance) std::cout << c.line() << "\n";
        code = r.exit_code;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const AssemblyError& e) {
        std::cerr << "assembly error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return code;
}
