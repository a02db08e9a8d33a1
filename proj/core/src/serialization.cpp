#include "stripflow/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "stripflow/error.hpp"

namespace stripflow {

using nlohmann::json;

namespace {

const json& at(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ValidationError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(path + "." + key, "missing");
    return *it;
}

template <class T>
T get(const json& j, const std::string& key, const std::string& path) {
    const json& v = at(j, key, path);
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(path + "." + key, e.what());
    }
}

const json& array_at(const json& j, const std::string& key, const std::string& path) {
    const json& v = at(j, key, path);
    if (!v.is_array()) throw ValidationError(path + "." + key, "expected an array");
    return v;
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("$", e.what());
    }
}

json profile_json(const Profile& p) {
    switch (p.kind()) {
    case Profile::Kind::Constant:
        return {{"kind", "constant"}, {"c", p.coefficient()}};
    case Profile::Kind::Power:
        return {{"kind", "power"},
                {"c", p.coefficient()},
                {"exponent", p.exponent()},
                {"offset", p.offset()}};
    case Profile::Kind::TabulatedLogLinear: {
        std::vector<double> values;
        for (double l : p.sample_log_values()) values.push_back(std::exp(l));
        return {{"kind", "tabulated"}, {"s", p.sample_s()}, {"values", values}};
    }
    }
    return {};
}

Profile profile_from(const json& j, const std::string& path) {
    const auto kind = get<std::string>(j, "kind", path);
    try {
        if (kind == "constant") return Profile::constant(get<double>(j, "c", path));
        if (kind == "power")
            return Profile::power(get<double>(j, "c", path), get<double>(j, "exponent", path),
                                  get<double>(j, "offset", path));
        if (kind == "tabulated")
            return Profile::tabulated(get<std::vector<double>>(j, "s", path),
                                      get<std::vector<double>>(j, "values", path));
    } catch (const ParameterError& e) {
        throw ValidationError(path, e.what());
    }
    throw ValidationError(path + ".kind", "unknown profile kind '" + kind + "'");
}

json graph_json(const MetricGraph& g) {
    json vs = json::array();
    for (const Vertex& v : g.vertices()) {
        json o = {{"id", v.id}, {"boundary", v.truncation_boundary}};
        if (v.level) o["level"] = *v.level;
        vs.push_back(o);
    }
    json es = json::array();
    for (const Edge& e : g.edges()) {
        json o = {{"id", e.id}, {"tail", e.tail}, {"head", e.head}, {"length", e.length}};
        if (e.level) o["level"] = *e.level;
        if (e.global_offset) o["offset"] = *e.global_offset;
        es.push_back(o);
    }
    return {{"vertices", vs}, {"edges", es}};
}

MetricGraph graph_from(const json& j) {
    std::vector<Vertex> vs;
    const json& jv = array_at(j, "vertices", "$");
    for (std::size_t i = 0; i < jv.size(); ++i) {
        const std::string path = "$.vertices[" + std::to_string(i) + "]";
        Vertex v;
        v.id = get<std::size_t>(jv[i], "id", path);
        v.truncation_boundary = get<bool>(jv[i], "boundary", path);
        if (jv[i].contains("level")) v.level = get<int>(jv[i], "level", path);
        vs.push_back(v);
    }
    std::vector<Edge> es;
    const json& je = array_at(j, "edges", "$");
    for (std::size_t i = 0; i < je.size(); ++i) {
        const std::string path = "$.edges[" + std::to_string(i) + "]";
        Edge e;
        e.id = get<std::size_t>(je[i], "id", path);
        e.tail = get<std::size_t>(je[i], "tail", path);
        e.head = get<std::size_t>(je[i], "head", path);
        e.length = get<double>(je[i], "length", path);
        if (je[i].contains("level")) e.level = get<int>(je[i], "level", path);
        if (je[i].contains("offset")) e.global_offset = get<double>(je[i], "offset", path);
        es.push_back(e);
    }
    try {
        return MetricGraph(std::move(vs), std::move(es));
    } catch (const Error& e) {
        throw ValidationError("$.edges", e.what());
    }
}

const char* boundary_name(Boundary b) {
    return b == Boundary::Reflecting ? "reflecting" : "absorbing";
}

Boundary boundary_from(const std::string& s, const std::string& path) {
    if (s == "reflecting") return Boundary::Reflecting;
    if (s == "absorbing") return Boundary::Absorbing;
    throw ValidationError(path, "expected reflecting or absorbing");
}

const char* spacing_name(SSpacing s) {
    switch (s) {
    case SSpacing::Uniform: return "uniform";
    case SSpacing::Geometric: return "geometric";
    default: return "automatic";
    }
}

SSpacing spacing_from(const std::string& s, const std::string& path) {
    if (s == "automatic") return SSpacing::Automatic;
    if (s == "uniform") return SSpacing::Uniform;
    if (s == "geometric") return SSpacing::Geometric;
    throw ValidationError(path, "unknown spacing '" + s + "'");
}

bool close(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

std::string graph_to_json(const MetricGraph& g) { return graph_json(g).dump(2); }

MetricGraph graph_from_json(const std::string& text) { return graph_from(parse(text)); }

std::string complex_to_json(const StripComplex& sc) {
    json j = graph_json(sc.graph());
    json coeffs = json::object();
    for (EdgeId e = 0; e < sc.coefficients().size(); ++e) {
        const auto& c = sc.coefficients()[e];
        coeffs[std::to_string(e)] = {{"phi", profile_json(c.phi)}, {"psi", profile_json(c.psi)},
                                     {"a", profile_json(c.a)},     {"m", profile_json(c.m)},
                                     {"n", c.fiber_dimension}};
    }
    j["coefficients"] = coeffs;
    const char* kind = sc.fiber().kind == Fiber::Kind::Point    ? "point"
                       : sc.fiber().kind == Fiber::Kind::Circle ? "circle"
                                                                : "interval";
    j["fiber"] = {{"kind", kind}, {"L", sc.fiber().length}};
    if (const auto& tp = sc.treebolic()) {
        j["treebolic"] = {{"p", tp->p},         {"q", tp->q},         {"alpha", tp->alpha},
                          {"beta", tp->beta},   {"k_min", tp->k_min}, {"k_max", tp->k_max},
                          {"R", tp->R}};
    }
    return j.dump(2);
}

StripComplex complex_from_json(const std::string& text) {
    const json j = parse(text);
    MetricGraph g = graph_from(j);
    const json& jf = at(j, "fiber", "$");
    const auto kind = get<std::string>(jf, "kind", "$.fiber");
    Fiber fiber;
    try {
        if (kind == "point")
            fiber = Fiber::point();
        else if (kind == "circle")
            fiber = Fiber::circle(get<double>(jf, "L", "$.fiber"));
        else if (kind == "interval")
            fiber = Fiber::interval(get<double>(jf, "L", "$.fiber"));
        else
            throw ValidationError("$.fiber.kind", "unknown fiber kind '" + kind + "'");
    } catch (const ParameterError& e) {
        throw ValidationError("$.fiber.L", e.what());
    }
    const json& jc = at(j, "coefficients", "$");
    std::vector<EdgeCoefficients> coeffs;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const std::string path = "$.coefficients." + std::to_string(e);
        const json& c = at(jc, std::to_string(e), "$.coefficients");
        coeffs.push_back({profile_from(at(c, "phi", path), path + ".phi"),
                          profile_from(at(c, "psi", path), path + ".psi"),
                          profile_from(at(c, "a", path), path + ".a"),
                          profile_from(at(c, "m", path), path + ".m"), get<int>(c, "n", path)});
    }
    std::optional<TreebolicParams> tp;
    if (j.contains("treebolic")) {
        const json& t = j["treebolic"];
        const std::string path = "$.treebolic";
        tp = TreebolicParams{get<int>(t, "p", path),       get<double>(t, "q", path),
                             get<double>(t, "alpha", path), get<double>(t, "beta", path),
                             get<int>(t, "k_min", path),    get<int>(t, "k_max", path),
                             get<double>(t, "R", path)};
    }
    try {
        return StripComplex(std::move(g), fiber, std::move(coeffs), tp);
    } catch (const Error& e) {
        throw ValidationError("$", e.what());
    }
}

std::string quotient_map_to_json(const QuotientMap& map) {
    json edges = json::object(), vertices = json::object(), A = json::object(),
         a = json::object();
    for (std::size_t e = 0; e < map.edge_map.size(); ++e) {
        edges[std::to_string(e)] = map.edge_map[e];
        if (e < map.A.size()) A[std::to_string(e)] = map.A[e];
    }
    for (std::size_t v = 0; v < map.vertex_map.size(); ++v) {
        vertices[std::to_string(v)] = map.vertex_map[v];
        if (v < map.a.size() && std::isfinite(map.a[v])) a[std::to_string(v)] = map.a[v];
    }
    json j = {{"source", map.source_id}, {"target", map.target_id},
              {"edges", edges},          {"vertices", vertices},
              {"A", A},                  {"a", a},
              {"collapses_fiber", map.collapses_fiber}};
    return j.dump(2);
}

QuotientMap quotient_map_from_json(const std::string& text) {
    const json j = parse(text);
    QuotientMap map;
    map.source_id = get<std::string>(j, "source", "$");
    map.target_id = get<std::string>(j, "target", "$");
    map.collapses_fiber = get<bool>(j, "collapses_fiber", "$");
    const json& edges = at(j, "edges", "$");
    const json& vertices = at(j, "vertices", "$");
    for (std::size_t e = 0; e < edges.size(); ++e)
        map.edge_map.push_back(get<std::size_t>(edges, std::to_string(e), "$.edges"));
    for (std::size_t v = 0; v < vertices.size(); ++v)
        map.vertex_map.push_back(get<std::size_t>(vertices, std::to_string(v), "$.vertices"));
    const json& A = at(j, "A", "$");
    for (std::size_t e = 0; e < A.size(); ++e)
        map.A.push_back(get<double>(A, std::to_string(e), "$.A"));
    const json& a = at(j, "a", "$");
    map.a.assign(map.vertex_map.size(), std::nan(""));
    for (auto it = a.begin(); it != a.end(); ++it) {
        std::size_t v = 0;
        try {
            v = std::stoul(it.key());
        } catch (const std::exception&) {
            throw ValidationError("$.a." + it.key(), "vertex id expected");
        }
        if (v >= map.a.size()) throw ValidationError("$.a." + it.key(), "unknown vertex");
        map.a[v] = get<double>(a, it.key(), "$.a");
    }
    // reversed flags are recomputed by finalize_map once both graphs are known
    return map;
}

std::vector<std::filesystem::path> write_discretization(const Discretization& d,
                                                        const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto trip = dir / "stiffness.txt";
    std::ostringstream ts;
    ts << "# row col value (" << d.stiffness.rows() << " x " << d.stiffness.cols() << ", "
       << d.stiffness.nonZeros() << " entries)\n";
    for (int k = 0; k < d.stiffness.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(d.stiffness, k); it; ++it)
            ts << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    write_text(trip, ts.str());

    json nodes = json::array();
    for (std::size_t k = 0; k < d.dof_count(); ++k) {
        const NodeInfo& n = d.grid.info(k);
        if (n.kind == NodeInfo::Kind::Vertex)
            nodes.push_back({{"vertex", n.vertex}, {"x", n.x}});
        else
            nodes.push_back({{"edge", n.edge}, {"s", n.s}, {"x", n.x}});
    }
    std::vector<std::size_t> pinned;
    for (std::size_t k = 0; k < d.pinned.size(); ++k)
        if (d.pinned[k]) pinned.push_back(k);
    const auto& o = d.grid.options();
    json side = {
        {"format", "stripflow-discretization-1"},
        {"space", json::parse(complex_to_json(d.complex))},
        {"grid",
         {{"nodes_per_edge", o.nodes_per_edge},
          {"fiber_nodes", o.fiber_nodes},
          {"spacing", spacing_name(o.spacing)}}},
        {"boundary", {{"graph", boundary_name(d.policy.graph)}, {"fiber", boundary_name(d.policy.fiber)}}},
        {"dofs", d.dof_count()},
        {"mass", std::vector<double>(d.mass.data(), d.mass.data() + d.mass.size())},
        {"pinned", pinned},
        {"nodes", nodes},
        {"stiffness", "stiffness.txt"}};
    const auto sidecar = dir / "discretization.json";
    write_text(sidecar, side.dump(1));
    return {trip, sidecar};
}

Discretization read_discretization(const std::filesystem::path& dir) {
    const json side = parse(read_text(dir / "discretization.json"));
    StripComplex sc = complex_from_json(at(side, "space", "$").dump());
    const json& jg = at(side, "grid", "$");
    GridOptions o;
    o.nodes_per_edge = get<std::size_t>(jg, "nodes_per_edge", "$.grid");
    o.fiber_nodes = get<std::size_t>(jg, "fiber_nodes", "$.grid");
    o.spacing = spacing_from(get<std::string>(jg, "spacing", "$.grid"), "$.grid.spacing");
    const json& jb = at(side, "boundary", "$");
    BoundaryPolicy policy{boundary_from(get<std::string>(jb, "graph", "$.boundary"), "$.boundary.graph"),
                          boundary_from(get<std::string>(jb, "fiber", "$.boundary"), "$.boundary.fiber")};
    Discretization d = assemble(sc, o, policy);

    const auto mass = get<std::vector<double>>(side, "mass", "$");
    if (mass.size() != d.dof_count()) throw ValidationError("$.mass", "DOF count mismatch");
    for (std::size_t k = 0; k < mass.size(); ++k)
        if (!close(mass[k], d.mass[static_cast<Eigen::Index>(k)]))
            throw ValidationError("$.mass[" + std::to_string(k) + "]", "does not match reassembly");

    std::istringstream ts(read_text(dir / get<std::string>(side, "stiffness", "$")));
    std::string line;
    std::size_t count = 0;
    while (std::getline(ts, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long r = -1, c = -1;
        double v = 0.0;
        if (!(ls >> r >> c >> v) || r < 0 || c < 0 || r >= d.stiffness.rows() ||
            c >= d.stiffness.cols())
            throw ValidationError("stiffness.txt", "bad triplet '" + line + "'");
        if (!close(v, d.stiffness.coeff(r, c)))
            throw ValidationError("stiffness.txt", "entry (" + std::to_string(r) + ", " +
                                                       std::to_string(c) + ") does not match reassembly");
        ++count;
    }
    if (count != static_cast<std::size_t>(d.stiffness.nonZeros()))
        throw ValidationError("stiffness.txt", "entry count mismatch");
    return d;
}

CsvTable::CsvTable(std::vector<std::string> columns, std::vector<std::string> units)
    : columns_(std::move(columns)), units_(std::move(units)) {
    if (units_.size() != columns_.size()) throw ShapeError("one unit per CSV column");
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(format_double(v));
    add_row(std::move(cells));
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw ShapeError("CSV row width mismatch");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(columns_);
    line(units_);
    for (const auto& r : rows_) line(r);
    return os.str();
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigurationError("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigurationError("cannot write " + path.string());
    out << text;
}

std::string digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_digest(const std::filesystem::path& path) { return digest(read_text(path)); }

}  // namespace stripflow
