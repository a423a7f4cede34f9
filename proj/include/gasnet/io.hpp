#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gasnet/experiments.hpp"

namespace gasnet {

using json = nlohmann::json;

/// Schema violation in an input file. field() is a dotted path into the
/// document ("network.pipes[2].length") or the name of the offending file role.
class SchemaError : public Error {
public:
    SchemaError(std::string field, const std::string& what)
        : Error(ErrorKind::Schema, field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Everything a scenario file carries besides the scenario itself.
struct ScenarioFile {
    DimensionalScenario scenario;
    std::optional<NoiseSpec> noise;
    SolveOptions solver;
    EstimationOptions estimation; // formulation, weights, friction box, flow floor
    std::optional<std::filesystem::path> measured_withdrawals; // grid CSV, kg/s
    std::optional<std::filesystem::path> measured_pressures;   // grid CSV, Pa
};

/// A heatmap-shaped table: one row per node or edge, one column per time (s).
struct GridTable {
    std::vector<std::string> labels;
    std::vector<double> times;
    Eigen::MatrixXd values;

    bool operator==(const GridTable&) const = default;
};

namespace detail {

inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& field) {
    const char* b = s.c_str();
    char* e = nullptr;
    const double v = std::strtod(b, &e);
    if (e == b) throw SchemaError(field, "not a number: '" + s + "'");
    while (*e == ' ' || *e == '\r' || *e == '\t') ++e;
    if (*e != '\0') throw SchemaError(field, "trailing characters in number '" + s + "'");
    return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    for (auto& c : out) {
        while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
        while (!c.empty() && c.front() == ' ') c.erase(c.begin());
    }
    return out;
}

// Field access with a path for error messages.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }
    bool has(const char* key) const { return j_.is_object() && j_.contains(key) && !j_.at(key).is_null(); }

    Node at(const char* key) const {
        if (!j_.is_object()) throw SchemaError(path_, "expected an object");
        if (!j_.contains(key)) throw SchemaError(join(key), "required field is missing");
        return {j_.at(key), join(key)};
    }
    Node at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

    std::size_t size_array() const {
        if (!j_.is_array()) throw SchemaError(path_, "expected an array");
        return j_.size();
    }
    double number() const {
        if (!j_.is_number()) throw SchemaError(path_, "expected a number");
        const double v = j_.get<double>();
        if (!std::isfinite(v)) throw SchemaError(path_, "must be finite");
        return v;
    }
    int integer() const {
        if (!j_.is_number_integer()) throw SchemaError(path_, "expected an integer");
        return j_.get<int>();
    }
    bool boolean() const {
        if (!j_.is_boolean()) throw SchemaError(path_, "expected true or false");
        return j_.get<bool>();
    }
    std::string string() const {
        if (!j_.is_string()) throw SchemaError(path_, "expected a string");
        return j_.get<std::string>();
    }
    std::vector<double> numbers() const {
        std::vector<double> v(size_array());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(i).number();
        return v;
    }

    [[noreturn]] void fail(const std::string& what) const { throw SchemaError(path_, what); }

private:
    std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
    const json& j_;
    std::string path_;
};

enum class Dim { Length, Pressure, Time, Flow, Ratio, Density, Speed };

inline double unit_factor(Dim d, const std::string& unit, const Node& where) {
    switch (d) {
    case Dim::Length:
        if (unit == "m") return 1.0;
        if (unit == "km") return 1000.0;
        break;
    case Dim::Pressure:
        if (unit == "Pa") return 1.0;
        if (unit == "psi") return kPaPerPsi;
        break;
    case Dim::Time:
        if (unit == "s") return 1.0;
        if (unit == "h") return kSecondsPerHour;
        break;
    case Dim::Flow:
        if (unit == "kg/s") return 1.0;
        break;
    case Dim::Ratio:
        if (unit == "1") return 1.0;
        break;
    case Dim::Density:
        if (unit == "kg/m3") return 1.0;
        break;
    case Dim::Speed:
        if (unit == "m/s") return 1.0;
        break;
    }
    where.fail("unsupported unit '" + unit + "'");
}

// {"value": v, "unit": u}
inline double quantity(const Node& n, Dim d) {
    if (!n.raw().is_object()) n.fail("expected {\"value\": number, \"unit\": string}");
    const double v = n.at("value").number();
    return v * unit_factor(d, n.at("unit").string(), n.at("unit"));
}

inline json si(double v, const char* unit) { return json{{"value", v}, {"unit", unit}}; }

// Profiles: values carry their own unit, times are seconds after the unit factor.
inline Profile read_profile(const Node& n, Dim d, double horizon, const std::filesystem::path& base) {
    const std::string type = n.at("type").string();
    const double f = d == Dim::Ratio && !n.has("unit") ? 1.0 : unit_factor(d, n.at("unit").string(), n.at("unit"));
    if (type == "constant") return Profile::constant(f * n.at("value").number(), horizon);
    if (type == "sinusoid") {
        SinusoidSum s;
        s.period = n.has("period") ? quantity(n.at("period"), Dim::Time) : horizon;
        s.mean = f * n.at("mean").number();
        const Node terms = n.at("terms");
        for (std::size_t i = 0; i < terms.size_array(); ++i) {
            const Node t = terms.at(i);
            Harmonic h;
            h.amplitude = f * t.at("amplitude").number();
            h.harmonic = t.at("harmonic").integer();
            if (h.harmonic < 0) t.at("harmonic").fail("must be non-negative");
            h.phase = t.has("phase") ? t.at("phase").number() : 0.0;
            s.terms.push_back(h);
        }
        if (!(s.period > 0.0)) n.at("period").fail("must be positive");
        return Profile(std::move(s));
    }
    std::vector<double> times, values;
    const double tf = n.has("time_unit") ? unit_factor(Dim::Time, n.at("time_unit").string(), n.at("time_unit")) : 1.0;
    if (type == "samples") {
        times = n.at("times").numbers();
        values = n.at("values").numbers();
    } else if (type == "csv") {
        const Node fn = n.at("file");
        std::filesystem::path p = fn.string();
        if (p.is_relative()) p = base / p;
        std::ifstream in(p);
        if (!in) fn.fail("cannot open '" + p.string() + "'");
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (line.empty() || line == "\r") continue;
            const auto cells = split_csv(line);
            if (header) {
                header = false;
                char* e = nullptr;
                std::strtod(cells.empty() ? "" : cells[0].c_str(), &e);
                if (cells.empty() || e == cells[0].c_str()) continue; // textual header
            }
            if (cells.size() != 2) fn.fail("each row of '" + p.string() + "' needs exactly two columns (time, value)");
            times.push_back(parse_double(cells[0], fn.path()));
            values.push_back(parse_double(cells[1], fn.path()));
        }
    } else {
        n.at("type").fail("unknown profile type '" + type + "' (constant | sinusoid | samples | csv)");
    }
    if (times.size() != values.size()) n.fail("times and values differ in length");
    for (auto& t : times) t *= tf;
    for (auto& v : values) v *= f;
    try {
        return Profile::spline(horizon, std::move(times), std::move(values));
    } catch (const Error& e) {
        n.fail(e.what());
    }
}

inline json write_profile(const Profile& p, const char* unit, double horizon) {
    json j;
    if (p.is_sinusoid()) {
        const auto& s = p.sinusoid();
        if (s.terms.empty() && s.period == horizon) {
            j = {{"type", "constant"}, {"value", s.mean}};
        } else {
            j = {{"type", "sinusoid"}, {"mean", s.mean}, {"terms", json::array()}};
            if (s.period != horizon) j["period"] = si(s.period, "s");
            for (const auto& h : s.terms)
                j["terms"].push_back({{"amplitude", h.amplitude}, {"harmonic", h.harmonic}, {"phase", h.phase}});
        }
    } else {
        const auto& sp = p.spline_data();
        j = {{"type", "samples"}, {"time_unit", "s"}, {"times", sp.knots}, {"values", sp.values}};
    }
    j["unit"] = unit;
    return j;
}

} // namespace detail

/// Parses a scenario document. Relative CSV paths resolve against `base_dir`.
inline ScenarioFile parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
    using detail::Dim;
    using detail::quantity;
    const detail::Node root(doc, "");
    if (!doc.is_object()) root.fail("scenario must be a JSON object");
    ScenarioFile f;
    DimensionalScenario& ds = f.scenario;
    ds.name = root.has("name") ? root.at("name").string() : "scenario";

    const detail::Node c = root.at("constants");
    ds.a = c.has("a") ? quantity(c.at("a"), Dim::Speed) : kDefaultSpeedOfSound;
    if (c.has("ell0")) ds.ell0 = quantity(c.at("ell0"), Dim::Length);
    if (c.has("rho0")) ds.rho0 = quantity(c.at("rho0"), Dim::Density);
    ds.horizon = c.has("horizon") ? quantity(c.at("horizon"), Dim::Time) : 86400.0;
    if (!(ds.a > 0.0)) c.at("a").fail("must be positive");
    if (!(ds.horizon > 0.0)) c.at("horizon").fail("must be positive");

    if (root.has("grid")) {
        const detail::Node g = root.at("grid");
        if (g.has("points")) ds.grid_points = g.at("points").integer();
        if (g.has("delta")) ds.delta = quantity(g.at("delta"), Dim::Length);
        if (ds.grid_points < 8) g.at("points").fail("need at least 8 grid points");
        if (!(ds.delta > 0.0)) g.at("delta").fail("must be positive");
    }

    const detail::Node net = root.at("network");
    const detail::Node js = net.at("junctions");
    for (std::size_t i = 0; i < js.size_array(); ++i) {
        const detail::Node j = js.at(i);
        DimensionalScenario::Node n;
        n.id = j.at("id").integer();
        n.slack = j.has("slack") && j.at("slack").boolean();
        n.p_min = quantity(j.at("p_min"), Dim::Pressure);
        n.p_max = quantity(j.at("p_max"), Dim::Pressure);
        if (!(n.p_min > 0.0 && n.p_min < n.p_max)) j.fail("need 0 < p_min < p_max");
        ds.nodes.push_back(n);
    }
    const detail::Node ps = net.at("pipes");
    for (std::size_t i = 0; i < ps.size_array(); ++i) {
        const detail::Node p = ps.at(i);
        Pipe pipe;
        pipe.id = p.at("id").integer();
        pipe.from = p.at("from").integer();
        pipe.to = p.at("to").integer();
        pipe.length = quantity(p.at("length"), Dim::Length);
        pipe.diameter = quantity(p.at("diameter"), Dim::Length);
        pipe.friction = p.at("friction").number();
        if (!(pipe.length > 0.0)) p.at("length").fail("must be positive");
        if (!(pipe.diameter > 0.0)) p.at("diameter").fail("must be positive");
        if (!(pipe.friction > 0.0 && pipe.friction < 1.0)) p.at("friction").fail("must lie in (0, 1)");
        ds.pipes.push_back(pipe);
    }
    if (net.has("compressors")) {
        const detail::Node cs = net.at("compressors");
        for (std::size_t i = 0; i < cs.size_array(); ++i) {
            const detail::Node cp = cs.at(i);
            DimensionalScenario::Comp comp;
            comp.pipe = cp.at("pipe").integer();
            const std::string end = cp.at("end").string();
            if (end != "from" && end != "to") cp.at("end").fail("must be \"from\" or \"to\"");
            comp.end = end == "from" ? CompressorEnd::From : CompressorEnd::To;
            comp.ratio = detail::read_profile(cp.at("ratio"), Dim::Ratio, ds.horizon, base_dir);
            ds.compressors.push_back(std::move(comp));
        }
    }

    const detail::Node pr = root.at("profiles");
    auto read_list = [&](const char* key, Dim d, std::vector<std::pair<int, Profile>>& out) {
        const detail::Node l = pr.at(key);
        for (std::size_t i = 0; i < l.size_array(); ++i) {
            const detail::Node e = l.at(i);
            out.emplace_back(e.at("junction").integer(), detail::read_profile(e.at("profile"), d, ds.horizon, base_dir));
        }
    };
    read_list("withdrawals", Dim::Flow, ds.withdrawals);
    read_list("slack_pressure", Dim::Pressure, ds.slack_pressure);

    if (root.has("noise")) {
        const detail::Node n = root.at("noise");
        NoiseSpec s;
        s.level = n.at("level").number();
        if (s.level < 0.0) n.at("level").fail("must be non-negative");
        if (n.has("seed")) {
            const int seed = n.at("seed").integer();
            if (seed < 0) n.at("seed").fail("must be non-negative");
            s.seed = static_cast<std::uint64_t>(seed);
        }
        if (n.has("withdrawals")) s.withdrawals = n.at("withdrawals").boolean();
        if (n.has("pressures")) s.pressures = n.at("pressures").boolean();
        f.noise = s;
    }
    if (root.has("solver")) {
        const detail::Node s = root.at("solver");
        if (s.has("tol")) f.solver.tol = s.at("tol").number();
        if (s.has("max_iter")) f.solver.max_iter = s.at("max_iter").integer();
        if (s.has("mu0")) f.solver.mu0 = s.at("mu0").number();
        if (s.has("polish")) f.solver.polish = s.at("polish").boolean();
        if (!(f.solver.tol > 0.0)) s.at("tol").fail("must be positive");
        if (f.solver.max_iter < 1) s.at("max_iter").fail("must be at least 1");
    }
    f.estimation.solver = f.solver;
    if (root.has("formulation")) {
        const std::string m = root.at("formulation").string();
        if (m == "noiseless") f.estimation.formulation = Formulation::Noiseless;
        else if (m == "state") f.estimation.formulation = Formulation::State;
        else if (m == "joint") f.estimation.formulation = Formulation::Joint;
        else root.at("formulation").fail("must be noiseless | state | joint");
    }
    if (root.has("estimation")) {
        const detail::Node e = root.at("estimation");
        if (e.has("w_d")) f.estimation.w_d = e.at("w_d").number();
        if (e.has("w_rho")) f.estimation.w_rho = e.at("w_rho").number();
        if (e.has("friction_lo")) f.estimation.friction_lo = e.at("friction_lo").number();
        if (e.has("friction_hi")) f.estimation.friction_hi = e.at("friction_hi").number();
        if (e.has("flow_floor")) f.estimation.flow_floor = quantity(e.at("flow_floor"), Dim::Flow);
        if (!(f.estimation.friction_lo > 0.0 && f.estimation.friction_lo < 1.0 && f.estimation.friction_hi > 1.0))
            e.fail("need 0 < friction_lo < 1 < friction_hi");
    }
    if (root.has("measurements")) {
        const detail::Node m = root.at("measurements");
        auto resolve = [&](const detail::Node& n) {
            std::filesystem::path p = n.string();
            if (p.is_relative()) p = base_dir / p;
            if (!std::filesystem::exists(p)) n.fail("file not found: '" + p.string() + "'");
            return p;
        };
        f.measured_withdrawals = resolve(m.at("withdrawals"));
        f.measured_pressures = resolve(m.at("pressures"));
    }
    return f;
}

inline ScenarioFile read_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("scenario", "cannot open scenario file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("scenario", std::string("malformed JSON: ") + e.what());
    }
    return parse_scenario(doc, path.parent_path());
}

/// Serializes in SI units; parse_scenario(to_json(f)) reproduces f exactly.
inline json to_json(const ScenarioFile& f) {
    using detail::si;
    const DimensionalScenario& ds = f.scenario;
    json j;
    j["name"] = ds.name;
    j["constants"] = {{"a", si(ds.a, "m/s")}, {"horizon", si(ds.horizon, "s")}};
    if (ds.ell0) j["constants"]["ell0"] = si(*ds.ell0, "m");
    if (ds.rho0) j["constants"]["rho0"] = si(*ds.rho0, "kg/m3");
    j["grid"] = {{"points", ds.grid_points}, {"delta", si(ds.delta, "m")}};
    json net;
    net["junctions"] = json::array();
    for (const auto& n : ds.nodes)
        net["junctions"].push_back({{"id", n.id}, {"slack", n.slack}, {"p_min", si(n.p_min, "Pa")}, {"p_max", si(n.p_max, "Pa")}});
    net["pipes"] = json::array();
    for (const auto& p : ds.pipes)
        net["pipes"].push_back({{"id", p.id}, {"from", p.from}, {"to", p.to}, {"length", si(p.length, "m")},
                                {"diameter", si(p.diameter, "m")}, {"friction", p.friction}});
    net["compressors"] = json::array();
    for (const auto& c : ds.compressors)
        net["compressors"].push_back({{"pipe", c.pipe}, {"end", c.end == CompressorEnd::From ? "from" : "to"},
                                      {"ratio", detail::write_profile(c.ratio, "1", ds.horizon)}});
    j["network"] = net;
    json pr;
    pr["withdrawals"] = json::array();
    for (const auto& [id, p] : ds.withdrawals)
        pr["withdrawals"].push_back({{"junction", id}, {"profile", detail::write_profile(p, "kg/s", ds.horizon)}});
    pr["slack_pressure"] = json::array();
    for (const auto& [id, p] : ds.slack_pressure)
        pr["slack_pressure"].push_back({{"junction", id}, {"profile", detail::write_profile(p, "Pa", ds.horizon)}});
    j["profiles"] = pr;
    if (f.noise)
        j["noise"] = {{"level", f.noise->level}, {"seed", f.noise->seed}, {"withdrawals", f.noise->withdrawals},
                      {"pressures", f.noise->pressures}};
    j["solver"] = {{"tol", f.solver.tol}, {"max_iter", f.solver.max_iter}, {"mu0", f.solver.mu0}, {"polish", f.solver.polish}};
    const char* form[] = {"noiseless", "state", "joint"};
    j["formulation"] = form[static_cast<int>(f.estimation.formulation)];
    j["estimation"] = {{"w_d", f.estimation.w_d}, {"w_rho", f.estimation.w_rho}, {"friction_lo", f.estimation.friction_lo},
                       {"friction_hi", f.estimation.friction_hi}, {"flow_floor", si(f.estimation.flow_floor, "kg/s")}};
    if (f.measured_withdrawals && f.measured_pressures)
        j["measurements"] = {{"withdrawals", f.measured_withdrawals->string()}, {"pressures", f.measured_pressures->string()}};
    return j;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) detail::fail(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
}

// ---- grid CSV ---------------------------------------------------------------

inline void write_grid_csv(std::ostream& out, const GridTable& t, const std::string& row_header = "id") {
    detail::require(t.values.rows() == static_cast<Eigen::Index>(t.labels.size()) &&
                        t.values.cols() == static_cast<Eigen::Index>(t.times.size()),
                    "grid table shape mismatch");
    out << row_header;
    for (double tm : t.times) out << ',' << detail::fmt17(tm);
    out << '\n';
    for (std::size_t r = 0; r < t.labels.size(); ++r) {
        out << t.labels[r];
        for (Eigen::Index c = 0; c < t.values.cols(); ++c) out << ',' << detail::fmt17(t.values(static_cast<Eigen::Index>(r), c));
        out << '\n';
    }
}

inline void write_grid_csv(const std::filesystem::path& path, const GridTable& t, const std::string& row_header = "id") {
    std::ofstream out(path);
    if (!out) detail::fail(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
    write_grid_csv(out, t, row_header);
}

inline GridTable read_grid_csv(std::istream& in, const std::string& field = "grid") {
    GridTable t;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(field, "empty grid file");
    const auto head = detail::split_csv(line);
    if (head.size() < 2) throw SchemaError(field, "header needs a label column and at least one time");
    for (std::size_t i = 1; i < head.size(); ++i) t.times.push_back(detail::parse_double(head[i], field));
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != head.size())
            throw SchemaError(field, "row '" + (cells.empty() ? std::string() : cells[0]) + "' has " + std::to_string(cells.size()) +
                                         " cells, header has " + std::to_string(head.size()));
        t.labels.push_back(cells[0]);
        rows.emplace_back();
        for (std::size_t i = 1; i < cells.size(); ++i) rows.back().push_back(detail::parse_double(cells[i], field));
    }
    t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.times.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < t.times.size(); ++c) t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return t;
}

inline GridTable read_grid_csv(const std::filesystem::path& path, const std::string& field = "grid") {
    std::ifstream in(path);
    if (!in) throw SchemaError(field, "cannot open '" + path.string() + "'");
    return read_grid_csv(in, field);
}

/// Row labels: junctions "n<id>", auxiliary nodes "p<pipe id>.<k>" (k-th interior
/// node from the pipe's from end), edges "p<pipe id>:<segment>".
inline std::vector<std::string> node_labels(const RefinedNetwork& rn) {
    const auto& net = rn.parent();
    std::vector<std::string> out;
    std::vector<int> seen(net.pipes().size(), 0);
    for (const auto& n : rn.nodes()) {
        if (n.junction >= 0) {
            out.push_back("n" + std::to_string(net.junctions()[static_cast<std::size_t>(n.junction)].id));
        } else {
            const auto p = static_cast<std::size_t>(n.pipe);
            out.push_back("p" + std::to_string(net.pipes()[p].id) + "." + std::to_string(++seen[p]));
        }
    }
    return out;
}

inline std::vector<std::string> edge_labels(const RefinedNetwork& rn) {
    std::vector<std::string> out;
    for (const auto& e : rn.edges())
        out.push_back("p" + std::to_string(rn.parent().pipes()[static_cast<std::size_t>(e.pipe)].id) + ":" + std::to_string(e.segment));
    return out;
}

namespace detail {

inline std::vector<double> seconds(const std::vector<double>& nd, const GasConstants& c) {
    std::vector<double> t(nd.size());
    for (std::size_t i = 0; i < nd.size(); ++i) t[i] = c.dim_time(nd[i]);
    return t;
}

} // namespace detail

/// Pressure (Pa) at every refined node, slack first.
inline GridTable pressure_table(const Trajectory& tr, const RefinedNetwork& rn, const GasConstants& c) {
    GridTable t{node_labels(rn), detail::seconds(tr.times, c), {}};
    t.values.resize(static_cast<Eigen::Index>(rn.num_nodes()), static_cast<Eigen::Index>(tr.size()));
    for (std::size_t k = 0; k < tr.size(); ++k) t.values.col(static_cast<Eigen::Index>(k)) = c.dim_pressure(1.0) * tr.rhoN(k);
    return t;
}

/// Mass flux (kg/(m^2 s)) on every refined edge.
inline GridTable flux_table(const Trajectory& tr, const RefinedNetwork& rn, const GasConstants& c) {
    return {edge_labels(rn), detail::seconds(tr.times, c), c.flux_scale() * tr.Phi};
}

/// Withdrawals (kg/s) at the physical non-slack junctions.
inline GridTable withdrawal_table(const Trajectory& tr, const RefinedNetwork& rn, const GasConstants& c) {
    auto labels = node_labels(rn);
    const auto P = static_cast<Eigen::Index>(rn.num_physical());
    const auto b = static_cast<std::ptrdiff_t>(rn.num_slack());
    return {std::vector<std::string>(labels.begin() + b, labels.begin() + b + P), detail::seconds(tr.times, c),
            c.flux_scale() * tr.d.topRows(P)};
}

/// Measurements from grid CSVs in the layout of withdrawal_table / pressure_table.
/// Rows are matched by label; extra rows are ignored. Times must equal the grid.
inline MeasurementSet read_measurements(const std::filesystem::path& withdrawals, const std::filesystem::path& pressures,
                                        const RefinedNetwork& rn, const Scenario& sc, double w_d = 1.0, double w_rho = 1.0) {
    const GridTable tw = read_grid_csv(withdrawals, "measurements.withdrawals");
    const GridTable tp = read_grid_csv(pressures, "measurements.pressures");
    const auto labels = node_labels(rn);
    const auto P = static_cast<Eigen::Index>(rn.num_physical());
    const std::vector<double> times = detail::seconds(TimeGrid::of(sc).times(), sc.constants);
    const GasConstants& c = sc.constants;
    auto pick = [&](const GridTable& t, const char* field, double factor) {
        if (t.times.size() != times.size()) throw SchemaError(field, "needs one column per grid point (" + std::to_string(times.size()) + ")");
        for (std::size_t k = 0; k < times.size(); ++k)
            if (std::abs(t.times[k] - times[k]) > 1e-6 * c.horizon) throw SchemaError(field, "column times differ from the grid");
        Eigen::MatrixXd out(P, static_cast<Eigen::Index>(times.size()));
        for (Eigen::Index j = 0; j < P; ++j) {
            const std::string& want = labels[rn.num_slack() + static_cast<std::size_t>(j)];
            auto it = std::find(t.labels.begin(), t.labels.end(), want);
            if (it == t.labels.end()) throw SchemaError(field, "no row for junction '" + want + "'");
            out.row(j) = factor * t.values.row(std::distance(t.labels.begin(), it));
        }
        return out;
    };
    MeasurementSet m;
    m.d_tilde = pick(tw, "measurements.withdrawals", 1.0 / c.flux_scale());
    m.rho_tilde = pick(tp, "measurements.pressures", 1.0 / c.dim_pressure(1.0));
    set_relative_weights(m, w_d, w_rho);
    return m;
}

// ---- reports ----------------------------------------------------------------

namespace detail {

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline double num_back(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

} // namespace detail

inline json to_json(const SolveReport& r) {
    return {{"status", to_string(r.status)},
            {"stationarity", r.stationarity},
            {"feasibility", r.feasibility},
            {"complementarity", r.complementarity},
            {"kkt_error", r.kkt_error()},
            {"objective", r.objective},
            {"iterations", r.iterations},
            {"wall_time_s", r.wall_time},
            {"mu", r.mu},
            {"polished", r.polished},
            {"active_bounds", r.active_bounds},
            {"message", r.message}};
}

inline SolveReport solve_report_from_json(const json& j) {
    SolveReport r;
    const std::string s = j.at("status").get<std::string>();
    for (auto st : {SolveStatus::Converged, SolveStatus::IterationLimit, SolveStatus::Infeasible, SolveStatus::NumericalFailure})
        if (s == to_string(st)) r.status = st;
    r.stationarity = j.at("stationarity").get<double>();
    r.feasibility = j.at("feasibility").get<double>();
    r.complementarity = j.at("complementarity").get<double>();
    r.objective = j.at("objective").get<double>();
    r.iterations = j.at("iterations").get<int>();
    r.wall_time = j.at("wall_time_s").get<double>();
    r.mu = j.at("mu").get<double>();
    r.polished = j.at("polished").get<bool>();
    r.active_bounds = j.at("active_bounds").get<int>();
    r.message = j.at("message").get<std::string>();
    return r;
}

/// Percent errors; flux metrics are null when no sample reached the flow floor.
inline json to_json(const ErrorReport& e) {
    using detail::num;
    return {{"e_d_max", num(e.e_d_max)},     {"e_p_max", num(e.e_p_max)},     {"e_phi_max", num(e.e_phi_max)},
            {"e_d_avg", num(e.e_d_avg)},     {"e_p_avg", num(e.e_p_avg)},     {"e_phi_avg", num(e.e_phi_avg)},
            {"phi_samples", e.phi_samples}, {"phi_excluded", e.phi_excluded}};
}

inline ErrorReport error_report_from_json(const json& j) {
    using detail::num_back;
    ErrorReport e;
    e.e_d_max = num_back(j.at("e_d_max"));
    e.e_p_max = num_back(j.at("e_p_max"));
    e.e_phi_max = num_back(j.at("e_phi_max"));
    e.e_d_avg = num_back(j.at("e_d_avg"));
    e.e_p_avg = num_back(j.at("e_p_avg"));
    e.e_phi_avg = num_back(j.at("e_phi_avg"));
    e.phi_samples = j.at("phi_samples").get<std::size_t>();
    e.phi_excluded = j.at("phi_excluded").get<std::size_t>();
    return e;
}

/// pipe id, length (m), nominal friction, estimate.
inline void write_friction_csv(std::ostream& out, const Network& net, const Vector& estimate) {
    out << "pipe,length_m,lambda_nominal,lambda_estimate\n";
    for (std::size_t p = 0; p < net.pipes().size(); ++p) {
        const auto& pipe = net.pipes()[p];
        out << pipe.id << ',' << detail::fmt17(pipe.length) << ',' << detail::fmt17(pipe.friction) << ','
            << detail::fmt17(estimate[static_cast<Eigen::Index>(p)]) << '\n';
    }
}

/// One row per noise level with the six error metrics (percent).
inline void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
    out << "level,e_d_max,e_p_max,e_phi_max,e_d_avg,e_p_avg,e_phi_avg,runs_ok,runs_failed\n";
    for (const auto& c : cells) {
        const auto& m = c.mean;
        out << detail::fmt17(c.level);
        for (double v : {m.e_d_max, m.e_p_max, m.e_phi_max, m.e_d_avg, m.e_p_avg, m.e_phi_avg}) out << ',' << detail::fmt17(v);
        out << ',' << c.runs_ok << ',' << c.runs_failed << '\n';
    }
}

inline void write_bias_csv(std::ostream& out, const Network& net, const BiasReport& b) {
    out << "pipe,weight,mean_lambda,relative_bias,weighted_bias\n";
    for (std::size_t p = 0; p < net.pipes().size(); ++p)
        out << net.pipes()[p].id << ',' << detail::fmt17(b.weight[p]) << ',' << detail::fmt17(b.mean_friction[p]) << ','
            << detail::fmt17(b.relative_bias[p]) << ',' << detail::fmt17(b.weighted_bias[p]) << '\n';
}

} // namespace gasnet
