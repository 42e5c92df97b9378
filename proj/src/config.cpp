#include "impulse/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace impulse {

using nlohmann::json;

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out;
}

std::string path_of(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

/// Object view that rejects unknown keys and reports dotted paths.
class Obj {
public:
    Obj(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
        for (const auto& [k, v] : j_.items())
            if (!allowed.count(k)) throw ConfigError(path_of(path_, k), "unknown key");
    }

    bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }
    const json& at(const std::string& k) const {
        if (!has(k)) throw ConfigError(path_of(path_, k), "missing key");
        return j_.at(k);
    }
    std::string key(const std::string& k) const { return path_of(path_, k); }

    double number(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_number()) throw ConfigError(key(k), "expected a number");
        return v.get<double>();
    }
    template <typename I>
    I integer(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_number_integer()) throw ConfigError(key(k), "expected an integer");
        if (v.is_number_unsigned()) return static_cast<I>(v.get<std::uint64_t>());
        return static_cast<I>(v.get<std::int64_t>());
    }
    std::string string(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_string()) throw ConfigError(key(k), "expected a string");
        return v.get<std::string>();
    }
    std::vector<double> numbers(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_array()) throw ConfigError(key(k), "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(key(k), "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    std::vector<int> integers(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_array()) throw ConfigError(key(k), "expected an array of integers");
        std::vector<int> out;
        for (const auto& e : v) {
            if (!e.is_number_integer()) throw ConfigError(key(k), "expected an array of integers");
            out.push_back(e.get<int>());
        }
        return out;
    }
    std::vector<std::string> strings(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_array()) throw ConfigError(key(k), "expected an array of strings");
        std::vector<std::string> out;
        for (const auto& e : v) {
            if (!e.is_string()) throw ConfigError(key(k), "expected an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

template <typename F>
auto converted(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}

FieldDef parse_field(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_object()) {
        if (v.size() == 1 && v.contains("csv") && v.at("csv").is_string()) return CsvRef{v.at("csv").get<std::string>()};
        if (v.size() == 1 && v.contains("function") && v.at("function").is_string()) {
            const std::string name = v.at("function").get<std::string>();
            const auto names = function_names();
            if (std::find(names.begin(), names.end(), name) == names.end())
                throw ConfigError(key, "unknown function '" + name + "' (available: " + join(names) + ")");
            return FunctionRef{name};
        }
    }
    throw ConfigError(key, "expected a number, {\"csv\": path} or {\"function\": name}");
}

json field_to_json(const FieldDef& d) {
    if (const double* x = std::get_if<double>(&d)) return *x;
    if (const CsvRef* c = std::get_if<CsvRef>(&d)) return json{{"csv", c->path}};
    return json{{"function", std::get<FunctionRef>(d).name}};
}

SymMat parse_matrix(const json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 3)
        throw ConfigError(key, "expected a matrix as [xx, xy, yy]");
    for (const auto& e : v)
        if (!e.is_number()) throw ConfigError(key, "expected a matrix as [xx, xy, yy]");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

OperatorBlock parse_operator(const json& j) {
    const Obj o(j, "operator", {"kind", "lambda", "Lambda", "family"});
    OperatorBlock b;
    b.kind = to_string(converted(o.key("kind"), [&] { return operator_kind_from_string(o.string("kind")); }));
    if (o.has("lambda")) b.lambda = o.number("lambda");
    if (o.has("Lambda")) b.Lambda = o.number("Lambda");
    if (o.has("family")) {
        const json& fam = o.at("family");
        if (!fam.is_array()) throw ConfigError(o.key("family"), "expected an array of matrices");
        for (std::size_t i = 0; i < fam.size(); ++i)
            b.family.push_back(parse_matrix(fam[i], o.key("family") + "[" + std::to_string(i) + "]"));
    }
    return b;
}

}  // namespace

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Obstacle: return "obstacle";
        case Mode::QVI: return "qvi";
        case Mode::Penalized: return "penalized";
        case Mode::Sweep: return "sweep";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    const std::string l = lower(s);
    if (l == "obstacle") return Mode::Obstacle;
    if (l == "qvi") return Mode::QVI;
    if (l == "penalized") return Mode::Penalized;
    if (l == "sweep") return Mode::Sweep;
    throw std::invalid_argument("unknown mode '" + s + "' (expected obstacle, qvi, penalized or sweep)");
}

std::vector<std::string> function_names() { return {"dome", "zero", "one"}; }

std::vector<std::string> probe_names() {
    return {"contact_set", "growth_constant", "contact_oscillation", "semiconcavity_modulus", "separation",
            "holder_seminorm"};
}

ExperimentConfig parse_config(const json& j) {
    const Obj root(j, "", {"grid", "operator", "problem", "solver", "penalty", "probe", "output"});
    ExperimentConfig c;

    {
        const Obj g(root.at("grid"), "grid", {"lo", "hi", "m"});
        c.grid.lo = g.numbers("lo");
        c.grid.hi = g.numbers("hi");
        c.grid.m = g.integers("m");
        converted("grid", [&] { return build_grid(c.grid); });
    }

    if (root.has("operator")) c.op = parse_operator(root.at("operator"));

    if (root.has("problem")) {
        const Obj p(root.at("problem"), "problem", {"preset", "mode", "side", "obstacle", "cost", "f", "boundary"});
        if (p.has("preset")) {
            c.problem.preset = p.string("preset");
            converted(p.key("preset"), [&] { return preset(*c.problem.preset); });
        }
        if (p.has("mode")) c.problem.mode = converted(p.key("mode"), [&] { return mode_from_string(p.string("mode")); });
        if (p.has("side"))
            c.problem.side = converted(p.key("side"), [&] { return obstacle_side_from_string(p.string("side")); });
        for (auto [name, slot] : {std::pair{"obstacle", &c.problem.obstacle}, std::pair{"cost", &c.problem.cost},
                                  std::pair{"f", &c.problem.f}, std::pair{"boundary", &c.problem.boundary}}) {
            if (p.has(name)) *slot = parse_field(p.at(name), p.key(name));
        }
    }

    if (root.has("solver")) {
        const Obj s(root.at("solver"), "solver", {"tol", "max_iter", "relaxation", "outer_tol", "max_outer"});
        if (s.has("tol")) c.solver.tol = s.number("tol");
        if (s.has("max_iter")) c.solver.max_iter = s.integer<long>("max_iter");
        if (s.has("relaxation")) c.solver.relaxation = s.number("relaxation");
        if (s.has("outer_tol")) c.solver.outer_tol = s.number("outer_tol");
        if (s.has("max_outer")) c.solver.max_outer = s.integer<int>("max_outer");
        if (c.solver.tol && !(*c.solver.tol > 0.0)) throw ConfigError(s.key("tol"), "must be positive");
        if (c.solver.outer_tol && !(*c.solver.outer_tol > 0.0)) throw ConfigError(s.key("outer_tol"), "must be positive");
        if (c.solver.max_iter < 1) throw ConfigError(s.key("max_iter"), "must be >= 1");
        if (c.solver.max_outer < 1) throw ConfigError(s.key("max_outer"), "must be >= 1");
        if (c.solver.relaxation && !(*c.solver.relaxation > 0.0 && *c.solver.relaxation < 2.0))
            throw ConfigError(s.key("relaxation"), "must lie in (0, 2)");
    }

    if (root.has("penalty")) {
        const Obj p(root.at("penalty"), "penalty", {"kind", "epsilon", "cap_N", "eps_list"});
        if (p.has("kind")) c.penalty.kind = converted(p.key("kind"), [&] { return penalty_kind_from_string(p.string("kind")); });
        if (p.has("epsilon")) c.penalty.epsilon = p.number("epsilon");
        if (p.has("cap_N")) c.penalty.cap_N = p.number("cap_N");
        if (p.has("eps_list")) c.penalty.eps_list = p.numbers("eps_list");
        if (c.penalty.epsilon && !(*c.penalty.epsilon > 0.0 && *c.penalty.epsilon < 1.0))
            throw ConfigError(p.key("epsilon"), "must lie in (0, 1)");
        if (c.penalty.cap_N && !(*c.penalty.cap_N > 0.0)) throw ConfigError(p.key("cap_N"), "must be positive");
    }

    if (root.has("probe")) {
        const Obj p(root.at("probe"), "probe",
                    {"probes", "modulus_exponent", "modulus_constant", "alpha", "sample_budget", "seed", "steps",
                     "contact_tol"});
        if (p.has("probes")) {
            c.probe.probes = p.strings("probes");
            const auto names = probe_names();
            for (const auto& n : c.probe.probes)
                if (std::find(names.begin(), names.end(), n) == names.end())
                    throw ConfigError(p.key("probes"), "unknown probe '" + n + "' (available: " + join(names) + ")");
        }
        if (p.has("modulus_exponent")) c.probe.modulus_exponent = p.number("modulus_exponent");
        if (p.has("modulus_constant")) c.probe.modulus_constant = p.number("modulus_constant");
        if (p.has("alpha")) c.probe.alpha = p.number("alpha");
        if (p.has("sample_budget")) c.probe.sample_budget = p.integer<std::size_t>("sample_budget");
        if (p.has("seed")) c.probe.seed = p.integer<std::uint64_t>("seed");
        if (p.has("steps")) c.probe.steps = p.integers("steps");
        if (p.has("contact_tol")) c.probe.contact_tol = p.number("contact_tol");
        converted("probe", [&] {
            ModulusFamily{c.probe.modulus_constant, c.probe.modulus_exponent}.validate();
            return 0;
        });
        if (c.probe.alpha && !(*c.probe.alpha > 0.0 && *c.probe.alpha < 1.0))
            throw ConfigError(p.key("alpha"), "must lie in (0, 1)");
        if (c.probe.sample_budget < 1000) throw ConfigError(p.key("sample_budget"), "must be >= 1000");
        for (int k : c.probe.steps)
            if (k < 1) throw ConfigError(p.key("steps"), "steps must be >= 1");
    }

    if (root.has("output")) {
        const Obj o(root.at("output"), "output", {"directory", "formats"});
        if (o.has("directory")) c.output.directory = o.string("directory");
        if (o.has("formats")) {
            c.output.formats = o.strings("formats");
            for (const auto& f : c.output.formats)
                if (f != "csv") throw ConfigError(o.key("formats"), "unknown format '" + f + "' (available: csv)");
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "invalid JSON in '" + path.string() + "': " + e.what());
    }
    return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["grid"] = {{"lo", c.grid.lo}, {"hi", c.grid.hi}, {"m", c.grid.m}};
    if (c.op) {
        json fam = json::array();
        for (const SymMat& m : c.op->family) fam.push_back({m.xx, m.xy, m.yy});
        j["operator"] = {{"kind", c.op->kind}, {"lambda", c.op->lambda}, {"Lambda", c.op->Lambda}, {"family", fam}};
    }

    json p = json::object();
    if (c.problem.preset) p["preset"] = *c.problem.preset;
    if (c.problem.mode) p["mode"] = to_string(*c.problem.mode);
    if (c.problem.side) p["side"] = to_string(*c.problem.side);
    if (c.problem.obstacle) p["obstacle"] = field_to_json(*c.problem.obstacle);
    if (c.problem.cost) p["cost"] = field_to_json(*c.problem.cost);
    if (c.problem.f) p["f"] = field_to_json(*c.problem.f);
    if (c.problem.boundary) p["boundary"] = field_to_json(*c.problem.boundary);
    j["problem"] = p;

    json s = {{"max_iter", c.solver.max_iter}, {"max_outer", c.solver.max_outer}};
    if (c.solver.tol) s["tol"] = *c.solver.tol;
    if (c.solver.relaxation) s["relaxation"] = *c.solver.relaxation;
    if (c.solver.outer_tol) s["outer_tol"] = *c.solver.outer_tol;
    j["solver"] = s;

    json pen = {{"eps_list", c.penalty.eps_list}};
    if (c.penalty.kind) pen["kind"] = to_string(*c.penalty.kind);
    if (c.penalty.epsilon) pen["epsilon"] = *c.penalty.epsilon;
    if (c.penalty.cap_N) pen["cap_N"] = *c.penalty.cap_N;
    j["penalty"] = pen;

    json pr = {{"probes", c.probe.probes},
               {"modulus_exponent", c.probe.modulus_exponent},
               {"modulus_constant", c.probe.modulus_constant},
               {"sample_budget", c.probe.sample_budget},
               {"seed", c.probe.seed},
               {"steps", c.probe.steps}};
    if (c.probe.alpha) pr["alpha"] = *c.probe.alpha;
    if (c.probe.contact_tol) pr["contact_tol"] = *c.probe.contact_tol;
    j["probe"] = pr;

    j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
    return j;
}

std::vector<std::string> preset_names() { return {"classical", "corollary1", "oracle1d"}; }

Preset preset(const std::string& name) {
    Preset p;
    p.name = name;
    if (name == "classical") {
        p.mode = Mode::QVI;
        p.side = ObstacleSide::Upper;
        p.op = OperatorBlock{};
        p.cost = 1.0;
        p.f = 1.0;
        p.boundary = 0.0;
    } else if (name == "oracle1d") {
        p.mode = Mode::Obstacle;
        p.side = ObstacleSide::Lower;
        p.op = OperatorBlock{};
        p.obstacle = FunctionRef{"dome"};
    } else if (name == "corollary1") {
        p.mode = Mode::Sweep;
        p.side = ObstacleSide::Lower;
        p.op = OperatorBlock{};
        p.obstacle = FunctionRef{"dome"};
        p.penalty_kind = PenaltyKind::PiecewiseLinear;
        p.eps_list = {0.2, 0.1, 0.05, 0.025};
        p.alpha = 0.5;
    } else {
        throw std::invalid_argument("unknown preset '" + name + "' (available: " + join(preset_names()) + ")");
    }
    return p;
}

GridPtr build_grid(const GridBlock& g) {
    if (g.lo.size() != g.hi.size() || g.lo.size() != g.m.size())
        throw std::invalid_argument("lo, hi and m must have the same length");
    return Grid::build(g.lo, g.hi, g.m);
}

GridFunction evaluate_field(const FieldDef& def, const GridPtr& grid, const std::filesystem::path& base_dir,
                            const std::string& key) {
    if (const double* x = std::get_if<double>(&def)) return GridFunction(grid, *x);
    if (const CsvRef* c = std::get_if<CsvRef>(&def)) {
        std::filesystem::path path(c->path);
        if (path.is_relative()) path = base_dir / path;
        if (!std::filesystem::exists(path)) throw ConfigError(key, "CSV file '" + path.string() + "' does not exist");
        try {
            return read_csv(path.string(), grid);
        } catch (const std::exception& e) {
            throw ConfigError(key, e.what());
        }
    }
    const std::string& name = std::get<FunctionRef>(def).name;
    if (name == "dome") {
        return GridFunction::sample(grid, [d = grid->dim()](Point p) {
            return 0.5 - p[0] * p[0] - (d == 2 ? p[1] * p[1] : 0.0);
        });
    }
    if (name == "zero") return GridFunction(grid, 0.0);
    if (name == "one") return GridFunction(grid, 1.0);
    throw ConfigError(key, "unknown function '" + name + "' (available: " + join(function_names()) + ")");
}

ProblemData resolve_problem(const ExperimentConfig& c, const std::filesystem::path& base_dir) {
    const std::optional<Preset> pre = c.problem.preset ? std::optional<Preset>(preset(*c.problem.preset)) : std::nullopt;
    ProblemData d;
    d.grid = converted("grid", [&] { return build_grid(c.grid); });

    if (c.problem.mode) d.mode = *c.problem.mode;
    else if (pre) d.mode = pre->mode;
    else throw ConfigError("problem.mode", "missing key");

    if (c.problem.side) d.side = *c.problem.side;
    else if (pre) d.side = pre->side;
    else d.side = d.mode == Mode::QVI ? ObstacleSide::Upper : ObstacleSide::Lower;

    const OperatorBlock ob = c.op ? *c.op : (pre && pre->op ? *pre->op : OperatorBlock{});
    d.spec = converted("operator", [&] {
        OperatorSpec s{operator_kind_from_string(ob.kind), ob.lambda, ob.Lambda, ob.family};
        s.validate(d.grid->dim());
        return s;
    });

    const auto field = [&](const std::optional<FieldDef>& own, const std::optional<FieldDef>& fallback,
                           const std::string& key) -> std::optional<GridFunction> {
        const std::optional<FieldDef>& def = own ? own : fallback;
        if (!def) return std::nullopt;
        if (const CsvRef* csv = std::get_if<CsvRef>(&*def)) {
            std::filesystem::path path(csv->path);
            d.inputs.push_back(path.is_relative() ? base_dir / path : path);
        }
        return evaluate_field(*def, d.grid, base_dir, key);
    };
    d.obstacle = field(c.problem.obstacle, pre ? pre->obstacle : std::nullopt, "problem.obstacle");
    d.cost = field(c.problem.cost, pre ? pre->cost : std::nullopt, "problem.cost");
    d.f = *field(c.problem.f, pre ? std::optional<FieldDef>(pre->f) : std::optional<FieldDef>(0.0), "problem.f");
    d.boundary = *field(c.problem.boundary, pre ? std::optional<FieldDef>(pre->boundary) : std::optional<FieldDef>(0.0),
                        "problem.boundary");

    d.penalty_kind = c.penalty.kind ? c.penalty.kind : (pre ? pre->penalty_kind : std::nullopt);
    d.eps_list = !c.penalty.eps_list.empty() ? c.penalty.eps_list : (pre ? pre->eps_list : std::vector<double>{});
    d.alpha = c.probe.alpha.value_or(pre && pre->alpha ? *pre->alpha : 0.5);

    switch (d.mode) {
        case Mode::Obstacle:
            if (!d.obstacle) throw ConfigError("problem.obstacle", "missing key");
            break;
        case Mode::QVI:
            if (!d.cost) throw ConfigError("problem.cost", "missing key");
            break;
        case Mode::Penalized:
            if (!d.obstacle) throw ConfigError("problem.obstacle", "missing key");
            if (!d.penalty_kind) throw ConfigError("penalty.kind", "missing key");
            if (!c.penalty.epsilon) throw ConfigError("penalty.epsilon", "missing key");
            break;
        case Mode::Sweep:
            if (!d.obstacle) throw ConfigError("problem.obstacle", "missing key");
            if (!d.penalty_kind) throw ConfigError("penalty.kind", "missing key");
            if (d.eps_list.empty()) throw ConfigError("penalty.eps_list", "missing key");
            if (d.f.max_abs() != 0.0 || d.boundary.max_abs() != 0.0)
                throw ConfigError("problem", "sweep mode requires zero f and zero boundary data");
            break;
    }
    return d;
}

}  // namespace impulse
