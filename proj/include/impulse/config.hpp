#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "impulse/elliptic_ops.hpp"
#include "impulse/grid.hpp"
#include "impulse/penalty.hpp"

namespace impulse {

/// Configuration or input error. `key` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what);
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class Mode { Obstacle, QVI, Penalized, Sweep };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct CsvRef {
    std::string path;
    bool operator==(const CsvRef&) const = default;
};
struct FunctionRef {
    std::string name;
    bool operator==(const FunctionRef&) const = default;
};

/// A grid function given as a constant, a CSV file, or a named analytic function.
using FieldDef = std::variant<double, CsvRef, FunctionRef>;

/// Names accepted by FunctionRef.
std::vector<std::string> function_names();

struct GridBlock {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<int> m;
    bool operator==(const GridBlock&) const = default;
};

struct OperatorBlock {
    std::string kind = "Laplace";
    double lambda = 1.0;
    double Lambda = 1.0;
    std::vector<SymMat> family;
    bool operator==(const OperatorBlock&) const = default;
};

/// Unset entries fall back to the preset, then to built-in defaults.
struct ProblemBlock {
    std::optional<std::string> preset;
    std::optional<Mode> mode;
    std::optional<ObstacleSide> side;
    std::optional<FieldDef> obstacle;
    std::optional<FieldDef> cost;
    std::optional<FieldDef> f;
    std::optional<FieldDef> boundary;
    bool operator==(const ProblemBlock&) const = default;
};

struct SolverBlock {
    std::optional<double> tol;
    long max_iter = 1'000'000;
    std::optional<double> relaxation;
    std::optional<double> outer_tol;
    int max_outer = 200;
    bool operator==(const SolverBlock&) const = default;
};

struct PenaltyBlock {
    std::optional<PenaltyKind> kind;
    std::optional<double> epsilon;
    std::optional<double> cap_N;
    std::vector<double> eps_list;
    bool operator==(const PenaltyBlock&) const = default;
};

struct ProbeBlock {
    std::vector<std::string> probes;
    double modulus_exponent = 1.0;
    double modulus_constant = 1.0;
    std::optional<double> alpha;
    std::size_t sample_budget = 200000;
    std::uint64_t seed = 0;
    std::vector<int> steps{1, 2, 4};
    std::optional<double> contact_tol;
    bool operator==(const ProbeBlock&) const = default;
};

struct OutputBlock {
    std::string directory = "out";
    /// "csv" adds the plot-ready CSV mirrors (decay.csv, probe_<name>.csv).
    std::vector<std::string> formats{"csv"};
    bool operator==(const OutputBlock&) const = default;
};

struct ExperimentConfig {
    GridBlock grid;
    std::optional<OperatorBlock> op;
    ProblemBlock problem;
    SolverBlock solver;
    PenaltyBlock penalty;
    ProbeBlock probe;
    OutputBlock output;
    bool operator==(const ExperimentConfig&) const = default;
};

/// Probe names accepted in probe.probes.
std::vector<std::string> probe_names();

/// Parses and validates a config document. Throws ConfigError naming the key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON form; parse_config(config_to_json(c)) == c.
nlohmann::json config_to_json(const ExperimentConfig& c);

struct Preset {
    std::string name;
    Mode mode = Mode::Obstacle;
    ObstacleSide side = ObstacleSide::Lower;
    std::optional<OperatorBlock> op;
    std::optional<FieldDef> obstacle;
    std::optional<FieldDef> cost;
    FieldDef f = 0.0;
    FieldDef boundary = 0.0;
    std::optional<PenaltyKind> penalty_kind;
    std::vector<double> eps_list;
    std::optional<double> alpha;
};

std::vector<std::string> preset_names();
/// Throws std::invalid_argument listing the available names.
Preset preset(const std::string& name);

GridPtr build_grid(const GridBlock& g);

/// Problem data with presets and defaults applied and every field evaluated on the grid.
struct ProblemData {
    GridPtr grid;
    Mode mode = Mode::Obstacle;
    ObstacleSide side = ObstacleSide::Lower;
    OperatorSpec spec;
    std::optional<GridFunction> obstacle;
    std::optional<GridFunction> cost;
    GridFunction f;
    GridFunction boundary;
    std::optional<PenaltyKind> penalty_kind;
    std::vector<double> eps_list;
    double alpha = 0.5;
    /// CSV files read, for the manifest.
    std::vector<std::filesystem::path> inputs;
};

/// CSV paths are resolved against base_dir when relative.
GridFunction evaluate_field(const FieldDef& def, const GridPtr& grid, const std::filesystem::path& base_dir,
                            const std::string& key);
ProblemData resolve_problem(const ExperimentConfig& c, const std::filesystem::path& base_dir);

}  // namespace impulse
