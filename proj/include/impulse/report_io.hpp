#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "json.hpp"

#include "impulse/obstacle_solver.hpp"
#include "impulse/penalty.hpp"
#include "impulse/probe.hpp"
#include "impulse/qvi_solver.hpp"

namespace impulse {

/// JSON text with every floating-point number at 17 significant digits and
/// non-finite numbers as null. Object keys keep nlohmann's sorted order.
std::string dump_json(const nlohmann::json& j, int indent = 2);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const QVIReport& r);
nlohmann::json to_json(const QVICheck& c);
nlohmann::json to_json(const ProbeReport& r);
nlohmann::json to_json(const SeminormResult& r);
nlohmann::json to_json(const Separation& s);
/// {alpha, points: [{epsilon, seminorm, iterations, ...}], slope, r2}
nlohmann::json to_json(const DecayReport& r);

void write_decay_csv(const std::filesystem::path& path, const DecayReport& r);
/// Columns a,b,scale,value.
void write_samples_csv(const std::filesystem::path& path, const ProbeReport& r);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace impulse
