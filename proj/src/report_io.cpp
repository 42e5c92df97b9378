#include "impulse/report_io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace impulse {

using nlohmann::json;

namespace {

std::string format_double(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void emit(std::string& out, const json& j, int indent, int depth) {
    const auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case json::value_t::number_float: out += format_double(j.get<double>()); return;
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += json(k).dump();
                out += indent < 0 ? ":" : ": ";
                emit(out, v, indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                emit(out, v, indent, depth + 1);
            }
            newline(depth);
            out += ']';
            return;
        }
        default: out += j.dump(); return;
    }
}

json witness_json(const std::vector<std::size_t>& w) { return w; }

}  // namespace

std::string dump_json(const json& j, int indent) {
    std::string out;
    emit(out, j, indent, 0);
    return out;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    os << dump_json(j) << '\n';
}

json to_json(const SolveReport& r) {
    return {{"iterations", r.iterations},
            {"final_residual", r.final_residual},
            {"sup_update", r.sup_update},
            {"converged", r.converged}};
}

json to_json(const QVIReport& r) {
    return {{"outer_iterations", r.outer_iterations},
            {"sup_differences", r.sup_differences},
            {"inner_iterations", r.inner_iterations},
            {"final_residual", r.final_residual},
            {"monotone", r.monotone},
            {"converged", r.converged},
            {"inner_failure", r.inner_failure},
            {"self_consistency", r.self_consistency}};
}

json to_json(const QVICheck& c) {
    return {{"equation_violation", c.equation_violation},
            {"constraint_violation", c.constraint_violation},
            {"complementarity_violation", c.complementarity_violation},
            {"boundary_violation", c.boundary_violation},
            {"worst_equation", c.worst_equation},
            {"worst_constraint", c.worst_constraint},
            {"worst_complementarity", c.worst_complementarity},
            {"worst_boundary", c.worst_boundary},
            {"equation_ok", c.equation_ok},
            {"constraint_ok", c.constraint_ok},
            {"complementarity_ok", c.complementarity_ok},
            {"boundary_ok", c.boundary_ok}};
}

json to_json(const ProbeReport& r) {
    json metrics = json::object();
    for (const auto& [name, m] : r.metrics) metrics[name] = {{"value", m.value}, {"witness", witness_json(m.witness)}};
    return {{"probe", r.probe}, {"metrics", metrics}, {"samples", r.samples.size()}, {"skipped", r.skipped}};
}

json to_json(const SeminormResult& r) {
    return {{"value", r.value}, {"witness", {r.witness_a, r.witness_b}}, {"pairs", r.pairs}};
}

json to_json(const Separation& s) {
    return {{"value", s.value},
            {"empty_contact", s.empty_contact},
            {"contact_nodes", s.contact_nodes},
            {"witness", {s.witness_contact, s.witness_argmin}}};
}

json to_json(const DecayReport& r) {
    json pts = json::array();
    for (const DecayPoint& p : r.points) {
        pts.push_back({{"epsilon", p.epsilon},
                       {"resolved", p.resolved},
                       {"seminorm", p.seminorm},
                       {"iterations", p.iterations},
                       {"converged", p.converged},
                       {"max_abs_beta", p.max_abs_beta},
                       {"min_second_quotient", p.min_second_quotient}});
    }
    return {{"alpha", r.alpha}, {"points", pts}, {"slope", r.slope}, {"intercept", r.intercept}, {"r2", r.r2}};
}

void write_decay_csv(const std::filesystem::path& path, const DecayReport& r) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    os << "epsilon,resolved,seminorm,iterations,converged,max_abs_beta,min_second_quotient\n";
    for (const DecayPoint& p : r.points) {
        os << format_double(p.epsilon) << ',' << (p.resolved ? 1 : 0) << ',' << format_double(p.seminorm) << ','
           << p.iterations << ',' << (p.converged ? 1 : 0) << ',' << format_double(p.max_abs_beta) << ','
           << format_double(p.min_second_quotient) << '\n';
    }
}

void write_samples_csv(const std::filesystem::path& path, const ProbeReport& r) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    os << "a,b,scale,value\n";
    for (const ProbeSample& s : r.samples)
        os << s.a << ',' << s.b << ',' << format_double(s.scale) << ',' << format_double(s.value) << '\n';
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256: digest initialisation failed");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

}  // namespace impulse
