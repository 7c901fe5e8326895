#pragma once

#include "lcm/asymptotics.hpp"
#include "lcm/optimizer.hpp"
#include "lcm/simulation.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace lcm::io {

/// Strict JSON model document: keys m, k, t, u, Q, C, V, d; unknown keys
/// rejected; the parsed spec must pass validate_spec.
ModelSpec parse_model_spec(const std::string& text);
std::string serialize_model_spec(const ModelSpec& spec);

/// CSV counts document: `pattern,count` lines, pattern is k characters of
/// 0/1 (item 1 leftmost). Missing patterns are zero; duplicates are errors.
ObservedCounts parse_counts(const std::string& text, int k);
std::string serialize_counts(const ObservedCounts& counts, int k);

/// Theta document: {"lambda": [...], "eta": [...]}.
ParameterVector parse_theta(const std::string& text, const ModelSpec& spec);
std::string serialize_theta(const ParameterVector& theta);

/// Accepts plain decimals and rational literals such as "2/3" or "-1/2".
double parse_real(const std::string& text);

/// FNV-1a 64-bit content hash, lowercase hex.
std::string content_hash(const std::string& bytes);

struct ResultContext {
    std::string model_hash;
    std::string data_hash;
    double a = 0.0;
    std::string phi_name;
    std::uint64_t seed = 0;
    bool gauge_fixed = false;
};

nlohmann::json result_document(const ModelSpec& spec, const FitResult& fit,
                               const AsymptoticsReport& asym, const ResultContext& ctx);

/// Simulation plan document; see data/ fixtures for the layout.
struct ParsedPlan {
    SimulationPlan plan;
    MultistartConfig config;
};
ParsedPlan parse_plan(const std::string& text);

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lcm::io
