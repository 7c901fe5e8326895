#include "lcm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace lcm::io {

using nlohmann::json;

namespace {

Eigen::MatrixXd parse_matrix(const json& j, int rows, int cols, const std::string& name) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ParseError(name + " must be a " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " matrix");
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ParseError(name + " row " + std::to_string(r + 1) + " must have " +
                             std::to_string(cols) + " entries");
        for (int c = 0; c < cols; ++c) {
            if (!row[c].is_number())
                throw ParseError(name + " entries must be numeric");
            m(r, c) = row[c].get<double>();
        }
    }
    return m;
}

Eigen::VectorXd parse_vector(const json& j, int len, const std::string& name) {
    if (!j.is_array() || static_cast<int>(j.size()) != len)
        throw ParseError(name + " must have length " + std::to_string(len));
    Eigen::VectorXd v(len);
    for (int i = 0; i < len; ++i) {
        if (!j[i].is_number()) throw ParseError(name + " entries must be numeric");
        v[i] = j[i].get<double>();
    }
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

int require_int(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw ParseError(std::string("missing or non-integer key \"") + key + "\"");
    return j[key].get<int>();
}

}  // namespace

ModelSpec parse_model_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("model document must be a JSON object");
    static const std::vector<std::string> known = {"m", "k", "t", "u", "Q", "C", "V", "d"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ParseError("unknown key \"" + it.key() + "\" in model document");
    }
    ModelSpec spec;
    spec.m = require_int(j, "m");
    spec.k = require_int(j, "k");
    spec.t = require_int(j, "t");
    spec.u = require_int(j, "u");
    if (spec.m < 1 || spec.k < 1 || spec.t < 0 || spec.u < 0)
        throw ParseError("dimensions m, k must be >= 1 and t, u >= 0");

    if (!j.contains("Q") || !j["Q"].is_array() ||
        static_cast<int>(j["Q"].size()) != spec.t)
        throw ParseError("Q must be an array of exactly t matrices");
    for (int r = 0; r < spec.t; ++r)
        spec.Q.push_back(parse_matrix(j["Q"][r], spec.m, spec.k,
                                      "Q[" + std::to_string(r + 1) + "]"));
    spec.C = j.contains("C") ? parse_matrix(j["C"], spec.m, spec.k, "C")
                             : Eigen::MatrixXd::Zero(spec.m, spec.k);
    spec.V = j.contains("V") ? parse_matrix(j["V"], spec.m, spec.u, "V")
                             : Eigen::MatrixXd::Zero(spec.m, spec.u);
    if (!j.contains("V") && spec.u > 0) throw ParseError("V is required when u > 0");
    spec.d = j.contains("d") ? parse_vector(j["d"], spec.m, "d")
                             : Eigen::VectorXd::Zero(spec.m);

    const ValidationReport rep = validate_spec(spec);
    if (!rep.ok()) throw ParseError("model document: " + rep.issues.front().message);
    return spec;
}

std::string serialize_model_spec(const ModelSpec& spec) {
    json j;
    j["m"] = spec.m;
    j["k"] = spec.k;
    j["t"] = spec.t;
    j["u"] = spec.u;
    j["Q"] = json::array();
    for (const auto& q : spec.Q) j["Q"].push_back(matrix_to_json(q));
    j["C"] = matrix_to_json(spec.C);
    j["V"] = matrix_to_json(spec.V);
    j["d"] = vector_to_json(spec.d);
    return j.dump(2) + "\n";
}

ObservedCounts parse_counts(const std::string& text, int k) {
    if (k < 1 || k > kMaxItems) throw ParseError("item count k out of range");
    ObservedCounts counts;
    counts.counts.assign(std::size_t{1} << k, 0);
    std::vector<bool> seen(counts.counts.size(), false);
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("counts line " + std::to_string(lineno) +
                             ": expected `pattern,count`");
        const std::string pattern = line.substr(0, comma);
        const std::string count_str = line.substr(comma + 1);
        if (static_cast<int>(pattern.size()) != k)
            throw ParseError("counts line " + std::to_string(lineno) +
                             ": pattern must have exactly " + std::to_string(k) +
                             " characters");
        std::vector<int> bits(k);
        for (int i = 0; i < k; ++i) {
            if (pattern[i] != '0' && pattern[i] != '1')
                throw ParseError("counts line " + std::to_string(lineno) +
                                 ": pattern characters must be 0/1");
            bits[i] = pattern[i] - '0';
        }
        std::int64_t value = 0;
        const auto res =
            std::from_chars(count_str.data(), count_str.data() + count_str.size(), value);
        if (res.ec != std::errc{} || res.ptr != count_str.data() + count_str.size() ||
            value < 0)
            throw ParseError("counts line " + std::to_string(lineno) +
                             ": count must be a nonnegative integer");
        const std::size_t nu = index_of(bits);
        if (seen[nu - 1])
            throw ParseError("counts line " + std::to_string(lineno) +
                             ": duplicate pattern " + pattern);
        seen[nu - 1] = true;
        counts.counts[nu - 1] = value;
    }
    if (counts.total() < 1) throw ParseError("counts document: total count must be >= 1");
    return counts;
}

std::string serialize_counts(const ObservedCounts& counts, int k) {
    std::ostringstream os;
    for (std::size_t nu = 1; nu <= counts.counts.size(); ++nu) {
        const auto bits = pattern_of(nu, k);
        for (int b : bits) os << b;
        os << ',' << counts.counts[nu - 1] << '\n';
    }
    return os.str();
}

ParameterVector parse_theta(const std::string& text, const ModelSpec& spec) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("theta document: ") + e.what());
    }
    if (!j.contains("lambda") || !j.contains("eta"))
        throw ParseError("theta document must contain \"lambda\" and \"eta\"");
    return ParameterVector(parse_vector(j["lambda"], spec.t, "lambda"),
                           parse_vector(j["eta"], spec.u, "eta"));
}

std::string serialize_theta(const ParameterVector& theta) {
    json j;
    j["lambda"] = vector_to_json(theta.lambda);
    j["eta"] = vector_to_json(theta.eta);
    return j.dump(2) + "\n";
}

double parse_real(const std::string& text) {
    try {
        const auto slash = text.find('/');
        if (slash != std::string::npos) {
            std::size_t un = 0, ud = 0;
            const std::string ns = text.substr(0, slash);
            const std::string ds = text.substr(slash + 1);
            const double num = std::stod(ns, &un);
            const double den = std::stod(ds, &ud);
            if (un != ns.size() || ud != ds.size())
                throw ParseError("malformed rational literal: " + text);
            if (den == 0.0) throw ParseError("rational literal with zero denominator");
            return num / den;
        }
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw ParseError("malformed real literal: " + text);
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("malformed real literal: " + text);
    }
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

json result_document(const ModelSpec& spec, const FitResult& fit,
                     const AsymptoticsReport& asym, const ResultContext& ctx) {
    json j;
    j["tool"] = "lcmdiv";
    j["version"] = "0.1.0";
    j["inputs"] = {{"model_hash", ctx.model_hash}, {"data_hash", ctx.data_hash}};
    j["family"] = {{"a", ctx.a}, {"phi", ctx.phi_name}};
    j["seed"] = ctx.seed;
    j["gauge_fixed"] = ctx.gauge_fixed;
    j["theta"] = {{"lambda", vector_to_json(fit.theta_hat.lambda)},
                  {"eta", vector_to_json(fit.theta_hat.eta)}};
    j["item_probabilities"] = matrix_to_json(fit.item_probs);
    j["class_weights"] = vector_to_json(fit.weights);
    j["objective"] = fit.objective_value;
    j["gradient_norm"] = fit.gradient_norm;
    j["converged"] = fit.converged;

    int n_gated = 0;
    for (const auto& tr : fit.trace)
        if (tr.gated) ++n_gated;
    j["optimizer"] = {{"starts", fit.trace.size()},
                      {"gated", n_gated},
                      {"best_start", fit.best_start},
                      {"objective_evaluations", fit.objective_evaluations},
                      {"gradient_evaluations", fit.gradient_evaluations}};

    json a;
    a["min_cell_probability"] = asym.birch.min_cell_probability;
    a["jacobian_rank"] = asym.birch.jacobian_rank;
    a["condition_number"] = asym.birch.condition_number;
    a["full_rank"] = asym.birch.full_rank;
    a["n"] = asym.n;
    if (asym.se) {
        a["se"] = vector_to_json(*asym.se);
        a["param_cov"] = matrix_to_json(*asym.param_cov);
        a["param_cov_unscaled"] = matrix_to_json(*asym.param_cov_unscaled);
    } else {
        a["rank_deficient"] = true;
    }
    j["asymptotics"] = std::move(a);
    j["spec_echo"] = {{"m", spec.m}, {"k", spec.k}, {"t", spec.t}, {"u", spec.u}};
    return j;
}

ParsedPlan parse_plan(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("plan document: ") + e.what());
    }
    ParsedPlan out;
    if (!j.contains("model")) throw ParseError("plan document requires \"model\"");
    out.plan.spec = parse_model_spec(j["model"].dump());
    if (!j.contains("theta0")) throw ParseError("plan document requires \"theta0\"");
    out.plan.theta0 = parse_theta(j["theta0"].dump(), out.plan.spec);
    if (!j.contains("N") || !j["N"].is_array())
        throw ParseError("plan document requires an \"N\" array");
    for (const auto& v : j["N"]) out.plan.sample_sizes.push_back(v.get<std::int64_t>());
    if (!j.contains("a") || !j["a"].is_array())
        throw ParseError("plan document requires an \"a\" array");
    for (const auto& v : j["a"]) {
        if (v.is_string())
            out.plan.family_indices.push_back(parse_real(v.get<std::string>()));
        else
            out.plan.family_indices.push_back(v.get<double>());
    }
    out.plan.replicates = j.value("replicates", 1);
    out.plan.rng_seed = j.value("seed", std::uint64_t{1});
    if (j.contains("contamination")) {
        const json& cj = j["contamination"];
        ContaminationSpec contam;
        contam.spec = parse_model_spec(cj.at("model").dump());
        contam.theta = parse_theta(cj.at("theta").dump(), contam.spec);
        contam.epsilon = cj.at("epsilon").get<double>();
        out.plan.contamination = std::move(contam);
    }

    out.config = MultistartConfig::defaults(out.plan.spec);
    out.config.n_initial = j.value("starts", 100);
    out.config.threads = j.value("threads", 1);
    if (j.contains("bounds")) {
        const double lo = j["bounds"].at(0).get<double>();
        const double up = j["bounds"].at(1).get<double>();
        out.config = MultistartConfig::defaults(out.plan.spec, lo, up);
        out.config.n_initial = j.value("starts", 100);
        out.config.threads = j.value("threads", 1);
    }
    return out;
}

}  // namespace lcm::io
