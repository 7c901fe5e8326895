#pragma once

#include "lcm/io.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace testutil {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string data_path(const std::string& name) {
    return std::string(LCM_DATA_DIR) + "/" + name;
}

inline lcm::ModelSpec coleman_spec() {
    return lcm::io::parse_model_spec(read_file(data_path("coleman.json")));
}

inline lcm::ObservedCounts coleman_counts() {
    return lcm::io::parse_counts(read_file(data_path("coleman.csv")), 4);
}

// Two classes, three items, one lambda per class row, eta weights one class
// against a fixed baseline. Identified, no softmax gauge direction.
inline lcm::ModelSpec two_class_spec() {
    lcm::ModelSpec spec;
    spec.m = 2;
    spec.k = 3;
    spec.t = 2;
    spec.u = 1;
    Eigen::MatrixXd q1 = Eigen::MatrixXd::Zero(2, 3);
    q1.row(0).setOnes();
    Eigen::MatrixXd q2 = Eigen::MatrixXd::Zero(2, 3);
    q2.row(1).setOnes();
    spec.Q = {q1, q2};
    spec.C = Eigen::MatrixXd::Zero(2, 3);
    spec.V = Eigen::MatrixXd::Zero(2, 1);
    spec.V(0, 0) = 1.0;
    spec.d = Eigen::VectorXd::Zero(2);
    return spec;
}

inline lcm::ParameterVector two_class_theta0() {
    Eigen::VectorXd lam(2), eta(1);
    lam << -1.0, 1.0;
    eta << 0.5;
    return {lam, eta};
}

inline lcm::ModelSpec random_spec(std::mt19937_64& rng, int max_m = 4, int max_k = 5) {
    std::uniform_int_distribution<int> md(1, max_m), kd(1, max_k);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::bernoulli_distribution pick(0.4);
    lcm::ModelSpec spec;
    spec.m = md(rng);
    spec.k = kd(rng);
    spec.t = std::uniform_int_distribution<int>(1, 3)(rng);
    spec.u = spec.m > 1 ? std::uniform_int_distribution<int>(1, spec.m - 1)(rng) : 0;
    for (int a = 0; a < spec.t; ++a) {
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(spec.m, spec.k);
        for (int j = 0; j < spec.m; ++j)
            for (int i = 0; i < spec.k; ++i)
                if (pick(rng)) q(j, i) = coef(rng) < 0 ? -1.0 : 1.0;
        spec.Q.push_back(q);
    }
    spec.C = Eigen::MatrixXd::Zero(spec.m, spec.k);
    for (int j = 0; j < spec.m; ++j)
        for (int i = 0; i < spec.k; ++i) spec.C(j, i) = 0.3 * coef(rng);
    spec.V = Eigen::MatrixXd::Zero(spec.m, spec.u);
    for (int j = 0; j < spec.m; ++j)
        for (int b = 0; b < spec.u; ++b)
            if (pick(rng)) spec.V(j, b) = 1.0;
    spec.d = Eigen::VectorXd::Zero(spec.m);
    for (int j = 0; j < spec.m; ++j) spec.d[j] = 0.2 * coef(rng);
    return spec;
}

inline lcm::ParameterVector random_theta(const lcm::ModelSpec& spec,
                                         std::mt19937_64& rng, double scale = 3.0) {
    std::uniform_real_distribution<double> unif(-scale, scale);
    Eigen::VectorXd lam(spec.t), eta(spec.u);
    for (int i = 0; i < spec.t; ++i) lam[i] = unif(rng);
    for (int i = 0; i < spec.u; ++i) eta[i] = unif(rng);
    return {lam, eta};
}

}  // namespace testutil
