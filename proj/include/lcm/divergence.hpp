#pragma once

#include "lcm/model.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace lcm {

/// Convex generator of a phi-divergence: phi(1) = 0, phi convex on (0, inf).
/// The divergence evaluator applies the 0*phi(0/0) = 0 and
/// 0*phi(p/0) = p * limit_slope conventions.
struct PhiFunction {
    std::function<double(double)> f;    ///< phi(x), x > 0
    std::function<double(double)> df;   ///< phi'(x)
    std::function<double(double)> d2f;  ///< phi''(x)
    double limit_slope = 0.0;           ///< lim_{x->inf} phi(x)/x, may be +inf
    std::string name;
};

/// Cressie-Read power-divergence family index. a = 0 is Kullback-Leibler
/// (maximum likelihood); a = -1 the reversed direction; a = 1 Pearson-type.
struct PowerDivergenceFamily {
    double a = 0.0;
};

/// Pattern counts N_nu over the 2^k cells.
struct ObservedCounts {
    std::vector<std::int64_t> counts;
    std::int64_t total() const;
    Eigen::VectorXd empirical() const;  ///< N_nu / N
};

/// phi_a(x) with exact limit branches at a = 0 and a = -1; indices within
/// 1e-9 of those values dispatch to the limit branch.
double phi_power(double a, double x);
double phi_power_deriv(double a, double x);
double phi_power_second(double a, double x);

PhiFunction make_power_phi(double a);
PhiFunction make_phi(const PowerDivergenceFamily& fam);

/// psi(x) = phi(x) - phi'(1)(x - 1); same divergence values, psi'(1) = 0.
PhiFunction phi_normalize(const PhiFunction& phi);

/// Generic evaluator of sum_nu p_nu phi(p_hat_nu / p_nu).
double divergence(const PhiFunction& phi, const Eigen::VectorXd& p_hat,
                  const Eigen::VectorXd& p);

/// Closed-form power divergence D_a(p_hat, p); equals
/// divergence(make_power_phi(a), p_hat, p).
double power_divergence(double a, const Eigen::VectorXd& p_hat,
                        const Eigen::VectorXd& p);

/// Gradient of theta -> divergence(phi, p_hat, manifest(theta)).
/// Component j is sum_nu [phi(r_nu) - r_nu phi'(r_nu)] dp_nu/ds_j with
/// r_nu = p_hat_nu / p_nu.
Eigen::VectorXd objective_gradient(const ModelSpec& spec, const PhiFunction& phi,
                                   const Eigen::VectorXd& p_hat,
                                   const ParameterVector& theta);

/// sum_nu N_nu log p_nu(theta); -inf when a cell with positive count has
/// zero model probability.
double log_likelihood(const ObservedCounts& counts, const ModelSpec& spec,
                      const ParameterVector& theta);

}  // namespace lcm
