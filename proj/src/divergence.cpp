#include "lcm/divergence.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lcm {

namespace {

constexpr double kBranchTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool near(double a, double b) { return std::abs(a - b) < kBranchTol; }

}  // namespace

std::int64_t ObservedCounts::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

Eigen::VectorXd ObservedCounts::empirical() const {
    const double n = static_cast<double>(total());
    if (n < 1) throw std::invalid_argument("counts must total at least 1");
    Eigen::VectorXd p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        p[i] = static_cast<double>(counts[i]) / n;
    return p;
}

double phi_power(double a, double x) {
    if (x <= 0.0) throw std::domain_error("phi_power requires x > 0");
    if (near(a, 0.0)) return x * std::log(x) - x + 1.0;
    if (near(a, -1.0)) return -std::log(x) + x - 1.0;
    return (std::pow(x, a + 1.0) - x - a * (x - 1.0)) / (a * (a + 1.0));
}

double phi_power_deriv(double a, double x) {
    if (x <= 0.0) throw std::domain_error("phi_power_deriv requires x > 0");
    if (near(a, 0.0)) return std::log(x);
    if (near(a, -1.0)) return 1.0 - 1.0 / x;
    return (std::pow(x, a) - 1.0) / a;
}

double phi_power_second(double a, double x) {
    if (x <= 0.0) throw std::domain_error("phi_power_second requires x > 0");
    return std::pow(x, a - 1.0);
}

PhiFunction make_power_phi(double a) {
    PhiFunction phi;
    phi.f = [a](double x) { return phi_power(a, x); };
    phi.df = [a](double x) { return phi_power_deriv(a, x); };
    phi.d2f = [a](double x) { return phi_power_second(a, x); };
    // phi_a(x)/x -> infinity for a >= 0, 1 for a = -1, -1/a otherwise.
    if (a > -kBranchTol)
        phi.limit_slope = kInf;
    else if (near(a, -1.0))
        phi.limit_slope = 1.0;
    else
        phi.limit_slope = -1.0 / a;
    phi.name = "power(a=" + std::to_string(a) + ")";
    return phi;
}

PhiFunction make_phi(const PowerDivergenceFamily& fam) { return make_power_phi(fam.a); }

PhiFunction phi_normalize(const PhiFunction& phi) {
    const double slope1 = phi.df(1.0);
    PhiFunction psi = phi;
    psi.f = [f = phi.f, slope1](double x) { return f(x) - slope1 * (x - 1.0); };
    psi.df = [df = phi.df, slope1](double x) { return df(x) - slope1; };
    if (std::isfinite(phi.limit_slope)) psi.limit_slope = phi.limit_slope - slope1;
    psi.name = phi.name + "|normalized";
    return psi;
}

double divergence(const PhiFunction& phi, const Eigen::VectorXd& p_hat,
                  const Eigen::VectorXd& p) {
    if (p_hat.size() != p.size())
        throw std::invalid_argument("distribution lengths differ");
    double total = 0.0;
    for (Eigen::Index nu = 0; nu < p.size(); ++nu) {
        const double ph = p_hat[nu];
        const double pm = p[nu];
        if (pm > 0.0) {
            if (ph == 0.0) {
                // p * phi(0/p): take the x -> 0+ limit of phi.
                const double lim = phi.f(std::numeric_limits<double>::min());
                total += pm * lim;
            } else {
                total += pm * phi.f(ph / pm);
            }
        } else if (ph > 0.0) {
            total += ph * phi.limit_slope;  // 0 * phi(p/0) convention
        }
        // ph == 0, pm == 0 contributes 0.
    }
    return total;
}

double power_divergence(double a, const Eigen::VectorXd& p_hat,
                        const Eigen::VectorXd& p) {
    if (p_hat.size() != p.size())
        throw std::invalid_argument("distribution lengths differ");
    if (near(a, 0.0)) {
        double total = 0.0;
        for (Eigen::Index nu = 0; nu < p.size(); ++nu) {
            if (p_hat[nu] == 0.0) continue;
            if (p[nu] == 0.0) return kInf;
            total += p_hat[nu] * std::log(p_hat[nu] / p[nu]);
        }
        return total;
    }
    if (near(a, -1.0)) {
        double total = 0.0;
        for (Eigen::Index nu = 0; nu < p.size(); ++nu) {
            if (p[nu] == 0.0) continue;
            if (p_hat[nu] == 0.0) return kInf;
            total += p[nu] * std::log(p[nu] / p_hat[nu]);
        }
        return total;
    }
    // The -1 is subtracted once from the full sum (Cressie-Read form).
    double sum = 0.0;
    for (Eigen::Index nu = 0; nu < p.size(); ++nu) {
        const double ph = p_hat[nu];
        const double pm = p[nu];
        if (ph == 0.0) continue;  // 0^{a+1} terms vanish for a > -1
        if (pm == 0.0) {
            if (a > 0.0) return kInf;
            continue;  // -1 < a < 0: p_hat^{a+1} / p^a -> 0
        }
        sum += std::pow(ph, a + 1.0) / std::pow(pm, a);
    }
    return (sum - 1.0) / (a * (a + 1.0));
}

Eigen::VectorXd objective_gradient(const ModelSpec& spec, const PhiFunction& phi,
                                   const Eigen::VectorXd& p_hat,
                                   const ParameterVector& theta) {
    const Eigen::VectorXd p = manifest_distribution(spec, theta);
    if (p_hat.size() != p.size())
        throw std::invalid_argument("empirical distribution has wrong length");
    const Eigen::MatrixXd J = manifest_jacobian(spec, theta);
    Eigen::VectorXd weights(p.size());
    for (Eigen::Index nu = 0; nu < p.size(); ++nu) {
        if (p[nu] <= 0.0) {
            if (p_hat[nu] > 0.0)
                throw std::domain_error(
                    "model cell with zero probability carries empirical mass");
            weights[nu] = phi.f(std::numeric_limits<double>::min());
            continue;
        }
        const double r = p_hat[nu] / p[nu];
        if (r == 0.0) {
            weights[nu] = phi.f(std::numeric_limits<double>::min());
        } else {
            weights[nu] = phi.f(r) - r * phi.df(r);
        }
    }
    return J.transpose() * weights;
}

double log_likelihood(const ObservedCounts& counts, const ModelSpec& spec,
                      const ParameterVector& theta) {
    const Eigen::VectorXd p = manifest_distribution(spec, theta);
    if (static_cast<Eigen::Index>(counts.counts.size()) != p.size())
        throw std::invalid_argument("counts length does not match the model");
    if (counts.total() < 1) throw std::invalid_argument("counts must total at least 1");
    double ll = 0.0;
    for (Eigen::Index nu = 0; nu < p.size(); ++nu) {
        const auto n = counts.counts[nu];
        if (n == 0) continue;
        if (p[nu] <= 0.0) return -kInf;
        ll += static_cast<double>(n) * std::log(p[nu]);
    }
    return ll;
}

}  // namespace lcm
