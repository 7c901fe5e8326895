#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace lcm {

/// Constraint structure of a linear-logistic latent class model:
/// item probabilities p_ji = logistic(sum_r q_jir * lambda_r + c_ji),
/// class weights w_j = softmax_j(sum_r v_jr * eta_r + d_j).
struct ModelSpec {
    int m = 0;  ///< latent classes
    int k = 0;  ///< binary items
    int t = 0;  ///< free lambda parameters
    int u = 0;  ///< free eta parameters
    std::vector<Eigen::MatrixXd> Q;  ///< t matrices, each m x k
    Eigen::MatrixXd C;               ///< m x k offsets
    Eigen::MatrixXd V;               ///< m x u design
    Eigen::VectorXd d;               ///< length-m offsets

    int n_params() const { return t + u; }
    std::size_t n_cells() const { return std::size_t{1} << k; }
};

/// Free parameters theta = (lambda, eta). Flat order: lambda first, then eta.
struct ParameterVector {
    Eigen::VectorXd lambda;
    Eigen::VectorXd eta;

    ParameterVector() = default;
    ParameterVector(Eigen::VectorXd lam, Eigen::VectorXd e)
        : lambda(std::move(lam)), eta(std::move(e)) {}

    Eigen::VectorXd flat() const;
    static ParameterVector from_flat(const Eigen::VectorXd& s, int t, int u);
};

struct ValidationIssue {
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

/// Maximum item count; keeps the 2^k cell vector enumerable.
inline constexpr int kMaxItems = 24;

ValidationReport validate_spec(const ModelSpec& spec);

/// Throws std::invalid_argument when validate_spec fails or theta has the
/// wrong dimensions.
void require_valid(const ModelSpec& spec, const ParameterVector& theta);

/// Response pattern index convention: nu - 1 is the big-endian encoding of
/// (y_1 .. y_k), item 1 most significant. nu runs over 1 .. 2^k.
std::vector<int> pattern_of(std::size_t nu, int k);
std::size_t index_of(const std::vector<int>& bits);

struct ItemProbabilityMatrix {
    Eigen::MatrixXd x;  ///< m x k linear predictors
    Eigen::MatrixXd p;  ///< m x k probabilities, logistic(x)
};

struct ClassWeightVector {
    Eigen::VectorXd z;  ///< length-m linear predictors
    Eigen::VectorXd w;  ///< length-m weights, softmax(z)
};

/// Overflow-safe logistic.
double logistic(double x);

ItemProbabilityMatrix item_probabilities(const ModelSpec& spec,
                                         const ParameterVector& theta);

ClassWeightVector class_weights(const ModelSpec& spec,
                                const ParameterVector& theta);

/// Pr(y | class j) under conditional independence, j in 1..m.
double conditional_pattern_prob(const ItemProbabilityMatrix& ip, int j,
                                const std::vector<int>& y);

/// The 2^k manifest probabilities; cell nu holds sum_j w_j Pr(y_nu | C_j).
Eigen::VectorXd manifest_distribution(const ModelSpec& spec,
                                      const ParameterVector& theta);

/// 2^k x (t+u) Jacobian of the manifest distribution in theta, analytic form.
Eigen::MatrixXd manifest_jacobian(const ModelSpec& spec,
                                  const ParameterVector& theta);

/// Direction c (in eta space) with V*c proportional to the all-ones vector,
/// i.e. a softmax gauge freedom: eta + delta*c leaves the model unchanged.
/// Returns a unit vector, or an empty vector when no such direction exists.
Eigen::VectorXd softmax_gauge_direction(const ModelSpec& spec);

/// Shifts eta along the gauge direction (when one exists) so that the last
/// component touched by it becomes 0. Identity for identified models.
ParameterVector canonicalize_gauge(const ModelSpec& spec,
                                   const ParameterVector& theta);

}  // namespace lcm
