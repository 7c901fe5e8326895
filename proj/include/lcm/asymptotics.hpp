#pragma once

#include "lcm/model.hpp"

#include <optional>

namespace lcm {

struct BirchDiagnostics {
    double min_cell_probability = 0.0;
    int jacobian_rank = 0;
    double condition_number = 0.0;  ///< sigma_max / sigma_min of J
    bool full_rank = false;
};

/// Asymptotic covariance report at an estimate theta. param_cov and se are
/// present only when the information matrix has full rank.
struct AsymptoticsReport {
    Eigen::MatrixXd jacobian;       ///< 2^k x (t+u)
    Eigen::MatrixXd information;    ///< A^T A with A = D_p^{-1/2} J
    BirchDiagnostics birch;
    std::optional<Eigen::MatrixXd> param_cov;     ///< (A^T A)^{-1} / N
    std::optional<Eigen::VectorXd> se;            ///< sqrt(diag(param_cov))
    std::optional<Eigen::MatrixXd> manifest_cov;  ///< J (A^T A)^{-1} J^T / N
    std::optional<Eigen::MatrixXd> param_cov_unscaled;  ///< (A^T A)^{-1}
    std::int64_t n = 0;
};

struct RankDeficiencyError : std::runtime_error {
    BirchDiagnostics diagnostics;
    explicit RankDeficiencyError(BirchDiagnostics diag)
        : std::runtime_error("information matrix is rank deficient"),
          diagnostics(diag) {}
};

BirchDiagnostics birch_diagnostics(const ModelSpec& spec, const ParameterVector& theta);

/// Fisher information A^T A; requires all manifest cells strictly positive.
Eigen::MatrixXd information_matrix(const ModelSpec& spec, const ParameterVector& theta);

/// (A^T A)^{-1} / N. Throws RankDeficiencyError when J is rank deficient.
Eigen::MatrixXd parameter_covariance(const ModelSpec& spec, const ParameterVector& theta,
                                     std::int64_t n);

/// J (A^T A)^{-1} J^T / N, the delta-method covariance of p(theta_hat).
Eigen::MatrixXd manifest_covariance(const ModelSpec& spec, const ParameterVector& theta,
                                    std::int64_t n);

/// Full report; covariance blocks are omitted instead of throwing when the
/// information matrix is singular.
AsymptoticsReport asymptotics_report(const ModelSpec& spec, const ParameterVector& theta,
                                     std::int64_t n);

}  // namespace lcm
