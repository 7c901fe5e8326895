#include "lcm/asymptotics.hpp"

#include <cmath>
#include <stdexcept>

namespace lcm {

namespace {

BirchDiagnostics diagnostics_from(const ModelSpec& spec, const Eigen::MatrixXd& J,
                                  double min_cell) {
    BirchDiagnostics diag;
    diag.min_cell_probability = min_cell;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto& sv = svd.singularValues();
    const double tol = static_cast<double>(std::max<std::size_t>(spec.n_cells(),
                                                                 spec.n_params())) *
                       std::numeric_limits<double>::epsilon() * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    diag.jacobian_rank = rank;
    diag.condition_number =
        sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                : std::numeric_limits<double>::infinity();
    diag.full_rank = rank == spec.n_params();
    return diag;
}

Eigen::MatrixXd scaled_jacobian(const ModelSpec& spec, const ParameterVector& theta,
                                Eigen::MatrixXd* J_out, double* min_cell) {
    const Eigen::VectorXd p = manifest_distribution(spec, theta);
    *min_cell = p.minCoeff();
    if (*min_cell <= 0.0)
        throw std::domain_error("manifest distribution has a zero cell");
    Eigen::MatrixXd J = manifest_jacobian(spec, theta);
    Eigen::MatrixXd A = p.array().sqrt().inverse().matrix().asDiagonal() * J;
    if (J_out) *J_out = std::move(J);
    return A;
}

}  // namespace

BirchDiagnostics birch_diagnostics(const ModelSpec& spec, const ParameterVector& theta) {
    const Eigen::VectorXd p = manifest_distribution(spec, theta);
    const Eigen::MatrixXd J = manifest_jacobian(spec, theta);
    return diagnostics_from(spec, J, p.minCoeff());
}

Eigen::MatrixXd information_matrix(const ModelSpec& spec, const ParameterVector& theta) {
    double min_cell = 0.0;
    const Eigen::MatrixXd A = scaled_jacobian(spec, theta, nullptr, &min_cell);
    Eigen::MatrixXd info = A.transpose() * A;
    info = 0.5 * (info + info.transpose());  // clean symmetry
    return info;
}

namespace {

Eigen::MatrixXd inverse_information(const ModelSpec& spec, const ParameterVector& theta,
                                    Eigen::MatrixXd* J_out) {
    double min_cell = 0.0;
    const Eigen::MatrixXd A = scaled_jacobian(spec, theta, J_out, &min_cell);
    const BirchDiagnostics diag =
        diagnostics_from(spec, J_out ? *J_out : Eigen::MatrixXd(A), min_cell);
    if (!diag.full_rank) throw RankDeficiencyError(diag);
    const Eigen::MatrixXd info = A.transpose() * A;
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) throw RankDeficiencyError(diag);
    return llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
}

}  // namespace

Eigen::MatrixXd parameter_covariance(const ModelSpec& spec, const ParameterVector& theta,
                                     std::int64_t n) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    Eigen::MatrixXd J;
    Eigen::MatrixXd cov = inverse_information(spec, theta, &J) / static_cast<double>(n);
    return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd manifest_covariance(const ModelSpec& spec, const ParameterVector& theta,
                                    std::int64_t n) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    Eigen::MatrixXd J;
    const Eigen::MatrixXd inv_info = inverse_information(spec, theta, &J);
    Eigen::MatrixXd cov = J * inv_info * J.transpose() / static_cast<double>(n);
    return 0.5 * (cov + cov.transpose());
}

AsymptoticsReport asymptotics_report(const ModelSpec& spec, const ParameterVector& theta,
                                     std::int64_t n) {
    AsymptoticsReport rep;
    rep.n = n;
    rep.jacobian = manifest_jacobian(spec, theta);
    rep.birch = birch_diagnostics(spec, theta);
    rep.information = information_matrix(spec, theta);
    if (!rep.birch.full_rank || rep.birch.min_cell_probability <= 0.0) return rep;
    try {
        Eigen::MatrixXd J;
        const Eigen::MatrixXd inv_info = inverse_information(spec, theta, &J);
        rep.param_cov_unscaled = inv_info;
        rep.param_cov = inv_info / static_cast<double>(n);
        rep.se = rep.param_cov->diagonal().array().sqrt().matrix();
        rep.manifest_cov = J * inv_info * J.transpose() / static_cast<double>(n);
    } catch (const RankDeficiencyError&) {
        // leave the covariance blocks empty; diagnostics already say why
    }
    return rep;
}

}  // namespace lcm
