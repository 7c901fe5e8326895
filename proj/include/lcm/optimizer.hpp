#pragma once

#include "lcm/divergence.hpp"
#include "lcm/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

namespace lcm {

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Search box R plus tolerances for the multistart pipeline.
struct MultistartConfig {
    Eigen::VectorXd bounds_lambda_lo;
    Eigen::VectorXd bounds_lambda_up;
    Eigen::VectorXd bounds_eta_lo;
    Eigen::VectorXd bounds_eta_up;
    int n_initial = 500;
    std::uint64_t rng_seed = 1;
    double hj_initial_step = 0.05;  ///< fraction of box width
    double qn_gradient_tol = 1e-8;
    double root_residual_tol = 1e-9;
    int max_qn_iterations = 400;
    int keep_top = 0;  ///< 0: pure running-gate; >0 unused reserve
    int threads = 1;

    /// Box [-10, 10]^{t+u} unless otherwise stated.
    static MultistartConfig defaults(const ModelSpec& spec,
                                     double lo = -10.0, double up = 10.0);

    Eigen::VectorXd lower() const;
    Eigen::VectorXd upper() const;
};

struct StartTrace {
    Eigen::VectorXd initial;
    Eigen::VectorXd rough_point;
    double initial_value = 0.0;
    double rough_value = 0.0;
    bool gated = false;  ///< forwarded to fine improvement
    double fine_value = 0.0;
    double refined_value = 0.0;
    double gradient_norm = 0.0;
    bool projected = false;  ///< fine improvement hit the box
    int rough_evals = 0;
};

struct FitResult {
    ParameterVector theta_hat;
    double objective_value = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd item_probs;  ///< m x k at theta_hat
    Eigen::VectorXd weights;     ///< length m at theta_hat
    double gradient_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
    int best_start = -1;
    std::int64_t objective_evaluations = 0;
    std::int64_t gradient_evaluations = 0;
    std::vector<StartTrace> trace;
};

/// Deterministic substream for start/replicate index derived from a base seed.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

/// n_initial points uniform in R; point i depends only on (rng_seed, i).
std::vector<Eigen::VectorXd> generate_initial_points(const MultistartConfig& config);

/// One Hooke-Jeeves exploratory sweep over a random permutation of the
/// coordinates, then up to four probes along the displacement vector at
/// double and half spacing, outward and inward. At most 2(t+u)+4 objective
/// evaluations. Returns the improved point and the evaluation count.
struct RoughResult {
    Eigen::VectorXd point;
    double value = 0.0;
    int evaluations = 0;
};
RoughResult rough_improve(const Eigen::VectorXd& point, const Objective& objective,
                          const MultistartConfig& config, std::mt19937_64& rng);

/// Limited-memory quasi-Newton (L-BFGS) descent with backtracking line
/// search, iterates projected onto the box R.
struct FineResult {
    Eigen::VectorXd point;
    double value = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;
    bool projected = false;
    int iterations = 0;
};
FineResult fine_improve(const Eigen::VectorXd& point, const Objective& objective,
                        const Gradient& gradient, const MultistartConfig& config);

/// Powell-style hybrid (dogleg trust region) root solve of gradient(theta)=0
/// with a forward-difference Jacobian. The result is kept only when the
/// residual meets root_residual_tol and the objective did not increase.
struct RefineResult {
    Eigen::VectorXd point;
    double value = 0.0;
    double residual_norm = 0.0;
    bool accepted = false;
};
RefineResult stationary_refine(const Eigen::VectorXd& point, const Objective& objective,
                               const Gradient& gradient, const MultistartConfig& config);

FitResult multistart_fit(const ModelSpec& spec, const ObservedCounts& counts,
                         const PhiFunction& phi, const MultistartConfig& config);

FitResult multistart_fit(const ModelSpec& spec, const ObservedCounts& counts,
                         const PowerDivergenceFamily& family,
                         const MultistartConfig& config);

}  // namespace lcm
