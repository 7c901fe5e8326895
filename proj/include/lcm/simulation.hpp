#pragma once

#include "lcm/optimizer.hpp"

#include <map>
#include <optional>

namespace lcm {

/// Contaminant model mixed into the sampling distribution:
/// L = (1 - epsilon) * base + epsilon * contaminant.
struct ContaminationSpec {
    ModelSpec spec;
    ParameterVector theta;
    double epsilon = 0.0;
};

struct SimulationPlan {
    ModelSpec spec;
    ParameterVector theta0;
    std::vector<std::int64_t> sample_sizes;
    std::vector<double> family_indices;  ///< power-divergence a values
    int replicates = 1;
    std::uint64_t rng_seed = 1;
    std::optional<ContaminationSpec> contamination;
};

struct CellSummary {
    std::int64_t sample_size = 0;
    double a = 0.0;
    int n_success = 0;
    int n_failed = 0;
    bool valid = false;

    std::vector<double> mse_lambda_j;  ///< per-parameter mse(lambda_j)
    std::vector<double> mse_eta_k;
    double mse_lambda = 0.0;
    double mse_eta = 0.0;
    double mse_theta = 0.0;  ///< (t mse_lambda + u mse_eta)/(t+u)
    double mse_p = 0.0;
    double mse_w = 0.0;
    double mse_pw = 0.0;  ///< (k m mse_p + m mse_w)/(m (k+1))

    double bias_lambda = 0.0;
    double bias_eta = 0.0;
    double bias_theta = 0.0;
    double bias_p = 0.0;
    double bias_w = 0.0;
    double bias_pw = 0.0;

    std::vector<double> objective_values;  ///< per successful replicate
};

struct SimulationSummary {
    std::vector<CellSummary> cells;  ///< one per (N, a), plan order
};

/// Per-replicate estimates in original (not flattened) form.
struct ReplicateEstimate {
    ParameterVector theta;
    Eigen::MatrixXd item_probs;
    Eigen::VectorXd weights;
    double objective = 0.0;
};

/// Multinomial counts of size N from distribution p.
ObservedCounts sample_dataset(const Eigen::VectorXd& p, std::int64_t n,
                              std::mt19937_64& rng);

ObservedCounts sample_dataset(const ModelSpec& spec, const ParameterVector& theta0,
                              std::int64_t n, std::mt19937_64& rng);

Eigen::VectorXd contaminated_distribution(const ModelSpec& base_spec,
                                          const ParameterVector& base_theta,
                                          const ContaminationSpec& contam);

/// mse/bias aggregation for one (N, a) cell from per-replicate estimates.
CellSummary mse_summary(const std::vector<ReplicateEstimate>& estimates,
                        const ModelSpec& spec, const ParameterVector& theta0);

SimulationSummary run_study(const SimulationPlan& plan, const MultistartConfig& config);

/// CSV rendering: header row, one line per (N, a) cell.
std::string summary_to_csv(const SimulationSummary& summary);

}  // namespace lcm
