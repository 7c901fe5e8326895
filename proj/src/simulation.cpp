#include "lcm/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lcm {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t replicate_key(std::uint64_t seed, std::int64_t n, double a, int l) {
    std::uint64_t abits;
    static_assert(sizeof(abits) == sizeof(a));
    std::memcpy(&abits, &a, sizeof(abits));
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ static_cast<std::uint64_t>(n));
    h = mix64(h ^ abits);
    h = mix64(h ^ static_cast<std::uint64_t>(l));
    return h;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

ObservedCounts sample_dataset(const Eigen::VectorXd& p, std::int64_t n,
                              std::mt19937_64& rng) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    Eigen::VectorXd cum(p.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        acc += p[i];
        cum[i] = acc;
    }
    ObservedCounts counts;
    counts.counts.assign(p.size(), 0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::int64_t s = 0; s < n; ++s) {
        const double uv = unif(rng) * acc;  // acc absorbs rounding in the cumsum
        const auto it = std::lower_bound(cum.data(), cum.data() + cum.size(), uv);
        auto idx = static_cast<std::size_t>(it - cum.data());
        if (idx >= counts.counts.size()) idx = counts.counts.size() - 1;
        ++counts.counts[idx];
    }
    return counts;
}

ObservedCounts sample_dataset(const ModelSpec& spec, const ParameterVector& theta0,
                              std::int64_t n, std::mt19937_64& rng) {
    return sample_dataset(manifest_distribution(spec, theta0), n, rng);
}

Eigen::VectorXd contaminated_distribution(const ModelSpec& base_spec,
                                          const ParameterVector& base_theta,
                                          const ContaminationSpec& contam) {
    if (contam.spec.k != base_spec.k)
        throw std::invalid_argument("contaminant model must share the item count k");
    if (contam.epsilon < 0.0 || contam.epsilon > 1.0)
        throw std::invalid_argument("epsilon must lie in [0, 1]");
    const Eigen::VectorXd base = manifest_distribution(base_spec, base_theta);
    const Eigen::VectorXd mix = manifest_distribution(contam.spec, contam.theta);
    return (1.0 - contam.epsilon) * base + contam.epsilon * mix;
}

CellSummary mse_summary(const std::vector<ReplicateEstimate>& estimates,
                        const ModelSpec& spec, const ParameterVector& theta0) {
    if (estimates.empty()) throw std::invalid_argument("no successful replicates");
    CellSummary cell;
    cell.n_success = static_cast<int>(estimates.size());
    cell.valid = true;
    const double n = static_cast<double>(estimates.size());
    const int t = spec.t, u = spec.u, m = spec.m, k = spec.k;

    const Eigen::MatrixXd p0 = item_probabilities(spec, theta0).p;
    const Eigen::VectorXd w0 = class_weights(spec, theta0).w;

    cell.mse_lambda_j.assign(t, 0.0);
    cell.mse_eta_k.assign(u, 0.0);
    Eigen::VectorXd mean_lambda = Eigen::VectorXd::Zero(t);
    Eigen::VectorXd mean_eta = Eigen::VectorXd::Zero(u);
    Eigen::MatrixXd mean_p = Eigen::MatrixXd::Zero(m, k);
    Eigen::VectorXd mean_w = Eigen::VectorXd::Zero(m);
    double sse_p = 0.0, sse_w = 0.0;

    for (const auto& est : estimates) {
        for (int j = 0; j < t; ++j) {
            const double dv = est.theta.lambda[j] - theta0.lambda[j];
            cell.mse_lambda_j[j] += dv * dv / n;
        }
        for (int j = 0; j < u; ++j) {
            const double dv = est.theta.eta[j] - theta0.eta[j];
            cell.mse_eta_k[j] += dv * dv / n;
        }
        mean_lambda += est.theta.lambda / n;
        mean_eta += est.theta.eta / n;
        mean_p += est.item_probs / n;
        mean_w += est.weights / n;
        sse_p += (est.item_probs - p0).squaredNorm();
        sse_w += (est.weights - w0).squaredNorm();
        cell.objective_values.push_back(est.objective);
    }

    const auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    cell.mse_lambda = mean_of(cell.mse_lambda_j);
    cell.mse_eta = mean_of(cell.mse_eta_k);
    cell.mse_theta = (t * cell.mse_lambda + u * cell.mse_eta) / (t + u);
    cell.mse_p = sse_p / (n * m * k);
    cell.mse_w = sse_w / (n * m);
    cell.mse_pw = (k * m * cell.mse_p + m * cell.mse_w) / (m * (k + 1));

    // Bias analogues: squared deviation of the replicate mean from truth,
    // aggregated with the same weights as the mse.
    cell.bias_lambda = t > 0 ? (mean_lambda - theta0.lambda).squaredNorm() / t : 0.0;
    cell.bias_eta = u > 0 ? (mean_eta - theta0.eta).squaredNorm() / u : 0.0;
    cell.bias_theta = (t * cell.bias_lambda + u * cell.bias_eta) / (t + u);
    cell.bias_p = (mean_p - p0).squaredNorm() / (m * k);
    cell.bias_w = (mean_w - w0).squaredNorm() / m;
    cell.bias_pw = (k * m * cell.bias_p + m * cell.bias_w) / (m * (k + 1));
    return cell;
}

SimulationSummary run_study(const SimulationPlan& plan, const MultistartConfig& config) {
    if (plan.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    for (auto n : plan.sample_sizes)
        if (n < 1) throw std::invalid_argument("sample sizes must be >= 1");
    const ValidationReport rep = validate_spec(plan.spec);
    if (!rep.ok())
        throw std::invalid_argument("invalid plan spec: " + rep.issues.front().message);

    Eigen::VectorXd sampling_dist;
    if (plan.contamination) {
        sampling_dist =
            contaminated_distribution(plan.spec, plan.theta0, *plan.contamination);
    } else {
        sampling_dist = manifest_distribution(plan.spec, plan.theta0);
    }

    SimulationSummary summary;
    for (std::int64_t n : plan.sample_sizes) {
        for (double a : plan.family_indices) {
            std::vector<std::optional<ReplicateEstimate>> results(plan.replicates);
            parallel_for(plan.replicates, config.threads, [&](int l) {
                std::mt19937_64 rng(replicate_key(plan.rng_seed, n, a, l));
                const ObservedCounts counts = sample_dataset(sampling_dist, n, rng);
                MultistartConfig fit_config = config;
                fit_config.threads = 1;  // replicate-level parallelism only
                fit_config.rng_seed = replicate_key(plan.rng_seed ^ 0x5ca1ab1eULL, n, a, l);
                try {
                    const FitResult fit =
                        multistart_fit(plan.spec, counts, PowerDivergenceFamily{a}, fit_config);
                    if (fit.best_start < 0 || !std::isfinite(fit.objective_value)) return;
                    ReplicateEstimate est;
                    est.theta = fit.theta_hat;
                    est.item_probs = fit.item_probs;
                    est.weights = fit.weights;
                    est.objective = fit.objective_value;
                    results[l] = std::move(est);
                } catch (const std::exception&) {
                    // counted as a failed replicate
                }
            });
            std::vector<ReplicateEstimate> ok;
            int failed = 0;
            for (auto& r : results) {
                if (r)
                    ok.push_back(std::move(*r));
                else
                    ++failed;
            }
            CellSummary cell;
            if (!ok.empty()) cell = mse_summary(ok, plan.spec, plan.theta0);
            cell.sample_size = n;
            cell.a = a;
            cell.n_failed = failed;
            cell.n_success = static_cast<int>(ok.size());
            summary.cells.push_back(std::move(cell));
        }
    }
    return summary;
}

std::string summary_to_csv(const SimulationSummary& summary) {
    std::ostringstream os;
    os.precision(10);
    os << "N,a,mse_lambda,mse_eta,mse_theta,mse_p,mse_w,mse_pw,"
          "bias_lambda,bias_eta,bias_theta,bias_p,bias_w,bias_pw,n_success\n";
    for (const auto& c : summary.cells) {
        os << c.sample_size << ',' << c.a << ',' << c.mse_lambda << ',' << c.mse_eta
           << ',' << c.mse_theta << ',' << c.mse_p << ',' << c.mse_w << ',' << c.mse_pw
           << ',' << c.bias_lambda << ',' << c.bias_eta << ',' << c.bias_theta << ','
           << c.bias_p << ',' << c.bias_w << ',' << c.bias_pw << ',' << c.n_success
           << '\n';
    }
    return os.str();
}

}  // namespace lcm
