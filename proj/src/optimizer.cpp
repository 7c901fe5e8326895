#include "lcm/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <thread>

namespace lcm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd clamp_to(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& up) {
    return x.cwiseMax(lo).cwiseMin(up);
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

MultistartConfig MultistartConfig::defaults(const ModelSpec& spec, double lo, double up) {
    MultistartConfig cfg;
    cfg.bounds_lambda_lo = Eigen::VectorXd::Constant(spec.t, lo);
    cfg.bounds_lambda_up = Eigen::VectorXd::Constant(spec.t, up);
    cfg.bounds_eta_lo = Eigen::VectorXd::Constant(spec.u, lo);
    cfg.bounds_eta_up = Eigen::VectorXd::Constant(spec.u, up);
    return cfg;
}

Eigen::VectorXd MultistartConfig::lower() const {
    Eigen::VectorXd lo(bounds_lambda_lo.size() + bounds_eta_lo.size());
    lo << bounds_lambda_lo, bounds_eta_lo;
    return lo;
}

Eigen::VectorXd MultistartConfig::upper() const {
    Eigen::VectorXd up(bounds_lambda_up.size() + bounds_eta_up.size());
    up << bounds_lambda_up, bounds_eta_up;
    return up;
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 1)));
}

namespace {

Eigen::VectorXd draw_uniform(const Eigen::VectorXd& lo, const Eigen::VectorXd& up,
                             std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd x(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        x[i] = lo[i] + (up[i] - lo[i]) * unif(rng);
    return x;
}

void validate_config(const MultistartConfig& config) {
    const Eigen::VectorXd lo = config.lower();
    const Eigen::VectorXd up = config.upper();
    if (((up - lo).array() < 0.0).any())
        throw std::invalid_argument("box bounds must satisfy lo <= up");
    if (config.n_initial < 1) throw std::invalid_argument("n_initial must be >= 1");
    if (config.qn_gradient_tol <= 0 || config.root_residual_tol <= 0 ||
        config.hj_initial_step <= 0)
        throw std::invalid_argument("tolerances must be positive");
}

}  // namespace

std::vector<Eigen::VectorXd> generate_initial_points(const MultistartConfig& config) {
    validate_config(config);
    const Eigen::VectorXd lo = config.lower();
    const Eigen::VectorXd up = config.upper();
    std::vector<Eigen::VectorXd> points(config.n_initial);
    for (int i = 0; i < config.n_initial; ++i) {
        std::mt19937_64 rng = substream(config.rng_seed, static_cast<std::uint64_t>(i));
        points[i] = draw_uniform(lo, up, rng);
    }
    return points;
}

RoughResult rough_improve(const Eigen::VectorXd& point, const Objective& objective,
                          const MultistartConfig& config, std::mt19937_64& rng) {
    const Eigen::VectorXd lo = config.lower();
    const Eigen::VectorXd up = config.upper();
    const int n = static_cast<int>(point.size());
    const Eigen::VectorXd step = config.hj_initial_step * (up - lo);

    RoughResult res;
    res.point = clamp_to(point, lo, up);
    res.value = objective(res.point);

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);

    // Exploratory sweep: at most 2 evaluations per coordinate.
    Eigen::VectorXd x = res.point;
    double fx = res.value;
    for (int c : perm) {
        for (double sign : {+1.0, -1.0}) {
            Eigen::VectorXd trial = x;
            trial[c] = std::clamp(trial[c] + sign * step[c], lo[c], up[c]);
            if (trial[c] == x[c]) continue;
            const double ft = objective(trial);
            ++res.evaluations;
            if (ft < fx) {
                x = trial;
                fx = ft;
                break;
            }
        }
    }

    // Line improvement along the sweep displacement: probes at double and
    // half spacing, outward and inward. At most 4 extra evaluations, for a
    // total of 2(t+u)+4.
    const Eigen::VectorXd delta = x - res.point;
    if (delta.squaredNorm() > 0.0) {
        for (double factor : {2.0, 0.5, -0.5, -2.0}) {
            Eigen::VectorXd trial = clamp_to(res.point + factor * delta, lo, up);
            const double ft = objective(trial);
            ++res.evaluations;
            if (ft < fx) {
                x = trial;
                fx = ft;
            }
        }
    }
    if (fx < res.value) {
        res.point = x;
        res.value = fx;
    }
    return res;
}

FineResult fine_improve(const Eigen::VectorXd& point, const Objective& objective,
                        const Gradient& gradient, const MultistartConfig& config) {
    const Eigen::VectorXd lo = config.lower();
    const Eigen::VectorXd up = config.upper();
    constexpr int kHistory = 8;
    constexpr double kArmijo = 1e-4;

    FineResult res;
    res.point = clamp_to(point, lo, up);
    res.value = objective(res.point);
    if (!std::isfinite(res.value))
        throw std::invalid_argument("fine_improve requires a finite objective at the start");
    Eigen::VectorXd g = gradient(res.point);
    res.gradient_norm = g.norm();

    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;  // (s, y)

    for (int iter = 0; iter < config.max_qn_iterations; ++iter) {
        if (res.gradient_norm <= config.qn_gradient_tol) {
            res.converged = true;
            break;
        }
        // L-BFGS two-loop recursion.
        Eigen::VectorXd q = g;
        std::vector<double> alpha(history.size());
        for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
            const auto& [s, y] = history[i];
            alpha[i] = s.dot(q) / y.dot(s);
            q -= alpha[i] * y;
        }
        if (!history.empty()) {
            const auto& [s, y] = history.back();
            q *= y.dot(s) / y.dot(y);
        }
        for (std::size_t i = 0; i < history.size(); ++i) {
            const auto& [s, y] = history[i];
            const double beta = y.dot(q) / y.dot(s);
            q += (alpha[i] - beta) * s;
        }
        Eigen::VectorXd dir = -q;
        if (dir.dot(g) >= 0.0) dir = -g;

        double step = 1.0;
        bool moved = false;
        Eigen::VectorXd xn;
        double fn = res.value;
        for (int ls = 0; ls < 50; ++ls) {
            xn = clamp_to(res.point + step * dir, lo, up);
            const Eigen::VectorXd actual = xn - res.point;
            if (actual.squaredNorm() == 0.0) break;
            fn = objective(xn);
            if (std::isfinite(fn) && fn <= res.value + kArmijo * g.dot(actual)) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;  // line-search failure: best iterate is kept

        if ((xn.array() == lo.array()).any() || (xn.array() == up.array()).any())
            res.projected = true;
        const Eigen::VectorXd gn = gradient(xn);
        const Eigen::VectorXd s = xn - res.point;
        const Eigen::VectorXd y = gn - g;
        if (y.dot(s) > 1e-12 * s.norm() * y.norm()) {
            history.emplace_back(s, y);
            if (static_cast<int>(history.size()) > kHistory) history.pop_front();
        }
        res.point = xn;
        res.value = fn;
        g = gn;
        res.gradient_norm = g.norm();
        res.iterations = iter + 1;
    }
    if (res.gradient_norm <= config.qn_gradient_tol) res.converged = true;
    return res;
}

namespace {

Eigen::MatrixXd forward_difference_jacobian(const Gradient& gradient,
                                            const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& gx) {
    constexpr double h = 1e-7;
    const Eigen::Index n = x.size();
    Eigen::MatrixXd J(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd xp = x;
        xp[j] += h;
        J.col(j) = (gradient(xp) - gx) / h;
    }
    return J;
}

Eigen::VectorXd dogleg_step(const Eigen::VectorXd& newton, const Eigen::VectorXd& cauchy,
                            double radius) {
    if (newton.norm() <= radius) return newton;
    if (cauchy.norm() >= radius) return (radius / cauchy.norm()) * cauchy;
    // Intersect the cauchy->newton segment with the trust region boundary.
    const Eigen::VectorXd diff = newton - cauchy;
    const double a = diff.squaredNorm();
    const double b = 2.0 * cauchy.dot(diff);
    const double c = cauchy.squaredNorm() - radius * radius;
    const double tau = (-b + std::sqrt(std::max(0.0, b * b - 4 * a * c))) / (2 * a);
    return cauchy + tau * diff;
}

}  // namespace

RefineResult stationary_refine(const Eigen::VectorXd& point, const Objective& objective,
                               const Gradient& gradient, const MultistartConfig& config) {
    RefineResult res;
    res.point = point;
    res.value = objective(point);
    Eigen::VectorXd g = gradient(point);
    res.residual_norm = g.norm();
    if (!g.allFinite()) return res;
    if (res.residual_norm <= config.root_residual_tol) {
        res.accepted = true;
        return res;
    }

    Eigen::VectorXd x = point;
    double radius = std::max(1.0, x.norm());
    double merit = 0.5 * g.squaredNorm();
    constexpr int kMaxIter = 100;

    for (int iter = 0; iter < kMaxIter && radius > 1e-14; ++iter) {
        const Eigen::MatrixXd J = forward_difference_jacobian(gradient, x, g);
        // Minimum-norm Newton step; SVD keeps rank-deficient systems stable.
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-12);
        const Eigen::VectorXd newton = svd.solve(-g);
        const Eigen::VectorXd grad_merit = J.transpose() * g;
        Eigen::VectorXd cauchy = Eigen::VectorXd::Zero(x.size());
        const double jg2 = (J * grad_merit).squaredNorm();
        if (jg2 > 0.0) cauchy = -(grad_merit.squaredNorm() / jg2) * grad_merit;

        const Eigen::VectorXd step = dogleg_step(newton, cauchy, radius);
        if (step.norm() < 1e-15) break;
        const Eigen::VectorXd xn = x + step;
        const Eigen::VectorXd gn = gradient(xn);
        if (!gn.allFinite()) {
            radius *= 0.25;
            continue;
        }
        const double merit_n = 0.5 * gn.squaredNorm();
        const double predicted = merit - 0.5 * (g + J * step).squaredNorm();
        const double actual = merit - merit_n;
        const double rho = predicted > 0.0 ? actual / predicted : -1.0;
        if (rho > 1e-4) {
            x = xn;
            g = gn;
            merit = merit_n;
            if (rho > 0.75 && step.norm() > 0.8 * radius) radius *= 2.0;
        } else {
            radius *= 0.5;
        }
        if (g.norm() <= config.root_residual_tol) break;
    }

    const double fx = objective(x);
    const double residual = g.norm();
    // Keep the refined point only while the objective keeps decreasing.
    if (std::isfinite(fx) && fx <= res.value + 1e-12) {
        res.point = x;
        res.value = fx;
        res.residual_norm = residual;
        res.accepted = residual <= config.root_residual_tol;
    }
    return res;
}

namespace {

struct StartOutcome {
    Eigen::VectorXd point;
    double value = kInf;
    double gradient_norm = kInf;
    bool valid = false;
};

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

FitResult multistart_fit(const ModelSpec& spec, const ObservedCounts& counts,
                         const PhiFunction& phi, const MultistartConfig& config) {
    validate_config(config);
    if (counts.total() < 1) throw std::invalid_argument("counts must total at least 1");
    const Eigen::VectorXd p_hat = counts.empirical();
    if (static_cast<std::size_t>(p_hat.size()) != spec.n_cells())
        throw std::invalid_argument("counts length does not match the model");
    if (config.lower().size() != spec.n_params())
        throw std::invalid_argument("config bounds do not match the model dimensions");

    std::atomic<std::int64_t> n_obj{0};
    std::atomic<std::int64_t> n_grad{0};
    const Objective objective = [&](const Eigen::VectorXd& s) {
        ++n_obj;
        try {
            return divergence(phi, p_hat, manifest_distribution(
                                              spec, ParameterVector::from_flat(s, spec.t, spec.u)));
        } catch (const std::domain_error&) {
            return kInf;
        }
    };
    const Gradient gradient = [&](const Eigen::VectorXd& s) {
        ++n_grad;
        return objective_gradient(spec, phi, p_hat,
                                  ParameterVector::from_flat(s, spec.t, spec.u));
    };

    const int n = config.n_initial;
    FitResult result;
    result.trace.resize(n);
    const Eigen::VectorXd lo = config.lower();
    const Eigen::VectorXd up = config.upper();

    // Step 1 + 2: per-start RNG substreams make parallel and serial schedules
    // identical; the rough values alone drive the gate, so the scan below is
    // a cheap sequential pass.
    parallel_for(n, config.threads, [&](int i) {
        std::mt19937_64 rng = substream(config.rng_seed, static_cast<std::uint64_t>(i));
        StartTrace& tr = result.trace[i];
        tr.initial = draw_uniform(lo, up, rng);
        tr.initial_value = objective(tr.initial);
        const RoughResult rough = rough_improve(tr.initial, objective, config, rng);
        tr.rough_value = rough.value;
        tr.rough_evals = rough.evaluations;
        tr.rough_point = rough.point;
    });

    double gate = kInf;
    std::vector<int> gated;
    for (int i = 0; i < n; ++i) {
        if (result.trace[i].rough_value < gate) {
            gate = result.trace[i].rough_value;
            result.trace[i].gated = true;
            gated.push_back(i);
        }
    }

    // Step 3 for every gated start.
    std::vector<StartOutcome> outcomes(gated.size());
    parallel_for(static_cast<int>(gated.size()), config.threads, [&](int gi) {
        const int i = gated[gi];
        StartTrace& tr = result.trace[i];
        StartOutcome& out = outcomes[gi];
        try {
            const FineResult fine = fine_improve(tr.rough_point, objective, gradient, config);
            tr.fine_value = fine.value;
            tr.projected = fine.projected;
            const RefineResult refined =
                stationary_refine(fine.point, objective, gradient, config);
            tr.refined_value = refined.value;
            tr.gradient_norm = refined.residual_norm;
            out.point = refined.point;
            out.value = refined.value;
            out.gradient_norm = refined.residual_norm;
            out.valid = std::isfinite(out.value);
        } catch (const std::exception&) {
            out.valid = false;
        }
    });

    // Step 4: deterministic reduction by (value, start index).
    for (std::size_t gi = 0; gi < gated.size(); ++gi) {
        const StartOutcome& out = outcomes[gi];
        if (!out.valid) continue;
        if (out.value < result.objective_value) {
            result.objective_value = out.value;
            result.theta_hat = ParameterVector::from_flat(out.point, spec.t, spec.u);
            result.gradient_norm = out.gradient_norm;
            result.best_start = gated[gi];
        }
    }
    result.objective_evaluations = n_obj.load();
    result.gradient_evaluations = n_grad.load();
    if (result.best_start < 0) return result;  // every start failed

    result.item_probs = item_probabilities(spec, result.theta_hat).p;
    result.weights = class_weights(spec, result.theta_hat).w;
    result.converged = result.gradient_norm <= config.root_residual_tol;
    return result;
}

FitResult multistart_fit(const ModelSpec& spec, const ObservedCounts& counts,
                         const PowerDivergenceFamily& family,
                         const MultistartConfig& config) {
    return multistart_fit(spec, counts, make_power_phi(family.a), config);
}

}  // namespace lcm
