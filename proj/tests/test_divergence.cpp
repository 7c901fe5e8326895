#include <doctest.h>

#include "helpers.hpp"
#include "lcm/divergence.hpp"

#include <random>

using namespace lcm;

namespace {

Eigen::VectorXd random_simplex(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = unif(rng);
    return v / v.sum();
}

const double kGrid[] = {-1.0, -0.5, 0.0, 2.0 / 3.0, 1.0, 1.5, 2.0, 2.5, 3.0};

}  // namespace

TEST_CASE("phi_power matches frozen values") {
    CHECK(phi_power(1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(phi_power(1.0, 0.5) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(phi_power(0.0, 2.0) == doctest::Approx(0.3862943611198906).epsilon(1e-14));
    CHECK(phi_power(0.0, 0.5) == doctest::Approx(0.1534264097200273).epsilon(1e-14));
    CHECK(phi_power(-1.0, 2.0) == doctest::Approx(0.3068528194400546).epsilon(1e-14));
    CHECK(phi_power(2.0 / 3.0, 2.0) == doctest::Approx(0.45732189354275893).epsilon(1e-14));
    CHECK(phi_power(-0.5, 0.5) == doctest::Approx(0.1715728752538097).epsilon(1e-14));
    CHECK(phi_power(2.0, 2.0) == doctest::Approx(0.6666666666666666).epsilon(1e-14));
}

TEST_CASE("phi_power satisfies the generator normalization") {
    for (double a : kGrid) {
        CHECK(std::abs(phi_power(a, 1.0)) < 1e-15);
        CHECK(std::abs(phi_power_deriv(a, 1.0)) < 1e-14);
        CHECK(phi_power_second(a, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("phi derivatives agree with finite differences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> xs(0.2, 3.0);
    const double h = 1e-6;
    for (double a : kGrid)
        for (int rep = 0; rep < 10; ++rep) {
            const double x = xs(rng);
            const double fd1 = (phi_power(a, x + h) - phi_power(a, x - h)) / (2 * h);
            const double fd2 =
                (phi_power_deriv(a, x + h) - phi_power_deriv(a, x - h)) / (2 * h);
            CHECK(phi_power_deriv(a, x) == doctest::Approx(fd1).epsilon(1e-7));
            CHECK(phi_power_second(a, x) == doctest::Approx(fd2).epsilon(1e-7));
        }
}

TEST_CASE("second derivative has the power form x^(a-1)") {
    for (double a : kGrid)
        for (double x : {0.3, 0.9, 1.7})
            CHECK(phi_power_second(a, x) ==
                  doctest::Approx(std::pow(x, a - 1.0)).epsilon(1e-12));
}

TEST_CASE("near-limit indices dispatch to the limit branches") {
    CHECK(phi_power(1e-12, 2.0) == doctest::Approx(phi_power(0.0, 2.0)).epsilon(1e-12));
    CHECK(phi_power(-1.0 + 1e-12, 2.0) ==
          doctest::Approx(phi_power(-1.0, 2.0)).epsilon(1e-12));
}

TEST_CASE("limit slopes follow the tail growth of the generator") {
    CHECK(make_power_phi(0.0).limit_slope == std::numeric_limits<double>::infinity());
    CHECK(make_power_phi(1.0).limit_slope == std::numeric_limits<double>::infinity());
    CHECK(make_power_phi(-1.0).limit_slope == doctest::Approx(1.0));
    CHECK(make_power_phi(-0.5).limit_slope == doctest::Approx(2.0));
}

TEST_CASE("divergence matches frozen values on a fixed pair") {
    Eigen::VectorXd ph(3), p(3);
    ph << 0.2, 0.3, 0.5;
    p << 0.25, 0.25, 0.5;
    CHECK(power_divergence(0.0, ph, p) ==
          doctest::Approx(0.010067756775344432).epsilon(1e-13));
    CHECK(power_divergence(-1.0, ph, p) ==
          doctest::Approx(0.010205498630063793).epsilon(1e-13));
    CHECK(power_divergence(2.0 / 3.0, ph, p) ==
          doctest::Approx(0.010014971039748867).epsilon(1e-13));
    CHECK(power_divergence(1.0, ph, p) ==
          doctest::Approx(0.010000000000000009).epsilon(1e-13));
}

TEST_CASE("closed form agrees with the generic evaluator") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 7);
        const Eigen::VectorXd ph = random_simplex(n, rng);
        const Eigen::VectorXd p = random_simplex(n, rng);
        for (double a : kGrid) {
            const double closed = power_divergence(a, ph, p);
            const double generic = divergence(make_power_phi(a), ph, p);
            CHECK(std::abs(closed - generic) < 1e-12);
        }
    }
}

TEST_CASE("divergence is nonnegative and zero at equality") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 30; ++rep) {
        const Eigen::VectorXd p = random_simplex(5, rng);
        const Eigen::VectorXd q = random_simplex(5, rng);
        for (double a : kGrid) {
            CHECK(power_divergence(a, p, p) == doctest::Approx(0.0).epsilon(1e-13));
            CHECK(power_divergence(a, q, p) > -1e-13);
        }
    }
}

TEST_CASE("normalized generator gives identical divergence values") {
    std::mt19937_64 rng(13);
    const Eigen::VectorXd ph = random_simplex(6, rng);
    const Eigen::VectorXd p = random_simplex(6, rng);
    for (double a : kGrid) {
        const PhiFunction phi = make_power_phi(a);
        const PhiFunction psi = phi_normalize(phi);
        CHECK(std::abs(psi.df(1.0)) < 1e-14);
        CHECK(std::abs(divergence(phi, ph, p) - divergence(psi, ph, p)) < 1e-12);
    }
}

TEST_CASE("zero cell conventions") {
    Eigen::VectorXd ph(2), p(2);

    // empty empirical cell contributes p * phi(0)
    ph << 0.0, 1.0;
    p << 0.25, 0.75;
    // the p * phi(0) term cancels against the linear part: D0 = log(1/0.75)
    const double d0 = power_divergence(0.0, ph, p);
    CHECK(std::isfinite(d0));
    CHECK(d0 == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));

    // empty model cell with empirical mass diverges for a >= 0
    ph << 0.25, 0.75;
    p << 0.0, 1.0;
    CHECK(power_divergence(1.0, ph, p) == std::numeric_limits<double>::infinity());
    CHECK(power_divergence(0.0, ph, p) == std::numeric_limits<double>::infinity());
    // finite limit slope keeps it finite for a < 0
    CHECK(std::isfinite(power_divergence(-0.5, ph, p)));
    CHECK(std::isfinite(divergence(make_power_phi(-0.5), ph, p)));

    // both empty: 0 * phi(0/0) = 0
    ph << 0.0, 1.0;
    p << 0.0, 1.0;
    CHECK(power_divergence(1.0, ph, p) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("objective gradient matches finite differences") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 15; ++rep) {
        const ModelSpec spec = testutil::random_spec(rng);
        const ParameterVector theta = testutil::random_theta(spec, rng, 2.0);
        const Eigen::VectorXd ph =
            random_simplex(static_cast<int>(spec.n_cells()), rng);
        for (double a : {-1.0, 0.0, 2.0 / 3.0, 1.0, 2.0}) {
            const PhiFunction phi = make_power_phi(a);
            const Eigen::VectorXd g = objective_gradient(spec, phi, ph, theta);
            const Eigen::VectorXd s = theta.flat();
            const double h = 1e-6;
            for (int j = 0; j < spec.n_params(); ++j) {
                Eigen::VectorXd hi = s, lo = s;
                hi[j] += h;
                lo[j] -= h;
                const double fd =
                    (divergence(phi, ph,
                                manifest_distribution(
                                    spec, ParameterVector::from_flat(hi, spec.t, spec.u))) -
                     divergence(phi, ph,
                                manifest_distribution(
                                    spec, ParameterVector::from_flat(lo, spec.t, spec.u)))) /
                    (2 * h);
                CHECK(std::abs(g[j] - fd) / std::max(1.0, std::abs(fd)) < 1e-6);
            }
        }
    }
}

TEST_CASE("log likelihood relates to the a=0 divergence by a constant") {
    const ModelSpec spec = testutil::two_class_spec();
    ObservedCounts counts;
    counts.counts = {12, 5, 9, 3, 7, 11, 2, 6};
    const double n = static_cast<double>(counts.total());
    const Eigen::VectorXd ph = counts.empirical();
    std::mt19937_64 rng(21);
    double reference = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const ParameterVector theta = testutil::random_theta(spec, rng, 2.0);
        const double value = log_likelihood(counts, spec, theta) +
                             n * power_divergence(0.0, ph, manifest_distribution(spec, theta));
        if (rep == 0)
            reference = value;
        else
            CHECK(value == doctest::Approx(reference).epsilon(1e-10));
    }
}

TEST_CASE("observed counts expose total and empirical shares") {
    ObservedCounts counts;
    counts.counts = {1, 0, 3};
    CHECK(counts.total() == 4);
    const Eigen::VectorXd e = counts.empirical();
    CHECK(e[0] == doctest::Approx(0.25));
    CHECK(e[1] == 0.0);
    CHECK(e[2] == doctest::Approx(0.75));
}
