#include "lcm/io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace lcm;

namespace {

ParameterVector make_theta(const ModelSpec& spec, const Eigen::VectorXd& lambda,
                           const Eigen::VectorXd& eta) {
    ParameterVector theta{lambda, eta};
    require_valid(spec, theta);
    return theta;
}

py::dict fit_dict(const ModelSpec& spec, const FitResult& fit) {
    py::dict out;
    out["lambda"] = fit.theta_hat.lambda;
    out["eta"] = fit.theta_hat.eta;
    out["objective"] = fit.objective_value;
    out["gradient_norm"] = fit.gradient_norm;
    out["converged"] = fit.converged;
    out["best_start"] = fit.best_start;
    out["item_probabilities"] = fit.item_probs;
    out["class_weights"] = fit.weights;
    out["objective_evaluations"] = fit.objective_evaluations;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "minimum phi-divergence estimation for constrained latent class models";

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_readonly("m", &ModelSpec::m)
        .def_readonly("k", &ModelSpec::k)
        .def_readonly("t", &ModelSpec::t)
        .def_readonly("u", &ModelSpec::u)
        .def("__repr__", [](const ModelSpec& s) {
            return "ModelSpec(m=" + std::to_string(s.m) + ", k=" + std::to_string(s.k) +
                   ", t=" + std::to_string(s.t) + ", u=" + std::to_string(s.u) + ")";
        });

    m.def("parse_model_spec", &io::parse_model_spec, py::arg("text"));
    m.def("serialize_model_spec", &io::serialize_model_spec, py::arg("spec"));
    m.def(
        "parse_counts",
        [](const std::string& text, int k) {
            const ObservedCounts c = io::parse_counts(text, k);
            return c.counts;
        },
        py::arg("text"), py::arg("k"));
    m.def("parse_real", &io::parse_real, py::arg("text"));
    m.def("content_hash", &io::content_hash, py::arg("data"));

    m.def(
        "manifest_distribution",
        [](const ModelSpec& spec, const Eigen::VectorXd& lam, const Eigen::VectorXd& eta) {
            return manifest_distribution(spec, make_theta(spec, lam, eta));
        },
        py::arg("spec"), py::arg("lambda_"), py::arg("eta"));
    m.def(
        "manifest_jacobian",
        [](const ModelSpec& spec, const Eigen::VectorXd& lam, const Eigen::VectorXd& eta) {
            return manifest_jacobian(spec, make_theta(spec, lam, eta));
        },
        py::arg("spec"), py::arg("lambda_"), py::arg("eta"));
    m.def(
        "item_probabilities",
        [](const ModelSpec& spec, const Eigen::VectorXd& lam, const Eigen::VectorXd& eta) {
            return item_probabilities(spec, make_theta(spec, lam, eta)).p;
        },
        py::arg("spec"), py::arg("lambda_"), py::arg("eta"));
    m.def(
        "class_weights",
        [](const ModelSpec& spec, const Eigen::VectorXd& lam, const Eigen::VectorXd& eta) {
            return class_weights(spec, make_theta(spec, lam, eta)).w;
        },
        py::arg("spec"), py::arg("lambda_"), py::arg("eta"));

    m.def("power_divergence", &power_divergence, py::arg("a"), py::arg("p_hat"),
          py::arg("p"));
    m.def(
        "log_likelihood",
        [](const ModelSpec& spec, const std::vector<std::int64_t>& counts,
           const Eigen::VectorXd& lam, const Eigen::VectorXd& eta) {
            ObservedCounts c;
            c.counts = counts;
            return log_likelihood(c, spec, make_theta(spec, lam, eta));
        },
        py::arg("spec"), py::arg("counts"), py::arg("lambda_"), py::arg("eta"));

    m.def(
        "fit",
        [](const ModelSpec& spec, const std::vector<std::int64_t>& counts, double a,
           int starts, std::uint64_t seed, int threads, double lo, double up,
           bool gauge_fix) {
            ObservedCounts c;
            c.counts = counts;
            MultistartConfig cfg = MultistartConfig::defaults(spec, lo, up);
            cfg.n_initial = starts;
            cfg.rng_seed = seed;
            cfg.threads = threads;
            FitResult fit = multistart_fit(spec, c, PowerDivergenceFamily{a}, cfg);
            if (fit.best_start >= 0 && gauge_fix)
                fit.theta_hat = canonicalize_gauge(spec, fit.theta_hat);
            return fit_dict(spec, fit);
        },
        py::arg("spec"), py::arg("counts"), py::arg("a") = 0.0, py::arg("starts") = 500,
        py::arg("seed") = 1, py::arg("threads") = 1, py::arg("lo") = -10.0,
        py::arg("up") = 10.0, py::arg("gauge_fix") = true);

    m.def(
        "asymptotics",
        [](const ModelSpec& spec, const Eigen::VectorXd& lam, const Eigen::VectorXd& eta,
           std::int64_t n) {
            const AsymptoticsReport rep =
                asymptotics_report(spec, make_theta(spec, lam, eta), n);
            py::dict out;
            out["information"] = rep.information;
            out["jacobian_rank"] = rep.birch.jacobian_rank;
            out["full_rank"] = rep.birch.full_rank;
            out["min_cell_probability"] = rep.birch.min_cell_probability;
            out["condition_number"] = rep.birch.condition_number;
            if (rep.se) {
                out["se"] = *rep.se;
                out["param_cov"] = *rep.param_cov;
                out["manifest_cov"] = *rep.manifest_cov;
            }
            return out;
        },
        py::arg("spec"), py::arg("lambda_"), py::arg("eta"), py::arg("n"));

    m.def(
        "sample_dataset",
        [](const ModelSpec& spec, const Eigen::VectorXd& lam, const Eigen::VectorXd& eta,
           std::int64_t n, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            return sample_dataset(spec, make_theta(spec, lam, eta), n, rng).counts;
        },
        py::arg("spec"), py::arg("lambda_"), py::arg("eta"), py::arg("n"),
        py::arg("seed"));

    m.def(
        "run_study",
        [](const std::string& plan_text) {
            const io::ParsedPlan parsed = io::parse_plan(plan_text);
            return summary_to_csv(run_study(parsed.plan, parsed.config));
        },
        py::arg("plan_text"));

    py::register_exception<io::ParseError>(m, "ParseError", PyExc_ValueError);
}
