#include "lcm/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitOptimization = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw lcm::io::ParseError("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lcm::io::ParseError("cannot open for writing: " + path);
    out << text;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return buf;
}

struct FitOptions {
    std::string model_path;
    std::string data_path;
    std::string a_literal = "0";
    int starts = 500;
    std::uint64_t seed = 1;
    std::vector<double> bounds;
    int threads = 1;
    bool no_gauge_fix = false;
    std::string out_path;
};

int run_fit(const FitOptions& opt) {
    const std::string model_text = read_file(opt.model_path);
    const std::string data_text = read_file(opt.data_path);
    const lcm::ModelSpec spec = lcm::io::parse_model_spec(model_text);
    const lcm::ObservedCounts counts = lcm::io::parse_counts(data_text, spec.k);
    const double a = lcm::io::parse_real(opt.a_literal);

    double lo = -10.0, up = 10.0;
    if (opt.bounds.size() == 2) {
        lo = opt.bounds[0];
        up = opt.bounds[1];
    }
    lcm::MultistartConfig config = lcm::MultistartConfig::defaults(spec, lo, up);
    config.n_initial = opt.starts;
    config.rng_seed = opt.seed;
    config.threads = opt.threads;

    lcm::FitResult fit =
        lcm::multistart_fit(spec, counts, lcm::PowerDivergenceFamily{a}, config);
    if (fit.best_start < 0) {
        std::cerr << "optimization failed: no start produced a finite objective\n";
        return kExitOptimization;
    }
    bool gauge_fixed = false;
    if (!opt.no_gauge_fix) {
        const lcm::ParameterVector canon = lcm::canonicalize_gauge(spec, fit.theta_hat);
        gauge_fixed = (canon.eta - fit.theta_hat.eta).norm() > 0.0;
        fit.theta_hat = canon;
    }
    const lcm::AsymptoticsReport asym =
        lcm::asymptotics_report(spec, fit.theta_hat, counts.total());

    lcm::io::ResultContext ctx;
    ctx.model_hash = lcm::io::content_hash(model_text);
    ctx.data_hash = lcm::io::content_hash(data_text);
    ctx.a = a;
    ctx.phi_name = "power(a=" + opt.a_literal + ")";
    ctx.seed = opt.seed;
    ctx.gauge_fixed = gauge_fixed;

    nlohmann::json doc = lcm::io::result_document(spec, fit, asym, ctx);
    doc["timestamp"] = iso_timestamp();
    const std::string text = doc.dump(2) + "\n";
    if (opt.out_path.empty())
        std::cout << text;
    else
        write_file(opt.out_path, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained latent class models for binary items, estimated by "
                 "minimum phi-divergence"};
    app.require_subcommand(1);

    FitOptions fit_opt;
    CLI::App* fit = app.add_subcommand("fit", "estimate a model from pattern counts");
    fit->add_option("--model", fit_opt.model_path, "model spec JSON")->required();
    fit->add_option("--data", fit_opt.data_path, "pattern counts CSV")->required();
    fit->add_option("--a", fit_opt.a_literal,
                    "power-divergence index (decimals or rationals like 2/3)");
    fit->add_option("--starts", fit_opt.starts, "multistart initial points");
    fit->add_option("--seed", fit_opt.seed, "RNG seed");
    fit->add_option("--bounds", fit_opt.bounds, "search box LO HI")->expected(2);
    fit->add_option("--threads", fit_opt.threads, "worker threads");
    fit->add_flag("--no-gauge-fix", fit_opt.no_gauge_fix,
                  "report eta exactly as optimized even when the softmax gauge "
                  "leaves it underdetermined");
    fit->add_option("--out", fit_opt.out_path, "result JSON path (default stdout)");

    std::string se_model, se_theta, se_out;
    std::int64_t se_n = 0;
    CLI::App* se = app.add_subcommand("se", "asymptotic covariance report at a theta");
    se->add_option("--model", se_model)->required();
    se->add_option("--theta", se_theta, "theta JSON with lambda/eta arrays")->required();
    se->add_option("--n", se_n, "sample size")->required();
    se->add_option("--out", se_out);

    std::string sim_plan, sim_out;
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo efficiency study");
    simulate->add_option("--plan", sim_plan, "plan JSON")->required();
    simulate->add_option("--out", sim_out, "summary CSV path (default stdout)");

    std::string val_model, val_theta;
    std::uint64_t val_seed = 1;
    CLI::App* validate = app.add_subcommand("validate", "validate a model document");
    validate->add_option("--model", val_model)->required();
    validate->add_option("--theta", val_theta, "theta JSON for Birch diagnostics");
    validate->add_option("--seed", val_seed, "seed for a random theta when none given");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (fit->parsed()) return run_fit(fit_opt);

        if (se->parsed()) {
            const lcm::ModelSpec spec = lcm::io::parse_model_spec(read_file(se_model));
            const lcm::ParameterVector theta =
                lcm::io::parse_theta(read_file(se_theta), spec);
            const lcm::AsymptoticsReport rep = lcm::asymptotics_report(spec, theta, se_n);
            lcm::FitResult dummy;
            dummy.theta_hat = theta;
            dummy.item_probs = lcm::item_probabilities(spec, theta).p;
            dummy.weights = lcm::class_weights(spec, theta).w;
            dummy.objective_value = 0.0;
            dummy.gradient_norm = 0.0;
            lcm::io::ResultContext ctx;
            ctx.model_hash = lcm::io::content_hash(read_file(se_model));
            ctx.phi_name = "n/a";
            nlohmann::json doc = lcm::io::result_document(spec, dummy, rep, ctx);
            doc["timestamp"] = iso_timestamp();
            const std::string text = doc.dump(2) + "\n";
            if (se_out.empty())
                std::cout << text;
            else
                write_file(se_out, text);
            return 0;
        }

        if (simulate->parsed()) {
            lcm::io::ParsedPlan parsed = lcm::io::parse_plan(read_file(sim_plan));
            const lcm::SimulationSummary summary =
                lcm::run_study(parsed.plan, parsed.config);
            const std::string csv = lcm::summary_to_csv(summary);
            if (sim_out.empty())
                std::cout << csv;
            else
                write_file(sim_out, csv);
            return 0;
        }

        if (validate->parsed()) {
            const lcm::ModelSpec spec = lcm::io::parse_model_spec(read_file(val_model));
            lcm::ParameterVector theta;
            if (!val_theta.empty()) {
                theta = lcm::io::parse_theta(read_file(val_theta), spec);
            } else {
                std::mt19937_64 rng = lcm::substream(val_seed, 0);
                std::uniform_real_distribution<double> unif(-1.0, 1.0);
                Eigen::VectorXd s(spec.n_params());
                for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = unif(rng);
                theta = lcm::ParameterVector::from_flat(s, spec.t, spec.u);
            }
            const lcm::BirchDiagnostics diag = lcm::birch_diagnostics(spec, theta);
            nlohmann::json doc;
            doc["valid"] = true;
            doc["birch"] = {{"min_cell_probability", diag.min_cell_probability},
                            {"jacobian_rank", diag.jacobian_rank},
                            {"condition_number", diag.condition_number},
                            {"full_rank", diag.full_rank}};
            std::cout << doc.dump(2) << "\n";
            return 0;
        }
    } catch (const lcm::io::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOptimization;
    }
    return kExitUsage;
}
