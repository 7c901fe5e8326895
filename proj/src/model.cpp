#include "lcm/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lcm {

Eigen::VectorXd ParameterVector::flat() const {
    Eigen::VectorXd s(lambda.size() + eta.size());
    s << lambda, eta;
    return s;
}

ParameterVector ParameterVector::from_flat(const Eigen::VectorXd& s, int t, int u) {
    if (s.size() != t + u) throw std::invalid_argument("flat vector has wrong length");
    return ParameterVector(s.head(t), s.tail(u));
}

namespace {

void add_issue(ValidationReport& rep, const std::string& msg) {
    rep.issues.push_back({msg});
}

}  // namespace

ValidationReport validate_spec(const ModelSpec& spec) {
    ValidationReport rep;
    if (spec.m < 1) add_issue(rep, "m must be >= 1");
    if (spec.k < 1) add_issue(rep, "k must be >= 1");
    if (spec.k > kMaxItems) add_issue(rep, "k exceeds the supported limit of 24 items");
    if (spec.t < 0) add_issue(rep, "t must be >= 0");
    if (spec.u < 0) add_issue(rep, "u must be >= 0");
    if (spec.t + spec.u < 1) add_issue(rep, "t + u must be >= 1");
    if (!rep.ok()) return rep;

    if (static_cast<int>(spec.Q.size()) != spec.t)
        add_issue(rep, "Q must contain exactly t matrices");
    for (std::size_t r = 0; r < spec.Q.size(); ++r) {
        if (spec.Q[r].rows() != spec.m || spec.Q[r].cols() != spec.k) {
            std::ostringstream os;
            os << "Q[" << r + 1 << "] must be " << spec.m << "x" << spec.k;
            add_issue(rep, os.str());
        } else if (!spec.Q[r].allFinite()) {
            std::ostringstream os;
            os << "Q[" << r + 1 << "] has non-finite entries";
            add_issue(rep, os.str());
        }
    }
    if (spec.C.rows() != spec.m || spec.C.cols() != spec.k)
        add_issue(rep, "C must be m x k");
    else if (!spec.C.allFinite())
        add_issue(rep, "C has non-finite entries");
    if (spec.V.rows() != spec.m || spec.V.cols() != spec.u)
        add_issue(rep, "V must be m x u");
    else if (spec.u > 0 && !spec.V.allFinite())
        add_issue(rep, "V has non-finite entries");
    if (spec.d.size() != spec.m)
        add_issue(rep, "d must have length m");
    else if (!spec.d.allFinite())
        add_issue(rep, "d has non-finite entries");
    return rep;
}

void require_valid(const ModelSpec& spec, const ParameterVector& theta) {
    ValidationReport rep = validate_spec(spec);
    if (!rep.ok()) throw std::invalid_argument("invalid model spec: " + rep.issues.front().message);
    if (theta.lambda.size() != spec.t || theta.eta.size() != spec.u)
        throw std::invalid_argument("theta dimensions do not match the model spec");
    if (!theta.lambda.allFinite() || !theta.eta.allFinite())
        throw std::invalid_argument("theta has non-finite entries");
}

std::vector<int> pattern_of(std::size_t nu, int k) {
    if (nu < 1 || nu > (std::size_t{1} << k)) throw std::out_of_range("pattern index out of range");
    std::vector<int> bits(k);
    std::size_t code = nu - 1;
    for (int i = 0; i < k; ++i)
        bits[i] = static_cast<int>((code >> (k - 1 - i)) & 1u);
    return bits;
}

std::size_t index_of(const std::vector<int>& bits) {
    std::size_t code = 0;
    for (int b : bits) {
        if (b != 0 && b != 1) throw std::invalid_argument("pattern bits must be 0/1");
        code = (code << 1) | static_cast<unsigned>(b);
    }
    return code + 1;
}

double logistic(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

ItemProbabilityMatrix item_probabilities(const ModelSpec& spec,
                                         const ParameterVector& theta) {
    require_valid(spec, theta);
    ItemProbabilityMatrix ip;
    ip.x = spec.C;
    for (int r = 0; r < spec.t; ++r) ip.x += theta.lambda[r] * spec.Q[r];
    ip.p = ip.x.unaryExpr([](double v) { return logistic(v); });
    return ip;
}

ClassWeightVector class_weights(const ModelSpec& spec,
                                const ParameterVector& theta) {
    require_valid(spec, theta);
    ClassWeightVector cw;
    cw.z = spec.d;
    if (spec.u > 0) cw.z += spec.V * theta.eta;
    const double zmax = cw.z.maxCoeff();
    Eigen::VectorXd e = (cw.z.array() - zmax).exp();
    cw.w = e / e.sum();
    return cw;
}

double conditional_pattern_prob(const ItemProbabilityMatrix& ip, int j,
                                const std::vector<int>& y) {
    if (j < 1 || j > ip.p.rows()) throw std::out_of_range("class index out of range");
    if (static_cast<int>(y.size()) != ip.p.cols())
        throw std::invalid_argument("pattern length does not match item count");
    double prob = 1.0;
    for (int i = 0; i < ip.p.cols(); ++i) {
        const double p = ip.p(j - 1, i);
        prob *= y[i] ? p : (1.0 - p);
    }
    return prob;
}

namespace {

// cond(j, nu) = Pr(y_nu | class j) for all cells, shared by the distribution
// and its Jacobian.
Eigen::MatrixXd conditional_table(const ModelSpec& spec,
                                  const ItemProbabilityMatrix& ip) {
    const std::size_t cells = spec.n_cells();
    Eigen::MatrixXd cond(spec.m, cells);
    for (std::size_t nu = 1; nu <= cells; ++nu) {
        const std::size_t code = nu - 1;
        for (int j = 0; j < spec.m; ++j) {
            double prob = 1.0;
            for (int i = 0; i < spec.k; ++i) {
                const double p = ip.p(j, i);
                const bool yi = (code >> (spec.k - 1 - i)) & 1u;
                prob *= yi ? p : (1.0 - p);
            }
            cond(j, nu - 1) = prob;
        }
    }
    return cond;
}

}  // namespace

Eigen::VectorXd manifest_distribution(const ModelSpec& spec,
                                      const ParameterVector& theta) {
    const ItemProbabilityMatrix ip = item_probabilities(spec, theta);
    const ClassWeightVector cw = class_weights(spec, theta);
    const Eigen::MatrixXd cond = conditional_table(spec, ip);
    return cond.transpose() * cw.w;
}

Eigen::MatrixXd manifest_jacobian(const ModelSpec& spec,
                                  const ParameterVector& theta) {
    const ItemProbabilityMatrix ip = item_probabilities(spec, theta);
    const ClassWeightVector cw = class_weights(spec, theta);
    const Eigen::MatrixXd cond = conditional_table(spec, ip);
    const std::size_t cells = spec.n_cells();
    const int np = spec.n_params();
    Eigen::MatrixXd J(cells, np);

    // v_bar_r = sum_h w_h v_hr, shared across cells.
    Eigen::VectorXd vbar = spec.u > 0 ? Eigen::VectorXd(spec.V.transpose() * cw.w)
                                      : Eigen::VectorXd();

    std::vector<int> y(spec.k);
    for (std::size_t nu = 1; nu <= cells; ++nu) {
        const std::size_t code = nu - 1;
        for (int i = 0; i < spec.k; ++i)
            y[i] = static_cast<int>((code >> (spec.k - 1 - i)) & 1u);

        for (int a = 0; a < spec.t; ++a) {
            double deriv = 0.0;
            for (int j = 0; j < spec.m; ++j) {
                double inner = 0.0;
                for (int i = 0; i < spec.k; ++i)
                    inner += spec.Q[a](j, i) * (y[i] - ip.p(j, i));
                deriv += cw.w[j] * cond(j, nu - 1) * inner;
            }
            J(nu - 1, a) = deriv;
        }
        for (int b = 0; b < spec.u; ++b) {
            double deriv = 0.0;
            for (int j = 0; j < spec.m; ++j)
                deriv += cw.w[j] * cond(j, nu - 1) * (spec.V(j, b) - vbar[b]);
            J(nu - 1, spec.t + b) = deriv;
        }
    }
    return J;
}

Eigen::VectorXd softmax_gauge_direction(const ModelSpec& spec) {
    if (spec.u == 0) return Eigen::VectorXd();
    // Solve [V | -1] (c, alpha)^T = 0 for a nontrivial (c, alpha).
    Eigen::MatrixXd M(spec.m, spec.u + 1);
    M.leftCols(spec.u) = spec.V;
    M.col(spec.u).setConstant(-1.0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = std::max<Eigen::Index>(spec.m, spec.u + 1) *
                       std::numeric_limits<double>::epsilon() * sv(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    if (rank >= spec.u + 1) return Eigen::VectorXd();
    Eigen::VectorXd null = svd.matrixV().col(spec.u);
    Eigen::VectorXd c = null.head(spec.u);
    if (c.norm() < 1e-10) return Eigen::VectorXd();
    return c / c.norm();
}

ParameterVector canonicalize_gauge(const ModelSpec& spec,
                                   const ParameterVector& theta) {
    const Eigen::VectorXd c = softmax_gauge_direction(spec);
    if (c.size() == 0) return theta;
    int pivot = -1;
    for (int r = spec.u - 1; r >= 0; --r)
        if (std::abs(c[r]) > 1e-8) { pivot = r; break; }
    if (pivot < 0) return theta;
    ParameterVector out = theta;
    out.eta -= (theta.eta[pivot] / c[pivot]) * c;
    return out;
}

}  // namespace lcm
