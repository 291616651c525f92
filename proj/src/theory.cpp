#include "lgt/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

namespace lgt {

namespace {

void check_inputs(double beta, double ell) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw LgtError(ErrorKind::Precondition, "beta must be finite and >= 0");
    if (!(ell >= 0.0) || !std::isfinite(ell)) throw LgtError(ErrorKind::Precondition, "loop length must be >= 0");
}

// l * r_beta without underflowing the intermediate.
double ell_r(double ell, double log_r) { return ell == 0.0 ? 0.0 : std::exp(std::log(ell) + log_r); }

double log_add(double a, double b) {
    const double hi = std::max(a, b);
    if (hi == -std::numeric_limits<double>::infinity()) return hi;
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

Prediction predict_general(const UnitaryRep& rep, double beta, double ell) {
    check_inputs(beta, ell);
    Prediction out;
    out.regime = "general";
    out.beta = beta;
    out.ell = ell;
    out.rep_id = rep.id();
    out.log_r_beta = log_r_beta(rep, beta);
    out.r_beta = std::exp(out.log_r_beta);
    const auto a = a_beta(rep, beta);
    const double t = ell_r(ell, out.log_r_beta);
    const double top = a.eigenvalues.maxCoeff();
    double shifted = 0.0;
    for (int i = 0; i < a.eigenvalues.size(); ++i) {
        out.eigenvalues.push_back(a.eigenvalues[i]);
        shifted += std::exp(t * (a.eigenvalues[i] - top));
    }
    out.log_value = std::log(shifted) - t * (1.0 - top);
    out.value = std::exp(out.log_value);
    // Shifting by the top eigenvalue keeps the exponential bounded for long loops.
    const CMatrix shifted_a = (t * (a.matrix - top * CMatrix::Identity(a.matrix.rows(), a.matrix.cols()))).eval();
    const CMatrix e = shifted_a.exp();
    out.log_trace_form = std::log(e.trace().real()) - t * (1.0 - top);
    out.trace_form = std::exp(out.log_trace_form);
    return out;
}

Prediction predict_abelian(const UnitaryRep& rep, double beta, double ell) {
    check_inputs(beta, ell);
    if (rep.dim() != 1) throw LgtError(ErrorKind::WrongRegime, "the Abelian formula needs a 1-d rep");
    Prediction out;
    out.regime = "abelian-1d";
    out.beta = beta;
    out.ell = ell;
    out.rep_id = rep.id();
    out.log_r_beta = log_r_beta(rep, beta);
    out.r_beta = std::exp(out.log_r_beta);
    const double a = a_beta(rep, beta).matrix(0, 0).real();
    out.eigenvalues = {a};
    out.log_value = out.log_trace_form = -ell_r(ell, out.log_r_beta) * (1.0 - a);
    out.value = out.trace_form = std::exp(out.log_value);
    return out;
}

Thresholds beta_thresholds(const UnitaryRep& rep) {
    const int n = rep.group().order();
    const double delta = spectrum(rep).delta_g;
    Thresholds t;
    if (n < 2 || delta <= 0.0) {
        t.main = t.abelian = std::numeric_limits<double>::infinity();
        return t;
    }
    t.main = (1000.0 + 14.0 * std::log(static_cast<double>(n))) / delta;
    t.abelian = (60.0 + 14.0 * std::log(static_cast<double>(n - 1))) / delta;
    return t;
}

ErrorBudget error_bound_general(const UnitaryRep& rep, double beta) {
    check_inputs(beta, 0.0);
    ErrorBudget out;
    out.threshold = beta_thresholds(rep).main;
    try {
        out.c_beta = c_beta_main(rep, beta);
    } catch (const LgtError& e) {
        if (e.kind() != ErrorKind::DegenerateSpectrum) throw;
        out.degenerate = true;
    }
    if (out.degenerate || !std::isfinite(out.threshold)) {
        out.c_beta = std::numeric_limits<double>::quiet_NaN();
        out.bound = out.log_bound = std::numeric_limits<double>::infinity();
        out.degenerate = true;
        return out;
    }
    const double delta = spectrum(rep).delta_g;
    const double c = out.c_beta;
    out.log_bound = std::log((2 * std::numbers::e + 2) * rep.dim()) - beta * delta * c / (3 + 2 * c);
    out.bound = std::exp(out.log_bound);
    out.threshold_ok = beta >= out.threshold;
    return out;
}

ErrorBudget error_bound_abelian(const UnitaryRep& rep, double beta, double N, double L) {
    check_inputs(beta, 0.0);
    if (rep.dim() != 1) throw LgtError(ErrorKind::WrongRegime, "the Abelian bound needs a 1-d rep");
    if (!(N >= 1.0) || !(L >= 0.0)) throw LgtError(ErrorKind::Precondition, "need N >= 1 and L >= 0");
    ErrorBudget out;
    out.threshold = beta_thresholds(rep).abelian;
    try {
        out.c_beta = c_beta_abelian(rep, beta);
    } catch (const LgtError& e) {
        if (e.kind() != ErrorKind::DegenerateSpectrum) throw;
        out.degenerate = true;
    }
    if (out.degenerate || !std::isfinite(out.threshold)) {
        out.c_beta = std::numeric_limits<double>::quiet_NaN();
        out.bound = out.log_bound = std::numeric_limits<double>::infinity();
        out.degenerate = true;
        return out;
    }
    const double delta = spectrum(rep).delta_g;
    const double c = out.c_beta;
    const double inner = log_add(-beta * delta / 2, 4 * std::log(N) - beta * L * delta / 2);
    out.log_bound = std::log(2 * std::numbers::e + 2) + inner * c / (1.5 + c);
    out.bound = std::exp(out.log_bound);
    out.threshold_ok = beta >= out.threshold;
    return out;
}

double poisson_pmf(double lambda, long k) {
    if (!(lambda >= 0.0)) throw LgtError(ErrorKind::Precondition, "Poisson rate must be >= 0");
    if (k < 0) return 0.0;
    if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(k * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0));
}

std::vector<double> poisson_pmf_table(double lambda, long kmax) {
    std::vector<double> out;
    for (long k = 0; k <= kmax; ++k) out.push_back(poisson_pmf(lambda, k));
    return out;
}

namespace {

void check_pmf(const std::vector<double>& p) {
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw LgtError(ErrorKind::Normalization, "pmf has a negative or NaN entry");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw LgtError(ErrorKind::Normalization, "pmf sums to " + std::to_string(s));
}

}  // namespace

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    check_pmf(p);
    check_pmf(q);
    double s = 0.0;
    for (std::size_t k = 0; k < std::max(p.size(), q.size()); ++k)
        s += std::abs((k < p.size() ? p[k] : 0.0) - (k < q.size() ? q[k] : 0.0));
    return 0.5 * s;
}

double tv_to_poisson(const std::vector<double>& p, double lambda) {
    check_pmf(p);
    double s = 0.0, head = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double q = poisson_pmf(lambda, static_cast<long>(k));
        head += q;
        s += std::abs(p[k] - q);
    }
    return 0.5 * (s + std::max(0.0, 1.0 - head));
}

double poisson_tv_bound_abelian(const UnitaryRep& rep, double beta, double ell) {
    check_inputs(beta, ell);
    const double lr = log_r_beta(rep, beta);
    return 1290.0 * std::exp(1.5 * ell_r(ell, lr) + lr);
}

double poisson_tv_bound_general(const UnitaryRep& rep, double beta, double ell) {
    check_inputs(beta, ell);
    const double lr = log_r_beta(rep, beta);
    return 300.0 * std::exp(1.5 * ell_r(ell, lr) + lr);
}

double left_tail_bound(double ell, double r_beta) {
    if (!(ell >= 0.0) || !(r_beta >= 0.0)) throw LgtError(ErrorKind::Precondition, "need l >= 0 and r_beta >= 0");
    return 2 * std::numbers::e * std::exp(-0.15 * ell * r_beta);
}

}  // namespace lgt
