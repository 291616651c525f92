#pragma once

#include <string>
#include <vector>

#include "lgt/group.hpp"

namespace lgt {

struct Prediction {
    double value = 0.0;
    double log_value = 0.0;   // stays finite when value underflows
    double trace_form = 0.0;  // e^{-l r} Tr exp(l r A_beta), via a matrix exponential
    double log_trace_form = 0.0;
    std::string regime;       // "abelian-1d" or "general"
    double beta = 0.0, ell = 0.0;
    std::string rep_id;
    double r_beta = 0.0, log_r_beta = 0.0;
    std::vector<double> eigenvalues;
};

// sum_i exp(-l r_beta (1 - lambda_i(beta))).
Prediction predict_general(const UnitaryRep& rep, double beta, double ell);
// exp(-l r_beta (1 - A_beta)); 1-d reps only.
Prediction predict_abelian(const UnitaryRep& rep, double beta, double ell);

struct ErrorBudget {
    double bound = 0.0;      // +inf when the spectrum is degenerate
    double log_bound = 0.0;
    bool threshold_ok = false;
    bool degenerate = false;
    double c_beta = 0.0;     // NaN when degenerate
    double threshold = 0.0;
};

struct Thresholds {
    double main = 0.0, abelian = 0.0;
};
Thresholds beta_thresholds(const UnitaryRep& rep);

ErrorBudget error_bound_general(const UnitaryRep& rep, double beta);
// N: side of the region; L: distance of the loop from its boundary.
ErrorBudget error_bound_abelian(const UnitaryRep& rep, double beta, double N, double L);

double poisson_pmf(double lambda, long k);
// pmf on {0..kmax}; the tail beyond kmax is not included.
std::vector<double> poisson_pmf_table(double lambda, long kmax);
// Half the l1 distance; both inputs must sum to 1 within 1e-9. Shorter pmfs are zero-padded.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);
// TV between a pmf on {0..n} and Poisson(lambda), counting the Poisson tail beyond n.
double tv_to_poisson(const std::vector<double>& p, double lambda);

double poisson_tv_bound_abelian(const UnitaryRep& rep, double beta, double ell);
double poisson_tv_bound_general(const UnitaryRep& rep, double beta, double ell);
double left_tail_bound(double ell, double r_beta);

}  // namespace lgt
