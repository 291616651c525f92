#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lgt/forms.hpp"
#include "lgt/gauge.hpp"
#include "lgt/group.hpp"
#include "lgt/lattice.hpp"
#include "lgt/vortex.hpp"

namespace lgt {

struct EnumerationBudget {
    std::uint64_t max_configs = std::uint64_t{1} << 27;
    double max_seconds = 600.0;
};

// Reads LGT_BUDGET (a configuration count) over the given default.
EnumerationBudget budget_from_env(EnumerationBudget base = {});

// Occurrence pattern tested on every enumerated support: each `appear` set is a whole
// vortex, no `absent` set is, and the support avoids every vortex incompatible with a
// `avoid_neighborhood` set.
struct VortexEvent {
    std::vector<PlaquetteSet> appear;
    std::vector<PlaquetteSet> absent;
    std::vector<PlaquetteSet> avoid_neighborhood;
};

struct EnumerationRequest {
    std::vector<Loop> loops;          // Wilson sums and N_gamma counts
    std::vector<VortexEvent> events;  // needs at most 64 plaquettes
    bool ngamma = true;               // needs at most 64 plaquettes
    // When set, only configurations with exactly this support are visited.
    std::optional<PlaquetteSet> restrict_support;
    unsigned jobs = 1;
};

// Aggregates over GF(T) keyed by action level: everything is a polynomial in exp(-beta).
struct DensityOfStates {
    int group_order = 1;
    std::size_t vertices = 0;
    std::vector<double> level_gaps;  // distinct positive gap values
    std::vector<double> energy;      // per key
    std::vector<std::uint64_t> count;
    std::vector<std::vector<Complex>> wilson;                   // [loop][key]
    std::vector<std::size_t> loop_length;
    std::vector<std::vector<std::uint64_t>> ngamma;             // [loop][key * (len + 1) + n]
    std::vector<std::vector<std::uint64_t>> event;              // [event][key]
    std::uint64_t visited = 0;
    double seconds = 0.0;

    // Sum over GF(T) of the Boltzmann weight, and with the N1 = |G|^(|vertices|-1) factor in log form.
    double gauge_fixed_sum(double beta) const;
    double log_partition(double beta) const;
    std::uint64_t configurations() const;
    Complex wilson_mean(std::size_t loop, double beta) const;
    std::vector<double> ngamma_pmf(std::size_t loop, double beta) const;
    double event_probability(std::size_t ev, double beta) const;
};

DensityOfStates enumerate_gauge_fixed(const CellComplex& cx, const UnitaryRep& rep, const SpanningTree& tree,
                                      const EnumerationRequest& req = {}, const EnumerationBudget& budget = {});

// Number of excited plaquettes -> number of configurations, over all |G|^edges configurations.
// Gray-code walk for Z2 on a region with at most 40 edges.
std::vector<std::uint64_t> full_histogram_z2(const CellComplex& cx);
// Exact character sum over time slices for cyclic groups on the single 4-cell, computed
// modulo a 61-bit prime and interpolated; exact while counts stay below the prime.
std::vector<std::uint64_t> full_histogram_cyclic(const CellComplex& cx, int n);

double partition_function(const CellComplex& cx, const UnitaryRep& rep, double beta,
                          const EnumerationBudget& budget = {});
Complex wilson_exact(const CellComplex& cx, const UnitaryRep& rep, double beta, const Loop& loop,
                     const EnumerationBudget& budget = {});
std::vector<double> ngamma_pmf_exact(const CellComplex& cx, const UnitaryRep& rep, double beta, const Loop& loop,
                                     const EnumerationBudget& budget = {});

struct PhiValue {
    double phi = 0.0;
    std::vector<Complex> phi_gamma;  // per requested loop
    std::uint64_t configs = 0;       // configurations with this support
};

// Sum over sigma in GF(T) with supp(sigma) = P.
PhiValue phi_of_set(const CellComplex& cx, const UnitaryRep& rep, double beta, const PlaquetteSet& P,
                    const std::vector<Loop>& loops = {}, const SpanningTree* tree = nullptr,
                    const EnumerationBudget& budget = {});

// Abelian: sum over closed 2-forms q with supp(q) = P; phi_s pairs q with the integer
// surface S through the Wilson character of <q, S>.
struct QFormPhi {
    double phi = 0.0;
    Complex phi_s{0.0, 0.0};
    std::uint64_t forms = 0;
};
QFormPhi phi_qforms(const CellComplex& cx, const UnitaryRep& rep, double beta, const PlaquetteSet& P,
                    const IntForm* surface = nullptr, const EnumerationBudget& budget = {});

// E[W_gamma | P(Sigma) = P] for Abelian groups.
Complex abelian_conditional(const CellComplex& cx, const UnitaryRep& rep, double beta, const PlaquetteSet& P,
                            const Loop& gamma, const EnumerationBudget& budget = {});

enum class FactorizationMode { MinimalVortex, WellSeparated, AbelianCompatible };
FactorizationMode factorization_mode_from_string(const std::string& s);

struct FactorizationResult {
    double phi12 = 0.0, phi1 = 0.0, phi2 = 0.0;
    double residual = 0.0;
};
// Throws Precondition when the mode's hypothesis fails.
FactorizationResult factorization_check(const CellComplex& cx, const UnitaryRep& rep, double beta,
                                        const PlaquetteSet& P1, const PlaquetteSet& P2, FactorizationMode mode,
                                        const EnumerationBudget& budget = {});

// Probability of the event under the full measure.
double vortex_event_prob(const CellComplex& cx, const UnitaryRep& rep, double beta, const VortexEvent& ev,
                         const EnumerationBudget& budget = {});
// Xi over vortex collections avoiding N(Vs) and the explicit list, divided by Xi.
double reduced_correlation(const CellComplex& cx, const UnitaryRep& rep, double beta,
                           const std::vector<PlaquetteSet>& neighborhood_of,
                           const std::vector<PlaquetteSet>& explicit_list, const EnumerationBudget& budget = {});

}  // namespace lgt
