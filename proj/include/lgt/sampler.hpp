#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lgt/exact.hpp"
#include "lgt/gauge.hpp"
#include "lgt/group.hpp"
#include "lgt/lattice.hpp"
#include "lgt/vortex.hpp"

namespace lgt {

// Stateless generator: every draw is a hash of (seed, sweep, edge, slot).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t sweep, std::uint64_t edge, std::uint64_t slot);
double counter_uniform(std::uint64_t seed, std::uint64_t sweep, std::uint64_t edge, std::uint64_t slot);

enum class Algorithm { HeatBath, Metropolis };
enum class Schedule { Sequential, Checkerboard };
Algorithm algorithm_from_string(const std::string& s);
Schedule schedule_from_string(const std::string& s);

// Edges grouped so that no two edges of a class lie on a common plaquette.
std::vector<std::vector<std::size_t>> checkerboard_classes(const CellComplex& cx);

class Chain {
public:
    Chain(const CellComplex& cx, const UnitaryRep& rep, double beta, std::uint64_t seed);
    Chain(const CellComplex& cx, const UnitaryRep& rep, double beta, std::uint64_t seed, EdgeConfig start);

    const EdgeConfig& config() const { return sigma_; }
    double beta() const { return beta_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t sweeps_done() const { return sweeps_; }
    std::uint64_t proposals() const { return proposals_; }
    std::uint64_t accepted() const { return accepted_; }

    // Action of the edge's plaquettes with sigma_e := g, for every g.
    std::vector<double> local_action(std::size_t e) const;
    // Exact conditional law of sigma_e given the rest.
    std::vector<double> conditional(std::size_t e) const;

    void heatbath_update(std::size_t e);
    void metropolis_update(std::size_t e);
    void update(std::size_t e, Algorithm algo);
    void sweep(Algorithm algo, Schedule schedule);

private:
    const CellComplex* cx_;
    const UnitaryRep* rep_;
    double beta_;
    std::uint64_t seed_;
    EdgeConfig sigma_;
    std::uint64_t sweeps_ = 0;
    std::uint64_t proposals_ = 0, accepted_ = 0;
    std::vector<std::vector<std::size_t>> classes_;
};

struct MeasurementRecord {
    std::string observable;
    std::size_t samples = 0;
    Complex mean{0.0, 0.0};
    double stderr_ = 0.0;  // of the real part, batch means
    double ess = 0.0;
    std::vector<double> histogram;     // empirical pmf when relevant
    std::vector<double> histogram_se;  // batch-means error per bin
};

// Batch means over consecutive blocks; at least 20 batches.
struct BatchEstimate {
    double mean = 0.0, stderr_ = 0.0, ess = 0.0;
};
BatchEstimate batch_means(const std::vector<double>& xs, std::size_t batches = 20);
// Pools per-chain batch means; each chain contributes `batches` blocks.
BatchEstimate batch_means(const std::vector<std::vector<double>>& chains, std::size_t batches = 20);

struct SamplerParams {
    Algorithm algo = Algorithm::HeatBath;
    Schedule schedule = Schedule::Sequential;
    std::size_t samples = 1000;
    std::size_t burnin = 1000;
    std::size_t thin = 10;
    std::uint64_t seed = 1;
    std::size_t chains = 1;
    unsigned jobs = 1;
};

struct MeasurementPlan {
    std::vector<Loop> loops;          // Wilson loop and N_gamma records per loop
    std::vector<VortexEvent> events;  // frequency records
    bool ngamma = true;
};

struct MCResult {
    std::vector<MeasurementRecord> wilson;  // per loop
    std::vector<MeasurementRecord> ngamma;  // per loop
    std::vector<MeasurementRecord> events;  // per event
    double acceptance = 1.0;
    std::uint64_t sweeps = 0;
    double seconds = 0.0;
};

MCResult run_mc(const CellComplex& cx, const UnitaryRep& rep, double beta, const MeasurementPlan& plan,
                const SamplerParams& params);

MeasurementRecord measure_wilson(const CellComplex& cx, const UnitaryRep& rep, double beta, const Loop& loop,
                                 const SamplerParams& params);
MeasurementRecord measure_ngamma(const CellComplex& cx, const UnitaryRep& rep, double beta, const Loop& loop,
                                 const SamplerParams& params);

// Whether the support (a per-plaquette mask) realises the event.
bool event_holds(const CellComplex& cx, const VortexEvent& ev, const std::vector<char>& in_support);

}  // namespace lgt
