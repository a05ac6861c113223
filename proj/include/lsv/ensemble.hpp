#ifndef LSV_ENSEMBLE_HPP
#define LSV_ENSEMBLE_HPP

#include <cstdint>
#include <vector>

#include "lsv/density.hpp"
#include "lsv/escape_curve.hpp"
#include "lsv/map_system.hpp"

namespace lsv {

// Particle ensemble. Dead particles are retained and flagged so pushforward
// histograms at several times can reuse one evolution pass.
struct Ensemble {
    std::vector<double> positions;
    std::vector<std::uint8_t> alive;
    int t = 0;
    std::uint64_t seed = 0;
    std::size_t n_total = 0;

    std::size_t alive_count() const {
        std::size_t k = 0;
        for (auto a : alive) k += a;
        return k;
    }
};

// Draws n particles from the requested initial density. Per-particle
// counter-based streams make the result independent of evaluation order.
// For srb_proxy, a precomputed density can be supplied to avoid repeating
// the burn-in; sampling is rejection against the envelope c*x^{-gamma}.
Ensemble sample_initial(const MapSystem& sys, const DensityParams& params, std::size_t n,
                        std::uint64_t seed, const SingularDensity* srb = nullptr);

// Iterates every particle t_max steps, killing on hole entry (checked at
// every time including t=0), and records survival fractions with binomial
// standard errors. Advances e.t. Without a hole all particles survive.
EscapeCurve evolve_record(const MapSystem& sys, Ensemble& e, int t_max);

// Memory-light variant for large n: particles are generated, evolved and
// discarded one at a time; only per-time alive counts are kept. Produces
// the same curve as sample_initial + evolve_record with the same seed.
EscapeCurve evolve_streaming(const MapSystem& sys, const DensityParams& params, std::size_t n,
                             int t_max, std::uint64_t seed, const SingularDensity* srb = nullptr);

// Normalized histogram of alive positions over cells [bins[j], bins[j+1]).
// Throws extinction_error when no particle is alive.
std::vector<double> empirical_pushforward(const Ensemble& e, const std::vector<double>& bins);

} // namespace lsv

#endif
