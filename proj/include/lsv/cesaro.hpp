#ifndef LSV_CESARO_HPP
#define LSV_CESARO_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lsv/density.hpp"
#include "lsv/interval_set.hpp"
#include "lsv/map_system.hpp"

namespace lsv {

// A pluggable open dynamical system on [0,1): map evaluation, hole
// membership, an initial-measure sampler (returning a position and an
// importance weight relative to the reference measure), and -- when the
// map's interval preimages are computable -- a preimage callback used by
// the singularity diagnostic.
struct OpenSystemSpec {
    std::string label;
    std::function<double(double)> apply;
    std::function<bool(double)> in_hole;
    // draws (position, weight); weight is d(reference)/d(proposal), constant
    // factors immaterial (diagnostics self-normalize)
    std::function<std::pair<double, double>(std::uint64_t seed, std::uint64_t index)> sampler;
    IntervalSet hole_set;
    std::function<IntervalSet(const IntervalSet&)> preimage; // empty when unsupported
    std::vector<double> default_bins;
};

// The LSV system with its current hole. proposal_beta < 0 samples the
// reference measure directly; otherwise positions are drawn from the
// proposal (1-beta) x^{-beta} with importance weights, which keeps deep
// low-x survivors represented at large times.
OpenSystemSpec lsv_spec(std::shared_ptr<const MapSystem> sys, const DensityParams& reference,
                        double proposal_beta = -1.0,
                        std::shared_ptr<const SingularDensity> srb = nullptr);

// The doubling map 2x mod 1 with hole [lo, hi): the exponential-escape
// negative control.
OpenSystemSpec doubling_spec(double hole_lo, double hole_hi);

struct CesaroState {
    std::vector<double> bins;
    std::vector<double> accum;          // bin masses of mu_t; sums to 1
    std::vector<double> per_step_norm;  // measured survival fractions s_k, k < t
    int t = 0;
};

// Accumulates mu_t = (1/t) sum_{k<t} (normalized pushforward at step k)
// from an n-particle ensemble; each step contributes total mass exactly
// 1/t (self-normalized by the measured survival fraction).
CesaroState cesaro_accumulate(const OpenSystemSpec& spec, std::size_t n, int t,
                              std::uint64_t seed,
                              const std::vector<double>* bins = nullptr);

// mu_t-mass of U_i = union of T^{-j}(H), j <= i (interval unions; bins
// overlapping partially count fractionally).
double singularity_diagnostic(const OpenSystemSpec& spec, const CesaroState& state, int i);

// max over the test family of |int phi(T x) dmu_t - int phi dmu_t|,
// evaluated on bin centers. Uses the built-in bump/wave family when
// test_functions is empty.
double invariance_diagnostic(const OpenSystemSpec& spec, const CesaroState& state,
                             const std::vector<std::function<double(double)>>&
                                 test_functions = {});

// Empirical density profile of A_lambda = {k : beta_k <= lambda} at dyadic
// k: pairs (k, #(A_lambda intersect [1,k]) / k). betas[j] is beta_{j+1}.
std::vector<std::pair<long, double>> zero_density_check(const std::vector<double>& betas,
                                                        double lambda);

} // namespace lsv

#endif
