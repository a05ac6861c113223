#ifndef LSV_INTERVAL_SET_HPP
#define LSV_INTERVAL_SET_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "lsv/map_system.hpp"

namespace lsv {

// A finite union of sorted, pairwise-disjoint half-open intervals in [0,1).
// Intervals narrower than the pruning floor are dropped on normalization;
// the dropped mass is accumulated in pruned_mass() so round-off slivers
// stay auditable instead of silently distorting results.
class IntervalSet {
public:
    using Interval = std::pair<double, double>;

    static constexpr double kPruneFloor = 1e-15;

    IntervalSet() = default;
    // Normalizes: sorts, merges touching/overlapping intervals (exact
    // endpoint comparison), drops sub-floor slivers.
    explicit IntervalSet(std::vector<Interval> intervals, double inherited_pruned = 0.0);

    static IntervalSet full();                       // [0,1)
    static IntervalSet empty() { return IntervalSet{}; }

    const std::vector<Interval>& intervals() const { return iv_; }
    std::size_t count() const { return iv_.size(); }
    bool is_empty() const { return iv_.empty(); }
    double pruned_mass() const { return pruned_; }

    bool member(double x) const;
    bool subset_of(const IntervalSet& other) const;
    IntervalSet intersect(const IntervalSet& other) const;

    double lebesgue_mass() const;
    // Normalized x^{-alpha}-weighted mass, alpha in [0,1):
    //   \int_S x^{-a} dx / \int_0^1 x^{-a} dx = sum (hi^{1-a} - lo^{1-a}).
    double alpha_mass(double alpha) const;

private:
    std::vector<Interval> iv_;
    double pruned_ = 0.0;
};

struct SurvivorOptions {
    std::size_t max_intervals = 10'000'000;
    int t_max_exact = 25;
};

// T^{-1}(S) via both branch inverses, merged.
IntervalSet preimage(const MapSystem& sys, const IntervalSet& s);

// Survivor set of the open system after t steps:
//   I0 = [0,1) \ H,   I^{k+1} = I0 \cap T^{-1}(I^k).
IntervalSet survivor(const MapSystem& sys, int t, const SurvivorOptions& opts = {});

// Lebesgue masses m(I^0), ..., m(I^{t_max}) from one sweep of the recurrence.
std::vector<double> survivor_masses(const MapSystem& sys, int t_max,
                                    const SurvivorOptions& opts = {});

// E^t: points whose orbit first enters J_h (the cylinder base of the hole)
// at exactly time t.
IntervalSet first_entry_set(const MapSystem& sys, int t, const SurvivorOptions& opts = {});

// m(I^{t-1} \ I^t), t >= 1.
double shell_mass(const MapSystem& sys, int t, const SurvivorOptions& opts = {});

} // namespace lsv

#endif
