#ifndef LSV_INDUCED_HPP
#define LSV_INDUCED_HPP

#include <cstdint>

#include "lsv/escape_curve.hpp"
#include "lsv/map_system.hpp"

namespace lsv {

// First-return map S = T^R on I_S = [a_{n_S}, 1). The inducing level must
// exceed the hole's base index so the hole lies inside I_S; excursions
// outside I_S then stay in the neutral tail and cannot meet the hole.
struct InducedSystem {
    int n_S = 0;
    int r_cap = 1000000;
};

// Smallest legal inducing level (hole base index + 2) unless overridden.
InducedSystem make_induced(const MapSystem& sys, int n_S = -1);

struct FirstReturn {
    double x = 0.0; // S(x), in I_S
    int r = 0;      // return time, >= 1
};

// Iterates T until the orbit re-enters I_S. Throws budget_error when the
// return time exceeds r_cap.
FirstReturn first_return(const MapSystem& sys, const InducedSystem& ind, double x);

struct InducedCurveResult {
    EscapeCurve curve;          // t = 0..t_max, survival under S w.r.t. m|I_S
    std::uint64_t cap_events = 0; // particles censored at r_cap (killed, counted)
};

// Monte Carlo estimate of the induced open system's survival: mass of
// points of I_S whose S-orbit avoids the hole through t steps, normalized
// by m(I_S).
InducedCurveResult induced_escape_curve(const MapSystem& sys, const InducedSystem& ind,
                                        std::size_t n, int t_max, std::uint64_t seed);

} // namespace lsv

#endif
