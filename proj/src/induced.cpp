#include "lsv/induced.hpp"

#include <cmath>
#include <string>

#include "lsv/rng.hpp"

namespace lsv {

namespace {

void validate(const MapSystem& sys, const InducedSystem& ind) {
    if (!sys.has_hole())
        throw config_error("induced_map", "induced system requires a hole");
    if (!sys.hole()->cylinder)
        throw config_error("induced_map", "induced system requires a cylinder hole");
    if (ind.n_S <= sys.hole()->base_index)
        throw config_error("induced_map", "inducing level must exceed the hole's base index");
    if (ind.n_S > sys.n_max())
        throw config_error("induced_map", "inducing level beyond the partition table");
    if (ind.r_cap < ind.n_S + 2)
        throw config_error("induced_map", "r_cap must be at least n_S + 2");
}

} // namespace

InducedSystem make_induced(const MapSystem& sys, int n_S) {
    if (!sys.has_hole())
        throw config_error("induced_map", "induced system requires a hole");
    InducedSystem ind;
    ind.n_S = n_S < 0 ? sys.hole()->base_index + 2 : n_S;
    validate(sys, ind);
    return ind;
}

FirstReturn first_return(const MapSystem& sys, const InducedSystem& ind, double x) {
    validate(sys, ind);
    double lo = sys.a(ind.n_S);
    if (!(x >= lo && x < 1.0))
        throw config_error("induced_map", "point not in the inducing set");
    FirstReturn out;
    double y = x;
    for (int r = 1; r <= ind.r_cap; ++r) {
        y = sys.apply(y);
        if (y >= lo) {
            out.x = y;
            out.r = r;
            return out;
        }
    }
    throw budget_error("induced_map",
                       "return time exceeded r_cap=" + std::to_string(ind.r_cap));
}

InducedCurveResult induced_escape_curve(const MapSystem& sys, const InducedSystem& ind,
                                        std::size_t n, int t_max, std::uint64_t seed) {
    validate(sys, ind);
    if (n < 1) throw config_error("induced_map", "n must be >= 1");
    if (t_max < 10) throw config_error("induced_map", "t_max must be >= 10");

    double lo = sys.a(ind.n_S);
    double width = 1.0 - lo;
    std::vector<std::uint64_t> alive(static_cast<std::size_t>(t_max) + 1, 0);
    std::uint64_t caps = 0;

    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng(seed, i);
        double x = lo + width * rng.next_double();
        for (int t = 0; t <= t_max; ++t) {
            if (sys.in_hole(x)) break;
            ++alive[static_cast<std::size_t>(t)];
            if (t == t_max) break;
            try {
                x = first_return(sys, ind, x).x;
            } catch (const budget_error&) {
                ++caps; // censored: counted and killed, never silently truncated
                break;
            }
        }
    }

    InducedCurveResult res;
    res.cap_events = caps;
    res.curve.provenance = "induced_map n_S=" + std::to_string(ind.n_S) +
                           " n=" + std::to_string(n) + " seed=" + std::to_string(seed) +
                           " rng=" + std::string(kRngId);
    double dn = static_cast<double>(n);
    bool extinct = false;
    for (int t = 0; t <= t_max; ++t) {
        double s = static_cast<double>(alive[static_cast<std::size_t>(t)]) / dn;
        res.curve.times.push_back(t);
        res.curve.mass.push_back(s);
        res.curve.stderr_.push_back(std::sqrt(s * (1.0 - s) / dn));
        if (s == 0.0) extinct = true;
    }
    if (extinct)
        throw extinction_error("induced_map", "no particle survived to t_max");
    return res;
}

} // namespace lsv
