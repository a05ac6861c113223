#ifndef LSV_ESCAPE_CURVE_HPP
#define LSV_ESCAPE_CURVE_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace lsv {

// Time series of surviving mass. stderr entries are zero for the
// deterministic engines and binomial for Monte Carlo. `provenance`
// records the producing engine and its parameters.
struct EscapeCurve {
    std::vector<int> times;
    std::vector<double> mass;
    std::vector<double> stderr_;
    std::string provenance;

    std::size_t size() const { return times.size(); }

    // Mass at time t; throws if t is not on the curve.
    double at(int t) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (times[i] == t) return mass[i];
        throw std::out_of_range("EscapeCurve: time not on curve");
    }
};

} // namespace lsv

#endif
