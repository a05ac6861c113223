#ifndef LSV_RATE_FIT_HPP
#define LSV_RATE_FIT_HPP

#include <cstdint>
#include <vector>

#include "lsv/escape_curve.hpp"
#include "lsv/map_system.hpp"

namespace lsv {

enum class RateModel { polynomial, exponential };

struct RateFit {
    RateModel model = RateModel::polynomial;
    double value = 0.0; // polynomial exponent, or exponential rate (-slope)
    double ci = 0.0;    // 95% half-width from regression residuals
    double r2 = 0.0;
    int t_lo = 0, t_hi = 0;
};

// Weighted least squares of log(mass) against log(t) (polynomial) or t
// (exponential) over times in [t_lo, t_hi]. Weights come from the curve's
// standard errors when all are positive, otherwise uniform. Requires at
// least 10 points in the window, all masses positive, t >= 1 for the
// polynomial model.
RateFit fit_polynomial_rate(const EscapeCurve& c, int t_lo, int t_hi);
RateFit fit_exponential_rate(const EscapeCurve& c, int t_lo, int t_hi);

struct ModelSelection {
    RateModel choice = RateModel::polynomial;
    RateFit poly, expo;
    bool inconclusive = false; // tail-half R^2 values within 1e-3
};

// Fits both models on the tail half of the curve and picks the better R^2.
ModelSelection model_select(const EscapeCurve& c);

struct BetaPoint {
    int t = 0;
    double beta = 0.0;        // mass_{t+1} / mass_t
    double compensated = 0.0; // t * (1 - beta)
};

std::vector<BetaPoint> beta_sequence(const EscapeCurve& c);

// Samples pairs x, y in a common cylinder pulled back t steps from J_n
// along random admissible backward itineraries, and reports the sampled
// suprema of
//   (a) DT^t(x)^{-1} * ((n+t)/n)^{(gamma+1)/gamma}
//   (b) |log(DT^t x / DT^t y)| / |T^t x - T^t y|^p, p = gamma/(gamma+1).
struct DistortionReport {
    double part_a = 0.0;
    double part_b = 0.0;
    int samples = 0;
};

DistortionReport distortion_check(const MapSystem& sys, int t, int n, int samples,
                                  std::uint64_t seed);

// Direct evaluation of sum_{n=n0+1}^{t+n1} n^{-a} (t-n+n0)^{-b} and its
// ratio to t^{-min(a,b)}.
struct DoubleSumResult {
    double sum = 0.0;
    double ratio = 0.0;
};

DoubleSumResult double_sum_oracle(double a, double b, int n0, int n1, long t);

} // namespace lsv

#endif
