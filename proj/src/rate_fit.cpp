#include "lsv/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsv/rng.hpp"

namespace lsv {

namespace {

struct FitData {
    std::vector<double> x, y, w;
};

FitData gather(const EscapeCurve& c, int t_lo, int t_hi, bool log_time) {
    if (t_lo >= t_hi)
        throw config_error("rate_analysis", "degenerate window: t_lo >= t_hi");
    FitData d;
    bool weighted = true;
    for (std::size_t i = 0; i < c.size(); ++i) {
        int t = c.times[i];
        if (t < t_lo || t > t_hi) continue;
        if (log_time && t < 1) continue;
        if (!(c.mass[i] > 0.0))
            throw config_error("rate_analysis", "nonpositive mass in fit window");
        d.x.push_back(log_time ? std::log(static_cast<double>(t))
                               : static_cast<double>(t));
        d.y.push_back(std::log(c.mass[i]));
        // variance of log m is (stderr/m)^2
        double se = c.stderr_[i];
        if (se > 0.0)
            d.w.push_back((c.mass[i] / se) * (c.mass[i] / se));
        else
            weighted = false;
    }
    if (d.x.size() < 10)
        throw config_error("rate_analysis", "degenerate window: fewer than 10 points");
    if (!weighted || d.w.size() != d.x.size())
        d.w.assign(d.x.size(), 1.0);
    return d;
}

RateFit line_fit(const FitData& d, RateModel model, int t_lo, int t_hi) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        sw += d.w[i];
        sx += d.w[i] * d.x[i];
        sy += d.w[i] * d.y[i];
        sxx += d.w[i] * d.x[i] * d.x[i];
        sxy += d.w[i] * d.x[i] * d.y[i];
    }
    double det = sw * sxx - sx * sx;
    if (!(det > 0.0))
        throw config_error("rate_analysis", "degenerate window: no spread in times");
    double slope = (sw * sxy - sx * sy) / det;
    double icept = (sy - slope * sx) / sw;

    double ss_res = 0, ss_tot = 0, ybar = sy / sw;
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        double r = d.y[i] - (icept + slope * d.x[i]);
        ss_res += d.w[i] * r * r;
        ss_tot += d.w[i] * (d.y[i] - ybar) * (d.y[i] - ybar);
    }
    RateFit fit;
    fit.model = model;
    fit.value = -slope;
    fit.r2 = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    double n = static_cast<double>(d.x.size());
    double sigma2 = n > 2 ? ss_res / (n - 2.0) : 0.0;
    fit.ci = 1.96 * std::sqrt(sigma2 * sw / det);
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    return fit;
}

} // namespace

RateFit fit_polynomial_rate(const EscapeCurve& c, int t_lo, int t_hi) {
    return line_fit(gather(c, t_lo, t_hi, true), RateModel::polynomial, t_lo, t_hi);
}

RateFit fit_exponential_rate(const EscapeCurve& c, int t_lo, int t_hi) {
    return line_fit(gather(c, t_lo, t_hi, false), RateModel::exponential, t_lo, t_hi);
}

ModelSelection model_select(const EscapeCurve& c) {
    if (c.size() < 30)
        throw config_error("rate_analysis", "model selection needs at least 30 points");
    int t_mid = c.times[c.size() / 2];
    int t_end = c.times.back();
    ModelSelection sel;
    sel.poly = fit_polynomial_rate(c, t_mid, t_end);
    sel.expo = fit_exponential_rate(c, t_mid, t_end);
    sel.choice = sel.poly.r2 >= sel.expo.r2 ? RateModel::polynomial : RateModel::exponential;
    sel.inconclusive = std::abs(sel.poly.r2 - sel.expo.r2) < 1e-3;
    return sel;
}

std::vector<BetaPoint> beta_sequence(const EscapeCurve& c) {
    std::vector<BetaPoint> out;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        if (c.times[i + 1] != c.times[i] + 1) continue;
        if (!(c.mass[i] > 0.0) || !(c.mass[i + 1] > 0.0))
            throw config_error("rate_analysis", "beta sequence needs positive masses");
        BetaPoint p;
        p.t = c.times[i];
        p.beta = c.mass[i + 1] / c.mass[i];
        p.compensated = static_cast<double>(p.t) * (1.0 - p.beta);
        out.push_back(p);
    }
    return out;
}

DistortionReport distortion_check(const MapSystem& sys, int t, int n, int samples,
                                  std::uint64_t seed) {
    if (t < 1 || n < 1) throw config_error("rate_analysis", "t and n must be >= 1");
    if (samples < 2) throw config_error("rate_analysis", "need at least 2 samples");
    if (n + t > sys.n_max())
        throw config_error("rate_analysis",
                           "no admissible word: partition table shorter than n+t");

    double gamma = sys.gamma();
    double p = gamma / (gamma + 1.0);
    double exp_a = (gamma + 1.0) / gamma;
    DistortionReport rep;
    rep.samples = samples;

    int words = std::max(1, samples / 4);
    for (int w = 0; w < words; ++w) {
        CounterRng rng(seed, static_cast<std::uint64_t>(w));
        // Pull J_n back t steps. The predecessor of J_k is J_{k+1} via the
        // left branch, or a sub-interval of J_0 via the right branch; both
        // choices are always admissible.
        double lo = sys.a(n), hi = sys.a(n - 1);
        for (int j = 0; j < t; ++j) {
            bool right = rng.next_double() < 0.5;
            if (right) {
                lo = (lo + 1.0) / 2.0;
                hi = (hi + 1.0) / 2.0;
            } else {
                double nlo = sys.invert_left(lo);
                double nhi = hi >= 1.0 ? 0.5 : sys.invert_left(hi);
                lo = nlo;
                hi = nhi;
            }
        }
        int per_word = std::max(2, samples / words);
        std::vector<double> xs(static_cast<std::size_t>(per_word));
        for (int s = 0; s < per_word; ++s)
            xs[static_cast<std::size_t>(s)] =
                lo + (hi - lo) * (s + rng.next_double()) / per_word;

        std::vector<double> log_dt(xs.size(), 0.0), image(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double x = xs[i];
            double acc = 0.0;
            for (int j = 0; j < t; ++j) {
                acc += std::log(sys.derivative(x));
                x = sys.apply(x);
            }
            log_dt[i] = acc;
            image[i] = x;
            double part_a = std::exp(-acc) * std::pow((n + t) / static_cast<double>(n), exp_a);
            rep.part_a = std::max(rep.part_a, part_a);
        }
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = i + 1; j < xs.size(); ++j) {
                double dx = std::abs(image[i] - image[j]);
                if (dx <= 0.0) continue;
                double part_b = std::abs(log_dt[i] - log_dt[j]) / std::pow(dx, p);
                rep.part_b = std::max(rep.part_b, part_b);
            }
    }
    return rep;
}

DoubleSumResult double_sum_oracle(double a, double b, int n0, int n1, long t) {
    if (!(a > 1.0 && b > 1.0))
        throw config_error("rate_analysis", "double sum needs a, b > 1");
    if (!(n0 > n1 + 1))
        throw config_error("rate_analysis", "double sum needs n0 > n1 + 1");
    if (!(n0 + 1 <= t + n1))
        throw config_error("rate_analysis", "double sum needs n0 + 1 <= t + n1");

    // Kahan summation; terms span many orders of magnitude.
    double sum = 0.0, comp = 0.0;
    for (long n = n0 + 1; n <= t + n1; ++n) {
        double term = std::pow(static_cast<double>(n), -a) *
                      std::pow(static_cast<double>(t - n + n0), -b);
        double y = term - comp;
        double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    DoubleSumResult res;
    res.sum = sum;
    res.ratio = sum / std::pow(static_cast<double>(t), -std::min(a, b));
    return res;
}

} // namespace lsv
