#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "lsv/induced.hpp"
#include "lsv/rng.hpp"

using namespace lsv;

namespace {

MapSystem make_open(double gamma = 0.5, int n_max = 5000) {
    MapSystem sys(gamma, n_max);
    sys.set_hole(sys.hole_from_word(2, "L"));
    return sys;
}

// slope and R^2 of an ordinary least-squares line through (t, log s_t)
std::pair<double, double> log_linear_fit(const EscapeCurve& c, int t_lo, int t_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        int t = c.times[i];
        if (t < t_lo || t > t_hi || c.mass[i] <= 0.0) continue;
        double x = t, y = std::log(c.mass[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y; n += 1;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double icept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ybar = sy / n;
    for (std::size_t i = 0; i < c.size(); ++i) {
        int t = c.times[i];
        if (t < t_lo || t > t_hi || c.mass[i] <= 0.0) continue;
        double y = std::log(c.mass[i]);
        double fit = icept + slope * t;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - ybar) * (y - ybar);
    }
    return {slope, 1.0 - ss_res / ss_tot};
}

} // namespace

TEST_CASE("default inducing level and validation") {
    auto sys = make_open();
    auto ind = make_induced(sys);
    CHECK(ind.n_S == 4); // hole base index 2, smallest legal level + margin
    CHECK(ind.r_cap == 1000000);
    CHECK_THROWS_AS((void)make_induced(sys, 2), config_error);
    CHECK_THROWS_AS((void)make_induced(sys, 1), config_error);
    MapSystem closed(0.5, 64);
    CHECK_THROWS_AS((void)make_induced(closed), config_error);
    InducedSystem bad{4, 3};
    CHECK_THROWS_AS((void)first_return(sys, bad, 0.8), config_error);
}

TEST_CASE("immediate returns on the right half") {
    auto sys = make_open();
    auto ind = make_induced(sys);
    for (double x : {0.75, 0.8, 0.9, 0.99}) {
        auto fr = first_return(sys, ind, x);
        CHECK(fr.r == 1);
        CHECK(fr.x == doctest::Approx(2.0 * x - 1.0).epsilon(1e-15));
    }
}

TEST_CASE("ladder returns: T(x) in J_{n_S+k} gives R = k+1") {
    auto sys = make_open();
    auto ind = make_induced(sys);
    for (int k = 1; k <= 12; ++k) {
        int m = ind.n_S + k;
        double y = 0.5 * (sys.a(m) + sys.a(m - 1)); // middle of J_m
        double x = (y + 1.0) / 2.0;                  // right-branch preimage, in I_S
        auto fr = first_return(sys, ind, x);
        CHECK(fr.r == k + 1);
        CHECK(fr.x >= sys.a(ind.n_S));
        CHECK(fr.x < 1.0);
    }
}

TEST_CASE("R = 1 exactly on I_S intersected with its preimage") {
    auto sys = make_open();
    auto ind = make_induced(sys);
    double lo = sys.a(ind.n_S);
    for (std::size_t i = 0; i < 20000; ++i) {
        CounterRng rng(13, i);
        double x = lo + (1.0 - lo) * rng.next_double();
        bool one_step = sys.apply(x) >= lo;
        CHECK((first_return(sys, ind, x).r == 1) == one_step);
    }
}

TEST_CASE("return-time tail matches the closed-form preimage mass") {
    auto sys = make_open();
    auto ind = make_induced(sys);
    double lo = sys.a(ind.n_S);
    double width = 1.0 - lo;
    const std::size_t n = 500000;
    std::vector<int> rs(n);
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng(29, i);
        double x = lo + width * rng.next_double();
        rs[i] = first_return(sys, ind, x).r;
    }
    // R > r exactly when T(x) falls below a_{n_S + r - 1}; only the right
    // branch reaches there from I_S, so the exact mass is a_{n_S+r-1}/2.
    for (int r : {2, 5, 10, 20, 40}) {
        double exact = sys.a(ind.n_S + r - 1) / 2.0 / width;
        std::size_t hits = 0;
        for (int v : rs) hits += (v > r);
        double got = static_cast<double>(hits) / static_cast<double>(n);
        double sd = std::sqrt(exact * (1.0 - exact) / static_cast<double>(n));
        CHECK(std::abs(got - exact) <= 4.0 * sd);
    }
    // and the r^{-1/gamma} shape: r^2 * P(R > r) approaches a constant.
    // Pilot: ratio 2.55 between r=5 and r=40 (preasymptotic corrections to
    // a_n at small index), 1.15 between r=40 and r=320.
    double c5 = 25.0 * sys.a(ind.n_S + 4) / 2.0 / width;
    double c40 = 1600.0 * sys.a(ind.n_S + 39) / 2.0 / width;
    double c320 = 320.0 * 320.0 * sys.a(ind.n_S + 319) / 2.0 / width;
    CHECK(c40 / c5 > 0.5);
    CHECK(c40 / c5 < 3.0);
    CHECK(c320 / c40 > 0.8);
    CHECK(c320 / c40 < 1.25);
}

TEST_CASE("induced survival decays exponentially") {
    auto sys = make_open();
    auto ind = make_induced(sys);
    auto res = induced_escape_curve(sys, ind, 100000, 40, 71);
    CHECK(res.cap_events == 0);

    // t=0 value: (m(I_S) - m(H)) / m(I_S)
    double lo = sys.a(ind.n_S);
    double expect0 = (1.0 - lo - sys.hole()->width()) / (1.0 - lo);
    CHECK(std::abs(res.curve.at(0) - expect0) <= 4.0 * res.curve.stderr_[0] + 1e-12);

    for (std::size_t i = 1; i < res.curve.size(); ++i)
        CHECK(res.curve.mass[i] <= res.curve.mass[i - 1]);

    auto [slope, r2] = log_linear_fit(res.curve, 5, 40);
    double sigma = std::exp(slope);
    CHECK(sigma < 1.0);
    CHECK(r2 > 0.99);

    // stability of sigma when n doubles
    auto res2 = induced_escape_curve(sys, ind, 200000, 40, 72);
    auto [slope2, r22] = log_linear_fit(res2.curve, 5, 40);
    CHECK(r22 > 0.99);
    CHECK(std::abs(std::exp(slope2) - sigma) / sigma < 0.05);
}

TEST_CASE("determinism") {
    auto sys = make_open();
    auto ind = make_induced(sys);
    auto a = induced_escape_curve(sys, ind, 20000, 15, 5);
    auto b = induced_escape_curve(sys, ind, 20000, 15, 5);
    for (std::size_t i = 0; i < a.curve.size(); ++i)
        CHECK(a.curve.mass[i] == b.curve.mass[i]);
}

TEST_CASE("domain errors") {
    auto sys = make_open();
    auto ind = make_induced(sys);
    CHECK_THROWS_AS((void)first_return(sys, ind, 0.01), config_error);
    CHECK_THROWS_AS((void)induced_escape_curve(sys, ind, 0, 20, 1), config_error);
    CHECK_THROWS_AS((void)induced_escape_curve(sys, ind, 100, 5, 1), config_error);
}
