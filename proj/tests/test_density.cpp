#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "lsv/density.hpp"
#include "lsv/interval_set.hpp"

using namespace lsv;

namespace {

MapSystem make_open(double gamma = 0.5, int n_max = 4000) {
    MapSystem sys(gamma, n_max);
    sys.set_hole(sys.hole_from_word(2, "L"));
    return sys;
}

GridSpec small_spec() {
    GridSpec spec;
    spec.n_align = 2000;
    spec.target_nodes = 20000;
    return spec;
}

} // namespace

TEST_CASE("grid structure") {
    auto sys = make_open();
    auto spec = small_spec();
    auto grid = Grid::build(sys, spec);
    const auto& x = grid->nodes();
    REQUIRE(x.size() >= static_cast<std::size_t>(spec.target_nodes));
    CHECK(x.front() == 0.0);
    CHECK(x.back() == 1.0);
    CHECK(std::is_sorted(x.begin(), x.end()));
    for (std::size_t i = 0; i + 1 < x.size(); ++i) CHECK(x[i] < x[i + 1]);

    // Partition points and hole endpoints are nodes, bitwise.
    for (int n : {1, 2, 10, 500, 2000})
        CHECK(std::binary_search(x.begin(), x.end(), sys.a(n)));
    CHECK(std::binary_search(x.begin(), x.end(), sys.hole()->lo));
    CHECK(std::binary_search(x.begin(), x.end(), sys.hole()->hi));

    // cell_of respects the half-open convention.
    for (std::size_t j : {std::size_t{0}, std::size_t{1}, x.size() / 2, x.size() - 2}) {
        CHECK(grid->cell_of(x[j]) == j);
        CHECK(grid->cell_of(0.5 * (x[j] + x[j + 1])) == j);
    }
    CHECK(grid->cell_of(1.0) == x.size() - 2);
}

TEST_CASE("closed operator conserves mass") {
    MapSystem sys(0.5, 20000);
    auto grid = Grid::build(sys); // default ~1e5 nodes
    for (auto [kind, alpha] : {std::pair{DensityKind::lebesgue, 0.0},
                               std::pair{DensityKind::power, 0.25},
                               std::pair{DensityKind::power, 0.5}}) {
        DensityParams p;
        p.kind = kind;
        p.alpha = alpha;
        auto f = make_density(sys, p, grid);
        REQUIRE(f.mass() == doctest::Approx(1.0).epsilon(1e-14));
        TransferOperator op(sys, grid, /*open=*/false);
        auto lf = op.apply(f);
        // The floor is the constant-tail representation error, measured at
        // 5e-9 for alpha=0.5 (it scales with the tail width a_{n_align};
        // the analytic value is exactly conserved).
        CHECK(lf.mass() == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(op.apply(lf).mass() == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("closed operator matches the two-branch formula pointwise") {
    MapSystem sys(0.5, 4000);
    auto grid = Grid::build(sys, small_spec());
    auto f = make_density(sys, {DensityKind::lebesgue}, grid);
    TransferOperator op(sys, grid, false);
    auto lf = op.apply(f);
    for (double x : {0.037, 0.3, 0.5, 0.61, 0.99}) {
        double expect = 1.0 / sys.derivative(sys.invert_left(x)) + 0.5;
        CHECK(lf.value(x) == doctest::Approx(expect).epsilon(1e-7));
    }
    // exact at nodes (no interpolation there)
    const auto& xs = grid->nodes();
    for (std::size_t i : {xs.size() / 4, xs.size() / 2, xs.size() - 2}) {
        double x = xs[i];
        double expect = 1.0 / sys.derivative(sys.invert_left(x)) + 0.5;
        CHECK(lf.value(x) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("open step equals masked closed step") {
    auto sys = make_open();
    auto grid = Grid::build(sys, small_spec());
    auto f = make_density(sys, {DensityKind::power, 0.25}, grid);
    TransferOperator open_op(sys, grid, true);
    TransferOperator closed_op(sys, grid, false);

    const auto& xs = grid->nodes();
    double lo = sys.hole()->lo, hi = sys.hole()->hi;
    auto mask = [&](const SingularDensity& d) {
        auto gl = d.g_left();
        auto gr = d.g_right();
        for (std::size_t j = 0; j + 1 < xs.size(); ++j)
            if (xs[j] >= lo && xs[j + 1] <= hi) gl[j] = gr[j] = 0.0;
        return SingularDensity::from_cells(grid, d.alpha(), std::move(gl), std::move(gr));
    };

    auto a = open_op.apply(f);
    auto b = mask(closed_op.apply(mask(f)));
    REQUIRE(a.cells() == b.cells());
    for (std::size_t j = 0; j < a.cells(); ++j) {
        CHECK(a.g_left()[j] == doctest::Approx(b.g_left()[j]).epsilon(1e-12));
        CHECK(a.g_right()[j] == doctest::Approx(b.g_right()[j]).epsilon(1e-12));
    }
    CHECK(a.mass() == doctest::Approx(b.mass()).epsilon(1e-12));
}

TEST_CASE("open iteration mass matches the exact interval engine") {
    auto sys = make_open();
    auto grid = Grid::build(sys, small_spec());
    auto masses = survivor_masses(sys, 20);

    SUBCASE("lebesgue") {
        auto f = make_density(sys, {DensityKind::lebesgue}, grid);
        auto res = iterate_open(sys, f, 20);
        CHECK(res.curve.at(0) ==
              doctest::Approx(survivor(sys, 0).lebesgue_mass()).epsilon(1e-12));
        for (int t : {1, 2, 5, 10, 20}) {
            double rel = std::abs(res.curve.at(t) - masses[t]) / masses[t];
            CHECK(rel < 1e-4);
        }
    }
    SUBCASE("power alpha=0.5") {
        auto f = make_density(sys, {DensityKind::power, 0.5}, grid);
        auto res = iterate_open(sys, f, 20);
        for (int t : {1, 2, 5, 10, 20}) {
            double exact = survivor(sys, t).alpha_mass(0.5);
            double rel = std::abs(res.curve.at(t) - exact) / exact;
            CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("surviving mass decreases and concentrates near zero") {
    auto sys = make_open();
    auto grid = Grid::build(sys, small_spec());
    auto f = make_density(sys, {DensityKind::lebesgue}, grid);
    auto res = iterate_open(sys, f, 200, {20, 100, 200});
    for (std::size_t i = 1; i < res.curve.size(); ++i)
        CHECK(res.curve.mass[i] <= res.curve.mass[i - 1]);
    double m20 = mass_near_zero(res.checkpoints.at(20), 0.05);
    double m100 = mass_near_zero(res.checkpoints.at(100), 0.05);
    double m200 = mass_near_zero(res.checkpoints.at(200), 0.05);
    CHECK(m100 > m20);
    CHECK(m200 > m100);
    CHECK(m200 > 0.5);
}

TEST_CASE("power density closed forms") {
    MapSystem sys(0.5, 4000);
    auto grid = Grid::build(sys, small_spec());
    for (double alpha : {0.25, 0.5, 0.75}) {
        auto f = make_density(sys, {DensityKind::power, alpha}, grid);
        CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-13));
        for (double eps : {0.01, 0.05, 0.3, 1.0})
            CHECK(f.integral_to(eps) ==
                  doctest::Approx(std::pow(eps, 1.0 - alpha)).epsilon(1e-12));
        CHECK(f.value(0.3) ==
              doctest::Approx((1.0 - alpha) * std::pow(0.3, -alpha)).epsilon(1e-12));
        CHECK(std::isinf(f.value(0.0)));
    }
}

TEST_CASE("srb proxy has the invariant-density singularity exponent") {
    MapSystem sys(0.5, 4000);
    auto grid = Grid::build(sys, small_spec());
    DensityParams p;
    p.kind = DensityKind::srb_proxy;
    p.burn_in = 200;
    auto f = make_density(sys, p, grid);
    CHECK(f.alpha() == sys.gamma());
    CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-12));
    auto band = [&](double lo_x, double hi_x) {
        const auto& xs = grid->nodes();
        double lo = 1e30, hi = 0.0;
        for (std::size_t i = 1; i < xs.size() && xs[i] < hi_x; ++i) {
            if (xs[i] < lo_x) continue;
            double g = f.g_at(xs[i]);
            lo = std::min(lo, g);
            hi = std::max(hi, g);
        }
        REQUIRE(lo > 0.0);
        return hi / lo;
    };
    // Above the burn-in convergence scale (the regular factor equilibrates
    // at x only after ~x^{-1/2} iterations) the band is tight.
    CHECK(band(1e-4, 1e-3) < 3.0);
    // Down to the deepest node (~5e-7 here) the factor still reflects the
    // unconverged start; pilot measured 5.48 on this grid at burn_in=200.
    CHECK(band(0.0, 1e-3) < 8.0);
}

TEST_CASE("holder seminorm basics") {
    MapSystem sys(0.5, 4000);
    auto grid = Grid::build(sys, small_spec());
    double p = sys.gamma() / (sys.gamma() + 1.0);

    // Constant regular factor: log f is constant on each element.
    auto leb = make_density(sys, {DensityKind::lebesgue}, grid);
    auto rep = holder_seminorm(sys, leb, p, 200);
    CHECK(rep.seminorm == doctest::Approx(0.0).epsilon(1e-10));
    CHECK_FALSE(rep.infinite_flag);

    // Scale invariance: c*f has the same seminorm.
    auto g_fn = [](double x) { return 1.0 + 0.5 * std::sin(20.0 * x); };
    const auto& xs = grid->nodes();
    std::vector<double> g1(xs.size()), g2(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        g1[i] = g_fn(xs[i]);
        g2[i] = 7.3 * g1[i];
    }
    SingularDensity f1(grid, 0.3, g1), f2(grid, 0.3, g2);
    auto r1 = holder_seminorm(sys, f1, p, 200);
    auto r2 = holder_seminorm(sys, f2, p, 200);
    CHECK(r1.seminorm == doctest::Approx(r2.seminorm).epsilon(1e-12));
    CHECK(r1.seminorm > 0.0);
    CHECK(std::isfinite(r1.seminorm));

    // Vanishing on part of an element only: infinite.
    auto mixed = make_density_from(
        sys, 0.0, [](double x) { return x < 0.52 ? 0.0 : 1.0; }, grid);
    auto rm = holder_seminorm(sys, mixed, p, 50);
    CHECK(rm.infinite_flag);
    CHECK(std::isinf(rm.seminorm));
}

TEST_CASE("holder seminorm stays uniformly bounded along the open iteration") {
    auto sys = make_open();
    auto grid = Grid::build(sys, small_spec());
    auto f = make_density(sys, {DensityKind::lebesgue}, grid);
    auto res = iterate_open(sys, f, 1000, {50, 100, 500, 1000});
    double p = sys.gamma() / (sys.gamma() + 1.0);
    auto sn = [&](int t) {
        auto r = holder_seminorm(sys, res.checkpoints.at(t), p, 400);
        CHECK_FALSE(r.infinite_flag);
        return r.seminorm;
    };
    double early = std::max(sn(50), sn(100));
    double late = std::max(sn(500), sn(1000));
    CHECK(std::isfinite(late));
    // Pilot fixture: measured 1.459 at t=100 and 1.647 at t=1000 (the
    // sequence saturates rather than growing).
    CHECK(late <= 1.2 * early);
}

TEST_CASE("configuration errors") {
    MapSystem sys(0.5, 4000);
    auto grid = Grid::build(sys, small_spec());
    std::vector<double> g(grid->size(), 1.0);
    CHECK_THROWS_AS(SingularDensity(grid, 1.0, g), config_error);
    CHECK_THROWS_AS(SingularDensity(grid, -0.1, g), config_error);
    CHECK_THROWS_AS(SingularDensity(grid, 0.5, std::vector<double>(3, 1.0)), config_error);
    CHECK_THROWS_AS(TransferOperator(sys, grid, /*open=*/true), config_error);

    auto f = make_density(sys, {DensityKind::lebesgue}, grid);
    CHECK_THROWS_AS((void)iterate_open(sys, f, 10), config_error);
    CHECK_THROWS_AS((void)mass_near_zero(f, 0.0), config_error);
    CHECK_THROWS_AS((void)mass_near_zero(f, 2.0), config_error);

    auto other = Grid::build(sys, {1000, 5000});
    TransferOperator op(sys, other, false);
    CHECK_THROWS_AS((void)op.apply(f), config_error);
}

TEST_CASE("deterministic iteration") {
    auto sys = make_open();
    auto grid = Grid::build(sys, small_spec());
    auto f = make_density(sys, {DensityKind::power, 0.25}, grid);
    auto r1 = iterate_open(sys, f, 30);
    auto r2 = iterate_open(sys, f, 30);
    for (std::size_t i = 0; i < r1.curve.size(); ++i)
        CHECK(r1.curve.mass[i] == r2.curve.mass[i]);
}
