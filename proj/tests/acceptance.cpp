// Acceptance gate: thirteen numbered quantitative criteria, one pass/fail
// line each. Tolerances are pinned here; several thresholds are committed
// pilot fixtures produced by the deterministic engines at these exact
// parameters. Exits nonzero when any criterion fails.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

#include "lsv/cesaro.hpp"
#include "lsv/density.hpp"
#include "lsv/ensemble.hpp"
#include "lsv/induced.hpp"
#include "lsv/interval_set.hpp"
#include "lsv/rate_fit.hpp"
#include "lsv/runner.hpp"

using namespace lsv;

namespace {

int g_failures = 0;
std::string g_cli;

double wall() {
    return static_cast<double>(std::clock()) / CLOCKS_PER_SEC;
}

void report(int idx, bool ok, const std::string& detail, double secs) {
    std::printf("criterion %2d %s  %s  (%.0fs)\n", idx, ok ? "PASS" : "FAIL",
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

template <typename F>
void criterion(int idx, F&& body) {
    double t0 = wall();
    try {
        auto [ok, detail] = body();
        report(idx, ok, detail, wall() - t0);
    } catch (const std::exception& e) {
        report(idx, false, std::string("exception: ") + e.what(), wall() - t0);
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

MapSystem open_system(double gamma = 0.5) {
    MapSystem sys(gamma, 20000);
    sys.set_hole(sys.hole_from_word(2, "L"));
    return sys;
}

struct PolyRun {
    double exponent = 0.0;
    double r2 = 0.0;
};

PolyRun density_exponent(const MapSystem& sys, std::shared_ptr<const Grid> grid,
                         const DensityParams& params, int t_max) {
    auto f = make_density(sys, params, grid);
    auto curve = iterate_open(sys, f, t_max).curve;
    auto fit = fit_polynomial_rate(curve, 500, 5000);
    return {fit.value, fit.r2};
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli = argv[1];
    std::setvbuf(stdout, nullptr, _IOLBF, 0);

    MapSystem sys = open_system();
    auto grid = Grid::build(sys, {}); // default: >= 1e5 nodes

    // Criteria 1, 5, 6 share one density-transport run: Lebesgue initial
    // density evolved to t = 1e4 with dyadic checkpoints.
    EscapeCurve leb_curve;
    std::map<int, SingularDensity> leb_chk;
    {
        auto f = make_density(sys, {DensityKind::lebesgue}, grid);
        auto res = iterate_open(sys, f, 10000, {125, 250, 500, 1000, 2000, 10000});
        leb_curve = std::move(res.curve);
        leb_chk = std::move(res.checkpoints);
    }

    // 1. polynomial escape exponent, Lebesgue: target 1/gamma = 2
    criterion(1, [&]() -> std::pair<bool, std::string> {
        auto fit = fit_polynomial_rate(leb_curve, 500, 5000);
        bool ok = fit.value >= 1.7 && fit.value <= 2.3;
        return {ok, "lebesgue exponent " + fmt(fit.value) + " in [1.7, 2.3], r2 " +
                        fmt(fit.r2)};
    });

    // 2. alpha-dependence: power(0.25) -> 1.5, power(0.5) -> 1.0,
    //    each within 15% of target
    criterion(2, [&]() -> std::pair<bool, std::string> {
        auto r25 = density_exponent(sys, grid, {DensityKind::power, 0.25}, 5000);
        auto r50 = density_exponent(sys, grid, {DensityKind::power, 0.5}, 5000);
        bool ok = std::abs(r25.exponent - 1.5) <= 0.15 * 1.5 &&
                  std::abs(r50.exponent - 1.0) <= 0.15;
        return {ok, "power exponents " + fmt(r25.exponent) + " (target 1.5), " +
                        fmt(r50.exponent) + " (target 1.0)"};
    });

    // 3. equilibrium proxy density: exponent (1-gamma)/gamma = 1 within 0.15.
    //    Known shortfall of the proxy itself: a finite burn-in leaves the
    //    regular factor vanishing like x^gamma below scale burn_in^{-1/gamma},
    //    so at the times probed here the measured exponent sits near the
    //    Lebesgue value 2 instead.
    criterion(3, [&]() -> std::pair<bool, std::string> {
        auto r = density_exponent(sys, grid, {DensityKind::srb_proxy, 0.0, 200}, 5000);
        bool ok = std::abs(r.exponent - 1.0) <= 0.15;
        return {ok, "srb exponent " + fmt(r.exponent) + " (target 1.0 +- 0.15)"};
    });

    // 4. three engines agree for t <= 20: density within 1e-4 relative of
    //    exact, Monte Carlo (n = 1e6) within 4 binomial stderr
    criterion(4, [&]() -> std::pair<bool, std::string> {
        auto exact = survivor_masses(sys, 20);
        auto f = make_density(sys, {DensityKind::lebesgue}, grid);
        auto dens = iterate_open(sys, f, 20).curve;
        auto mc = evolve_streaming(sys, {DensityKind::lebesgue}, 1000000, 20, 20240501);
        double rel = 0.0, sig = 0.0;
        for (int t = 0; t <= 20; ++t) {
            auto i = static_cast<std::size_t>(t);
            rel = std::max(rel, std::abs(dens.mass[i] - exact[i]) / exact[i]);
            if (mc.stderr_[i] > 0.0)
                sig = std::max(sig, std::abs(mc.mass[i] - exact[i]) / mc.stderr_[i]);
        }
        bool ok = rel < 1e-4 && sig < 4.0;
        return {ok, "exact/density rel " + fmt(rel) + " < 1e-4, montecarlo " +
                        fmt(sig) + " sigma < 4"};
    });

    // 5. mass accumulates at the neutral fixed point: mass below 0.05 grows
    //    along dyadic checkpoints (slack 0.02) and exceeds 0.8 at t = 1e4
    criterion(5, [&]() -> std::pair<bool, std::string> {
        double prev = -1.0;
        bool ok = true;
        std::string vals;
        for (int t : {125, 250, 500, 1000, 2000}) {
            double m = mass_near_zero(leb_chk.at(t), 0.05);
            ok = ok && m > prev - 0.02;
            prev = m;
            vals += fmt(m) + " ";
        }
        double final_m = mass_near_zero(leb_chk.at(10000), 0.05);
        ok = ok && final_m > 0.8;
        return {ok, "mass(<0.05): " + vals + "-> " + fmt(final_m) + " at t=1e4"};
    });

    // 6. survival ratios beta_t approach 1 like 1 - O(1/t): the compensated
    //    sequence t(1 - beta_t) has a finite sup over [1e2, 5e3] that moves
    //    by < 20% when the window upper end doubles to 1e4
    criterion(6, [&]() -> std::pair<bool, std::string> {
        auto bs = beta_sequence(leb_curve);
        double m1 = 0.0, m2 = 0.0;
        for (auto& b : bs) {
            if (b.t >= 100 && b.t <= 5000) m1 = std::max(m1, b.compensated);
            if (b.t >= 100 && b.t <= 10000) m2 = std::max(m2, b.compensated);
        }
        double change = std::abs(m2 - m1) / m1;
        bool ok = std::isfinite(m2) && m1 > 0.0 && change < 0.2;
        return {ok, "sup t(1-beta): " + fmt(m1) + " -> " + fmt(m2) + ", change " +
                        fmt(100 * change) + "%"};
    });

    // 7. exponential controls
    criterion(7, [&]() -> std::pair<bool, std::string> {
        // (a) hole [0, a_3) removes the neutral region entirely
        MapSystem pys(0.5, 4000);
        pys.set_hole(MapSystem::control_hole(0.0, pys.a(3)));
        auto pgrid = Grid::build(pys, {2000, 20000});
        auto pf = make_density(pys, {DensityKind::lebesgue}, pgrid);
        auto pcurve = iterate_open(pys, pf, 200).curve;
        auto pfit = fit_exponential_rate(pcurve, 20, 200);
        auto psel = model_select(pcurve);
        bool ok_a = pfit.r2 > 0.999 && psel.choice == RateModel::exponential &&
                    !psel.inconclusive;

        // (b) hole [1/2, 3/4) with initial density vanishing on [0, 1/2)
        MapSystem bys(0.5, 4000);
        bys.set_hole(bys.hole_from_word(0, "RL"));
        auto bgrid = Grid::build(bys, {2000, 20000});
        auto bf = make_density_from(bys, 0.0,
                                    [](double x) { return x < 0.5 ? 0.0 : 1.0; }, bgrid);
        auto bcurve = iterate_open(bys, bf, 200).curve;
        auto bfit = fit_exponential_rate(bcurve, 20, 200);
        auto bsel = model_select(bcurve);
        bool ok_b = bfit.r2 > 0.999 && bsel.choice == RateModel::exponential &&
                    !bsel.inconclusive;
        return {ok_a && ok_b, "expanding-control r2 " + fmt(pfit.r2) +
                                  ", vanishing-density rate " + fmt(bfit.value) +
                                  " r2 " + fmt(bfit.r2) + ", both exponential"};
    });

    // 8. induced first-return system escapes exponentially:
    //    sigma = exp(-rate) < 1 with R^2 > 0.99 (Monte Carlo, n = 1e5)
    criterion(8, [&]() -> std::pair<bool, std::string> {
        MapSystem isys(0.5, 4000);
        isys.set_hole(isys.hole_from_word(2, "L"));
        auto ind = make_induced(isys); // n_S = hole base + 2
        auto res = induced_escape_curve(isys, ind, 100000, 40, 77);
        auto fit = fit_exponential_rate(res.curve, 5, 40);
        double sigma = std::exp(-fit.value);
        bool ok = sigma < 1.0 && fit.r2 > 0.99;
        return {ok, "sigma " + fmt(sigma) + " < 1, r2 " + fmt(fit.r2) + " > 0.99"};
    });

    // 9. partition asymptotics for gamma in {0.3, 0.5, 0.75}:
    //    n^{1/gamma} a_n varies by < 2% over [1e3, 1e5] and the compensated
    //    spacings |J_n| n^{(gamma+1)/gamma} stay inside pinned pilot bands
    criterion(9, [&]() -> std::pair<bool, std::string> {
        struct Band { double gamma, lo, hi; };
        // pilot bands with ~3% margin around the measured spacing range
        const Band bands[] = {{0.3, 90.0, 98.5}, {0.5, 3.88, 4.21}, {0.75, 0.95, 1.02}};
        bool ok = true;
        std::string detail;
        for (auto& b : bands) {
            MapSystem gsys(b.gamma, 100000);
            double lo1 = 1e300, hi1 = 0.0;
            bool in_band = true;
            for (int n = 1000; n <= 100000; ++n) {
                double v = std::pow(static_cast<double>(n), 1.0 / b.gamma) * gsys.a(n);
                lo1 = std::min(lo1, v);
                hi1 = std::max(hi1, v);
                if (n < 100000) {
                    double w = (gsys.a(n - 1) - gsys.a(n)) *
                               std::pow(static_cast<double>(n), (b.gamma + 1.0) / b.gamma);
                    in_band = in_band && w >= b.lo && w <= b.hi;
                }
            }
            double var = (hi1 - lo1) / lo1;
            ok = ok && var < 0.02 && in_band;
            detail += "g=" + fmt(b.gamma) + ": " + fmt(100 * var) + "%" +
                      (in_band ? "" : " (spacing out of band)") + "  ";
        }
        return {ok, detail + "(< 2% required)"};
    });

    // 10. compensated shell and first-entry masses stay below their
    //     committed exact-engine pilot maxima over t <= 25
    criterion(10, [&]() -> std::pair<bool, std::string> {
        MapSystem ssys(0.5, 4000);
        ssys.set_hole(ssys.hole_from_word(2, "L"));
        const double shell_bound = 14.8077; // pilot max 14.80769689
        const double entry_bound = 39.5180; // pilot max 39.51798124
        double max_shell = 0.0, max_entry = 0.0;
        for (int t = 1; t <= 25; ++t) {
            double comp = std::pow(static_cast<double>(t), 3.0); // (g+1)/g = 3
            double sm = comp * shell_mass(ssys, t) /
                        (t > 1 ? std::log(static_cast<double>(t)) : 1.0);
            double em = comp * first_entry_set(ssys, t).lebesgue_mass();
            max_shell = std::max(max_shell, sm);
            max_entry = std::max(max_entry, em);
        }
        bool ok = max_shell <= shell_bound && max_entry <= entry_bound;
        return {ok, "shell sup " + fmt(max_shell) + " <= " + fmt(shell_bound) +
                        ", entry sup " + fmt(max_entry) + " <= " + fmt(entry_bound)};
    });

    // 11. distortion suprema over (t,n) in {1..50}^2 finite and stable
    //     under 4x sampling
    criterion(11, [&]() -> std::pair<bool, std::string> {
        MapSystem dsys(0.5, 4000);
        double ma = 0.0, mb = 0.0;
        for (int t = 1; t <= 50; ++t)
            for (int n = 1; n <= 50; ++n) {
                auto r = distortion_check(dsys, t, n, 1024, 1234);
                if (!std::isfinite(r.part_a) || !std::isfinite(r.part_b))
                    return {false, "non-finite distortion at t=" + std::to_string(t) +
                                       " n=" + std::to_string(n)};
                ma = std::max(ma, r.part_a);
                mb = std::max(mb, r.part_b);
            }
        double ma4 = 0.0, mb4 = 0.0;
        for (int t : {1, 5, 10, 25, 50})
            for (int n : {1, 5, 10, 25, 50}) {
                auto r = distortion_check(dsys, t, n, 4096, 1234);
                ma4 = std::max(ma4, r.part_a);
                mb4 = std::max(mb4, r.part_b);
            }
        bool ok = ma4 <= 1.05 * ma && mb4 <= 1.05 * mb;
        return {ok, "sup_a " + fmt(ma) + ", sup_b " + fmt(mb) +
                        "; 4x sampling within 5%"};
    });

    // 12. Cesaro averages become singular and invariant (n = 1e6): the mass
    //     of the hole's 3-step past strictly decreases over t in
    //     {1e2, 1e3, 1e4} and is < 0.05 at 1e4; the invariance defect
    //     decreases; the doubling-map control keeps survival ratios near its
    //     transition-matrix eigenvalue, bounded away from 1
    criterion(12, [&]() -> std::pair<bool, std::string> {
        auto csys = std::make_shared<MapSystem>(0.5, 4000);
        csys->set_hole(csys->hole_from_word(2, "L"));
        auto spec = lsv_spec(csys, {DensityKind::lebesgue}, 0.75);
        double sing[3], inv[3];
        int idx = 0;
        for (int t : {100, 1000, 10000}) {
            auto st = cesaro_accumulate(spec, 1000000, t, 424242);
            sing[idx] = singularity_diagnostic(spec, st, 3);
            inv[idx] = invariance_diagnostic(spec, st);
            ++idx;
        }
        bool ok = sing[0] > sing[1] && sing[1] > sing[2] && sing[2] < 0.05 &&
                  inv[0] > inv[1] && inv[1] > inv[2];

        // doubling control: leading eigenvalue of the 3-cell matrix
        double v1 = 1, v2 = 1, v3 = 1, oracle = 0;
        for (int i = 0; i < 200; ++i) {
            double n1 = v2 / 2, n2 = (v1 + v3) / 2, n3 = (v1 + v3) / 2;
            double s = n1 + n2 + n3;
            oracle = s / (v1 + v2 + v3);
            v1 = n1 / s;
            v2 = n2 / s;
            v3 = n3 / s;
        }
        auto dspec = doubling_spec(0.0, 0.25);
        auto dst = cesaro_accumulate(dspec, 1000000, 45, 7);
        double bsum = 0.0;
        int bc = 0;
        for (std::size_t k = 5; k + 1 < dst.per_step_norm.size(); ++k) {
            bsum += dst.per_step_norm[k + 1] / dst.per_step_norm[k];
            ++bc;
        }
        double beta_mean = bsum / bc;
        ok = ok && std::abs(beta_mean - oracle) < 0.01 && beta_mean < 0.9;
        return {ok, "singularity " + fmt(sing[0]) + " > " + fmt(sing[1]) + " > " +
                        fmt(sing[2]) + " < 0.05; defect " + fmt(inv[0]) + " > " +
                        fmt(inv[1]) + " > " + fmt(inv[2]) + "; control beta " +
                        fmt(beta_mean) + " ~ " + fmt(oracle)};
    });

    // 13. identical config and seed give byte-identical curve files
    criterion(13, [&]() -> std::pair<bool, std::string> {
        if (g_cli.empty()) return {false, "no CLI binary path supplied"};
        namespace fs = std::filesystem;
        fs::path out = fs::temp_directory_path() / "lsvlab_acceptance_13";
        fs::remove_all(out);
        std::string args = " escape-rate --engine montecarlo --t-max 15"
                           " --particles 200000 --seed 31 --grid 20000 --out " +
                           out.string() + " >/dev/null 2>&1";
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::ostringstream os;
            os << in.rdbuf();
            return os.str();
        };
        if (std::system((g_cli + args).c_str()) != 0)
            return {false, "first run failed"};
        std::string first = slurp(out / "curve_montecarlo.csv");
        if (std::system((g_cli + args).c_str()) != 0)
            return {false, "second run failed"};
        std::string second = slurp(out / "curve_montecarlo.csv");
        bool ok = !first.empty() && first == second;
        return {ok, "curve files byte-identical across reruns (" +
                        std::to_string(first.size()) + " bytes)"};
    });

    std::printf("%d of 13 criteria passed\n", 13 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
