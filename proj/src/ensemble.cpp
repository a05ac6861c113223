#include "lsv/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "lsv/rng.hpp"

namespace lsv {

namespace {

// One particle from the particle's own stream. Rejection for srb_proxy
// draws as many uniforms as it needs from the same stream, so the result
// is a pure function of (seed, index).
double draw_particle(const MapSystem& sys, const DensityParams& params, CounterRng& rng,
                     const SingularDensity* srb, double envelope,
                     std::uint64_t* proposals) {
    switch (params.kind) {
    case DensityKind::lebesgue:
        return rng.next_double();
    case DensityKind::power:
        return std::pow(rng.next_double(), 1.0 / (1.0 - params.alpha));
    case DensityKind::srb_proxy: {
        double gamma = sys.gamma();
        for (int attempt = 0; attempt < 100000; ++attempt) {
            ++*proposals;
            double x = std::pow(rng.next_double(), 1.0 / (1.0 - gamma));
            double u = rng.next_double();
            // accept with probability g(x)/c, where f = x^{-gamma} g
            if (u * envelope <= srb->g_at(x)) return x;
        }
        throw numeric_error("monte_carlo", "rejection sampler failed to accept");
    }
    }
    throw config_error("monte_carlo", "unknown density kind");
}

double srb_envelope(const SingularDensity& f) {
    double m = 0.0;
    for (double g : f.g_nodes()) m = std::max(m, g);
    return 1.05 * m;
}

void validate(const MapSystem& sys, const DensityParams& params) {
    if (params.kind == DensityKind::power &&
        !(params.alpha >= 0.0 && params.alpha < 1.0))
        throw config_error("monte_carlo", "power sampling needs alpha in [0,1)");
    (void)sys;
}

std::string provenance_tag(std::size_t n, std::uint64_t seed) {
    return "monte_carlo n=" + std::to_string(n) + " seed=" + std::to_string(seed) +
           " rng=" + std::string(kRngId);
}

} // namespace

Ensemble sample_initial(const MapSystem& sys, const DensityParams& params, std::size_t n,
                        std::uint64_t seed, const SingularDensity* srb) {
    if (n < 1) throw config_error("monte_carlo", "n must be >= 1");
    validate(sys, params);

    std::optional<SingularDensity> built;
    if (params.kind == DensityKind::srb_proxy && srb == nullptr) {
        built.emplace(make_density(sys, params));
        srb = &*built;
    }
    double envelope = params.kind == DensityKind::srb_proxy ? srb_envelope(*srb) : 0.0;

    Ensemble e;
    e.positions.resize(n);
    e.alive.assign(n, 1);
    e.seed = seed;
    e.n_total = n;
    std::uint64_t proposals = 0;
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng(seed, i);
        e.positions[i] = draw_particle(sys, params, rng, srb, envelope, &proposals);
    }
    if (params.kind == DensityKind::srb_proxy &&
        static_cast<double>(n) < 1e-3 * static_cast<double>(proposals))
        throw numeric_error("monte_carlo", "rejection acceptance rate below 1e-3");
    return e;
}

EscapeCurve evolve_record(const MapSystem& sys, Ensemble& e, int t_max) {
    if (t_max < 0) throw config_error("monte_carlo", "t_max must be >= 0");
    EscapeCurve c;
    c.provenance = provenance_tag(e.n_total, e.seed);
    double n = static_cast<double>(e.n_total);
    auto record = [&](int t, std::size_t alive) {
        double s = static_cast<double>(alive) / n;
        c.times.push_back(t);
        c.mass.push_back(s);
        c.stderr_.push_back(std::sqrt(s * (1.0 - s) / n));
    };

    std::size_t alive = 0;
    for (std::size_t i = 0; i < e.positions.size(); ++i) {
        if (e.alive[i] && sys.in_hole(e.positions[i])) e.alive[i] = 0;
        alive += e.alive[i];
    }
    record(e.t, alive);

    for (int k = 1; k <= t_max; ++k) {
        for (std::size_t i = 0; i < e.positions.size(); ++i) {
            if (!e.alive[i]) continue;
            double x = sys.apply(e.positions[i]);
            e.positions[i] = x;
            if (sys.in_hole(x)) {
                e.alive[i] = 0;
                --alive;
            }
        }
        record(e.t + k, alive);
    }
    e.t += t_max;
    return c;
}

EscapeCurve evolve_streaming(const MapSystem& sys, const DensityParams& params, std::size_t n,
                             int t_max, std::uint64_t seed, const SingularDensity* srb) {
    if (n < 1) throw config_error("monte_carlo", "n must be >= 1");
    if (t_max < 0) throw config_error("monte_carlo", "t_max must be >= 0");
    validate(sys, params);

    std::optional<SingularDensity> built;
    if (params.kind == DensityKind::srb_proxy && srb == nullptr) {
        built.emplace(make_density(sys, params));
        srb = &*built;
    }
    double envelope = params.kind == DensityKind::srb_proxy ? srb_envelope(*srb) : 0.0;

    std::vector<std::uint64_t> alive(static_cast<std::size_t>(t_max) + 1, 0);
    std::uint64_t proposals = 0;
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng(seed, i);
        double x = draw_particle(sys, params, rng, srb, envelope, &proposals);
        for (int t = 0; t <= t_max; ++t) {
            if (sys.in_hole(x)) break;
            ++alive[static_cast<std::size_t>(t)];
            if (t < t_max) x = sys.apply(x);
        }
    }
    if (params.kind == DensityKind::srb_proxy &&
        static_cast<double>(n) < 1e-3 * static_cast<double>(proposals))
        throw numeric_error("monte_carlo", "rejection acceptance rate below 1e-3");

    EscapeCurve c;
    c.provenance = provenance_tag(n, seed) + " streaming";
    double dn = static_cast<double>(n);
    for (int t = 0; t <= t_max; ++t) {
        double s = static_cast<double>(alive[static_cast<std::size_t>(t)]) / dn;
        c.times.push_back(t);
        c.mass.push_back(s);
        c.stderr_.push_back(std::sqrt(s * (1.0 - s) / dn));
    }
    return c;
}

std::vector<double> empirical_pushforward(const Ensemble& e, const std::vector<double>& bins) {
    if (bins.size() < 2 || !std::is_sorted(bins.begin(), bins.end()))
        throw config_error("monte_carlo", "bins must be a sorted sequence of >= 2 breakpoints");
    std::vector<double> h(bins.size() - 1, 0.0);
    std::size_t alive = 0;
    for (std::size_t i = 0; i < e.positions.size(); ++i) {
        if (!e.alive[i]) continue;
        ++alive;
        double x = e.positions[i];
        if (x < bins.front() || x >= bins.back()) continue;
        auto it = std::upper_bound(bins.begin(), bins.end(), x);
        h[static_cast<std::size_t>(it - bins.begin()) - 1] += 1.0;
    }
    if (alive == 0)
        throw extinction_error("monte_carlo", "no particle alive at t=" + std::to_string(e.t));
    for (auto& v : h) v /= static_cast<double>(alive);
    return h;
}

} // namespace lsv
