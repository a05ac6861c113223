#include "lsv/cesaro.hpp"

#include <algorithm>
#include <cmath>

#include "lsv/rng.hpp"

namespace lsv {

namespace {

std::vector<double> uniform_bins(int m) {
    std::vector<double> b(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) b[static_cast<std::size_t>(i)] = i / static_cast<double>(m);
    return b;
}

} // namespace

OpenSystemSpec lsv_spec(std::shared_ptr<const MapSystem> sys, const DensityParams& reference,
                        double proposal_beta, std::shared_ptr<const SingularDensity> srb) {
    if (!sys)
        throw config_error("cesaro_general", "LSV spec requires a map");
    if (reference.kind == DensityKind::srb_proxy && !srb)
        srb = std::make_shared<const SingularDensity>(make_density(*sys, reference));
    if (proposal_beta >= 1.0)
        throw config_error("cesaro_general", "proposal exponent must be < 1");

    OpenSystemSpec spec;
    spec.label = "lsv gamma=" + std::to_string(sys->gamma());
    spec.apply = [sys](double x) { return sys->apply(x); };
    spec.in_hole = [sys](double x) { return sys->in_hole(x); };
    spec.hole_set = sys->has_hole()
                        ? IntervalSet{{{sys->hole()->lo, sys->hole()->hi}}}
                        : IntervalSet::empty();
    spec.preimage = [sys](const IntervalSet& s) { return preimage(*sys, s); };

    double ref_alpha = 0.0;
    switch (reference.kind) {
    case DensityKind::lebesgue: ref_alpha = 0.0; break;
    case DensityKind::power: ref_alpha = reference.alpha; break;
    case DensityKind::srb_proxy: ref_alpha = sys->gamma(); break;
    }
    if (!(ref_alpha >= 0.0 && ref_alpha < 1.0))
        throw config_error("cesaro_general", "reference alpha must lie in [0,1)");

    spec.sampler = [sys, reference, srb, proposal_beta,
                    ref_alpha](std::uint64_t seed, std::uint64_t index) {
        CounterRng rng(seed, index);
        double draw_alpha = proposal_beta >= 0.0 ? proposal_beta : ref_alpha;
        double x = draw_alpha > 0.0
                       ? std::pow(rng.next_double(), 1.0 / (1.0 - draw_alpha))
                       : rng.next_double();
        if (reference.kind == DensityKind::srb_proxy) {
            // reference density x^{-gamma} g(x); proposal (1-a) x^{-a}
            double w = srb->g_at(x) * std::pow(x, draw_alpha - ref_alpha);
            return std::make_pair(x, w);
        }
        double w = std::pow(x, draw_alpha - ref_alpha);
        return std::make_pair(x, w);
    };

    auto grid = Grid::build(*sys, {2000, 20000});
    spec.default_bins = grid->nodes();
    return spec;
}

OpenSystemSpec doubling_spec(double hole_lo, double hole_hi) {
    if (!(hole_lo >= 0.0 && hole_lo < hole_hi && hole_hi <= 1.0))
        throw config_error("cesaro_general", "invalid doubling-map hole");
    OpenSystemSpec spec;
    spec.label = "doubling";
    spec.apply = [](double x) {
        double y = 2.0 * x;
        return y >= 1.0 ? y - 1.0 : y;
    };
    spec.in_hole = [hole_lo, hole_hi](double x) { return x >= hole_lo && x < hole_hi; };
    spec.hole_set = IntervalSet{{{hole_lo, hole_hi}}};
    spec.preimage = [](const IntervalSet& s) {
        std::vector<std::pair<double, double>> parts;
        for (auto [lo, hi] : s.intervals()) {
            parts.emplace_back(lo / 2.0, hi / 2.0);
            parts.emplace_back(lo / 2.0 + 0.5, hi / 2.0 + 0.5);
        }
        return IntervalSet{parts};
    };
    spec.sampler = [](std::uint64_t seed, std::uint64_t index) {
        CounterRng rng(seed, index);
        return std::make_pair(rng.next_double(), 1.0);
    };
    spec.default_bins = uniform_bins(4096);
    return spec;
}

CesaroState cesaro_accumulate(const OpenSystemSpec& spec, std::size_t n, int t,
                              std::uint64_t seed, const std::vector<double>* bins) {
    if (n < 10000) throw config_error("cesaro_general", "n must be >= 1e4");
    if (t < 1) throw config_error("cesaro_general", "t must be >= 1");

    CesaroState st;
    st.bins = bins ? *bins : spec.default_bins;
    if (st.bins.size() < 2 || !std::is_sorted(st.bins.begin(), st.bins.end()))
        throw config_error("cesaro_general", "bins must be sorted with >= 2 breakpoints");
    st.accum.assign(st.bins.size() - 1, 0.0);
    st.t = t;

    std::vector<double> x(n), w(n);
    std::vector<std::uint8_t> alive(n, 1);
    double w_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto [xi, wi] = spec.sampler(seed, i);
        x[i] = xi;
        w[i] = wi;
        w_total += wi;
    }

    // scratch: indices into accum, computed per particle per step
    auto bin_of = [&](double v) -> std::ptrdiff_t {
        if (v < st.bins.front() || v >= st.bins.back()) return -1;
        auto it = std::upper_bound(st.bins.begin(), st.bins.end(), v);
        return (it - st.bins.begin()) - 1;
    };

    std::vector<double> step(st.accum.size());
    for (int k = 0; k < t; ++k) {
        double w_alive = 0.0;
        std::fill(step.begin(), step.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            if (spec.in_hole(x[i])) {
                alive[i] = 0;
                continue;
            }
            w_alive += w[i];
            auto b = bin_of(x[i]);
            if (b >= 0) step[static_cast<std::size_t>(b)] += w[i];
        }
        if (!(w_alive > 0.0))
            throw extinction_error("cesaro_general",
                                   "ensemble extinct at step " + std::to_string(k) +
                                       " of " + std::to_string(t));
        st.per_step_norm.push_back(w_alive / w_total);
        double scale = 1.0 / (w_alive * static_cast<double>(t));
        for (std::size_t b = 0; b < step.size(); ++b) st.accum[b] += step[b] * scale;
        if (k + 1 < t)
            for (std::size_t i = 0; i < n; ++i)
                if (alive[i]) x[i] = spec.apply(x[i]);
    }
    return st;
}

double singularity_diagnostic(const OpenSystemSpec& spec, const CesaroState& state, int i) {
    if (i < 0) throw config_error("cesaro_general", "i must be >= 0");
    if (!spec.preimage)
        throw config_error("cesaro_general",
                           "singularity diagnostic needs interval preimages, unavailable for '" +
                               spec.label + "'");
    IntervalSet u = spec.hole_set;
    IntervalSet layer = spec.hole_set;
    for (int j = 1; j <= i; ++j) {
        layer = spec.preimage(layer);
        std::vector<std::pair<double, double>> merged(u.intervals());
        for (auto& p : layer.intervals()) merged.push_back(p);
        u = IntervalSet{merged};
    }

    double mass = 0.0;
    const auto& b = state.bins;
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
        if (state.accum[j] == 0.0) continue;
        double width = b[j + 1] - b[j];
        if (!(width > 0.0)) continue;
        IntervalSet cell{{{b[j], b[j + 1]}}};
        double overlap = cell.intersect(u).lebesgue_mass();
        mass += state.accum[j] * overlap / width;
    }
    return mass;
}

double invariance_diagnostic(const OpenSystemSpec& spec, const CesaroState& state,
                             const std::vector<std::function<double(double)>>& test_functions) {
    std::vector<std::function<double(double)>> family = test_functions;
    if (family.empty()) {
        auto bump = [](double c, double r) {
            return [c, r](double x) {
                double u = (x - c) / r;
                if (std::abs(u) >= 1.0) return 0.0;
                return std::exp(1.0 - 1.0 / (1.0 - u * u));
            };
        };
        family.push_back([](double) { return 1.0; });
        for (double c : {0.1, 0.3, 0.5, 0.7, 0.9}) family.push_back(bump(c, 0.15));
        for (int m = 1; m <= 3; ++m) {
            family.push_back([m](double x) { return std::sin(2.0 * M_PI * m * x); });
            family.push_back([m](double x) { return std::cos(2.0 * M_PI * m * x); });
        }
    }

    double defect = 0.0;
    for (const auto& phi : family) {
        double direct = 0.0, pushed = 0.0;
        for (std::size_t j = 0; j + 1 < state.bins.size(); ++j) {
            if (state.accum[j] == 0.0) continue;
            double c = 0.5 * (state.bins[j] + state.bins[j + 1]);
            direct += state.accum[j] * phi(c);
            pushed += state.accum[j] * phi(spec.apply(c));
        }
        defect = std::max(defect, std::abs(pushed - direct));
    }
    return defect;
}

std::vector<std::pair<long, double>> zero_density_check(const std::vector<double>& betas,
                                                        double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw config_error("cesaro_general", "lambda must lie in (0,1)");
    std::vector<std::pair<long, double>> profile;
    long count = 0;
    long next_dyadic = 1;
    for (std::size_t j = 0; j < betas.size(); ++j) {
        long k = static_cast<long>(j) + 1;
        if (betas[j] <= lambda) ++count;
        if (k == next_dyadic) {
            profile.emplace_back(k, static_cast<double>(count) / static_cast<double>(k));
            next_dyadic *= 2;
        }
    }
    return profile;
}

} // namespace lsv
