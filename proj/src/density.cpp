#include "lsv/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lsv {

namespace {

// \int_u^v x^{-a} dx
double int_pow(double u, double v, double a) {
    if (a == 0.0) return v - u;
    double e = 1.0 - a;
    return (std::pow(v, e) - std::pow(u, e)) / e;
}

// \int_u^v x^{-a} (x-u)/(v-u) dx
double int_pow_lin(double u, double v, double a) {
    if (!(v > u)) return 0.0;
    if (a == 0.0) return 0.5 * (v - u);
    double e2 = 2.0 - a;
    double head = (std::pow(v, e2) - std::pow(u, e2)) / e2;
    return (head - u * int_pow(u, v, a)) / (v - u);
}

// Integral of x^{-a} (gu + (gv-gu)(x-u)/(v-u)) over [u,v]. For cells much
// narrower than their distance to 0 the closed form cancels catastrophically
// (the linear moment divides a rounded difference by v-u); the trapezoid
// value is then accurate to O((v-u)^3) and safe.
double cell_integral(double u, double v, double gu, double gv, double a) {
    if (v - u <= 1e-9 * u) {
        double xm = 0.5 * (u + v);
        return 0.5 * (gu + gv) * std::pow(xm, -a) * (v - u);
    }
    double i0 = int_pow(u, v, a);
    double il = int_pow_lin(u, v, a);
    return gu * (i0 - il) + gv * il;
}

// Forward orbit of the hole endpoints; all density discontinuities the
// open operator can create live on this finite set, so its points must be
// grid nodes.
std::vector<double> discontinuity_points(const MapSystem& sys) {
    std::vector<double> pts;
    if (!sys.has_hole()) return pts;
    for (double e : {sys.hole()->lo, sys.hole()->hi}) {
        double x = e;
        for (int k = 0; k < sys.hole()->level + 8 && x > 0.0 && x < 1.0; ++k) {
            pts.push_back(x);
            if (x >= 1.0) break;
            double nx = sys.apply(x);
            if (nx <= 0.0 || nx >= 1.0) break;
            // Stop once the orbit hits a partition point: those are nodes.
            x = nx;
        }
    }
    return pts;
}

} // namespace

std::shared_ptr<const Grid> Grid::build(const MapSystem& sys, const GridSpec& spec) {
    if (spec.n_align < 2 || spec.n_align > sys.n_max())
        throw config_error("density_transport", "n_align out of range");
    if (spec.target_nodes < 2 * spec.n_align)
        throw config_error("density_transport", "target_nodes too small for n_align");

    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(spec.target_nodes) + 64);
    pts.push_back(0.0);
    pts.push_back(1.0);
    for (int n = 0; n <= spec.n_align; ++n) pts.push_back(sys.a(n));
    if (sys.has_hole()) {
        pts.push_back(sys.hole()->lo);
        pts.push_back(sys.hole()->hi);
        for (double d : discontinuity_points(sys)) pts.push_back(d);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    // The numeric forward orbit of the hole endpoints lands within rounding
    // of partition points (T maps J_n onto J_{n-1} exactly in exact
    // arithmetic). Merge near-duplicates, keeping the canonical partition
    // point so the Markov alignment stays bitwise.
    {
        const auto& a = sys.partition();
        auto canonical = [&](double x) {
            auto it = std::lower_bound(a.begin(), a.end(), x, std::greater<double>());
            return (it != a.end() && *it == x) || x == 0.0 || x == 1.0;
        };
        std::vector<double> merged;
        merged.reserve(pts.size());
        for (double x : pts) {
            if (!merged.empty() && x - merged.back() <= 1e-13 * x) {
                if (canonical(x)) merged.back() = x;
                continue;
            }
            merged.push_back(x);
        }
        pts = std::move(merged);
    }

    // Uniform fill: subdivide every cell above the tail until no cell is
    // wider than h. The tail cell [0, a_{n_align}) stays analytic.
    double tail_hi = sys.a(spec.n_align);
    double coverable = 1.0 - tail_hi;
    // Slightly finer than the budget implies: per-cell rounding in the fill
    // loop loses fractional nodes and the budget is a floor, not a target.
    double h = coverable / (1.05 * static_cast<double>(spec.target_nodes - spec.n_align));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(spec.target_nodes) + 64);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        grid.push_back(pts[i]);
        double u = pts[i], v = pts[i + 1];
        if (u < tail_hi) continue;
        int extra = static_cast<int>(std::floor((v - u) / h));
        for (int k = 1; k <= extra; ++k) {
            double x = u + (v - u) * static_cast<double>(k) / (extra + 1);
            grid.push_back(x);
        }
    }
    grid.push_back(1.0);

    auto out = std::make_shared<Grid>();
    out->x_ = std::move(grid);
    out->n_align_ = spec.n_align;
    return out;
}

std::size_t Grid::cell_of(double x) const {
    if (!(x >= 0.0) || x > 1.0)
        throw config_error("density_transport", "cell_of: point outside [0,1]");
    if (x >= x_[x_.size() - 2]) return x_.size() - 2;
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

SingularDensity::SingularDensity(std::shared_ptr<const Grid> grid, double alpha,
                                 std::vector<double> g_nodes) {
    if (!grid) throw config_error("density_transport", "null grid");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw config_error("density_transport", "alpha must lie in [0,1)");
    if (g_nodes.size() != grid->size())
        throw config_error("density_transport", "g sample count != node count");
    grid_ = std::move(grid);
    alpha_ = alpha;
    std::size_t m = grid_->size() - 1;
    gl_.resize(m);
    gr_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        gl_[j] = g_nodes[j];
        gr_[j] = g_nodes[j + 1];
    }
    finalize();
}

SingularDensity SingularDensity::from_cells(std::shared_ptr<const Grid> grid, double alpha,
                                            std::vector<double> g_left,
                                            std::vector<double> g_right) {
    if (!grid) throw config_error("density_transport", "null grid");
    if (g_left.size() != grid->size() - 1 || g_right.size() != grid->size() - 1)
        throw config_error("density_transport", "cell value count mismatch");
    SingularDensity d;
    d.grid_ = std::move(grid);
    d.alpha_ = alpha;
    d.gl_ = std::move(g_left);
    d.gr_ = std::move(g_right);
    d.finalize();
    return d;
}

void SingularDensity::finalize() {
    // Tail convention: constant extension of the first resolved value.
    if (gl_.size() >= 2) {
        gl_[0] = gl_[1];
        gr_[0] = gl_[1];
    }
    const auto& x = grid_->nodes();
    double m = 0.0;
    for (std::size_t j = 0; j < gl_.size(); ++j) {
        double v = gl_[j];
        if (!(v >= 0.0) || !std::isfinite(v) || !std::isfinite(gr_[j]) || gr_[j] < 0.0)
            throw numeric_error("density_transport", "regular factor not finite nonnegative");
        m += cell_integral(x[j], x[j + 1], gl_[j], gr_[j], alpha_);
    }
    mass_ = m;
}

std::vector<double> SingularDensity::g_nodes() const {
    std::vector<double> out(grid_->size());
    for (std::size_t j = 0; j < gl_.size(); ++j) out[j] = gl_[j];
    out.back() = gr_.back();
    return out;
}

double SingularDensity::g_at(double x) const {
    std::size_t j = grid_->cell_of(x);
    if (j == 0) return gl_[0];
    const auto& xs = grid_->nodes();
    double frac = (x - xs[j]) / (xs[j + 1] - xs[j]);
    return gl_[j] + (gr_[j] - gl_[j]) * frac;
}

double SingularDensity::value(double x) const {
    if (x <= 0.0)
        return alpha_ > 0.0 ? std::numeric_limits<double>::infinity() : gl_[0];
    return std::pow(x, -alpha_) * g_at(x);
}

double SingularDensity::integral_to(double z) const {
    if (!(z >= 0.0 && z <= 1.0))
        throw config_error("density_transport", "integral_to: bound outside [0,1]");
    if (z == 0.0) return 0.0;
    const auto& x = grid_->nodes();
    double m = 0.0;
    for (std::size_t j = 0; j < gl_.size(); ++j) {
        if (x[j] >= z) break;
        if (x[j + 1] <= z) {
            m += cell_integral(x[j], x[j + 1], gl_[j], gr_[j], alpha_);
        } else {
            double frac = (z - x[j]) / (x[j + 1] - x[j]);
            double gz = gl_[j] + (gr_[j] - gl_[j]) * frac;
            m += cell_integral(x[j], z, gl_[j], gz, alpha_);
        }
    }
    return m;
}

SingularDensity SingularDensity::normalized() const {
    if (!(mass_ > 0.0))
        throw numeric_error("density_transport", "cannot normalize zero-mass density");
    std::vector<double> gl = gl_, gr = gr_;
    for (auto& v : gl) v /= mass_;
    for (auto& v : gr) v /= mass_;
    return from_cells(grid_, alpha_, std::move(gl), std::move(gr));
}

SingularDensity make_density(const MapSystem& sys, const DensityParams& params,
                             std::shared_ptr<const Grid> grid) {
    if (!grid) grid = Grid::build(sys);
    switch (params.kind) {
    case DensityKind::lebesgue: {
        std::vector<double> g(grid->size(), 1.0);
        return SingularDensity(grid, 0.0, std::move(g)).normalized();
    }
    case DensityKind::power: {
        if (!(params.alpha >= 0.0 && params.alpha < 1.0))
            throw config_error("density_transport", "power density needs alpha in [0,1)");
        std::vector<double> g(grid->size(), 1.0 - params.alpha);
        return SingularDensity(grid, params.alpha, std::move(g)).normalized();
    }
    case DensityKind::srb_proxy: {
        if (params.burn_in < 1)
            throw config_error("density_transport", "srb_proxy needs burn_in >= 1");
        // Constant density written as x^{-gamma} * x^{gamma}, pushed through
        // the closed operator until the regular factor settles.
        double gam = sys.gamma();
        const auto& xs = grid->nodes();
        std::vector<double> g(grid->size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::pow(xs[i], gam);
        SingularDensity f(grid, gam, std::move(g));
        TransferOperator closed(sys, grid, /*open=*/false);
        for (int k = 0; k < params.burn_in; ++k)
            f = closed.apply(f).normalized();
        return f;
    }
    }
    throw config_error("density_transport", "unknown density kind");
}

SingularDensity make_density_from(const MapSystem& sys, double alpha,
                                  const std::function<double(double)>& g_fn,
                                  std::shared_ptr<const Grid> grid) {
    if (!grid) grid = Grid::build(sys);
    std::vector<double> g(grid->size());
    const auto& xs = grid->nodes();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = g_fn(xs[i]);
    return SingularDensity(grid, alpha, std::move(g)).normalized();
}

TransferOperator::TransferOperator(const MapSystem& sys, std::shared_ptr<const Grid> grid,
                                   bool open)
    : grid_(std::move(grid)), open_(open) {
    if (!grid_) throw config_error("density_transport", "null grid");
    if (open_ && !sys.has_hole())
        throw config_error("density_transport", "open operator requires a hole");

    const auto& xs = grid_->nodes();
    std::size_t n = xs.size();
    double hlo = 0.0, hhi = 0.0;
    if (open_) { hlo = sys.hole()->lo; hhi = sys.hole()->hi; }

    // side 0: right limit at the node, side 1: left limit.
    auto in_hole = [&](double y, int side) {
        if (!open_) return false;
        return side == 0 ? (y >= hlo && y < hhi) : (y > hlo && y <= hhi);
    };
    auto locate_side = [&](double y, int side) -> std::pair<std::size_t, double> {
        std::size_t c = grid_->cell_of(std::min(y, 1.0));
        if (side == 1 && c > 0 && y == xs[c]) return {c - 1, 1.0};
        double frac = (y - xs[c]) / (xs[c + 1] - xs[c]);
        return {c, frac};
    };

    for (int side = 0; side < 2; ++side) {
        left_[side].resize(n);
        right_[side].resize(n);
        node_masked_[side].resize(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            double x = xs[i];
            // The node at 1 only ever contributes through its left limit.
            double xe = (x >= 1.0) ? std::nextafter(1.0, 0.0) : x;
            double yl = sys.invert_left(xe);
            double yr = sys.invert_right(xe);
            Pull pl, pr;
            auto [cl, fl] = locate_side(yl, side);
            pl.cell = cl;
            pl.frac = fl;
            pl.weight_base = in_hole(yl, side) ? 0.0 : 1.0 / sys.derivative(yl);
            pl.ratio = (xe > 0.0) ? yl / xe : 1.0;
            auto [cr, fr] = locate_side(yr, side);
            pr.cell = cr;
            pr.frac = fr;
            pr.weight_base = in_hole(yr, side) ? 0.0 : 0.5;
            pr.ratio = (xe > 0.0) ? yr / xe : std::numeric_limits<double>::infinity();
            left_[side][i] = pl;
            right_[side][i] = pr;
            node_masked_[side][i] = in_hole(x, side);
        }
    }
}

void TransferOperator::refresh_weights(double alpha) const {
    for (int side = 0; side < 2; ++side) {
        wl_[side].resize(left_[side].size());
        wr_[side].resize(right_[side].size());
        for (std::size_t i = 0; i < left_[side].size(); ++i) {
            const Pull& pl = left_[side][i];
            const Pull& pr = right_[side][i];
            wl_[side][i] = pl.weight_base * std::pow(pl.ratio, -alpha);
            wr_[side][i] = pr.weight_base * std::pow(pr.ratio, -alpha);
        }
    }
    cached_alpha_ = alpha;
}

SingularDensity TransferOperator::apply(const SingularDensity& f) const {
    if (f.grid_ptr().get() != grid_.get())
        throw config_error("density_transport", "density grid mismatch");
    if (f.alpha() != cached_alpha_)
        refresh_weights(f.alpha());

    const auto& gl = f.g_left();
    const auto& gr = f.g_right();
    auto eval = [&](const Pull& p) {
        if (p.cell == 0) return gl[0];
        return gl[p.cell] + (gr[p.cell] - gl[p.cell]) * p.frac;
    };

    std::size_t n = grid_->size();
    std::size_t cells = n - 1;
    std::vector<double> out_l(cells, 0.0), out_r(cells, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
        // right limit at node i -> left value of cell i
        if (!node_masked_[0][i])
            out_l[i] = wl_[0][i] * eval(left_[0][i]) + wr_[0][i] * eval(right_[0][i]);
    }
    for (std::size_t i = 1; i < n; ++i) {
        // left limit at node i -> right value of cell i-1
        if (!node_masked_[1][i])
            out_r[i - 1] = wl_[1][i] * eval(left_[1][i]) + wr_[1][i] * eval(right_[1][i]);
    }
    return SingularDensity::from_cells(grid_, f.alpha(), std::move(out_l), std::move(out_r));
}

SingularDensity apply_transfer(const MapSystem& sys, const SingularDensity& f, bool open) {
    TransferOperator op(sys, f.grid_ptr(), open);
    return op.apply(f);
}

OpenIterationResult iterate_open(const MapSystem& sys, const SingularDensity& f,
                                 int t_max, const std::set<int>& checkpoints) {
    if (t_max < 1)
        throw config_error("density_transport", "t_max must be >= 1");
    if (!sys.has_hole())
        throw config_error("density_transport", "iterate_open requires a hole");

    TransferOperator op(sys, f.grid_ptr(), /*open=*/true);
    OpenIterationResult res;
    res.curve.provenance = "density_transport";

    // mu_f(I^0): mass of f off the hole.
    double total = f.mass();
    double hole_mass = f.integral_to(sys.hole()->hi) - f.integral_to(sys.hole()->lo);
    double m0 = (total - hole_mass) / total;
    res.curve.times.push_back(0);
    res.curve.mass.push_back(m0);
    res.curve.stderr_.push_back(0.0);

    SingularDensity cur = f.normalized();
    double log_mass = 0.0;
    const double log_floor = std::log(1e-300);
    for (int t = 1; t <= t_max; ++t) {
        SingularDensity next = op.apply(cur);
        double step = next.mass();
        if (!(step > 0.0) || log_mass + std::log(step) < log_floor)
            throw underflow_error("density_transport",
                                  "surviving mass underflow at t=" + std::to_string(t));
        log_mass += std::log(step);
        cur = next.normalized();
        res.curve.times.push_back(t);
        res.curve.mass.push_back(std::exp(log_mass));
        res.curve.stderr_.push_back(0.0);
        if (checkpoints.count(t)) res.checkpoints.emplace(t, cur);
    }
    return res;
}

double mass_near_zero(const SingularDensity& f, double eps) {
    if (!(eps > 0.0 && eps <= 1.0))
        throw config_error("density_transport", "eps must lie in (0,1]");
    return f.integral_to(eps);
}

HolderReport holder_seminorm(const MapSystem& sys, const SingularDensity& f, double p,
                             int max_index) {
    if (!(p > 0.0 && p <= 1.0))
        throw config_error("density_transport", "p must lie in (0,1]");

    int level = sys.has_hole() && sys.hole()->cylinder ? sys.hole()->level : 0;
    const auto& xs = f.grid().nodes();
    auto gn = f.g_nodes();
    double alpha = f.alpha();

    HolderReport rep;
    rep.p = p;
    rep.deepest_index = std::min(max_index, f.grid().n_align());

    auto element_value = [&](double lo, double hi) -> double {
        // Sample grid nodes strictly inside [lo, hi).
        auto first = std::lower_bound(xs.begin(), xs.end(), lo);
        auto last = std::lower_bound(xs.begin(), xs.end(), hi);
        std::vector<std::size_t> idx;
        for (auto it = first; it != last; ++it)
            idx.push_back(static_cast<std::size_t>(it - xs.begin()));
        if (idx.size() < 2) return 0.0;
        if (idx.size() > 64) {
            std::vector<std::size_t> picked;
            for (int k = 0; k < 64; ++k)
                picked.push_back(idx[idx.size() * static_cast<std::size_t>(k) / 64]);
            idx = std::move(picked);
        }
        bool any_zero = false, any_pos = false;
        for (auto i : idx) (gn[i] > 0.0 ? any_pos : any_zero) = true;
        if (any_zero && any_pos) {
            rep.infinite_flag = true;
            return std::numeric_limits<double>::infinity();
        }
        if (!any_pos) return 0.0;
        double best = 0.0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            double fa = -alpha * std::log(xs[idx[a]]) + std::log(gn[idx[a]]);
            for (std::size_t b = a + 1; b < idx.size(); ++b) {
                double fb = -alpha * std::log(xs[idx[b]]) + std::log(gn[idx[b]]);
                double d = std::abs(fa - fb) / std::pow(xs[idx[b]] - xs[idx[a]], p);
                best = std::max(best, d);
            }
        }
        return best;
    };

    for (int n = 0; n <= rep.deepest_index; ++n) {
        double jlo = (n == 0) ? 0.5 : sys.a(n);
        double jhi = (n == 0) ? 1.0 : sys.a(n - 1);
        int free_bits = std::max(0, level - n);
        if (free_bits == 0 || n > 62) {
            double v = element_value(jlo, jhi);
            rep.per_element.emplace_back("J_" + std::to_string(n), v);
            rep.seminorm = std::max(rep.seminorm, v);
            continue;
        }
        // Forced prefix along the ladder J_n -> ... -> J_0, free suffix.
        std::string forced;
        for (int i = 0; i <= std::min(n, level); ++i)
            forced.push_back(n - i >= 1 ? 'L' : 'R');
        for (int bits = 0; bits < (1 << free_bits); ++bits) {
            std::string word = forced;
            for (int b = 0; b < free_bits; ++b)
                word.push_back((bits >> b) & 1 ? 'R' : 'L');
            try {
                auto cyl = sys.hole_from_word(n, word);
                double v = element_value(cyl.lo, cyl.hi);
                rep.per_element.emplace_back("J_" + std::to_string(n) + ":" + word, v);
                rep.seminorm = std::max(rep.seminorm, v);
            } catch (const config_error&) {
                // empty cylinder: word not admissible from J_n
            }
        }
    }
    return rep;
}

} // namespace lsv
