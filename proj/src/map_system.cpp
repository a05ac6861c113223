#include "lsv/map_system.hpp"

#include <algorithm>
#include <cmath>

namespace lsv {

namespace {
constexpr double kInvertTol = 1e-14;
constexpr double kPartitionTol = 1e-13;
} // namespace

MapSystem::MapSystem(double gamma, int n_max)
    : gamma_(gamma), coeff_(std::pow(2.0, gamma)) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw config_error("map_core", "gamma must lie in (0,1)");
    if (n_max < 1)
        throw config_error("map_core", "n_max must be >= 1");

    a_.resize(static_cast<std::size_t>(n_max) + 1);
    a_[0] = 0.5;
    for (int n = 1; n <= n_max; ++n) {
        a_[static_cast<std::size_t>(n)] = invert_left(a_[static_cast<std::size_t>(n) - 1]);
        if (!(a_[static_cast<std::size_t>(n)] < a_[static_cast<std::size_t>(n) - 1]))
            throw numeric_error("map_core", "partition table not strictly decreasing");
    }
}

void MapSystem::check_domain(double x, const char* op) const {
    if (!(x >= 0.0 && x < 1.0))
        throw config_error("map_core", std::string(op) + ": argument outside [0,1)");
}

double MapSystem::apply(double x) const {
    check_domain(x, "apply");
    if (x < 0.5) {
        double y = x + coeff_ * std::pow(x, gamma_ + 1.0);
        return y < 1.0 ? y : std::nextafter(1.0, 0.0);
    }
    return 2.0 * x - 1.0;
}

double MapSystem::derivative(double x) const {
    check_domain(x, "derivative");
    if (x < 0.5)
        return 1.0 + coeff_ * (gamma_ + 1.0) * std::pow(x, gamma_);
    return 2.0;
}

double MapSystem::invert_left(double y) const {
    check_domain(y, "invert_left");
    if (y == 0.0) return 0.0;

    // Newton seeded at y/2 with a bisection fallback. Iterated until the
    // iterate stops moving: a fixed absolute stopping tolerance would bias
    // the deep partition points a_n (errors accumulate additively along the
    // recursion), so we run to machine precision and only verify the
    // 1e-14 residual contract afterwards.
    double lo = 0.0;
    double hi = std::min(y, 0.5);
    double x = 0.5 * y;
    for (int it = 0; it < 200; ++it) {
        double fx = x + coeff_ * std::pow(x, gamma_ + 1.0) - y;
        if (fx > 0.0) hi = x; else lo = x;
        double dfx = 1.0 + coeff_ * (gamma_ + 1.0) * std::pow(x, gamma_);
        double next = x - fx / dfx;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi); // bisection fallback
        if (next == x || hi - lo <= x * 1e-16)
            break;
        x = next;
    }
    double fx = x + coeff_ * std::pow(x, gamma_ + 1.0) - y;
    if (std::abs(fx) <= kInvertTol)
        return x;
    throw numeric_error("map_core", "invert_left failed to converge");
}

double MapSystem::invert_right(double y) const {
    check_domain(y, "invert_right");
    return 0.5 * (y + 1.0);
}

int MapSystem::locate(double x) const {
    check_domain(x, "locate");
    if (x >= 0.5) return 0;
    // J_n = [a_n, a_{n-1}): find largest n with a_n <= x.
    if (x < a_.back()) return kTail;
    // a_ is strictly decreasing; binary search for the containing cell.
    auto it = std::lower_bound(a_.begin(), a_.end(), x, std::greater<double>());
    // it points at the first element <= x, i.e. a_n with a_n <= x < a_{n-1}.
    return static_cast<int>(it - a_.begin());
}

Hole MapSystem::control_hole(double lo, double hi) {
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
        throw config_error("map_core", "control hole interval invalid");
    Hole h;
    h.lo = lo;
    h.hi = hi;
    h.cylinder = false;
    h.word = "control";
    h.base_index = -1;
    return h;
}

Hole MapSystem::hole_from_word(int h, const std::string& word) const {
    if (h < 0)
        throw config_error("map_core", "hole base index must be >= 0");
    if (word.empty())
        throw config_error("map_core", "hole word must be nonempty");
    for (char c : word)
        if (c != 'L' && c != 'R')
            throw config_error("map_core", "hole word must be over {L,R}");
    if (h > n_max())
        throw config_error("map_core", "hole base index exceeds partition table");

    // Pull the word constraint back through the branch inverses:
    // C_k = P_{word[k]} \cap T^{-1}(C_{k+1}); a cylinder stays a single
    // half-open interval throughout.
    auto symbol_interval = [](char c) {
        return c == 'L' ? std::pair<double, double>{0.0, 0.5}
                        : std::pair<double, double>{0.5, 1.0};
    };
    auto [lo, hi] = symbol_interval(word.back());
    for (int i = static_cast<int>(word.size()) - 2; i >= 0; --i) {
        double plo, phi;
        if (word[static_cast<std::size_t>(i)] == 'L') {
            plo = invert_left(lo);
            phi = hi >= 1.0 ? 0.5 : invert_left(hi);
        } else {
            plo = invert_right(lo);
            phi = hi >= 1.0 ? 1.0 : invert_right(hi);
        }
        lo = plo;
        hi = phi;
    }
    // Intersect with J_h.
    double jlo = (h == 0) ? 0.5 : a(h);
    double jhi = (h == 0) ? 1.0 : a(h - 1);
    lo = std::max(lo, jlo);
    hi = std::min(hi, jhi);
    if (!(lo < hi))
        throw config_error("map_core", "empty cylinder: word incompatible with J_h");
    if (!(lo > 0.0))
        throw config_error("map_core", "hole contains a neighborhood of 0");

    Hole out;
    out.level = static_cast<int>(word.size()) - 1;
    out.base_index = h;
    out.word = word;
    out.lo = lo;
    out.hi = hi;
    out.cylinder = true;
    return out;
}

void MapSystem::set_hole(Hole hole) {
    if (!(hole.lo < hole.hi) || hole.lo < 0.0 || hole.hi > 1.0)
        throw config_error("map_core", "hole interval invalid");
    if (hole.cylinder && !(hole.lo > 0.0))
        throw config_error("map_core", "cylinder hole may not touch 0");
    // Partition consistency: T maps a_n to a_{n-1} within tolerance.
    for (int n = 1; n <= std::min(n_max(), 32); ++n)
        if (std::abs(apply(a(n)) - a(n - 1)) > kPartitionTol)
            throw numeric_error("map_core", "partition consistency violated");
    hole_ = std::move(hole);
}

} // namespace lsv
