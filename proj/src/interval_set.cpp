#include "lsv/interval_set.hpp"

#include <algorithm>
#include <cmath>

namespace lsv {

IntervalSet::IntervalSet(std::vector<Interval> intervals, double inherited_pruned)
    : pruned_(inherited_pruned) {
    std::sort(intervals.begin(), intervals.end());
    iv_.reserve(intervals.size());
    for (const auto& [lo, hi] : intervals) {
        if (!(lo < hi)) continue;
        if (hi - lo < kPruneFloor) {
            pruned_ += hi - lo;
            continue;
        }
        if (!iv_.empty() && lo <= iv_.back().second) {
            iv_.back().second = std::max(iv_.back().second, hi);
        } else {
            iv_.emplace_back(lo, hi);
        }
    }
}

IntervalSet IntervalSet::full() {
    return IntervalSet{{{0.0, 1.0}}};
}

bool IntervalSet::member(double x) const {
    auto it = std::upper_bound(iv_.begin(), iv_.end(), x,
                               [](double v, const Interval& iv) { return v < iv.first; });
    if (it == iv_.begin()) return false;
    --it;
    return x < it->second;
}

bool IntervalSet::subset_of(const IntervalSet& other) const {
    std::size_t j = 0;
    for (const auto& [lo, hi] : iv_) {
        while (j < other.iv_.size() && other.iv_[j].second < hi) ++j;
        if (j >= other.iv_.size() || other.iv_[j].first > lo) return false;
    }
    return true;
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < iv_.size() && j < other.iv_.size()) {
        double lo = std::max(iv_[i].first, other.iv_[j].first);
        double hi = std::min(iv_[i].second, other.iv_[j].second);
        if (lo < hi) out.emplace_back(lo, hi);
        if (iv_[i].second < other.iv_[j].second) ++i; else ++j;
    }
    return IntervalSet(std::move(out), pruned_ + other.pruned_);
}

double IntervalSet::lebesgue_mass() const {
    double m = 0.0;
    for (const auto& [lo, hi] : iv_) m += hi - lo;
    return m;
}

double IntervalSet::alpha_mass(double alpha) const {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw config_error("survivor_exact", "alpha must lie in [0,1)");
    if (alpha == 0.0) return lebesgue_mass();
    double e = 1.0 - alpha;
    double m = 0.0;
    for (const auto& [lo, hi] : iv_) m += std::pow(hi, e) - std::pow(lo, e);
    return m;
}

IntervalSet preimage(const MapSystem& sys, const IntervalSet& s) {
    std::vector<IntervalSet::Interval> out;
    out.reserve(2 * s.count());
    for (const auto& [lo, hi] : s.intervals()) {
        // Left branch: monotone onto [0,1), preimage inside [0,1/2).
        double llo = sys.invert_left(lo);
        double lhi = hi >= 1.0 ? 0.5 : sys.invert_left(hi);
        if (llo < lhi) out.emplace_back(llo, lhi);
        // Right branch: 2x-1, preimage inside [1/2,1).
        out.emplace_back(0.5 * (lo + 1.0), 0.5 * (hi + 1.0));
    }
    return IntervalSet(std::move(out), s.pruned_mass());
}

namespace {

IntervalSet complement_of_hole(double lo, double hi) {
    std::vector<IntervalSet::Interval> base;
    if (lo > 0.0) base.emplace_back(0.0, lo);
    if (hi < 1.0) base.emplace_back(hi, 1.0);
    return IntervalSet(std::move(base));
}

void check_budget(const IntervalSet& s, const SurvivorOptions& opts) {
    if (s.count() > opts.max_intervals)
        throw budget_error("survivor_exact", "interval count exceeds configured cap");
}

} // namespace

IntervalSet survivor(const MapSystem& sys, int t, const SurvivorOptions& opts) {
    if (!sys.has_hole())
        throw config_error("survivor_exact", "survivor requires a hole");
    if (t < 0)
        throw config_error("survivor_exact", "t must be >= 0");
    if (t > opts.t_max_exact)
        throw budget_error("survivor_exact", "t exceeds t_max_exact");

    IntervalSet base = complement_of_hole(sys.hole()->lo, sys.hole()->hi);
    IntervalSet cur = base;
    for (int k = 1; k <= t; ++k) {
        cur = base.intersect(preimage(sys, cur));
        check_budget(cur, opts);
    }
    return cur;
}

std::vector<double> survivor_masses(const MapSystem& sys, int t_max,
                                    const SurvivorOptions& opts) {
    if (!sys.has_hole())
        throw config_error("survivor_exact", "survivor requires a hole");
    if (t_max > opts.t_max_exact)
        throw budget_error("survivor_exact", "t exceeds t_max_exact");
    IntervalSet base = complement_of_hole(sys.hole()->lo, sys.hole()->hi);
    IntervalSet cur = base;
    std::vector<double> masses;
    masses.reserve(static_cast<std::size_t>(t_max) + 1);
    masses.push_back(cur.lebesgue_mass());
    for (int k = 1; k <= t_max; ++k) {
        cur = base.intersect(preimage(sys, cur));
        check_budget(cur, opts);
        masses.push_back(cur.lebesgue_mass());
    }
    return masses;
}

IntervalSet first_entry_set(const MapSystem& sys, int t, const SurvivorOptions& opts) {
    if (!sys.has_hole() || !sys.hole()->cylinder)
        throw config_error("survivor_exact", "first_entry_set requires a cylinder hole");
    if (t < 0)
        throw config_error("survivor_exact", "t must be >= 0");
    if (t > opts.t_max_exact)
        throw budget_error("survivor_exact", "t exceeds t_max_exact");

    int h = sys.hole()->base_index;
    double jlo = (h == 0) ? 0.5 : sys.a(h);
    double jhi = (h == 0) ? 1.0 : sys.a(h - 1);
    IntervalSet avoid = complement_of_hole(jlo, jhi);

    // F_0 = J_h, F_{k+1} = (I \ J_h) \cap T^{-1}(F_k); then E^t = F_t.
    IntervalSet cur{{{jlo, jhi}}};
    for (int k = 1; k <= t; ++k) {
        cur = avoid.intersect(preimage(sys, cur));
        check_budget(cur, opts);
    }
    return cur;
}

double shell_mass(const MapSystem& sys, int t, const SurvivorOptions& opts) {
    if (t < 1)
        throw config_error("survivor_exact", "shell_mass requires t >= 1");
    auto masses = survivor_masses(sys, t, opts);
    return masses[static_cast<std::size_t>(t) - 1] - masses[static_cast<std::size_t>(t)];
}

} // namespace lsv
