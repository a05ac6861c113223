#ifndef LSV_DENSITY_HPP
#define LSV_DENSITY_HPP

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lsv/escape_curve.hpp"
#include "lsv/map_system.hpp"

namespace lsv {

struct GridSpec {
    int n_align = 10000;       // partition points a_1..a_{n_align} become nodes
    int target_nodes = 100000; // approximate total node budget
};

// Breakpoints 0 = x_0 < x_1 < ... < x_M = 1. Aligned with the partition
// points a_n near 0 (so the left-branch pullback and every Markov
// discontinuity land on nodes), uniformly filled elsewhere. The first cell
// [0, x_1) is the analytic tail: densities are constant there and its
// integrals are evaluated in closed form.
class Grid {
public:
    static std::shared_ptr<const Grid> build(const MapSystem& sys, const GridSpec& spec = {});

    const std::vector<double>& nodes() const { return x_; }
    std::size_t size() const { return x_.size(); }
    int n_align() const { return n_align_; }

    // Cell index j with x in [x_j, x_{j+1}); x must be in [0,1).
    std::size_t cell_of(double x) const;

private:
    std::vector<double> x_;
    int n_align_ = 0;
};

// A density f(x) = x^{-alpha} g(x) with 0 <= alpha < 1 and the regular
// factor g >= 0 piecewise linear on grid cells, constant on the tail cell
// [0, x_1). g is stored per cell (left/right values), so jump
// discontinuities sitting on grid nodes -- where the Markov structure puts
// every discontinuity the open operator creates -- are represented exactly
// under the half-open convention (the nodal sample is the right limit).
// Immutable.
class SingularDensity {
public:
    // Continuous input: nodal samples, one per grid node.
    SingularDensity(std::shared_ptr<const Grid> grid, double alpha, std::vector<double> g_nodes);
    // Cell-based input: left/right values per cell (both of size cells()).
    static SingularDensity from_cells(std::shared_ptr<const Grid> grid, double alpha,
                                      std::vector<double> g_left, std::vector<double> g_right);

    double alpha() const { return alpha_; }
    const Grid& grid() const { return *grid_; }
    const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
    std::size_t cells() const { return gl_.size(); }
    const std::vector<double>& g_left() const { return gl_; }
    const std::vector<double>& g_right() const { return gr_; }
    // Nodal view (right limits; last node carries the left limit at 1).
    std::vector<double> g_nodes() const;
    double mass() const { return mass_; }

    double g_at(double x) const;         // right-limit convention at nodes
    double value(double x) const;        // f(x)
    double integral_to(double z) const;  // \int_0^z f dm, closed form per cell
    SingularDensity normalized() const;

private:
    SingularDensity() = default;
    std::shared_ptr<const Grid> grid_;
    double alpha_ = 0.0;
    std::vector<double> gl_, gr_;
    double mass_ = 0.0;

    void finalize();  // tail convention + mass
};

enum class DensityKind { lebesgue, power, srb_proxy };

struct DensityParams {
    DensityKind kind = DensityKind::lebesgue;
    double alpha = 0.0;  // for power
    int burn_in = 200;   // for srb_proxy
};

SingularDensity make_density(const MapSystem& sys, const DensityParams& params,
                             std::shared_ptr<const Grid> grid = nullptr);

// Density with a caller-supplied regular factor (normalized).
SingularDensity make_density_from(const MapSystem& sys, double alpha,
                                  const std::function<double(double)>& g_fn,
                                  std::shared_ptr<const Grid> grid = nullptr);

// The nodal transfer operator. Pullback locations, derivatives and hole
// masks are precomputed per grid; the alpha-dependent weights are cached
// per density exponent (not thread-safe while applying with a new alpha).
class TransferOperator {
public:
    TransferOperator(const MapSystem& sys, std::shared_ptr<const Grid> grid, bool open);

    // One application of L (closed) or the open-system operator
    // f -> 1_{I\H} L(f 1_{I\H}). Output mass is recomputed in closed form.
    SingularDensity apply(const SingularDensity& f) const;

private:
    struct Pull {
        std::size_t cell = 0;
        double frac = 0.0;
        double weight_base = 0.0; // 1/DT at the preimage (0 when masked)
        double ratio = 1.0;       // preimage / node, singular-factor pullback
    };
    // Two evaluation sides per node: [0] right limit (defines the left
    // value of the cell starting at the node), [1] left limit (right value
    // of the cell ending there). They differ only when a preimage or the
    // node itself sits exactly on a node or hole edge.
    std::shared_ptr<const Grid> grid_;
    bool open_;
    std::vector<Pull> left_[2], right_[2];
    std::vector<bool> node_masked_[2];
    mutable double cached_alpha_ = -1.0;
    mutable std::vector<double> wl_[2], wr_[2];

    void refresh_weights(double alpha) const;
};

SingularDensity apply_transfer(const MapSystem& sys, const SingularDensity& f, bool open);

struct OpenIterationResult {
    EscapeCurve curve;                          // t = 0..t_max, mass_t = mu_f(I^t)
    std::map<int, SingularDensity> checkpoints; // normalized L^t f / |L^t f|
};

OpenIterationResult iterate_open(const MapSystem& sys, const SingularDensity& f,
                                 int t_max, const std::set<int>& checkpoints = {});

// \int_0^eps f dm for a (normalized) density.
double mass_near_zero(const SingularDensity& f, double eps);

// Empirical log-Holder seminorm over the refined partition elements.
struct HolderReport {
    double p = 0.0;
    std::vector<std::pair<std::string, double>> per_element;
    double seminorm = 0.0;
    bool infinite_flag = false;
    int deepest_index = 0;  // elements beyond this are in the unreported tail
};

HolderReport holder_seminorm(const MapSystem& sys, const SingularDensity& f, double p,
                             int max_index = 2000);

} // namespace lsv

#endif
