#ifndef LSV_MAP_SYSTEM_HPP
#define LSV_MAP_SYSTEM_HPP

#include <optional>
#include <string>
#include <vector>

#include "lsv/errors.hpp"

namespace lsv {

// The hole is a half-open interval [lo, hi). For the standard construction
// it is a cylinder of the refined Markov partition: the element
// J_h \cap \bigcap_{i<=level} T^{-i}(P_{word[i]}), word over {L,R}.
// Control-mode holes (non-cylinder intervals such as [0, a_n)) carry
// cylinder = false and are only produced by the dedicated constructors.
struct Hole {
    int level = 0;       // word length minus one
    int base_index = 0;  // index h of the containing J_h (cylinder mode)
    std::string word;    // symbols over {L,R}, length level+1 (cylinder mode)
    double lo = 0.0;
    double hi = 0.0;
    bool cylinder = true;

    bool contains(double x) const { return x >= lo && x < hi; }
    double width() const { return hi - lo; }
};

// The intermittent interval map
//   T(x) = x + 2^g x^{g+1}   on [0, 1/2)
//   T(x) = 2x - 1            on [1/2, 1)
// with 0 < g < 1, together with the countable Markov partition
// J_0 = [1/2, 1), J_n = [a_n, a_{n-1}) where a_n is the n-th left-branch
// preimage of 1/2, and an optional hole. Immutable after construction;
// all member functions are pure.
class MapSystem {
public:
    static constexpr int kTail = -1;

    explicit MapSystem(double gamma, int n_max = 100000);

    double gamma() const { return gamma_; }
    int n_max() const { return static_cast<int>(a_.size()) - 1; }

    // Partition endpoints a[0..n_max], a[0] = 1/2, strictly decreasing.
    const std::vector<double>& partition() const { return a_; }
    double a(int n) const { return a_.at(static_cast<std::size_t>(n)); }

    double apply(double x) const;
    double derivative(double x) const;

    // Inverse of the left branch: the unique x in [0,1/2) with T(x) = y.
    double invert_left(double y) const;
    // Inverse of the right branch: (y+1)/2 in [1/2,1).
    double invert_right(double y) const;

    // Index n with x in J_n, or kTail when x < a[n_max].
    int locate(double x) const;

    // Builds the cylinder J_h \cap \bigcap_i T^{-i}(P_{word[i]}).
    // Throws config_error when the word is incompatible with J_h
    // (empty intersection) or malformed.
    Hole hole_from_word(int h, const std::string& word) const;

    // Non-cylinder control holes (Pianigiani-Yorke style [0, a_n) and
    // friends). Bypasses the cylinder validator on purpose.
    static Hole control_hole(double lo, double hi);

    void set_hole(Hole hole);
    void clear_hole() { hole_.reset(); }
    const std::optional<Hole>& hole() const { return hole_; }
    bool has_hole() const { return hole_.has_value(); }
    bool in_hole(double x) const { return hole_ && hole_->contains(x); }

private:
    double gamma_;
    double coeff_;  // 2^gamma
    std::vector<double> a_;
    std::optional<Hole> hole_;

    void check_domain(double x, const char* op) const;
};

} // namespace lsv

#endif
