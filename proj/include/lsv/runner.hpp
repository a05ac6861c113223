#ifndef LSV_RUNNER_HPP
#define LSV_RUNNER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lsv/density.hpp"
#include "lsv/escape_curve.hpp"
#include "lsv/rate_fit.hpp"

namespace lsv {

enum class ExperimentKind { escape_rate, limit_distribution, cesaro, induced, validate };
enum class EngineChoice { exact, density, montecarlo, all };

// One experiment. The hole is kept in its textual form ("J2", "J2:LL",
// "0,0.25" for a control interval, "none") so configs round-trip through
// serialization byte-for-byte.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::escape_rate;
    double gamma = 0.5;
    std::string hole = "J2";
    DensityKind density = DensityKind::lebesgue;
    double alpha = 0.5;          // exponent for density=power
    EngineChoice engine = EngineChoice::all;
    int t_max = 100;
    int grid_nodes = 100000;     // node budget of the transport grid
    std::size_t particles = 100000;
    std::uint64_t seed = 1;
    std::string out_dir = "";    // empty: $LSVLAB_OUT, else "."
};

// Flat key=value text, one pair per line, '#' comments. Unknown keys and
// unparsable values raise config_error. serialize/parse are inverse maps.
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

const char* kind_name(ExperimentKind k);
const char* engine_name(EngineChoice e);
const char* density_name(DensityKind k);

struct RunReport {
    std::vector<std::string> files;         // paths written, in order
    std::vector<std::string> summary_lines; // contents of the summary file
    std::string out_dir;                    // resolved output directory
};

// Executes the experiment: validates the config, builds the system, runs
// the requested engines, and writes config.txt, curve file(s), summary.txt
// and a figure into the output directory. Throws (without writing anything)
// on invalid configs; budget/extinction errors from the engines propagate.
RunReport run(const ExperimentConfig& cfg);

// Curve file: '#' header lines embedding the config, provenance and seed,
// then `t,mass,stderr,engine` rows. Deterministic bytes; reloads exactly.
void emit_curve(const EscapeCurve& curve, const ExperimentConfig& cfg,
                const std::string& engine, const std::string& path);
EscapeCurve load_curve(const std::string& path);

// Standalone SVG: one polyline per curve and one per fit line, plus one
// axes path. Polynomial-model fits select log-log scales, exponential
// semi-log; with no fits the first curve's spread picks log-log.
void emit_figure(const std::vector<EscapeCurve>& curves, const std::vector<RateFit>& fits,
                 const ExperimentConfig& cfg, const std::string& path);

// Stable exit codes: 0 success, 2 config, 3 budget, 4 extinction, 5 other.
int exit_code_for(const std::exception& e);

} // namespace lsv

#endif
