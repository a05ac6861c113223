#include "lsv/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "lsv/cesaro.hpp"
#include "lsv/ensemble.hpp"
#include "lsv/induced.hpp"
#include "lsv/interval_set.hpp"

namespace lsv {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw config_error("cli_runner", "bad numeric value for '" + key + "': " + v);
    return x;
}

long long parse_int(const std::string& v, const std::string& key) {
    char* end = nullptr;
    long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw config_error("cli_runner", "bad integer value for '" + key + "': " + v);
    return x;
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    char* end = nullptr;
    unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw config_error("cli_runner", "bad integer value for '" + key + "': " + v);
    return x;
}

ExperimentKind kind_from(const std::string& s) {
    if (s == "escape-rate") return ExperimentKind::escape_rate;
    if (s == "limit-distribution") return ExperimentKind::limit_distribution;
    if (s == "cesaro") return ExperimentKind::cesaro;
    if (s == "induced") return ExperimentKind::induced;
    if (s == "validate") return ExperimentKind::validate;
    throw config_error("cli_runner", "unknown experiment kind: " + s);
}

EngineChoice engine_from(const std::string& s) {
    if (s == "exact") return EngineChoice::exact;
    if (s == "density") return EngineChoice::density;
    if (s == "montecarlo") return EngineChoice::montecarlo;
    if (s == "all") return EngineChoice::all;
    throw config_error("cli_runner", "unknown engine: " + s);
}

DensityKind density_from(const std::string& s) {
    if (s == "lebesgue") return DensityKind::lebesgue;
    if (s == "power") return DensityKind::power;
    if (s == "srb") return DensityKind::srb_proxy;
    throw config_error("cli_runner", "unknown density kind: " + s);
}

} // namespace

const char* kind_name(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::escape_rate: return "escape-rate";
    case ExperimentKind::limit_distribution: return "limit-distribution";
    case ExperimentKind::cesaro: return "cesaro";
    case ExperimentKind::induced: return "induced";
    case ExperimentKind::validate: return "validate";
    }
    return "?";
}

const char* engine_name(EngineChoice e) {
    switch (e) {
    case EngineChoice::exact: return "exact";
    case EngineChoice::density: return "density";
    case EngineChoice::montecarlo: return "montecarlo";
    case EngineChoice::all: return "all";
    }
    return "?";
}

const char* density_name(DensityKind k) {
    switch (k) {
    case DensityKind::lebesgue: return "lebesgue";
    case DensityKind::power: return "power";
    case DensityKind::srb_proxy: return "srb";
    }
    return "?";
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "kind=" << kind_name(cfg.kind) << '\n'
       << "gamma=" << fmt_g(cfg.gamma) << '\n'
       << "hole=" << cfg.hole << '\n'
       << "density=" << density_name(cfg.density) << '\n'
       << "alpha=" << fmt_g(cfg.alpha) << '\n'
       << "engine=" << engine_name(cfg.engine) << '\n'
       << "t_max=" << cfg.t_max << '\n'
       << "grid=" << cfg.grid_nodes << '\n'
       << "particles=" << cfg.particles << '\n'
       << "seed=" << cfg.seed << '\n'
       << "out=" << cfg.out_dir << '\n';
    return os.str();
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("cli_runner", "config line is not key=value: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "kind") cfg.kind = kind_from(val);
        else if (key == "gamma") cfg.gamma = parse_double(val, key);
        else if (key == "hole") cfg.hole = val;
        else if (key == "density") cfg.density = density_from(val);
        else if (key == "alpha") cfg.alpha = parse_double(val, key);
        else if (key == "engine") cfg.engine = engine_from(val);
        else if (key == "t_max") cfg.t_max = static_cast<int>(parse_int(val, key));
        else if (key == "grid") cfg.grid_nodes = static_cast<int>(parse_int(val, key));
        else if (key == "particles") cfg.particles = static_cast<std::size_t>(parse_int(val, key));
        else if (key == "seed") cfg.seed = parse_u64(val, key);
        else if (key == "out") cfg.out_dir = val;
        else throw config_error("cli_runner", "unknown config key: " + key);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cli_runner", "cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str());
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const config_error*>(&e)) return 2;
    if (dynamic_cast<const budget_error*>(&e)) return 3;
    if (dynamic_cast<const extinction_error*>(&e)) return 4;
    return 5;
}

namespace {

// -------------------------------------------------------------- system setup

struct Session {
    std::shared_ptr<MapSystem> sys;
    GridSpec grid;
    DensityParams params;
};

void apply_hole_spec(MapSystem& sys, const std::string& spec) {
    if (spec == "none") return;
    if (!spec.empty() && (spec[0] == 'J' || spec[0] == 'j')) {
        auto colon = spec.find(':');
        std::string idx = spec.substr(1, colon == std::string::npos ? std::string::npos
                                                                    : colon - 1);
        int h = static_cast<int>(parse_int(idx, "hole"));
        std::string word = colon == std::string::npos ? std::string(h >= 1 ? "L" : "R")
                                                      : spec.substr(colon + 1);
        sys.set_hole(sys.hole_from_word(h, word));
        return;
    }
    auto comma = spec.find(',');
    if (comma == std::string::npos)
        throw config_error("cli_runner",
                           "hole must be 'Jh', 'Jh:WORD', 'lo,hi' or 'none': " + spec);
    double lo = parse_double(trim(spec.substr(0, comma)), "hole");
    double hi = parse_double(trim(spec.substr(comma + 1)), "hole");
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
        throw config_error("cli_runner", "control hole must satisfy 0 <= lo < hi <= 1");
    sys.set_hole(MapSystem::control_hole(lo, hi));
}

Session open_session(const ExperimentConfig& cfg) {
    if (cfg.t_max < 1)
        throw config_error("cli_runner", "t_max must be >= 1");
    if (cfg.grid_nodes < 1000 || cfg.grid_nodes > 2000000)
        throw config_error("cli_runner", "grid must lie in [1e3, 2e6] nodes");
    if (cfg.particles < 1)
        throw config_error("cli_runner", "particles must be >= 1");
    if (cfg.density == DensityKind::power && !(cfg.alpha >= 0.0 && cfg.alpha < 1.0))
        throw config_error("cli_runner", "alpha must lie in [0,1)");

    Session s;
    s.grid.n_align = std::clamp(cfg.grid_nodes / 10, 100, 10000);
    s.grid.target_nodes = cfg.grid_nodes;
    int n_max = std::max(2 * s.grid.n_align, 4000);
    s.sys = std::make_shared<MapSystem>(cfg.gamma, n_max);
    apply_hole_spec(*s.sys, cfg.hole);
    s.params.kind = cfg.density;
    s.params.alpha = cfg.alpha;
    return s;
}

// ----------------------------------------------------------------- summaries

struct Summary {
    std::vector<std::string> lines;

    void kv(const std::string& module, const std::string& key, const std::string& val) {
        lines.push_back(module + "." + key + "=" + val);
    }
    void kv(const std::string& module, const std::string& key, double val) {
        kv(module, key, fmt_short(val));
    }
    void header(const ExperimentConfig& cfg) {
        lines.push_back("# lsvlab summary");
        std::istringstream is(serialize_config(cfg));
        std::string line;
        while (std::getline(is, line)) lines.push_back("config." + line);
    }
};

std::vector<std::string> config_header(const ExperimentConfig& cfg) {
    std::vector<std::string> out;
    std::istringstream is(serialize_config(cfg));
    std::string line;
    while (std::getline(is, line)) out.push_back("# config." + line);
    return out;
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cli_runner", "cannot write file: " + path);
    out << body;
    if (!out) throw error("cli_runner", "write failed: " + path);
}

// the curve measure matching the configured initial density, evaluated on an
// exact survivor set
double set_measure(const IntervalSet& s, const DensityParams& p) {
    switch (p.kind) {
    case DensityKind::lebesgue: return s.lebesgue_mass();
    case DensityKind::power: return s.alpha_mass(p.alpha);
    case DensityKind::srb_proxy: break;
    }
    throw config_error("cli_runner", "exact engine supports lebesgue and power densities only");
}

EscapeCurve exact_curve(const MapSystem& sys, const DensityParams& p, int t_max) {
    SurvivorOptions opts;
    EscapeCurve c;
    double m0 = set_measure(IntervalSet::full(), p); // = 1 by normalization
    IntervalSet s = sys.has_hole() ? survivor(sys, 0, opts) : IntervalSet::full();
    for (int t = 0; t <= t_max; ++t) {
        if (t > 0 && sys.has_hole()) {
            if (t > opts.t_max_exact)
                throw budget_error("survivor_exact", "t exceeds t_max_exact");
            s = s.intersect(preimage(sys, s));
            if (s.count() > opts.max_intervals)
                throw budget_error("survivor_exact", "interval count exceeds configured cap");
        }
        c.times.push_back(t);
        c.mass.push_back(set_measure(s, p) / m0);
        c.stderr_.push_back(0.0);
    }
    c.provenance = "survivor_exact t_max=" + std::to_string(t_max);
    return c;
}

} // namespace

// --------------------------------------------------------------- curve files

void emit_curve(const EscapeCurve& curve, const ExperimentConfig& cfg,
                const std::string& engine, const std::string& path) {
    std::ostringstream os;
    os << "# lsvlab curve\n";
    for (auto& h : config_header(cfg)) os << h << '\n';
    os << "# provenance=" << curve.provenance << '\n';
    os << "t,mass,stderr,engine\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        os << curve.times[i] << ',' << fmt_g(curve.mass[i]) << ','
           << fmt_g(curve.stderr_[i]) << ',' << engine << '\n';
    write_text(path, os.str());
}

EscapeCurve load_curve(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cli_runner", "cannot open curve file: " + path);
    EscapeCurve c;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.rfind("# provenance=", 0) == 0) {
            c.provenance = line.substr(13);
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != "t,mass,stderr,engine")
                throw error("cli_runner", "unexpected curve header: " + line);
            saw_header = true;
            continue;
        }
        std::istringstream row(line);
        std::string f0, f1, f2;
        if (!std::getline(row, f0, ',') || !std::getline(row, f1, ',') ||
            !std::getline(row, f2, ','))
            throw error("cli_runner", "malformed curve row: " + line);
        c.times.push_back(static_cast<int>(parse_int(f0, "t")));
        c.mass.push_back(parse_double(f1, "mass"));
        c.stderr_.push_back(parse_double(f2, "stderr"));
    }
    if (!saw_header) throw error("cli_runner", "curve file has no data header: " + path);
    return c;
}

// ------------------------------------------------------------------- figures

void emit_figure(const std::vector<EscapeCurve>& curves, const std::vector<RateFit>& fits,
                 const ExperimentConfig& cfg, const std::string& path) {
    if (curves.empty())
        throw config_error("cli_runner", "figure needs at least one curve");
    bool loglog = fits.empty() || fits.front().model == RateModel::polynomial;

    auto xs_of = [&](int t) {
        return loglog ? std::log10(static_cast<double>(t)) : static_cast<double>(t);
    };

    // gather data extents
    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    auto grow = [&](double x, double y) {
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
    };
    for (auto& c : curves)
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!(c.mass[i] > 0.0)) continue;
            if (loglog && c.times[i] < 1) continue;
            grow(xs_of(c.times[i]), std::log10(c.mass[i]));
        }
    if (!(x_hi >= x_lo))
        throw config_error("cli_runner", "figure needs positive masses");
    if (x_hi == x_lo) { x_lo -= 0.5; x_hi += 0.5; }
    if (y_hi == y_lo) { y_lo -= 0.5; y_hi += 0.5; }

    const double px0 = 60, px1 = 600, py0 = 420, py1 = 40;
    auto X = [&](double x) { return px0 + (x - x_lo) / (x_hi - x_lo) * (px1 - px0); };
    auto Y = [&](double y) { return py0 + (y - y_lo) / (y_hi - y_lo) * (py1 - py0); };
    auto pt = [&](double x, double y) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(x), Y(y));
        return std::string(buf);
    };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
          "viewBox=\"0 0 640 480\">\n";
    for (auto& h : config_header(cfg)) os << "<!-- " << h.substr(2) << " -->\n";
    os << "<path d=\"M 60 420 L 600 420 M 60 420 L 60 40\" stroke=\"black\" "
          "fill=\"none\" stroke-width=\"1\"/>\n";
    os << "<text x=\"330\" y=\"460\" font-size=\"14\" text-anchor=\"middle\">"
       << (loglog ? "log10 t" : "t") << "</text>\n";
    os << "<text x=\"20\" y=\"230\" font-size=\"14\" text-anchor=\"middle\" "
          "transform=\"rotate(-90 20 230)\">log10 mass</text>\n";

    const char* palette[] = {"#1f6fb4", "#c0392b", "#1e8449", "#7d3c98"};
    int ci = 0;
    for (auto& c : curves) {
        os << "<polyline fill=\"none\" stroke=\"" << palette[ci % 4]
           << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!(c.mass[i] > 0.0)) continue;
            if (loglog && c.times[i] < 1) continue;
            os << pt(xs_of(c.times[i]), std::log10(c.mass[i]));
        }
        os << "\"/>\n";
        ++ci;
    }

    for (auto& f : fits) {
        // anchor the fitted line on the first curve point inside the window
        const EscapeCurve& c = curves.front();
        double t0 = 0, m0 = 0;
        bool found = false;
        for (std::size_t i = 0; i < c.size() && !found; ++i)
            if (c.times[i] >= f.t_lo && c.times[i] <= f.t_hi && c.mass[i] > 0.0 &&
                (!loglog || c.times[i] >= 1)) {
                t0 = c.times[i];
                m0 = c.mass[i];
                found = true;
            }
        if (!found) continue;
        auto model_y = [&](double t) {
            if (f.model == RateModel::polynomial)
                return std::log10(m0) - f.value * (std::log10(t) - std::log10(t0));
            return std::log10(m0) - f.value * (t - t0) / std::log(10.0);
        };
        os << "<polyline fill=\"none\" stroke=\"#555555\" stroke-width=\"1\" "
              "stroke-dasharray=\"6 3\" points=\""
           << pt(xs_of(f.t_lo), model_y(f.t_lo)) << pt(xs_of(f.t_hi), model_y(f.t_hi))
           << "\"/>\n";
    }
    os << "</svg>\n";
    write_text(path, os.str());
}

// ----------------------------------------------------------------- run kinds

namespace {

void summarize_fit(Summary& sum, const std::string& tag, const RateFit& f) {
    const char* model = f.model == RateModel::polynomial ? "polynomial" : "exponential";
    sum.kv("rate_analysis", tag + ".model", model);
    sum.kv("rate_analysis", tag + ".value", f.value);
    sum.kv("rate_analysis", tag + ".ci", f.ci);
    sum.kv("rate_analysis", tag + ".r2", f.r2);
    sum.kv("rate_analysis", tag + ".window",
           std::to_string(f.t_lo) + ":" + std::to_string(f.t_hi));
}

void run_escape_rate(const ExperimentConfig& cfg, Session& ses, const std::string& dir,
                     Summary& sum, RunReport& rep) {
    std::vector<std::pair<std::string, EscapeCurve>> curves;
    bool want_exact = cfg.engine == EngineChoice::exact || cfg.engine == EngineChoice::all;
    bool want_density = cfg.engine == EngineChoice::density || cfg.engine == EngineChoice::all;
    bool want_mc = cfg.engine == EngineChoice::montecarlo || cfg.engine == EngineChoice::all;
    if (cfg.density == DensityKind::srb_proxy && cfg.engine == EngineChoice::all)
        want_exact = false; // no closed-form srb measure on interval unions

    SurvivorOptions opts;
    if (want_exact) {
        int te = cfg.engine == EngineChoice::all ? std::min(cfg.t_max, opts.t_max_exact)
                                                 : cfg.t_max;
        curves.emplace_back("exact", exact_curve(*ses.sys, ses.params, te));
        sum.kv("survivor_exact", "t_max", static_cast<double>(te));
    }
    if (want_density) {
        auto grid = Grid::build(*ses.sys, ses.grid);
        auto f = make_density(*ses.sys, ses.params, grid);
        auto res = iterate_open(*ses.sys, f, cfg.t_max);
        curves.emplace_back("density", std::move(res.curve));
        sum.kv("density_transport", "grid_nodes",
               static_cast<double>(grid->size()));
    }
    if (want_mc) {
        auto c = evolve_streaming(*ses.sys, ses.params, cfg.particles, cfg.t_max, cfg.seed);
        curves.emplace_back("montecarlo", std::move(c));
        sum.kv("monte_carlo", "particles", static_cast<double>(cfg.particles));
    }

    for (auto& [name, c] : curves) {
        std::string p = dir + "/curve_" + name + ".csv";
        emit_curve(c, cfg, name, p);
        rep.files.push_back(p);
    }

    // cross-engine agreement over the common time range
    auto find = [&](const std::string& n) -> const EscapeCurve* {
        for (auto& [name, c] : curves)
            if (name == n) return &c;
        return nullptr;
    };
    const EscapeCurve* ex = find("exact");
    const EscapeCurve* de = find("density");
    const EscapeCurve* mc = find("montecarlo");
    if (ex && de) {
        double worst = 0.0;
        for (std::size_t i = 0; i < ex->size() && i < de->size(); ++i)
            if (ex->mass[i] > 0.0)
                worst = std::max(worst, std::abs(de->mass[i] - ex->mass[i]) / ex->mass[i]);
        sum.kv("cli_runner", "crosscheck.exact_density_rel", worst);
    }
    const EscapeCurve* ref = ex ? ex : de;
    if (ref && mc) {
        double worst = 0.0;
        for (std::size_t i = 0; i < ref->size() && i < mc->size(); ++i)
            if (mc->stderr_[i] > 0.0)
                worst = std::max(worst,
                                 std::abs(mc->mass[i] - ref->mass[i]) / mc->stderr_[i]);
        sum.kv("cli_runner", "crosscheck.montecarlo_sigma", worst);
    }

    // rate fits on the longest curve with positive masses
    const EscapeCurve* best = de ? de : (mc ? mc : ex);
    std::vector<RateFit> fig_fits;
    bool fittable = best && best->size() >= 30;
    if (fittable)
        for (double m : best->mass) fittable = fittable && m > 0.0;
    if (fittable) {
        auto sel = model_select(*best);
        const RateFit& f = sel.choice == RateModel::polynomial ? sel.poly : sel.expo;
        sum.kv("rate_analysis", "model",
               sel.inconclusive ? "inconclusive"
                                : (sel.choice == RateModel::polynomial ? "polynomial"
                                                                       : "exponential"));
        summarize_fit(sum, "poly", sel.poly);
        summarize_fit(sum, "expo", sel.expo);
        fig_fits.push_back(f);
    }

    std::vector<EscapeCurve> fig_curves;
    if (best) fig_curves.push_back(*best);
    for (auto& [name, c] : curves)
        if (&c != best) fig_curves.push_back(c);
    std::string figp = dir + "/escape.svg";
    emit_figure(fig_curves, fig_fits, cfg, figp);
    rep.files.push_back(figp);
}

void run_limit_distribution(const ExperimentConfig& cfg, Session& ses,
                            const std::string& dir, Summary& sum, RunReport& rep) {
    std::set<int> checkpoints;
    for (int t = cfg.t_max; t >= 1 && checkpoints.size() < 5; t /= 2)
        checkpoints.insert(t);
    auto grid = Grid::build(*ses.sys, ses.grid);
    auto f = make_density(*ses.sys, ses.params, grid);
    auto res = iterate_open(*ses.sys, f, cfg.t_max, checkpoints);

    std::string p = dir + "/curve_density.csv";
    emit_curve(res.curve, cfg, "density", p);
    rep.files.push_back(p);

    for (auto& [t, g] : res.checkpoints) {
        sum.kv("density_transport", "mass_near_zero.t" + std::to_string(t),
               mass_near_zero(g, 0.05));
        sum.kv("density_transport", "mass_below_eps2.t" + std::to_string(t),
               mass_near_zero(g, 0.005));
    }

    bool positive = true;
    for (double m : res.curve.mass) positive = positive && m > 0.0;
    std::vector<RateFit> fig_fits;
    if (positive) {
        auto bs = beta_sequence(res.curve);
        double comp_max = 0.0, beta_last = 0.0;
        int t_lo = std::max(2, cfg.t_max / 100);
        for (auto& b : bs) {
            if (b.t >= t_lo) comp_max = std::max(comp_max, b.compensated);
            beta_last = b.beta;
        }
        sum.kv("rate_analysis", "beta.compensated_max", comp_max);
        sum.kv("rate_analysis", "beta.last", beta_last);
        if (res.curve.size() >= 30) {
            auto sel = model_select(res.curve);
            summarize_fit(sum, "poly", sel.poly);
            fig_fits.push_back(sel.poly);
        }
    }
    std::string figp = dir + "/limit.svg";
    emit_figure({res.curve}, fig_fits, cfg, figp);
    rep.files.push_back(figp);
}

void run_cesaro(const ExperimentConfig& cfg, Session& ses, const std::string& dir,
                Summary& sum, RunReport& rep) {
    auto spec = lsv_spec(ses.sys, ses.params, 0.75);
    auto st = cesaro_accumulate(spec, std::max<std::size_t>(cfg.particles, 10000),
                                cfg.t_max, cfg.seed);

    EscapeCurve surv;
    for (int k = 0; k < st.t; ++k) {
        surv.times.push_back(k);
        surv.mass.push_back(st.per_step_norm[static_cast<std::size_t>(k)]);
        surv.stderr_.push_back(0.0);
    }
    surv.provenance = "cesaro_general n=" + std::to_string(cfg.particles) +
                      " seed=" + std::to_string(cfg.seed);
    std::string p = dir + "/curve_cesaro.csv";
    emit_curve(surv, cfg, "cesaro", p);
    rep.files.push_back(p);

    std::ostringstream os;
    os << "# lsvlab cesaro distribution\n";
    for (auto& h : config_header(cfg)) os << h << '\n';
    os << "lo,hi,mass\n";
    for (std::size_t j = 0; j + 1 < st.bins.size(); ++j)
        os << fmt_g(st.bins[j]) << ',' << fmt_g(st.bins[j + 1]) << ','
           << fmt_g(st.accum[j]) << '\n';
    std::string dp = dir + "/distribution.csv";
    write_text(dp, os.str());
    rep.files.push_back(dp);

    double total = 0.0;
    for (double v : st.accum) total += v;
    sum.kv("cesaro_general", "total_mass", total);
    for (int i = 0; i <= 3; ++i)
        sum.kv("cesaro_general", "singularity.i" + std::to_string(i),
               singularity_diagnostic(spec, st, i));
    sum.kv("cesaro_general", "invariance_defect", invariance_diagnostic(spec, st));

    std::string figp = dir + "/cesaro.svg";
    emit_figure({surv}, {}, cfg, figp);
    rep.files.push_back(figp);
}

void run_induced(const ExperimentConfig& cfg, Session& ses, const std::string& dir,
                 Summary& sum, RunReport& rep) {
    auto ind = make_induced(*ses.sys);
    auto res = induced_escape_curve(*ses.sys, ind, cfg.particles, cfg.t_max, cfg.seed);
    std::string p = dir + "/curve_induced.csv";
    emit_curve(res.curve, cfg, "induced", p);
    rep.files.push_back(p);

    sum.kv("induced_map", "n_S", static_cast<double>(ind.n_S));
    sum.kv("induced_map", "cap_events", static_cast<double>(res.cap_events));
    std::vector<RateFit> fig_fits;
    if (cfg.t_max >= 10) {
        auto fit = fit_exponential_rate(res.curve, std::max(1, cfg.t_max / 8), cfg.t_max);
        summarize_fit(sum, "expo", fit);
        sum.kv("rate_analysis", "expo.sigma", std::exp(-fit.value));
        fig_fits.push_back(fit);
    }
    std::string figp = dir + "/induced.svg";
    emit_figure({res.curve}, fig_fits, cfg, figp);
    rep.files.push_back(figp);
}

bool run_validate(const ExperimentConfig& cfg, Session& ses, Summary& sum) {
    bool all_ok = true;
    auto check = [&](const std::string& module, const std::string& name, bool ok) {
        sum.kv(module, "check." + name, ok ? "pass" : "fail");
        all_ok = all_ok && ok;
    };
    const MapSystem& sys = *ses.sys;

    // map_core: partition identity T(J_n) = J_{n-1} at the endpoints, and
    // branch-inverse round trips
    {
        double worst = 0.0;
        int n_hi = std::min(1000, sys.n_max());
        for (int n = 1; n <= n_hi; ++n)
            worst = std::max(worst,
                             std::abs(sys.apply(sys.a(n)) - sys.a(n - 1)) / sys.a(n - 1));
        check("map_core", "partition_identity", worst < 1e-9);
        double rt = 0.0;
        for (int i = 1; i < 50; ++i) {
            double y = i / 50.0;
            rt = std::max(rt, std::abs(sys.apply(sys.invert_left(y)) - y));
            rt = std::max(rt, std::abs(sys.apply(sys.invert_right(y)) - y));
        }
        check("map_core", "inverse_roundtrip", rt < 1e-12);
    }

    // survivor_exact: masses start at 1 - |H| and never increase
    std::vector<double> masses = sys.has_hole() ? survivor_masses(sys, 12)
                                                : std::vector<double>(13, 1.0);
    {
        double m0 = 1.0 - (sys.has_hole() ? sys.hole()->width() : 0.0);
        bool ok = std::abs(masses[0] - m0) < 1e-12;
        for (std::size_t i = 1; i < masses.size(); ++i)
            ok = ok && masses[i] <= masses[i - 1] + 1e-15;
        check("survivor_exact", "monotone_masses", ok);
    }

    // density_transport: closed-system mass conservation and agreement with
    // the exact engine at t = 10
    {
        auto grid = Grid::build(sys, {2000, 20000});
        auto f = make_density(sys, {DensityKind::lebesgue}, grid);
        auto g = apply_transfer(sys, f, false);
        check("density_transport", "mass_conservation", std::abs(g.mass() - 1.0) < 1e-8);
        if (sys.has_hole()) {
            auto curve = iterate_open(sys, f, 10).curve;
            double rel = std::abs(curve.mass.back() - masses[10]) / masses[10];
            check("density_transport", "exact_agreement", rel < 1e-3);
        } else {
            check("density_transport", "exact_agreement", true);
        }
    }

    // monte_carlo: determinism, and survival within 5 sigma of exact
    {
        auto c1 = evolve_streaming(sys, {DensityKind::lebesgue}, 20000, 10, cfg.seed);
        auto c2 = evolve_streaming(sys, {DensityKind::lebesgue}, 20000, 10, cfg.seed);
        check("monte_carlo", "determinism", c1.mass == c2.mass);
        auto c3 = evolve_streaming(sys, {DensityKind::lebesgue}, 100000, 10, cfg.seed + 1);
        bool ok = true;
        for (std::size_t i = 0; i < c3.size(); ++i) {
            double tol = c3.stderr_[i] > 0.0 ? 5.0 * c3.stderr_[i] : 1e-12;
            ok = ok && std::abs(c3.mass[i] - masses[i]) <= tol;
        }
        check("monte_carlo", "exact_agreement", ok);
    }

    // induced_map: points of J_0 mapping back into I_S return in one step
    if (sys.has_hole() && sys.hole()->cylinder) {
        auto ind = make_induced(sys);
        auto fr = first_return(sys, ind, 0.9);
        check("induced_map", "immediate_return", fr.r == 1 && fr.x >= sys.a(ind.n_S));
    }

    // rate_analysis: exact recovery of a synthetic power law
    {
        EscapeCurve c;
        for (int t = 1; t <= 100; ++t) {
            c.times.push_back(t);
            c.mass.push_back(std::pow(static_cast<double>(t), -2.0));
            c.stderr_.push_back(0.0);
        }
        auto fit = fit_polynomial_rate(c, 1, 100);
        check("rate_analysis", "synthetic_power", std::abs(fit.value - 2.0) < 1e-6);
    }

    // cesaro_general: every step contributes exactly 1/t of mass
    {
        auto spec = lsv_spec(ses.sys, {DensityKind::lebesgue}, 0.75);
        auto st = cesaro_accumulate(spec, 10000, 5, cfg.seed);
        double total = 0.0;
        for (double v : st.accum) total += v;
        check("cesaro_general", "unit_mass", std::abs(total - 1.0) < 1e-9);
    }

    return all_ok;
}

} // namespace

RunReport run(const ExperimentConfig& cfg) {
    // validate everything (including the hole spec) before touching the
    // filesystem: config errors must leave no files behind
    Session ses = open_session(cfg);

    std::string dir = cfg.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("LSVLAB_OUT");
        dir = env && *env ? env : ".";
    }
    std::filesystem::create_directories(dir);

    RunReport rep;
    rep.out_dir = dir;
    Summary sum;
    sum.header(cfg);

    std::string cfgp = dir + "/config.txt";
    write_text(cfgp, serialize_config(cfg));
    rep.files.push_back(cfgp);

    sum.kv("map_core", "gamma", cfg.gamma);
    if (ses.sys->has_hole()) {
        sum.kv("map_core", "hole.lo", ses.sys->hole()->lo);
        sum.kv("map_core", "hole.hi", ses.sys->hole()->hi);
    } else {
        sum.kv("map_core", "hole", "none");
    }

    bool ok = true;
    switch (cfg.kind) {
    case ExperimentKind::escape_rate: run_escape_rate(cfg, ses, dir, sum, rep); break;
    case ExperimentKind::limit_distribution:
        run_limit_distribution(cfg, ses, dir, sum, rep);
        break;
    case ExperimentKind::cesaro: run_cesaro(cfg, ses, dir, sum, rep); break;
    case ExperimentKind::induced: run_induced(cfg, ses, dir, sum, rep); break;
    case ExperimentKind::validate: ok = run_validate(cfg, ses, sum); break;
    }

    rep.summary_lines = sum.lines;
    std::string sump = dir + "/summary.txt";
    std::ostringstream body;
    for (auto& l : sum.lines) body << l << '\n';
    write_text(sump, body.str());
    rep.files.push_back(sump);

    if (!ok)
        throw numeric_error("cli_runner", "validation failed; see " + sump);
    return rep;
}

} // namespace lsv
