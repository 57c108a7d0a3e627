#include "cli.hpp"
#include "config.hpp"

#include "shapelab/blowup.hpp"
#include "shapelab/cone.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/optimizer.hpp"
#include "shapelab/parallel.hpp"
#include "shapelab/shape_calculus.hpp"
#include "shapelab/vector_field.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

namespace shapelab::cli {

namespace {

namespace fs = std::filesystem;
using std::numbers::pi;

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::Validation, msg); }

std::vector<double> numbers_after_colon(const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(spec.substr(spec.find(':') + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        double v = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0') invalid("bad preset parameter '" + item + "' in " + spec);
        out.push_back(v);
    }
    return out;
}

// constant:c | affine:c0,s1,...,sd | gaussian:offset,amp,width,c1,...,cd | fld:path
AnalyticScalar parse_preset(const std::string& spec, const Grid& grid) {
    const int d = grid.dim;
    std::string name = spec.substr(0, spec.find(':'));
    if (name == "fld") {
        auto field = std::make_shared<ScalarField>(read_fld1(spec.substr(4)));
        if (!same_grid(field->grid, grid)) invalid(spec + " does not live on the configured grid");
        return AnalyticScalar::sampled(field, spec);
    }
    auto p = numbers_after_colon(spec);
    if (name == "constant") {
        if (p.size() != 1) invalid(spec + ": constant takes one value");
        return AnalyticScalar::constant(p[0]);
    }
    if (name == "affine") {
        if (int(p.size()) != 1 + d) invalid(spec + ": affine takes c0 and one slope per axis");
        return AnalyticScalar::affine(p[0], {p[1], p[2], d == 3 ? p[3] : 0.0});
    }
    if (name == "gaussian") {
        if (int(p.size()) != 3 + d) invalid(spec + ": gaussian takes offset, amp, width and a centre");
        if (!(p[2] > 0.0)) invalid(spec + ": gaussian width must be positive");
        return AnalyticScalar::gaussian(p[0], p[1], {p[3], p[4], d == 3 ? p[5] : 0.0}, p[2]);
    }
    invalid("unknown data preset '" + name + "'");
}

struct Setup {
    RunConfig cfg;
    Grid grid;
    ProblemData data;
    DomainRep domain;
    Vec center{};
    std::uint64_t seed = 1;
};

Grid make_grid(const RunConfig& c) {
    int dim = c.integer("grid", "dim");
    if (dim != 2 && dim != 3) invalid("[grid] dim must be 2 or 3");
    double box = c.num("grid", "box");
    if (!(box > 0.0)) invalid("[grid] box must be positive");
    Grid g = Grid::cube(dim, -box, box, c.integer("grid", "n"));
    g.validate();
    return g;
}

DomainRep make_domain(const RunConfig& c, const Grid& g, Vec& center) {
    const std::string shape = c.str("domain", "shape");
    center = c.vec("domain", "center");
    if (g.dim == 2) center[2] = 0.0;
    if (shape == "ball") {
        double r = c.num("domain", "radius");
        if (!(r > 0.0)) invalid("[domain] radius must be positive");
        Vec cc = center;
        return DomainRep::from_function(g, [cc, r](const Vec& x) { return r - norm(x - cc); });
    }
    if (shape == "halfspace") {
        Vec n = c.vec("domain", "normal");
        if (g.dim == 2) n[2] = 0.0;
        double len = norm(n);
        if (!(len > 0.0)) invalid("[domain] normal must be nonzero");
        n = (1.0 / len) * n;
        double off = c.num("domain", "offset");
        center = off * n;
        return DomainRep::from_function(g, [n, off](const Vec& x) { return dot(x, n) - off; });
    }
    if (shape == "fld") {
        const std::string& path = c.str("domain", "path");
        if (path.empty()) invalid("[domain] path is required for shape = fld");
        ScalarField phi = read_fld1(path);
        if (!same_grid(phi.grid, g)) invalid(path + " does not live on the configured grid");
        return DomainRep::from_phi(std::move(phi));
    }
    invalid("[domain] shape must be ball, halfspace or fld");
}

Setup make_setup(RunConfig cfg) {
    cfg.resolve();
    Setup s{cfg, make_grid(cfg), {}, {}, {}, 1};
    s.data.f = parse_preset(cfg.str("data", "f"), s.grid);
    s.data.g = parse_preset(cfg.str("data", "g"), s.grid);
    s.data.Q = parse_preset(cfg.str("data", "Q"), s.grid);
    s.data.fit_constants(s.grid);
    s.data.validate(s.grid);
    s.domain = make_domain(cfg, s.grid, s.center);
    int seed = cfg.integer("run", "seed");
    if (seed < 0) invalid("[run] seed must be non-negative");
    s.seed = std::uint64_t(seed);
    return s;
}

class Outputs {
public:
    explicit Outputs(const std::string& dir) : dir_(dir) {}
    void create() const { fs::create_directories(dir_); }
    std::string path(const std::string& name) {
        files_.push_back(name);
        return (fs::path(dir_) / name).string();
    }
    const std::vector<std::string>& files() const { return files_; }
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::vector<std::string> files_;
};

class KeyValueCsv {
public:
    template <class T> void add(const std::string& k, const T& v) {
        std::ostringstream os;
        os << std::setprecision(17) << v;
        rows_.emplace_back(k, os.str());
    }
    void write(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw Error(ErrorCode::Validation, "cannot write " + path);
        os << "key,value\n";
        for (const auto& [k, v] : rows_) os << k << ',' << v << '\n';
    }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

double equal_volume_radius(int dim, double vol) {
    return dim == 2 ? std::sqrt(vol / pi) : std::cbrt(3.0 * vol / (4.0 * pi));
}

// Boundary crossings with room for a ball of radius margin, in an order drawn from the seeded
// generator.
std::vector<Vec> pick_points(const DomainRep& dom, std::size_t count, double margin, std::mt19937_64& rng) {
    auto all = sample_boundary_points(dom, std::numeric_limits<std::size_t>::max(), margin);
    if (all.empty()) throw Error(ErrorCode::EmptyDomain, "no boundary points with room for the requested radii");
    for (std::size_t i = all.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(all[i - 1], all[pick(rng)]);
    }
    if (all.size() > count) all.resize(count);
    return all;
}

std::vector<double> ladder_from(const RunConfig& c, const Grid& g) {
    const std::string& radii = c.str("blowup", "radii");
    if (radii == "dyadic") {
        double r_max = c.num("blowup", "r_max");
        if (!(r_max > 0.0)) invalid("[blowup] r_max must be positive");
        auto l = dyadic_ladder(r_max, g.h);
        if (l.empty()) invalid("[blowup] r_max is below 8h");
        return l;
    }
    std::vector<double> l;
    std::stringstream ss(radii);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        double v = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0' || !(v > 0.0)) invalid("[blowup] radii must be 'dyadic' or positive numbers");
        l.push_back(v);
    }
    if (l.empty()) invalid("[blowup] radii is empty");
    return l;
}

OptimizeConfig optimize_config(const Setup& s) {
    const RunConfig& c = s.cfg;
    OptimizeConfig o;
    o.mode = parse_mode(c.str("optimize", "mode"));
    o.data = s.data;
    o.lambda = c.num("optimize", "lambda");
    o.Lambda = c.num("optimize", "Lambda");
    o.heat_boundary = parse_preset(c.str("optimize", "heat_boundary"), s.grid);
    double R = c.num("optimize", "design_radius");
    if (R < 0.0) invalid("[optimize] design_radius must be >= 0 (0 selects the grid box)");
    if (R > 0.0) {
        Vec cc = s.center;
        o.design = ScalarField::sample(s.grid, [cc, R](const Vec& x) { return R - norm(x - cc); });
    }
    const std::string& init = c.str("optimize", "init");
    if (init == "domain") o.init = s.domain;
    else if (init != "default") invalid("[optimize] init must be domain or default");
    o.step = c.num("optimize", "step");
    o.max_steps = c.integer("optimize", "max_steps");
    o.reinit_every = c.integer("optimize", "reinit_every");
    o.stop_tol = c.num("optimize", "stop_tol");
    o.tol = c.num("optimize", "tol");
    o.max_halvings = c.integer("optimize", "max_halvings");
    o.coarse_levels = c.integer("optimize", "coarse_levels");
    o.validate();
    return o;
}

VectorFieldSpec variation_field(const Setup& s) {
    const RunConfig& c = s.cfg;
    const int d = s.grid.dim;
    const std::string& field = c.str("variation", "field");
    double rho = c.num("variation", "rho"), amp = c.num("variation", "amplitude");
    if (!(rho > 0.0)) invalid("[variation] rho must be positive");
    Vec dir{};
    bool axis = false;
    if (field.rfind("bump-e", 0) == 0 && field.size() == 7) {
        int k = field[6] - '1';
        if (k < 0 || k >= d) invalid("[variation] field " + field + " has no axis in dimension " + std::to_string(d));
        dir[k] = 1.0;
        axis = true;
    } else if (field != "radial" && field != "rotational") {
        invalid("[variation] field must be bump-e1..bump-e" + std::to_string(d) + ", radial or rotational");
    }
    Vec center;
    const std::string& where = c.str("variation", "center");
    if (where == "boundary") {
        const std::string& shape = c.str("domain", "shape");
        if (shape == "ball") center = s.center + c.num("domain", "radius") * (axis ? dir : Vec{1, 0, 0});
        else if (shape == "halfspace") center = s.center;
        else {
            auto pts = sample_boundary_points(s.domain, 1, rho);
            if (pts.empty()) invalid("[variation] no boundary point with room for the field support");
            center = pts[0];
        }
    } else {
        RunConfig probe;
        probe.set("domain", "center", where);
        center = probe.vec("domain", "center");
        if (d == 2) center[2] = 0.0;
    }
    VectorFieldSpec spec;
    if (axis) spec = VectorFieldSpec::axis(d, center, rho, dir, amp);
    else if (field == "radial") spec = VectorFieldSpec::radial(d, center, rho, s.center, amp);
    else spec = VectorFieldSpec::rotational(d, center, rho, s.center, amp);
    spec.validate(s.grid);
    return spec;
}

void cmd_solve(Setup& s, Outputs& out, std::ostream& log) {
    out.create();
    EnergyReport st = energy_F_report(s.domain, s.data, s.cfg.num("optimize", "tol"));
    write_fld1(out.path("u.fld"), st.u);
    write_fld1(out.path("v.fld"), st.v);
    write_fld1(out.path("phi.fld"), s.domain.phi);
    KeyValueCsv kv;
    kv.add("h", s.grid.h);
    kv.add("F", st.F);
    kv.add("F_symmetric", st.F_symmetric);
    kv.add("volume", st.volume);
    kv.write(out.path("summary.csv"));
    log << "F = " << st.F << ", volume = " << st.volume << '\n';
}

void cmd_optimize(Setup& s, Outputs& out, std::ostream& log) {
    OptimizeConfig o = optimize_config(s);
    out.create();
    OptimizeResult r = optimize(o);
    r.trace.write_csv(out.path("opt_trace.csv"));
    write_fld1(out.path("final.fld"), r.domain.phi);
    write_fld1(out.path("u.fld"), r.u);
    const OptStep& last = r.trace.steps.back();
    double radius = equal_volume_radius(s.grid.dim, last.volume);
    KeyValueCsv kv;
    kv.add("mode", mode_name(o.mode));
    kv.add("h", s.grid.h);
    kv.add("steps", r.trace.steps.size());
    kv.add("converged", r.trace.converged ? 1 : 0);
    kv.add("energy", last.energy);
    kv.add("volume", last.volume);
    kv.add("radius", radius);
    kv.write(out.path("summary.csv"));
    log << "steps = " << r.trace.steps.size() << ", energy = " << last.energy << ", radius = " << radius << '\n';
}

void cmd_variation(Setup& s, Outputs& out, std::ostream& log) {
    VectorFieldSpec spec = variation_field(s);
    VariationOptions opt;
    opt.tol = s.cfg.num("variation", "tol");
    opt.ladder = s.cfg.list("variation", "ladder");
    out.create();
    VariationReport rep = second_variation(s.domain, s.data, spec, opt);
    rep.write_csv(out.path("variation.csv"));
    double bound = 10.0 * (s.grid.h + opt.tol);
    bool stationary = std::fabs(rep.deltaF) <= bound;
    KeyValueCsv kv;
    kv.add("field", rep.field);
    kv.add("F0", rep.F0);
    kv.add("deltaF", rep.deltaF);
    kv.add("deltaF_surface", rep.deltaF_surface);
    kv.add("delta2F", rep.delta2F);
    kv.add("tolerance", bound);
    kv.add("stationary", stationary ? 1 : 0);
    kv.add("min_exponent", rep.min_exponent());
    kv.write(out.path("summary.csv"));
    log << "|deltaF| = " << std::fabs(rep.deltaF) << (stationary ? " <= " : " > ") << "tolerance " << bound
        << "; delta2F = " << rep.delta2F << '\n';
}

void cmd_blowup(Setup& s, Outputs& out, std::ostream& log) {
    auto ladder = ladder_from(s.cfg, s.grid);
    int count = s.cfg.integer("blowup", "points");
    if (count < 1) invalid("[blowup] points must be positive");
    out.create();
    std::mt19937_64 rng(s.seed);
    EnergyReport st = energy_F_report(s.domain, s.data, s.cfg.num("optimize", "tol"));
    auto pts = pick_points(s.domain, count, ladder.front(), rng);
    BandRatio band = boundary_ratio(s.domain, st.u, st.v);
    std::ofstream os(out.path("weiss.csv"));
    std::ofstream sum(out.path("weiss_summary.csv"));
    os << std::setprecision(17) << "point,x,y,z,radius,W,D\n";
    sum << std::setprecision(17) << "point,x,y,z,lam,monotonicity_defect\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec& x = pts[i];
        WeissTrace t = weiss_trace(st.u, x, band.lambda * s.data.Q(x), ladder);
        for (std::size_t k = 0; k < t.radii.size(); ++k)
            os << i << ',' << x[0] << ',' << x[1] << ',' << x[2] << ',' << t.radii[k] << ',' << t.W[k] << ','
               << t.D[k] << '\n';
        sum << i << ',' << x[0] << ',' << x[1] << ',' << x[2] << ',' << t.lam << ',' << t.monotonicity_defect() << '\n';
        worst = std::max(worst, t.monotonicity_defect());
    }
    log << pts.size() << " points, lambda = " << band.lambda << ", worst monotonicity defect = " << worst << '\n';
}

void cmd_classify(Setup& s, Outputs& out, std::ostream& log) {
    auto ladder = ladder_from(s.cfg, s.grid);
    int count = s.cfg.integer("blowup", "points");
    if (count < 1) invalid("[blowup] points must be positive");
    double tau = s.cfg.num("blowup", "tau");
    if (!(tau > 0.0)) invalid("[blowup] tau must be positive");
    out.create();
    std::mt19937_64 rng(s.seed);
    EnergyReport st = energy_F_report(s.domain, s.data, s.cfg.num("optimize", "tol"));
    auto pts = pick_points(s.domain, count, 1.25 * ladder.front(), rng);
    ClassifyReport rep = classify_boundary(s.domain, s.data, st.u, st.v, pts, ladder, tau);
    rep.write_csv(out.path("classify.csv"));
    int counts[3] = {0, 0, 0};
    for (const auto& p : rep.points) ++counts[int(p.verdict)];
    KeyValueCsv kv;
    kv.add("points", rep.points.size());
    kv.add("regular", counts[0]);
    kv.add("singular", counts[1]);
    kv.add("inconclusive", counts[2]);
    kv.add("lambda", rep.lambda);
    kv.add("ratio_spread", rep.ratio_spread);
    kv.add("smallest_radius", ladder.back());
    kv.write(out.path("summary.csv"));
    log << counts[0] << " regular, " << counts[1] << " singular, " << counts[2] << " inconclusive at radius >= "
        << ladder.back() << '\n';
}

void cmd_cone(Setup& s, Outputs& out, std::ostream& log) {
    const RunConfig& c = s.cfg;
    int dim = c.integer("cone", "dim");
    double lo = c.num("cone", "theta_min"), hi = c.num("cone", "theta_max");
    int n = c.integer("cone", "theta_samples");
    if (dim < 2) invalid("[cone] dim must be at least 2");
    if (!(lo > 0.0 && hi < pi && lo <= hi)) invalid("[cone] need 0 < theta_min <= theta_max < pi");
    if (n < 1) invalid("[cone] theta_samples must be positive");
    CjkFamily fam;
    fam.r_in = c.num("cone", "r_in");
    fam.r_out = c.num("cone", "r_out");
    fam.modes = c.integer("cone", "modes");
    fam.s_samples = c.integer("cone", "s_samples");
    if (!(fam.r_in > 0.0 && fam.r_out > fam.r_in)) invalid("[cone] need 0 < r_in < r_out");
    if (fam.modes < 1 || fam.s_samples < 1) invalid("[cone] modes and s_samples must be positive");
    out.create();
    std::vector<double> thetas;
    for (int k = 0; k < n; ++k) thetas.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
    if (lo <= pi / 2 && pi / 2 <= hi) thetas.push_back(pi / 2);
    std::sort(thetas.begin(), thetas.end());
    thetas.erase(std::unique(thetas.begin(), thetas.end(), [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
                 thetas.end());
    std::ofstream os(out.path("cone_scan.csv"));
    os << "# axisymmetric caps only; a non-negative cjk minimum means no instability found in the test family\n";
    os << std::setprecision(17) << "theta0,solved,H_times_r,cjk_min,verdict\n";
    int solved = 0;
    for (double th : thetas) {
        auto spec = solve_cap(dim, th);
        if (!spec) {
            os << th << ",0,,,no-solution\n";
            continue;
        }
        ++solved;
        RayleighReport rep = cjk_form(*spec, fam);
        std::string tag = std::to_string(solved);
        spec->write_csv(out.path("cone_profile_" + tag + ".csv"));
        rep.write_csv(out.path("cjk_" + tag + ".csv"));
        os << th << ",1," << mean_curvature(*spec, 1.0) << ',' << rep.min_value << ','
           << (rep.unstable() ? "unstable" : "no-instability-found") << '\n';
    }
    auto z = first_cap_zero(dim);
    log << solved << " of " << thetas.size() << " caps solved; first zero of the regular profile at "
        << (z ? std::to_string(*z) : std::string("none")) << '\n';
}

void cmd_diagnose(Setup& s, Outputs& out, std::ostream& log) {
    const RunConfig& c = s.cfg;
    int probes = c.integer("diagnose", "probes");
    int max_points = c.integer("diagnose", "max_points");
    double rmin = c.num("diagnose", "probe_radius_min"), rmax = c.num("diagnose", "probe_radius_max");
    if (probes < 0 || max_points < 1) invalid("[diagnose] probes must be >= 0 and max_points >= 1");
    if (!(rmin > 0.0 && rmax >= rmin)) invalid("[diagnose] need 0 < probe_radius_min <= probe_radius_max");
    double tol = c.num("optimize", "tol");
    out.create();
    std::mt19937_64 rng(s.seed);
    EnergyReport st = energy_F_report(s.domain, s.data, tol);
    DiagnosticsReport rep = diagnostics(s.domain, st.u, c.num("diagnose", "r_max"), std::size_t(max_points));
    rep.write_csv(out.path("diagnostics.csv"));
    std::ofstream os(out.path("probes.csv"));
    os << std::setprecision(17) << "probe,x,y,z,radius,outward,inward,tolerance\n";
    double worst = std::numeric_limits<double>::infinity();
    if (probes > 0 && !rep.empty) {
        auto pts = pick_points(s.domain, std::numeric_limits<std::size_t>::max(), rmax, rng);
        std::uniform_int_distribution<std::size_t> which(0, pts.size() - 1);
        std::uniform_real_distribution<double> rad(rmin, rmax);
        for (int k = 0; k < probes; ++k) {
            Vec x = pts[which(rng)];
            double r = rad(rng);
            BallRegion B{x, r};
            double o = minimality_probe(s.domain, s.data, st.u, B, ProbeDirection::Outward, tol);
            double i = minimality_probe(s.domain, s.data, st.u, B, ProbeDirection::Inward, tol);
            os << k << ',' << x[0] << ',' << x[1] << ',' << x[2] << ',' << r << ',' << o << ',' << i << ','
               << -(s.grid.h + tol) << '\n';
            worst = std::min({worst, o, i});
        }
    }
    log << "nondegeneracy " << rep.nondegeneracy_min << ", density [" << rep.density_min << ", " << rep.density_max
        << "], slope " << rep.levelset_slope << ", worst probe margin " << worst << '\n';
}

void write_manifest(const Outputs& out, const std::string& sub, const Setup& s, const std::string& status) {
    nlohmann::json j;
    j["tool"] = "shapelab";
    j["subcommand"] = sub;
    j["status"] = status;
    j["seed"] = s.seed;
    j["threads"] = thread_count();
    j["config"] = s.cfg.to_json();
    j["outputs"] = out.files();
    std::ofstream os((fs::path(out.dir()) / "manifest.json").string());
    os << j.dump(2) << '\n';
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"shape optimization and free boundary experiments"};
    app.require_subcommand(1);
    std::string config_path, output_dir;
    long seed = -1;
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"solve", "state and adjoint on the configured domain"},
        {"optimize", "level set descent of the shape functional"},
        {"variation", "first and second variation with a Taylor ladder"},
        {"blowup", "Weiss traces at sampled boundary points"},
        {"classify", "regular or singular verdicts at sampled boundary points"},
        {"cone", "spherical cap scan and stability form"},
        {"diagnose", "non-degeneracy, densities and minimality probes"},
    };
    for (const auto& [name, help] : subs) {
        CLI::App* sc = app.add_subcommand(name, help);
        sc->add_option("config", config_path, "key = value config or JSON manifest")->required();
        sc->add_option("-o,--output", output_dir, "override [output] directory");
        sc->add_option("-s,--seed", seed, "override [run] seed");
    }
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    std::string sub = app.get_subcommands().front()->get_name();

    std::unique_ptr<Setup> setup;
    try {
        RunConfig cfg = RunConfig::load(config_path);
        if (!output_dir.empty()) cfg.set("output", "directory", fs::absolute(output_dir).string());
        if (seed >= 0) cfg.set("run", "seed", std::to_string(seed));
        setup = std::make_unique<Setup>(make_setup(cfg));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_numerical(e.code()) ? 3 : 2;
    }

    Outputs outputs(setup->cfg.str("output", "directory"));
    try {
        if (sub == "solve") cmd_solve(*setup, outputs, out);
        else if (sub == "optimize") cmd_optimize(*setup, outputs, out);
        else if (sub == "variation") cmd_variation(*setup, outputs, out);
        else if (sub == "blowup") cmd_blowup(*setup, outputs, out);
        else if (sub == "classify") cmd_classify(*setup, outputs, out);
        else if (sub == "cone") cmd_cone(*setup, outputs, out);
        else cmd_diagnose(*setup, outputs, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (!is_numerical(e.code())) return 2;
        if (fs::exists(outputs.dir())) write_manifest(outputs, sub, *setup, std::string("failed: ") + e.what());
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
    write_manifest(outputs, sub, *setup, "ok");
    return 0;
}

} // namespace shapelab::cli
