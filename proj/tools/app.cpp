#include "app.hpp"

#include "possio/cheb.hpp"
#include "possio/errors.hpp"
#include "possio/field.hpp"
#include "possio/flowconfig.hpp"
#include "possio/fredholm.hpp"
#include "possio/kernel.hpp"
#include "possio/laplace.hpp"
#include "possio/verify.hpp"
#include "possio/yaml_util.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace possio::app {

namespace {

namespace fs = std::filesystem;
namespace y = possio::yaml;
using json = nlohmann::ordered_json;
using cplx = std::complex<double>;

constexpr const char* kOutputEnv = "POSSIO_OUTPUT_DIR";

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

/// Header-first CSV with full-precision numbers.
class Csv {
public:
    Csv(const fs::path& path, std::initializer_list<const char*> header) : path_(path), os_(path) {
        if (!os_) throw ConfigError("cannot write " + path.string());
        bool first = true;
        for (const char* h : header) {
            os_ << (first ? "" : ",") << h;
            first = false;
        }
        os_ << '\n';
    }

    Csv& row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            os_ << (first ? "" : ",") << num(v);
            first = false;
        }
        os_ << '\n';
        ++rows_;
        return *this;
    }

    std::size_t rows() const { return rows_; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream os_;
    std::size_t rows_ = 0;
};

struct RunConfig {
    YAML::Node root;
    fs::path base_dir = ".";
    FlowParams params;
    std::size_t n = 64;
    laplace::Contour contour;
    double sigma_shift = field::kDefaultSigmaShift;
    double gate_tol = laplace::kGateTolerance;
    bool enforce_gate = true;
    fredholm::SolveOptions solve;
    fs::path output_dir = "possio_out";
};

YAML::Node section(const YAML::Node& root, const char* name) {
    const YAML::Node n = root[name];
    if (!n) return YAML::Node(YAML::NodeType::Map);
    y::require_map(n, name);
    return n;
}

/// "--section.key value" and "--section.key=value" pairs are pulled out
/// before CLI11 sees the arguments.
std::vector<std::pair<std::string, std::string>> split_overrides(std::vector<std::string>& args) {
    std::vector<std::pair<std::string, std::string>> out;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0) {
            rest.push_back(a);
            continue;
        }
        std::string key = a.substr(2), value;
        const auto eq = key.find('=');
        if (eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        }
        if (key.find('.') == std::string::npos) {
            rest.push_back(a);
            continue;
        }
        if (eq == std::string::npos) {
            if (i + 1 >= args.size()) throw ConfigError("override --" + key + " needs a value");
            value = args[++i];
        }
        out.emplace_back(key, value);
    }
    args = std::move(rest);
    return out;
}

void apply_override(YAML::Node& root, const std::string& key, const std::string& value) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot), name = key.substr(dot + 1);
    if (sec.empty() || name.empty() || name.find('.') != std::string::npos) {
        throw ConfigError("override --" + key + " must have the form --section.key");
    }
    YAML::Node parsed;
    try {
        parsed = YAML::Load(value);
    } catch (const YAML::Exception& e) {
        throw ConfigError("override --" + key + ": " + e.what());
    }
    if (root[sec] && !root[sec].IsMap()) throw ConfigError("section '" + sec + "' must be a mapping");
    root[sec][name] = parsed;
}

RunConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides,
                      bool need_flow) {
    RunConfig cfg;
    if (!path.empty()) {
        if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
        try {
            cfg.root = YAML::LoadFile(path);
        } catch (const YAML::Exception& e) {
            throw ConfigError(path + ": " + e.what());
        }
        cfg.base_dir = fs::path(path).parent_path();
        if (cfg.base_dir.empty()) cfg.base_dir = ".";
    }
    if (!cfg.root || cfg.root.IsNull()) cfg.root = YAML::Node(YAML::NodeType::Map);
    if (!cfg.root.IsMap()) throw ConfigError("config root must be a mapping");
    for (const auto& [k, v] : overrides) apply_override(cfg.root, k, v);
    y::reject_unknown_keys(cfg.root, "<root>",
                           {"flow", "grid", "contour", "downwash", "solve", "scan", "field", "loads", "fredholm",
                            "dump_kernel", "output", "verify"});

    if (cfg.root["flow"] || need_flow) {
        cfg.params = flow_params_from_yaml(cfg.root["flow"] ? cfg.root["flow"] : YAML::Node(YAML::NodeType::Map));
    } else {
        cfg.params = verify::VerifyOptions{}.params;
    }

    const YAML::Node grid = section(cfg.root, "grid");
    y::reject_unknown_keys(grid, "grid", {"n"});
    const long n = y::optional_int(grid, "n", "grid", 64);
    if (n < 4 || n > 4096) throw ConfigError("grid.n must lie in [4, 4096]");
    cfg.n = static_cast<std::size_t>(n);

    const YAML::Node c = section(cfg.root, "contour");
    y::reject_unknown_keys(c, "contour", {"nu_max", "d_nu", "sigma_shift", "gate_tol", "enforce_gate"});
    cfg.contour.sigma = cfg.params.sigma_prime;
    cfg.contour.nu_max = y::optional_double(c, "nu_max", "contour", cfg.contour.nu_max);
    cfg.contour.dnu = y::optional_double(c, "d_nu", "contour", cfg.contour.dnu);
    if (!(cfg.contour.nu_max > 0.0) || !(cfg.contour.dnu > 0.0) || cfg.contour.dnu > cfg.contour.nu_max) {
        throw ConfigError("contour needs 0 < d_nu <= nu_max");
    }
    cfg.sigma_shift = y::optional_double(c, "sigma_shift", "contour", cfg.sigma_shift);
    cfg.gate_tol = y::optional_double(c, "gate_tol", "contour", cfg.gate_tol);
    if (c["enforce_gate"]) cfg.enforce_gate = c["enforce_gate"].as<bool>();

    const YAML::Node f = section(cfg.root, "fredholm");
    y::reject_unknown_keys(f, "fredholm", {"char_threshold", "hook_tolerance", "lp_exponent"});
    cfg.solve.char_threshold = y::optional_double(f, "char_threshold", "fredholm", cfg.solve.char_threshold);
    cfg.solve.hook_tolerance = y::optional_double(f, "hook_tolerance", "fredholm", cfg.solve.hook_tolerance);
    cfg.solve.lp_exponent = y::optional_double(f, "lp_exponent", "fredholm", cfg.solve.lp_exponent);

    const YAML::Node o = section(cfg.root, "output");
    y::reject_unknown_keys(o, "output", {"dir"});
    cfg.output_dir = y::optional_string(o, "dir", "output", cfg.output_dir.string());
    const bool dir_overridden = std::any_of(overrides.begin(), overrides.end(),
                                            [](const auto& kv) { return kv.first == "output.dir"; });
    if (const char* env = std::getenv(kOutputEnv); env && *env && !dir_overridden) cfg.output_dir = env;
    return cfg;
}

void prepare_output(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
}

laplace::DownwashSpec load_downwash(const RunConfig& cfg, const cheb::GridPtr& grid) {
    const YAML::Node d = cfg.root["downwash"];
    if (!d) throw ConfigError("missing section 'downwash'");
    return laplace::downwash_from_yaml(d, grid, cfg.base_dir);
}

field::SolutionFamily build_family(const RunConfig& cfg, const laplace::DownwashSpec& spec,
                                   const cheb::GridPtr& grid) {
    field::SolutionFamily fam =
        spec.mode == laplace::DownwashMode::harmonic
            ? field::harmonic_family(spec, cfg.params, grid, cfg.sigma_shift, cfg.solve)
            : field::contour_family(spec, cfg.params, grid, cfg.contour, cfg.solve);
    fam.gate_tol = cfg.gate_tol;
    fam.enforce_gate = cfg.enforce_gate;
    return fam;
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

json flow_json(const RunConfig& cfg) {
    const FlowParams& p = cfg.params;
    return {{"a", p.a}, {"M", p.M}, {"U", p.U}, {"c", p.c}, {"sigma1", p.sigma1}, {"sigma2", p.sigma2},
            {"sigma_prime", p.sigma_prime}};
}

struct Gate {
    std::string name;
    double value;
    double tolerance;
    bool pass;
};

void write_manifest(const RunConfig& cfg, const std::string& command, const json& extra, const std::vector<Gate>& gates,
                    const std::vector<fs::path>& artifacts) {
    json m;
    m["command"] = command;
    m["flow"] = flow_json(cfg);
    m["grid"] = {{"n", cfg.n}};
    m["contour"] = {{"sigma", cfg.contour.sigma},   {"nu_max", cfg.contour.nu_max},
                    {"d_nu", cfg.contour.dnu},      {"sigma_shift", cfg.sigma_shift},
                    {"gate_tol", cfg.gate_tol},     {"enforce_gate", cfg.enforce_gate}};
    m["tolerances"] = {{"char_threshold", cfg.solve.char_threshold},
                       {"hook_tolerance", cfg.solve.hook_tolerance},
                       {"route_tolerance", 1e-8},
                       {"lp_exponent", cfg.solve.lp_exponent},
                       {"bromwich_gate", cfg.gate_tol},
                       {"tangency", 1e-2},
                       {"kutta", 1e-10},
                       {"decay_threshold", laplace::kDecayThreshold}};
    for (const auto& [k, v] : extra.items()) m[k] = v;
    json g = json::array();
    bool all = true;
    for (const Gate& x : gates) {
        json tol = std::isfinite(x.tolerance) ? json(x.tolerance) : json("finite");
        g.push_back({{"name", x.name}, {"value", x.value}, {"tolerance", tol}, {"status", x.pass ? "pass" : "fail"}});
        all = all && x.pass;
    }
    m["gates"] = g;
    m["status"] = all ? "pass" : "fail";
    json a = json::array();
    for (const auto& p : artifacts) a.push_back(p.filename().string());
    m["artifacts"] = a;
    std::ofstream os(cfg.output_dir / "manifest.json");
    os << m.dump(2) << '\n';
}

std::vector<double> list_or(const YAML::Node& sec, const char* key, const std::string& name,
                            std::vector<double> fallback) {
    auto v = y::optional_doubles(sec, key, name, std::move(fallback));
    if (v.empty()) throw ConfigError(name + "." + key + " must not be empty");
    return v;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1.0);
    return v;
}

cplx parse_s(const std::string& text) {
    std::stringstream ss(text);
    double re = 0.0, im = 0.0;
    char comma = 0;
    if (!(ss >> re >> comma >> im) || comma != ',' || !(ss >> std::ws).eof()) {
        throw ConfigError("--s expects <re>,<im>, got '" + text + "'");
    }
    return {re, im};
}

void write_density(Csv& csv, const fredholm::PressureDensity& p) {
    const auto& g = *p.p.grid;
    for (std::size_t j = 0; j < g.n(); ++j) {
        const double xi = g.nodes()[j];
        const cplx cof = p.p.values[j];
        const cplx val = cof / std::sqrt(1.0 - xi * xi);
        csv.row({p.s.real(), p.s.imag(), xi, val.real(), val.imag(), cof.real(), cof.imag()});
    }
}

void write_solution_row(Csv& csv, const fredholm::PressureDensity& p) {
    csv.row({p.s.real(), p.s.imag(), p.determinant.real(), p.determinant.imag(), p.hs_norm, p.lp_norm,
             p.hook_residual, p.route_agreement, p.hilbert_residual});
}

void solution_gates(const std::vector<fredholm::PressureDensity>& sols, const RunConfig& cfg,
                    std::vector<Gate>& gates) {
    double hook = 0.0, route = 0.0, lp = 0.0, det = INFINITY;
    for (const auto& p : sols) {
        hook = std::max(hook, p.hook_residual);
        route = std::max(route, p.route_agreement);
        lp = std::isfinite(p.lp_norm) ? std::max(lp, p.lp_norm) : INFINITY;
        det = std::min(det, std::abs(p.determinant));
    }
    gates.push_back({"determinant_nonzero", det, cfg.solve.char_threshold, det > cfg.solve.char_threshold});
    gates.push_back({"hook_residual", hook, cfg.solve.hook_tolerance, hook < cfg.solve.hook_tolerance});
    gates.push_back({"route_agreement", route, 1e-8, route < 1e-8});
    gates.push_back({"lp_norm_finite", lp, INFINITY, std::isfinite(lp)});
}

const std::vector<double> kDefaultTimes{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
const std::vector<double> kTangencyX{-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9};

int cmd_solve(const RunConfig& cfg, const std::optional<cplx>& s_opt, std::ostream& out) {
    const auto grid = cheb::make_grid(cfg.n);
    const auto spec = load_downwash(cfg, grid);
    const YAML::Node sec = section(cfg.root, "solve");
    y::reject_unknown_keys(sec, "solve", {"s"});
    std::optional<cplx> s = s_opt;
    if (!s && sec["s"]) {
        const auto v = y::optional_doubles(sec, "s", "solve", {});
        if (v.size() != 2) throw ConfigError("solve.s must be [re, im]");
        s = cplx(v[0], v[1]);
    }
    prepare_output(cfg);
    std::vector<fs::path> artifacts;
    std::vector<Gate> gates;
    json extra;

    Csv density(cfg.output_dir / "p_density.csv", {"s_re", "s_im", "xi", "re_p", "im_p", "re_cofactor", "im_cofactor"});
    Csv sols(cfg.output_dir / "solutions.csv", {"s_re", "s_im", "re_det", "im_det", "hs_norm", "lp_norm",
                                                "hook_residual", "route_agreement", "hilbert_residual"});
    artifacts.push_back(density.path());
    artifacts.push_back(sols.path());

    if (s) {
        const auto p = fredholm::solve_p(*s, laplace::laplace_transform(spec, *s, grid), cfg.params, cfg.solve);
        write_density(density, p);
        write_solution_row(sols, p);
        solution_gates({p}, cfg, gates);
        extra["mode"] = "single";
        extra["s"] = cplx_json(*s);
    } else {
        const auto fam = build_family(cfg, spec, grid);
        for (const auto& p : fam.solutions) {
            write_density(density, p);
            write_solution_row(sols, p);
        }
        solution_gates(fam.solutions, cfg, gates);
        const YAML::Node lsec = section(cfg.root, "loads");
        y::reject_unknown_keys(lsec, "loads", {"t"});
        const auto times = list_or(lsec, "t", "loads", kDefaultTimes);
        const auto loads = field::compute_loads(fam, times);
        Csv lc(cfg.output_dir / "loads.csv", {"t", "re_lift", "im_lift", "re_moment", "im_moment", "gate_change"});
        double worst_gate = 0.0;
        for (const auto& l : loads) {
            lc.row({l.t, l.lift.real(), l.lift.imag(), l.moment.real(), l.moment.imag(), l.gate_change});
            worst_gate = std::max(worst_gate, l.gate_change);
        }
        artifacts.push_back(lc.path());
        if (fam.kind == field::FamilyKind::harmonic) {
            extra["mode"] = "harmonic";
            extra["s"] = cplx_json(fam.s.front());
            const auto tan = field::flow_tangency_residual(fam, spec, kTangencyX, times);
            gates.push_back({"flow_tangency", tan.relative_residual, tan.tolerance,
                             tan.relative_residual < tan.tolerance});
            const auto k = field::kutta_check(fam, times);
            gates.push_back({"kutta", k.ratio, 1e-10, k.ratio < 1e-10});
        } else {
            extra["mode"] = "contour";
            extra["contour_points"] = fam.s.size();
            extra["mirrored"] = fam.mirrored;
            gates.push_back({"bromwich_gate", worst_gate, cfg.gate_tol, worst_gate <= cfg.gate_tol});
        }
    }
    write_manifest(cfg, "solve", extra, gates, artifacts);
    bool all = true;
    for (const auto& g : gates) {
        out << (g.pass ? "pass " : "FAIL ") << g.name << " " << num(g.value) << " (tol " << num(g.tolerance) << ")\n";
        all = all && g.pass;
    }
    out << "wrote " << cfg.output_dir.string() << '\n';
    return all ? kExitOk : kExitConvergence;
}

int cmd_scan(const RunConfig& cfg, std::ostream& out) {
    const YAML::Node sec = section(cfg.root, "scan");
    y::reject_unknown_keys(sec, "scan", {"sigma_lo", "sigma_hi", "n_sigma", "nu_max", "n_nu", "zero_tolerance"});
    fredholm::ScanSpec spec;
    spec.sigma_lo = y::optional_double(sec, "sigma_lo", "scan", std::max(spec.sigma_lo, cfg.params.sigma1));
    spec.sigma_hi = y::optional_double(sec, "sigma_hi", "scan", std::min(spec.sigma_hi, cfg.params.sigma2));
    const long ns = y::optional_int(sec, "n_sigma", "scan", static_cast<long>(spec.n_sigma));
    const long nn = y::optional_int(sec, "n_nu", "scan", static_cast<long>(spec.n_nu));
    if (ns < 1 || nn < 1) throw ConfigError("scan.n_sigma and scan.n_nu must be positive");
    spec.n_sigma = static_cast<std::size_t>(ns);
    spec.n_nu = static_cast<std::size_t>(nn);
    spec.nu_max = y::optional_double(sec, "nu_max", "scan", spec.nu_max);
    spec.zero_tolerance = y::optional_double(sec, "zero_tolerance", "scan", spec.zero_tolerance);
    if (!cfg.params.in_strip(spec.sigma_lo) || !cfg.params.in_strip(spec.sigma_hi)) {
        throw ConfigError("scan strip must lie inside [flow.sigma1, flow.sigma2]");
    }
    const auto grid = cheb::make_grid(cfg.n);
    prepare_output(cfg);
    const auto scan = fredholm::scan_determinant(spec, cfg.params, grid, cfg.solve.build);
    Csv sc(cfg.output_dir / "scan.csv", {"sigma", "nu", "re_D", "im_D", "abs_D", "zero_flag"});
    for (const auto& s : scan.samples) {
        sc.row({s.sigma, s.nu, s.value.real(), s.value.imag(), std::abs(s.value), s.zero_flag ? 1.0 : 0.0});
    }
    Csv zc(cfg.output_dir / "zeros.csv", {"re_s", "im_s", "re_D", "im_D", "residual", "suspect"});
    for (const auto& z : scan.zeros) {
        zc.row({z.s.real(), z.s.imag(), z.value.real(), z.value.imag(), z.residual, z.suspect ? 1.0 : 0.0});
    }
    json extra;
    extra["scan"] = {{"sigma_lo", scan.spec.sigma_lo}, {"sigma_hi", scan.spec.sigma_hi},
                     {"n_sigma", scan.spec.n_sigma},   {"nu_max", scan.spec.nu_max},
                     {"n_nu", scan.spec.n_nu},         {"zero_tolerance", scan.spec.zero_tolerance},
                     {"max_modulus", scan.max_modulus}, {"zeros", scan.zeros.size()}};
    write_manifest(cfg, "scan", extra, {}, {sc.path(), zc.path()});
    out << "scan: " << sc.rows() << " samples, " << scan.zeros.size() << " zero candidates\n";
    out << "wrote " << cfg.output_dir.string() << '\n';
    return kExitOk;
}

int cmd_field(const RunConfig& cfg, std::ostream& out) {
    const YAML::Node sec = section(cfg.root, "field");
    y::reject_unknown_keys(sec, "field", {"x", "y", "t", "tangency_x", "tangency_y"});
    const auto xs = list_or(sec, "x", "field", linspace(-2.0, 2.0, 9));
    const auto ys = list_or(sec, "y", "field", {0.1, 0.5, 1.0});
    const auto ts = list_or(sec, "t", "field", {0.0, 0.5, 1.0});
    const auto tx = list_or(sec, "tangency_x", "field", kTangencyX);
    const auto ty = list_or(sec, "tangency_y", "field", {0.05, 0.025, 0.0125});
    std::vector<field::Probe> probes;
    for (double yv : ys)
        for (double xv : xs) {
            if (yv == 0.0 && std::abs(xv) <= 1.0) {
                throw ConfigError("field probe (" + num(xv) + ", 0) lies on the chord; use y != 0");
            }
            probes.push_back({xv, yv});
        }
    const auto grid = cheb::make_grid(cfg.n);
    const auto spec = load_downwash(cfg, grid);
    prepare_output(cfg);
    const auto fam = build_family(cfg, spec, grid);
    const auto samples = field::evaluate(fam, probes, ts, field::need_phi | field::need_psi);
    Csv fc(cfg.output_dir / "field.csv", {"x", "y", "t", "re_phi", "im_phi", "re_psi", "im_psi"});
    double worst_gate = 0.0;
    for (const auto& s : samples) {
        fc.row({s.x, s.y, s.t, s.phi.real(), s.phi.imag(), s.psi.real(), s.psi.imag()});
        worst_gate = std::max(worst_gate, s.gate_change);
    }
    const auto tan = field::flow_tangency_residual(fam, spec, tx, ts, ty);
    Csv tc(cfg.output_dir / "tangency.csv", {"x", "t", "re_dphi_dy", "im_dphi_dy", "re_w", "im_w", "error", "flagged"});
    for (const auto& p : tan.probes) {
        tc.row({p.x, p.t, p.extrapolated.real(), p.extrapolated.imag(), p.target.real(), p.target.imag(), p.error,
                p.flagged ? 1.0 : 0.0});
    }
    std::vector<Gate> gates{{"flow_tangency", tan.relative_residual, tan.tolerance,
                             tan.relative_residual < tan.tolerance}};
    if (fam.kind == field::FamilyKind::contour) {
        gates.push_back({"bromwich_gate", worst_gate, cfg.gate_tol, worst_gate <= cfg.gate_tol});
    }
    json extra;
    extra["mode"] = fam.kind == field::FamilyKind::harmonic ? "harmonic" : "contour";
    extra["tangency_y"] = ty;
    write_manifest(cfg, "field", extra, gates, {fc.path(), tc.path()});
    out << "field: " << fc.rows() << " samples, tangency residual " << num(tan.relative_residual) << '\n';
    out << "wrote " << cfg.output_dir.string() << '\n';
    return kExitOk;
}

int cmd_loads(const RunConfig& cfg, std::ostream& out) {
    const YAML::Node sec = section(cfg.root, "loads");
    y::reject_unknown_keys(sec, "loads", {"t"});
    const auto ts = list_or(sec, "t", "loads", kDefaultTimes);
    const auto grid = cheb::make_grid(cfg.n);
    const auto spec = load_downwash(cfg, grid);
    prepare_output(cfg);
    const auto fam = build_family(cfg, spec, grid);
    const auto loads = field::compute_loads(fam, ts);
    Csv lc(cfg.output_dir / "loads.csv", {"t", "re_lift", "im_lift", "re_moment", "im_moment", "gate_change"});
    double worst_gate = 0.0;
    for (const auto& l : loads) {
        lc.row({l.t, l.lift.real(), l.lift.imag(), l.moment.real(), l.moment.imag(), l.gate_change});
        worst_gate = std::max(worst_gate, l.gate_change);
    }
    std::vector<Gate> gates;
    if (fam.kind == field::FamilyKind::contour) {
        gates.push_back({"bromwich_gate", worst_gate, cfg.gate_tol, worst_gate <= cfg.gate_tol});
    }
    write_manifest(cfg, "loads", {}, gates, {lc.path()});
    out << "loads: " << lc.rows() << " times\n";
    out << "wrote " << cfg.output_dir.string() << '\n';
    return kExitOk;
}

int cmd_dump_kernel(const RunConfig& cfg, std::ostream& out) {
    const YAML::Node sec = section(cfg.root, "dump_kernel");
    y::reject_unknown_keys(sec, "dump_kernel", {"x", "xi", "s"});
    const auto xs = list_or(sec, "x", "dump_kernel", linspace(-0.95, 0.95, 20));
    const auto xis = list_or(sec, "xi", "dump_kernel", linspace(-0.9, 0.9, 19));
    const auto sv = y::optional_doubles(sec, "s", "dump_kernel", {cfg.params.sigma_prime, 1.0});
    if (sv.size() != 2) throw ConfigError("dump_kernel.s must be [re, im]");
    const cplx s(sv[0], sv[1]);
    prepare_output(cfg);
    Csv kc(cfg.output_dir / "kernel.csv", {"x", "xi", "re_full", "im_full", "re_regular", "im_regular"});
    for (double x : xs)
        for (double xi : xis) {
            if (std::abs(x - xi) < kernel::kMinSeparation) continue;
            const auto e = kernel::kernel_split(x, xi, s, cfg.params);
            kc.row({x, xi, e.full.real(), e.full.imag(), e.regular.real(), e.regular.imag()});
        }
    json extra;
    extra["s"] = cplx_json(s);
    extra["cauchy_coefficient"] = cplx_json(kernel::cauchy_coefficient(cfg.params));
    write_manifest(cfg, "dump-kernel", extra, {}, {kc.path()});
    out << "dump-kernel: " << kc.rows() << " rows\n";
    out << "wrote " << cfg.output_dir.string() << '\n';
    return kExitOk;
}

const char* compare_text(verify::Compare c) {
    switch (c) {
        case verify::Compare::less: return "<";
        case verify::Compare::greater_equal: return ">=";
        case verify::Compare::equal: return "==";
    }
    return "?";
}

int cmd_verify(const RunConfig& cfg, std::vector<std::string> suites, std::ostream& out) {
    const YAML::Node sec = section(cfg.root, "verify");
    y::reject_unknown_keys(sec, "verify", {"suites", "n"});
    if (suites.empty() && sec["suites"]) {
        const YAML::Node list = sec["suites"];
        if (list.IsScalar()) suites.push_back(list.Scalar());
        else if (list.IsSequence())
            for (const auto& s : list) suites.push_back(s.as<std::string>());
        else throw ConfigError("verify.suites must be a name or a list");
    }
    if (suites.empty()) suites.push_back("all");
    const auto names = verify::resolve_suites(suites);
    verify::VerifyOptions opt;
    opt.params = cfg.params;
    const long n = y::optional_int(sec, "n", "verify", static_cast<long>(cfg.root["grid"] ? cfg.n : opt.n));
    if (n < 8) throw ConfigError("verify.n must be at least 8");
    opt.n = static_cast<std::size_t>(n);
    prepare_output(cfg);
    std::vector<verify::SuiteResult> results;
    for (const auto& name : names) results.push_back(verify::run_suite(name, opt));
    std::ofstream os(cfg.output_dir / "verify.csv");
    os << "suite,check,value,compare,tolerance,passed,advisory\n";
    for (const auto& r : results) {
        out << "[" << r.suite << "]\n";
        for (const auto& c : r.checks) {
            os << c.suite << ',' << c.name << ',' << num(c.value) << ',' << compare_text(c.compare) << ','
               << num(c.tolerance) << ',' << (c.passed ? 1 : 0) << ',' << (c.advisory ? 1 : 0) << '\n';
            out << "  " << (c.passed ? "pass" : (c.advisory ? "note" : "FAIL")) << "  " << c.name << " = "
                << num(c.value) << " " << compare_text(c.compare) << " " << num(c.tolerance);
            if (!c.detail.empty()) out << "  (" << c.detail << ")";
            out << '\n';
        }
    }
    const bool ok = verify::all_passed(results);
    out << (ok ? "verify: all checks passed\n" : "verify: FAILED\n");
    return ok ? kExitOk : kExitFailed;
}

int report(std::ostream& err, const char* category, const std::string& message, int code,
           const std::optional<cplx>& s = std::nullopt) {
    json e{{"status", "error"}, {"category", category}, {"message", message}, {"exit_code", code}};
    if (s) e["s"] = cplx_json(*s);
    err << e.dump() << '\n';
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args = args_in;
    try {
        const auto overrides = split_overrides(args);

        CLI::App cli{"Possio integral equation solver for 2D subsonic aeroelasticity"};
        cli.require_subcommand(1);
        std::string config;
        std::string s_text;
        std::vector<std::string> suites;
        auto add_config = [&](CLI::App* sub) {
            sub->add_option("-c,--config", config, "YAML run configuration");
        };
        auto* solve = cli.add_subcommand("solve", "solve for the pressure-doublet density and loads");
        add_config(solve);
        solve->add_option("--s", s_text, "single Laplace point <re>,<im>");
        auto* scan = cli.add_subcommand("scan", "scan the modified Fredholm determinant over a strip");
        add_config(scan);
        auto* verify = cli.add_subcommand("verify", "run property suites");
        add_config(verify);
        verify->add_option("suites", suites, "specfun, hilbert, kernel, fredholm, laplace, field or all");
        auto* dump = cli.add_subcommand("dump-kernel", "tabulate the kernel and its regular part");
        add_config(dump);
        auto* fld = cli.add_subcommand("field", "velocity and acceleration potentials at probe points");
        add_config(fld);
        auto* loads = cli.add_subcommand("loads", "lift and moment time histories");
        add_config(loads);
        cli.footer(
            "Config keys can be overridden with --section.key value, e.g. --grid.n 128.\n"
            "Environment: POSSIO_OUTPUT_DIR overrides output.dir; POSSIO_THREADS sets the worker count.\n"
            "Exit codes: 0 ok, 1 verify failure, 2 config, 3 characteristic value, 4 convergence.");

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            cli.parse(reversed);
        } catch (const CLI::CallForHelp& e) {
            out << cli.help();
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) {
                out << cli.help();
                return kExitOk;
            }
            return report(err, "config", e.what(), kExitConfig);
        }

        if (*verify) return cmd_verify(load_config(config, overrides, false), suites, out);
        const RunConfig cfg = load_config(config, overrides, true);
        if (*solve) {
            std::optional<cplx> s;
            if (!s_text.empty()) s = parse_s(s_text);
            return cmd_solve(cfg, s, out);
        }
        if (*scan) return cmd_scan(cfg, out);
        if (*dump) return cmd_dump_kernel(cfg, out);
        if (*fld) return cmd_field(cfg, out);
        if (*loads) return cmd_loads(cfg, out);
        return report(err, "config", "no subcommand", kExitConfig);
    } catch (const CharacteristicValueError& e) {
        return report(err, "characteristic-value", e.what(), kExitCharacteristic, e.s());
    } catch (const ConvergenceError& e) {
        return report(err, "convergence", e.what(), kExitConvergence);
    } catch (const Error& e) {
        return report(err, "config", e.what(), kExitConfig);
    } catch (const YAML::Exception& e) {
        return report(err, "config", e.what(), kExitConfig);
    }
}

}  // namespace possio::app
