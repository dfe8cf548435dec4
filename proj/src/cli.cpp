#include "choquard/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "choquard/diagnostics.hpp"
#include "choquard/io.hpp"

namespace choquard {

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kSolverFailed = 2;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string eps_list;
    std::optional<int> grid;
    std::optional<double> tol;
    std::string name;
    std::string field;
    std::string mode = "axis";
    int axis = 0;
};

struct Invalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_eps_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
            throw Invalid("--eps-list: cannot parse '" + item + "' as a number");
        out.push_back(v);
    }
    return out;
}

StoredField load_stored(const fs::path& path) {
    try {
        return load_field(path);
    } catch (const std::exception& e) {
        throw Invalid(e.what());
    }
}

RunConfig load_run_config(const Options& o) {
    if (o.config.empty()) throw Invalid("--config is required");
    RunConfig rc = load_config(o.config);
    if (o.seed) {
        rc.seed = *o.seed;
        rc.solver.seed = *o.seed;
    }
    if (o.grid) rc.grid.M = *o.grid;
    if (o.tol) rc.solver.grad_tol = *o.tol;
    if (!o.eps_list.empty()) rc.eps_list = parse_eps_list(o.eps_list);
    return rc;
}

PotentialSpec validated(const RunConfig& rc, std::ostream& err) {
    const PotentialSpec pot = rc.potential_spec();
    const ValidationReport vr = validate_config(rc.problem, pot, rc.grid);
    for (const auto& w : vr.warnings) err << "warning: " << w << "\n";
    if (!vr.ok()) {
        std::string msg = vr.violations.front();
        for (std::size_t k = 1; k < vr.violations.size(); ++k) msg += "\nerror: " + vr.violations[k];
        throw Invalid(msg);
    }
    if (!(rc.solver.grad_tol > 0.0)) throw Invalid("solver.grad_tol must be positive");
    if (rc.solver.max_iters < 1) throw Invalid("solver.max_iters must be at least 1");
    return pot;
}

/// Collects the files of one run directory and writes the manifest last.
class RunWriter {
public:
    RunWriter(fs::path dir, const RunConfig& rc, std::string command, std::string started)
        : dir_(std::move(dir)), text_(config_text(rc)) {
        m_.config_hash = sha256_hex(text_);
        m_.seed = rc.seed;
        m_.command = std::move(command);
        m_.started = std::move(started);
        m_.tool_version = tool_version();
        fs::create_directories(dir_);
        write("config.json", std::string_view(text_));
    }

    void write(const std::string& name, std::string_view bytes) {
        write_atomic(dir_ / name, bytes);
        m_.artifacts.push_back(name);
    }
    void write_json(const std::string& name, const json& j) { write(name, std::string_view(j.dump(2) + "\n")); }
    void field(const std::string& name, const Field& u, const ProblemConfig& cfg) {
        save_field(dir_ / name, u, field_meta(u, cfg));
        m_.artifacts.push_back(name);
        m_.artifacts.push_back(sidecar_path(name).string());
    }
    void finish() {
        m_.finished = timestamp_now();
        m_.artifacts.push_back("manifest.json");
        write_atomic(dir_ / "manifest.json", to_json(m_).dump(2) + "\n");
    }
    const std::string& config_hash() const { return m_.config_hash; }

private:
    fs::path dir_;
    std::string text_;
    RunManifest m_;
};

fs::path out_dir(const Options& o) {
    if (o.out.empty()) throw Invalid("--out is required");
    return o.out;
}

int run_solve(const Options& o, std::ostream& out, std::ostream& err) {
    const std::string started = timestamp_now();
    const RunConfig rc = load_run_config(o);
    const PotentialSpec pot = validated(rc, err);
    const fs::path dir = out_dir(o);

    Problem p = make_penalized_problem(rc.problem, pot, rc.grid,
                                       PenalizationParams::from_ell0(rc.problem.q, rc.problem.V0, 1.0), rc.quadrature);
    Calibration cal;
    p = calibrate(p, rc.seed, &cal);

    int code = kOk;
    std::string error;
    Solution sol;
    try {
        sol = solve_penalized(p, rc.solver);
    } catch (const SolverError& e) {
        sol = e.last();
        error = e.what();
        code = kSolverFailed;
    }

    RunWriter w(dir, rc, "solve", started);
    w.field("u.f64", sol.u, p.cfg);
    json rep = {{"command", "solve"}, {"report", to_json(sol.report)}, {"calibration", to_json(cal)}};
    if (!error.empty()) rep["error"] = error;
    w.write_json("report.json", rep);
    w.finish();

    if (code != kOk) err << "error: " << error << "\n";
    out << "c_eps = " << sol.report.c_eps << "  iterations = " << sol.report.iterations
        << "  valid_penalization = " << (sol.report.valid_penalization ? "true" : "false") << "\n";
    return code;
}

int run_limit(const Options& o, std::ostream& out, std::ostream& err) {
    const std::string started = timestamp_now();
    const RunConfig rc = load_run_config(o);
    validated(rc, err);
    const fs::path dir = out_dir(o);

    const Problem p = make_limit_problem(rc.problem, rc.grid, rc.limit_quadrature, rc.quadrature);
    int code = kOk;
    std::string error;
    Solution sol;
    try {
        sol = solve_limit(p, rc.solver);
    } catch (const SolverError& e) {
        sol = e.last();
        error = e.what();
        code = kSolverFailed;
    }

    RunWriter w(dir, rc, "limit", started);
    w.field("u.f64", sol.u, p.cfg);
    json rep = {{"command", "limit"},
                {"operator", rc.limit_quadrature ? "quadrature" : "spectral"},
                {"c_V0", number(sol.report.c_eps)},
                {"report", to_json(sol.report)}};
    if (!error.empty()) rep["error"] = error;
    w.write_json("report.json", rep);
    w.finish();

    if (code != kOk) err << "error: " << error << "\n";
    out << "c_V0 = " << sol.report.c_eps << "  decay_exponent = " << sol.report.decay_exponent << "\n";
    return code;
}

int run_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const std::string started = timestamp_now();
    const RunConfig rc = load_run_config(o);
    if (rc.eps_list.size() < 2) throw Invalid("sweep needs at least two values in --eps-list or eps_list");
    for (std::size_t k = 1; k < rc.eps_list.size(); ++k)
        if (!(rc.eps_list[k] < rc.eps_list[k - 1])) throw Invalid("eps list must be strictly descending");
    for (std::size_t k = 0; k < rc.eps_list.size(); ++k) {
        RunConfig one = rc;
        one.problem.eps = rc.eps_list[k];
        std::ostringstream quiet;
        validated(one, k == 0 ? err : quiet);
    }
    const PotentialSpec pot = rc.potential_spec();
    const fs::path dir = out_dir(o);

    const SweepResult sweep = sweep_epsilon(rc.problem, pot, rc.grid, rc.eps_list, rc.solver, rc.quadrature);

    std::optional<double> c_V0;
    std::string limit_error;
    try {
        const Problem lp = make_limit_problem(rc.problem, rc.grid, rc.limit_quadrature, rc.quadrature);
        c_V0 = solve_limit(lp, rc.solver).report.c_eps;
    } catch (const std::exception& e) {
        limit_error = e.what();
    }

    RunWriter w(dir, rc, "sweep", started);
    json entries = json::array();
    bool all_ok = c_V0.has_value();
    for (std::size_t k = 0; k < sweep.entries.size(); ++k) {
        const SweepEntry& e = sweep.entries[k];
        all_ok = all_ok && e.ok;
        json je = {{"eps", number(e.eps)}, {"ok", e.ok}, {"report", to_json(e.report)},
                   {"calibration", to_json(e.calibration)}};
        if (!e.error.empty()) je["error"] = e.error;
        if (e.u.size() > 0) {
            const std::string name = "u_" + std::to_string(k) + ".f64";
            ProblemConfig cfg = rc.problem;
            cfg.eps = e.eps;
            w.field(name, e.u, cfg);
            je["field"] = name;
        }
        entries.push_back(je);
    }
    const CheckResult conc = check_concentration(sweep, pot, rc.problem.dim, rc.problem.V0, c_V0);
    json rep = {{"command", "sweep"},
                {"entries", entries},
                {"c_V0", c_V0 ? number(*c_V0) : json("nan")},
                {"concentration", to_json(conc)}};
    if (!limit_error.empty()) rep["limit_error"] = limit_error;
    w.write_json("sweep.json", rep);
    w.finish();

    for (const auto& e : sweep.entries) {
        out << "eps = " << e.eps;
        if (e.ok)
            out << "  c_eps = " << e.report.c_eps << "  V(x_eps) = " << e.report.V_at_max
                << "  valid = " << (e.report.valid_penalization ? "true" : "false") << "\n";
        else
            out << "  failed: " << e.error << "\n";
    }
    if (c_V0) out << "c_V0 = " << *c_V0 << "\n";
    out << "concentration: " << to_string(conc.status) << "\n";
    if (!limit_error.empty()) err << "error: limit problem: " << limit_error << "\n";
    return all_ok ? kOk : kSolverFailed;
}

/// Where a stored field came from, read from the report files next to it.
struct Provenance {
    bool limit = false;
    std::optional<double> ell0;
    std::optional<double> kappa;
    std::optional<SolveReport> report;
};

Provenance provenance(const fs::path& field) {
    Provenance pv;
    const fs::path dir = field.parent_path();
    if (fs::exists(dir / "report.json")) {
        const json j = json::parse(read_file(dir / "report.json"));
        pv.limit = j.value("command", "") == "limit";
        if (j.contains("calibration")) {
            pv.ell0 = j["calibration"].at("ell0").get<double>();
            pv.kappa = j["calibration"].at("kappa").get<double>();
        }
        if (j.contains("report")) pv.report = report_from_json(j["report"]);
    } else if (fs::exists(dir / "sweep.json")) {
        const json j = json::parse(read_file(dir / "sweep.json"));
        for (const auto& e : j.at("entries"))
            if (e.value("field", "") == field.filename().string()) {
                pv.ell0 = e["calibration"].at("ell0").get<double>();
                pv.kappa = e["calibration"].at("kappa").get<double>();
                pv.report = report_from_json(e["report"]);
            }
    }
    return pv;
}

SweepResult sweep_from_json(const json& j) {
    SweepResult s;
    for (const auto& je : j.at("entries")) {
        SweepEntry e;
        e.eps = je.at("eps").get<double>();
        e.ok = je.at("ok").get<bool>();
        e.error = je.value("error", "");
        e.report = report_from_json(je.at("report"));
        s.V_at_max.push_back(e.report.V_at_max);
        s.c_eps.push_back(e.report.c_eps);
        s.valid.push_back(e.ok && e.report.valid_penalization);
        s.entries.push_back(std::move(e));
    }
    return s;
}

int run_check(const Options& o, std::ostream& out, std::ostream& err) {
    const auto names = check_names();
    if (std::find(names.begin(), names.end(), o.name) == names.end()) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
        throw Invalid("--name must be one of " + list);
    }
    if (o.field.empty()) throw Invalid("--field is required");
    const fs::path field = o.field;
    Options oc = o;
    if (oc.config.empty()) oc.config = (field.parent_path() / "config.json").string();
    if (!fs::exists(oc.config)) throw Invalid("no config given and none found at " + oc.config);
    RunConfig rc = load_run_config(oc);

    CheckResult r;
    if (o.name == "concentration") {
        const fs::path sweep_path = fs::is_directory(field) ? field / "sweep.json"
                                    : field.extension() == ".json" ? field
                                                                   : field.parent_path() / "sweep.json";
        if (!fs::exists(sweep_path)) throw Invalid("concentration needs a sweep report, none at " + sweep_path.string());
        const json j = json::parse(read_file(sweep_path));
        std::optional<double> c_V0;
        if (j.contains("c_V0") && j["c_V0"].is_number()) c_V0 = j["c_V0"].get<double>();
        r = check_concentration(sweep_from_json(j), rc.potential_spec(), rc.problem.dim, rc.problem.V0, c_V0);
    } else {
        const StoredField sf = load_stored(field);
        if (sf.meta.grid().dim != rc.problem.dim) throw Invalid("field dimension does not match the config");
        if (sf.meta.s != rc.problem.s || sf.meta.mu != rc.problem.mu)
            throw Invalid("field sidecar s/mu do not match the config");
        rc.grid = sf.meta.grid();
        rc.problem.eps = sf.meta.eps;
        const PotentialSpec pot = validated(rc, err);
        const Provenance pv = provenance(field);

        Problem p;
        if (pv.limit) {
            p = make_limit_problem(rc.problem, rc.grid, rc.limit_quadrature, rc.quadrature);
        } else {
            if (pv.ell0) rc.problem.ell0 = pv.ell0;
            if (pv.kappa) rc.problem.kappa = pv.kappa;
            p = make_penalized_problem(rc.problem, pot, rc.grid,
                                       PenalizationParams::from_ell0(rc.problem.q, rc.problem.V0, 1.0),
                                       rc.quadrature);
            p = calibrate(p, rc.seed);
        }
        const Field& u = sf.u;
        if (o.name == "diamagnetic") {
            if (auto* op = dynamic_cast<const MagneticFractionalLaplacian*>(p.op.get())) {
                r = check_diamagnetic(u.span(), *op, rc.seed);
            } else {
                const MagneticFractionalLaplacian q(rc.grid, rc.problem.s, {}, rc.quadrature);
                r = check_diamagnetic(u.span(), q, rc.seed);
            }
        } else if (o.name == "hls") {
            r = check_hls(u.span(), *p.riesz, rc.problem.q);
        } else if (o.name == "hartree_bound") {
            if (pv.limit) throw Invalid("hartree_bound applies to penalized runs only");
            r = check_hartree_bound(p, sample_shell(p, 64, rc.seed + 1));
        } else if (o.name == "decay") {
            r = check_decay(u, rc.problem.s, rc.grid.point(argmax_abs(u.span())));
        } else if (o.name == "mountain_pass") {
            r = check_mountain_pass(p, 50, rc.seed);
        } else if (o.name == "ray") {
            r = check_ray(u.span(), p);
        }
    }
    out << to_json(r).dump(2) << "\n";
    return r.status == CheckStatus::Failed ? kInvalid : kOk;
}

int run_export(const Options& o, std::ostream& out, std::ostream&) {
    if (o.field.empty()) throw Invalid("--field is required");
    if (o.mode != "axis" && o.mode != "radial") throw Invalid("--mode must be axis or radial");
    const StoredField sf = load_stored(o.field);
    const Field& u = sf.u;
    const GridSpec& g = u.grid;
    if (o.axis < 0 || o.axis >= g.dim) throw Invalid("--axis out of range");
    const std::size_t peak = argmax_abs(u.span());
    std::ostringstream csv;
    csv.precision(17);
    if (o.mode == "axis") {
        csv << "x,abs_u\n";
        Index idx = g.unravel(peak);
        for (int i = 0; i < g.M; ++i) {
            idx[o.axis] = i;
            csv << g.coord(i) << "," << std::abs(u.values[g.ravel(idx)]) << "\n";
        }
    } else {
        // Shells of width h around the peak.
        const Point x0 = g.point(peak);
        const double h = g.spacing();
        std::vector<double> sum, cnt;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto b = static_cast<std::size_t>(distance(g.point(i), x0, g.dim) / h + 0.5);
            if (b >= sum.size()) {
                sum.resize(b + 1, 0.0);
                cnt.resize(b + 1, 0.0);
            }
            sum[b] += std::abs(u.values[i]);
            cnt[b] += 1.0;
        }
        csv << "r,mean_abs_u,samples\n";
        for (std::size_t b = 0; b < sum.size(); ++b)
            if (cnt[b] > 0) csv << b * h << "," << sum[b] / cnt[b] << "," << cnt[b] << "\n";
    }
    if (o.out.empty())
        out << csv.str();
    else
        write_atomic(o.out, csv.str());
    return kOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ground states of the penalized fractional magnetic Choquard equation", "choquard"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));
    Options o;

    auto run_flags = [&](CLI::App* sc) {
        sc->add_option("--config", o.config, "JSON run configuration")->required();
        sc->add_option("--out", o.out, "output directory")->required();
        sc->add_option("--seed", o.seed, "RNG seed (overrides the config)");
        sc->add_option("--grid", o.grid, "points per axis (overrides grid.M)");
        sc->add_option("--tol", o.tol, "gradient tolerance (overrides solver.grad_tol)");
    };
    CLI::App* solve = app.add_subcommand("solve", "penalized problem at one eps");
    run_flags(solve);
    CLI::App* limit = app.add_subcommand("limit", "limit problem, reports c_V0");
    run_flags(limit);
    CLI::App* sweep = app.add_subcommand("sweep", "concentration experiment over a descending eps list");
    run_flags(sweep);
    sweep->add_option("--eps-list", o.eps_list, "comma separated eps values, descending");

    CLI::App* check = app.add_subcommand("check", "run a named diagnostic on a stored field");
    check->add_option("--field", o.field, "field file (.f64), or the sweep report for concentration")->required();
    check->add_option("--name", o.name, "diagnostic name")->required();
    check->add_option("--config", o.config, "run configuration (default: config.json next to the field)");
    check->add_option("--seed", o.seed, "RNG seed for sampled checks");

    CLI::App* exp = app.add_subcommand("export", "field to CSV of |u| on an axis or radial average");
    exp->add_option("--field", o.field, "field file (.f64)")->required();
    exp->add_option("--mode", o.mode, "axis or radial");
    exp->add_option("--axis", o.axis, "axis index for --mode axis");
    exp->add_option("--out", o.out, "CSV path (default: stdout)");

    std::vector<const char*> argv{"choquard"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInvalid;
    }

    try {
        if (*solve) return run_solve(o, out, err);
        if (*limit) return run_limit(o, out, err);
        if (*sweep) return run_sweep(o, out, err);
        if (*check) return run_check(o, out, err);
        if (*exp) return run_export(o, out, err);
    } catch (const Invalid& e) {
        err << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kSolverFailed;
    }
    return kInvalid;
}

int cli_main(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace choquard
