#include "choquard/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <initializer_list>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#ifndef CHOQUARD_VERSION
#define CHOQUARD_VERSION "0.0.0"
#endif

namespace choquard {

namespace {

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where, "config key '" + where + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
        if (!ok.count(k)) {
            const std::string key = join(where, k);
            throw ConfigError(key, "unknown config key '" + key + "'");
        }
}

double as_double(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ConfigError(key, "config key '" + key + "' must be a number");
}

long long as_int(const json& v, const std::string& key) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    throw ConfigError(key, "config key '" + key + "' must be an integer");
}

bool as_bool(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw ConfigError(key, "config key '" + key + "' must be true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError(key, "config key '" + key + "' must be a string");
    return v.get<std::string>();
}

Point as_point(const json& v, const std::string& key) {
    if (!v.is_array() || v.empty() || v.size() > 3)
        throw ConfigError(key, "config key '" + key + "' must be an array of 1 to 3 numbers");
    Point p{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < v.size(); ++i) p[i] = as_double(v[i], key + "[" + std::to_string(i) + "]");
    return p;
}

json point_json(const Point& p, int dim) {
    json a = json::array();
    for (int d = 0; d < dim; ++d) a.push_back(number(p[d]));
    return a;
}

template <class Fn>
void with(const json& obj, const std::string& where, const char* key, Fn fn) {
    if (auto it = obj.find(key); it != obj.end() && !it->is_null()) fn(*it, join(where, key));
}

void require(const json& obj, std::initializer_list<const char*> keys) {
    for (const char* k : keys)
        if (!obj.contains(k)) throw ConfigError(k, std::string("missing config key '") + k + "'");
}

}  // namespace

PotentialSpec RunConfig::potential_spec() const {
    return make_potential(problem.dim, problem.V0, potential, magnetic, lambda);
}

RunConfig parse_config(const json& doc) {
    reject_unknown(doc, "",
                   {"dim", "s", "mu", "q", "eps", "V0", "ell0", "kappa", "grid", "potential", "magnetic", "lambda",
                    "solver", "quadrature", "limit_operator", "eps_list", "seed"});
    require(doc, {"dim", "s", "mu", "q", "V0", "grid"});
    RunConfig c;
    ProblemConfig& p = c.problem;
    with(doc, "", "dim", [&](const json& v, const std::string& k) { p.dim = static_cast<int>(as_int(v, k)); });
    with(doc, "", "s", [&](const json& v, const std::string& k) { p.s = as_double(v, k); });
    with(doc, "", "mu", [&](const json& v, const std::string& k) { p.mu = as_double(v, k); });
    with(doc, "", "q", [&](const json& v, const std::string& k) { p.q = as_double(v, k); });
    with(doc, "", "eps", [&](const json& v, const std::string& k) { p.eps = as_double(v, k); });
    with(doc, "", "V0", [&](const json& v, const std::string& k) { p.V0 = as_double(v, k); });
    with(doc, "", "ell0", [&](const json& v, const std::string& k) { p.ell0 = as_double(v, k); });
    with(doc, "", "kappa", [&](const json& v, const std::string& k) { p.kappa = as_double(v, k); });
    with(doc, "", "seed", [&](const json& v, const std::string& k) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError(k, "config key 'seed' must be a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    });

    const json& g = doc.at("grid");
    reject_unknown(g, "grid", {"L", "M"});
    c.grid.dim = p.dim;
    with(g, "grid", "L", [&](const json& v, const std::string& k) { c.grid.L = as_double(v, k); });
    with(g, "grid", "M", [&](const json& v, const std::string& k) { c.grid.M = static_cast<int>(as_int(v, k)); });

    with(doc, "", "potential", [&](const json& o, const std::string& w) {
        reject_unknown(o, w, {"type", "center", "weight", "cap"});
        with(o, w, "type", [&](const json& v, const std::string& k) { c.potential.type = as_string(v, k); });
        with(o, w, "center", [&](const json& v, const std::string& k) { c.potential.center = as_point(v, k); });
        with(o, w, "weight", [&](const json& v, const std::string& k) { c.potential.weight = as_double(v, k); });
        with(o, w, "cap", [&](const json& v, const std::string& k) { c.potential.cap = as_double(v, k); });
        if (c.potential.type != "constant" && c.potential.type != "quadratic_capped")
            throw ConfigError(w + ".type", "config key 'potential.type' must be constant or quadratic_capped");
    });
    with(doc, "", "magnetic", [&](const json& o, const std::string& w) {
        reject_unknown(o, w, {"type", "vector", "strength", "wavenumber"});
        with(o, w, "type", [&](const json& v, const std::string& k) { c.magnetic.type = as_string(v, k); });
        with(o, w, "vector", [&](const json& v, const std::string& k) { c.magnetic.vector = as_point(v, k); });
        with(o, w, "strength", [&](const json& v, const std::string& k) { c.magnetic.strength = as_double(v, k); });
        with(o, w, "wavenumber",
             [&](const json& v, const std::string& k) { c.magnetic.wavenumber = as_double(v, k); });
        const auto& t = c.magnetic.type;
        if (t != "zero" && t != "constant" && t != "linear" && t != "sine")
            throw ConfigError(w + ".type", "config key 'magnetic.type' must be zero, constant, linear or sine");
    });
    with(doc, "", "lambda", [&](const json& o, const std::string& w) {
        reject_unknown(o, w, {"shape", "center", "radius", "half_widths"});
        with(o, w, "shape", [&](const json& v, const std::string& k) {
            const std::string shape = as_string(v, k);
            if (shape == "ball")
                c.lambda.shape = Region::Shape::Ball;
            else if (shape == "box")
                c.lambda.shape = Region::Shape::Box;
            else
                throw ConfigError(k, "config key 'lambda.shape' must be ball or box");
        });
        with(o, w, "center", [&](const json& v, const std::string& k) { c.lambda.center = as_point(v, k); });
        with(o, w, "radius", [&](const json& v, const std::string& k) { c.lambda.radius = as_double(v, k); });
        with(o, w, "half_widths",
             [&](const json& v, const std::string& k) { c.lambda.half_widths = as_point(v, k); });
    });
    with(doc, "", "solver", [&](const json& o, const std::string& w) {
        reject_unknown(o, w, {"max_iters", "grad_tol", "init_width", "perturbation", "precondition"});
        SolverOptions& so = c.solver;
        with(o, w, "max_iters", [&](const json& v, const std::string& k) { so.max_iters = static_cast<int>(as_int(v, k)); });
        with(o, w, "grad_tol", [&](const json& v, const std::string& k) { so.grad_tol = as_double(v, k); });
        with(o, w, "init_width", [&](const json& v, const std::string& k) { so.init_width = as_double(v, k); });
        with(o, w, "perturbation", [&](const json& v, const std::string& k) { so.perturbation = as_double(v, k); });
        with(o, w, "precondition", [&](const json& v, const std::string& k) { so.precondition = as_bool(v, k); });
    });
    with(doc, "", "quadrature", [&](const json& o, const std::string& w) {
        reject_unknown(o, w, {"r_cut", "periodic"});
        with(o, w, "r_cut", [&](const json& v, const std::string& k) { c.quadrature.r_cut = as_double(v, k); });
        with(o, w, "periodic", [&](const json& v, const std::string& k) { c.quadrature.periodic = as_bool(v, k); });
    });
    with(doc, "", "limit_operator", [&](const json& v, const std::string& k) {
        const std::string op = as_string(v, k);
        if (op != "spectral" && op != "quadrature")
            throw ConfigError(k, "config key 'limit_operator' must be spectral or quadrature");
        c.limit_quadrature = op == "quadrature";
    });
    with(doc, "", "eps_list", [&](const json& v, const std::string& k) {
        if (!v.is_array()) throw ConfigError(k, "config key 'eps_list' must be an array of numbers");
        for (std::size_t i = 0; i < v.size(); ++i) c.eps_list.push_back(as_double(v[i], k + "[" + std::to_string(i) + "]"));
    });
    c.solver.seed = c.seed;
    return c;
}

RunConfig load_config(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("", "malformed config " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& c) {
    const int N = c.problem.dim;
    json j;
    j["dim"] = N;
    j["s"] = number(c.problem.s);
    j["mu"] = number(c.problem.mu);
    j["q"] = number(c.problem.q);
    j["eps"] = number(c.problem.eps);
    j["V0"] = number(c.problem.V0);
    j["ell0"] = c.problem.ell0 ? number(*c.problem.ell0) : json(nullptr);
    j["kappa"] = c.problem.kappa ? number(*c.problem.kappa) : json(nullptr);
    j["grid"] = {{"L", number(c.grid.L)}, {"M", c.grid.M}};
    j["potential"] = {{"type", c.potential.type},
                      {"center", point_json(c.potential.center, N)},
                      {"weight", number(c.potential.weight)},
                      {"cap", number(c.potential.cap)}};
    j["magnetic"] = {{"type", c.magnetic.type},
                     {"vector", point_json(c.magnetic.vector, N)},
                     {"strength", number(c.magnetic.strength)},
                     {"wavenumber", number(c.magnetic.wavenumber)}};
    j["lambda"] = {{"shape", c.lambda.shape == Region::Shape::Ball ? "ball" : "box"},
                   {"center", point_json(c.lambda.center, N)},
                   {"radius", number(c.lambda.radius)},
                   {"half_widths", point_json(c.lambda.half_widths, N)}};
    j["solver"] = {{"max_iters", c.solver.max_iters},
                   {"grad_tol", number(c.solver.grad_tol)},
                   {"init_width", number(c.solver.init_width)},
                   {"perturbation", number(c.solver.perturbation)},
                   {"precondition", c.solver.precondition}};
    j["quadrature"] = {{"r_cut", number(c.quadrature.r_cut)}, {"periodic", c.quadrature.periodic}};
    j["limit_operator"] = c.limit_quadrature ? "quadrature" : "spectral";
    json eps = json::array();
    for (double e : c.eps_list) eps.push_back(number(e));
    j["eps_list"] = eps;
    j["seed"] = c.seed;
    return j;
}

std::string config_text(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out(2 * len, '0');
    for (unsigned int i = 0; i < len; ++i) {
        out[2 * i] = hex[md[i] >> 4];
        out[2 * i + 1] = hex[md[i] & 15];
    }
    return out;
}

void write_atomic(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::random_device rd;
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write to " + tmp.string() + " failed");
        }
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

GridSpec FieldMeta::grid() const {
    GridSpec g;
    g.dim = static_cast<int>(dims.size());
    g.L = L;
    g.M = dims.empty() ? 0 : dims.front();
    return g;
}

FieldMeta field_meta(const Field& u, const ProblemConfig& cfg) {
    FieldMeta m;
    m.dims.assign(u.grid.dim, u.grid.M);
    m.L = u.grid.L;
    m.s = cfg.s;
    m.mu = cfg.mu;
    m.eps = cfg.eps;
    return m;
}

fs::path sidecar_path(const fs::path& field_path) {
    fs::path p = field_path;
    p.replace_extension(".meta.json");
    return p;
}

namespace {

std::uint64_t to_little(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
    return v;
}

}  // namespace

void save_field(const fs::path& path, const Field& u, FieldMeta meta) {
    std::string bytes(u.size() * 16, '\0');
    for (std::size_t i = 0; i < u.size(); ++i) {
        const std::uint64_t re = to_little(std::bit_cast<std::uint64_t>(u.values[i].real()));
        const std::uint64_t im = to_little(std::bit_cast<std::uint64_t>(u.values[i].imag()));
        std::memcpy(&bytes[16 * i], &re, 8);
        std::memcpy(&bytes[16 * i + 8], &im, 8);
    }
    meta.dims.assign(u.grid.dim, u.grid.M);
    meta.L = u.grid.L;
    meta.sha256 = sha256_hex(bytes);
    json side = {{"dims", meta.dims},        {"L", number(meta.L)},
                 {"s", number(meta.s)},      {"mu", number(meta.mu)},
                 {"eps", number(meta.eps)},  {"phase_gauge", meta.phase_gauge},
                 {"sha256", meta.sha256}};
    write_atomic(path, bytes);
    write_atomic(sidecar_path(path), side.dump(2) + "\n");
}

StoredField load_field(const fs::path& path) {
    const fs::path side = sidecar_path(path);
    if (!fs::exists(side)) throw std::runtime_error("missing field sidecar " + side.string());
    FieldMeta meta;
    try {
        const json j = json::parse(read_file(side));
        meta.dims = j.at("dims").get<std::vector<int>>();
        meta.L = as_double(j.at("L"), "L");
        meta.s = as_double(j.at("s"), "s");
        meta.mu = as_double(j.at("mu"), "mu");
        meta.eps = as_double(j.at("eps"), "eps");
        meta.phase_gauge = j.at("phase_gauge").get<std::string>();
        meta.sha256 = j.at("sha256").get<std::string>();
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed field sidecar " + side.string() + ": " + e.what());
    }
    if (meta.dims.empty() || meta.dims.size() > 3) throw std::runtime_error("field sidecar dims must have 1 to 3 entries");
    for (int d : meta.dims)
        if (d != meta.dims.front()) throw std::runtime_error("field sidecar dims must be equal along every axis");
    const GridSpec g = meta.grid();
    g.check();

    const std::string bytes = read_file(path);
    if (bytes.size() % 16 != 0) throw std::runtime_error("unexpected end of field data");
    if (bytes.size() != g.size() * 16) {
        std::ostringstream os;
        os << "field sidecar dims (" << g.size() << " samples) disagree with payload length (" << bytes.size() / 16
           << " samples)";
        throw std::runtime_error(os.str());
    }
    if (sha256_hex(bytes) != meta.sha256) throw std::runtime_error("field checksum mismatch for " + path.string());

    StoredField out{Field(g), meta};
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::uint64_t re, im;
        std::memcpy(&re, &bytes[16 * i], 8);
        std::memcpy(&im, &bytes[16 * i + 8], 8);
        out.u.values[i] = cplx(std::bit_cast<double>(to_little(re)), std::bit_cast<double>(to_little(im)));
    }
    return out;
}

json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json to_json(const SolveReport& r) {
    json x = json::array();
    for (int d = 0; d < 3; ++d) x.push_back(number(r.x_eps[d]));
    return {{"eps", number(r.eps)},
            {"c_eps", number(r.c_eps)},
            {"x_eps", x},
            {"argmax", r.argmax},
            {"V_at_max", number(r.V_at_max)},
            {"valid_penalization", r.valid_penalization},
            {"sup_outside", number(r.sup_outside)},
            {"a", number(r.a)},
            {"ell0", number(r.ell0)},
            {"kappa", number(r.kappa)},
            {"decay_exponent", number(r.decay_exponent)},
            {"Cfit", number(r.Cfit)},
            {"iterations", r.iterations},
            {"residual", number(r.residual)},
            {"grad_norm", number(r.grad_norm)},
            {"nehari_residual", number(r.nehari_residual)},
            {"sup_norm", number(r.sup_norm)},
            {"boundary_ratio", number(r.boundary_ratio)},
            {"seed", r.seed},
            {"converged", r.converged},
            {"outside_theory", r.outside_theory},
            {"warnings", r.warnings}};
}

SolveReport report_from_json(const json& j) {
    SolveReport r;
    auto num = [&](const char* k) { return as_double(j.at(k), k); };
    r.eps = num("eps");
    r.c_eps = num("c_eps");
    for (int d = 0; d < 3; ++d) r.x_eps[d] = as_double(j.at("x_eps").at(d), "x_eps");
    r.argmax = j.at("argmax").get<std::size_t>();
    r.V_at_max = num("V_at_max");
    r.valid_penalization = j.at("valid_penalization").get<bool>();
    r.sup_outside = num("sup_outside");
    r.a = num("a");
    r.ell0 = num("ell0");
    r.kappa = num("kappa");
    r.decay_exponent = num("decay_exponent");
    r.Cfit = num("Cfit");
    r.iterations = j.at("iterations").get<int>();
    r.residual = num("residual");
    r.grad_norm = num("grad_norm");
    r.nehari_residual = num("nehari_residual");
    r.sup_norm = num("sup_norm");
    r.boundary_ratio = num("boundary_ratio");
    r.seed = j.at("seed").get<std::uint64_t>();
    r.converged = j.at("converged").get<bool>();
    r.outside_theory = j.at("outside_theory").get<bool>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
}

json to_json(const CheckResult& r) {
    json ctx = json::object();
    for (const auto& [k, v] : r.context) ctx[k] = number(v);
    return {{"name", r.name},
            {"passed", r.passed},
            {"status", to_string(r.status)},
            {"lhs", number(r.lhs)},
            {"rhs", number(r.rhs)},
            {"tolerance", number(r.tolerance)},
            {"context", ctx},
            {"notes", r.notes}};
}

json to_json(const Calibration& c) {
    return {{"ell0", number(c.pen.ell0)}, {"a", number(c.pen.a)},         {"kappa", number(c.kappa)},
            {"C0", number(c.C0)},         {"samples", c.samples},         {"seed", c.seed}};
}

json to_json(const RunManifest& m) {
    return {{"config_hash", m.config_hash}, {"seed", m.seed},       {"command", m.command},
            {"started", m.started},         {"finished", m.finished}, {"artifacts", m.artifacts},
            {"tool_version", m.tool_version}};
}

std::string timestamp_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%FT%TZ");
    return os.str();
}

const char* tool_version() { return CHOQUARD_VERSION; }

}  // namespace choquard
