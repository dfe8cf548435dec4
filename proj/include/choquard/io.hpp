#pragma once

// JSON run configuration, field files with their JSON sidecar, reports and run manifests.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "choquard/config.hpp"
#include "choquard/diagnostics.hpp"
#include "choquard/operators.hpp"
#include "choquard/solver.hpp"

namespace choquard {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Everything a run reads from its config document.
struct RunConfig {
    ProblemConfig problem;
    GridSpec grid;
    PotentialModel potential;
    MagneticModel magnetic;
    Region lambda;
    SolverOptions solver;
    QuadratureOptions quadrature;
    bool limit_quadrature = false;  ///< limit problem on the quadrature operator instead of the spectral one
    std::vector<double> eps_list;
    std::uint64_t seed = 0;

    PotentialSpec potential_spec() const;
};

/// Malformed config. `key` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what) : std::runtime_error(what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Unknown keys and wrongly typed values throw ConfigError. Ranges are left to validate_config.
RunConfig parse_config(const json& doc);
RunConfig load_config(const fs::path& path);
/// Fully resolved document: every key present, defaults filled in.
json to_json(const RunConfig& cfg);
/// Canonical bytes of the resolved config; the config hash is taken over exactly these.
std::string config_text(const RunConfig& cfg);

std::string sha256_hex(std::string_view bytes);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const fs::path& path, std::string_view bytes);
std::string read_file(const fs::path& path);

/// JSON sidecar of a field file.
struct FieldMeta {
    std::vector<int> dims;
    double L = 0.0;
    double s = 0.0;
    double mu = 0.0;
    double eps = 1.0;
    std::string phase_gauge = "argmax_real";  ///< u is real and positive at its largest sample
    std::string sha256;

    GridSpec grid() const;
};

FieldMeta field_meta(const Field& u, const ProblemConfig& cfg);
/// `<dir>/<stem>.meta.json` next to `<dir>/<stem>.f64`.
fs::path sidecar_path(const fs::path& field_path);

/// Little-endian binary64, (re, im) interleaved, row-major. Fills meta.sha256 and writes the sidecar.
void save_field(const fs::path& path, const Field& u, FieldMeta meta);

struct StoredField {
    Field u;
    FieldMeta meta;
};
/// Throws on truncation ("unexpected end of field data"), dims/payload disagreement and checksum mismatch.
StoredField load_field(const fs::path& path);

/// Finite values as numbers, others as the strings "nan", "inf", "-inf".
json number(double v);
json to_json(const SolveReport& r);
json to_json(const CheckResult& r);
json to_json(const Calibration& c);
SolveReport report_from_json(const json& j);

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string command;
    std::string started;
    std::string finished;
    std::vector<std::string> artifacts;  ///< paths relative to the run directory
    std::string tool_version;
};

json to_json(const RunManifest& m);
/// UTC, ISO 8601.
std::string timestamp_now();
const char* tool_version();

}  // namespace choquard
