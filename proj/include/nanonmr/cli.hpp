#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nanonmr/error.hpp"
#include "nanonmr/estimation.hpp"
#include "nanonmr/evaporating.hpp"
#include "nanonmr/geometry.hpp"
#include "nanonmr/series.hpp"
#include "nanonmr/sticky.hpp"

namespace nanonmr::cli {

// Physical scale behind the normalized quantities. Zero means the config was
// given in normalized units (lengths in d, times in T_D).
struct UnitSystem {
    double d_m = 0.0;
    double D_m2_s = 0.0;
    double T_D_s = 0.0;
    bool physical_length() const { return d_m > 0.0; }
    bool physical_time() const { return T_D_s > 0.0; }
};

struct GridSpec {
    double t_min = 1e-2;
    double t_max = 1e3;
    int points_per_decade = 40;
};

struct MapSpec {
    double R_min = 0.2, R_max = 10.0;
    double L_min = 0.2, L_max = 10.0;
    int points = 50;  // per axis, linear spacing
};

struct McSpec {
    std::size_t particles = 3125;  // per realization
    std::size_t realizations = 32;
    double dt = 1e-3;
};

struct FisherSpec {
    FisherSetup setup{0.1, 100.0, 1.0, 1.0};
    int points_per_decade = 40;
};

enum class OutputFormat { Csv, Json };

struct RunConfig {
    std::string command;
    ModelTag model = ModelTag::Reflective;
    CylinderGeometry geom = make_geometry(1, 1, 1);
    FluidParams fluid;  // D = 1, tau_ev in T_D
    UnitSystem units;
    GridSpec grid;
    StickyQuadrature quadrature;
    Truncation truncation;
    McSpec mc;
    FisherSpec fisher;
    MapSpec map;
    std::string input;
    std::string output;  // empty: standard output
    OutputFormat format = OutputFormat::Csv;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string config_hash;  // FNV-1a of the canonical document
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"correlate", "eigen", "plateau-map", "dominance-map",
                                                "fisher", "fit", "mc", "compare"};
    return names;
}

// JSON document to validated config. Bare numbers are normalized (lengths in
// d, times in T_D, angular frequencies in rad/T_D); strings such as "15 nm",
// "1e-9 m^2/s", "2 ms" or "3 MHz" carry units and are converted through d and
// T_D = d^2/D. Throws ConfigSyntax (with line and column), ConfigSemantic
// (naming the key) or ConfigUnits.
RunConfig parse_config(const std::string& text);

// Normalization echo as a JSON object string.
std::string describe_units(const RunConfig& config);

struct Provenance {
    std::string config_hash;
    std::string version;
    std::string command;
};

Provenance provenance_of(const RunConfig& config);

// CSV: "# model=<tag> R= L= d= tau_ev= seed=", a provenance comment, the
// column header "t_over_TD,G,err" and rows with 12 significant digits.
// JSON: the same fields as one object. Throws Series for an empty or invalid
// series (no file is created) and Io on write failure.
void write_series(const CorrelationSeries& series, const std::string& path, OutputFormat format,
                  const Provenance& prov);
std::string format_series(const CorrelationSeries& series, OutputFormat format, const Provenance& prov);

// Reads either format, detected from the first non-blank character. Files
// that declare more than one model are rejected.
CorrelationSeries read_series(const std::string& path);
CorrelationSeries parse_series(const std::string& text);

// Generic numeric table for maps, mode dumps and reports.
struct Table {
    std::vector<std::string> meta;  // "key=value" pairs for the header line
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string format_table(const Table& table, OutputFormat format, const Provenance& prov);

// Throws Io with the path on failure.
void write_artifact(const std::string& path, const std::string& text);

struct RunOutcome {
    int status = 0;
    std::string artifact;  // file content when no output path is set
    std::string report;    // JSON summary or error report
};

// Executes the command; errors become a nonzero status with a JSON report
// naming the command and error kind.
RunOutcome run_command(const RunConfig& config);

int exit_code(ErrorKind kind);

}  // namespace nanonmr::cli
