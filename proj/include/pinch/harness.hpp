#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pinch/mc.hpp"
#include "pinch/theory.hpp"

namespace pinch {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string polygon = "rect";       // rect | hex
    std::string model = "percolation";  // percolation | ising | custom
    double kappa = 6.0;                 // read for model = custom
    std::string event = "12:34";
    int ffbc = 0;                       // 0 selects the wiring the simulation uses
    int width = 400, height = 200;      // rectangle, in lattice spacings; R = width / height
    int side = 200;                     // hexagon
    int64_t samples = 0;
    uint64_t seed = 1;
    int workers = 1;
    int bin = 4;     // coarse-graining bin, lattice spacings
    int margin = 2;  // cells closer than this many spacings to the boundary are dropped
    int64_t min_count = 1;
    std::vector<double> y_slices;
    std::string out_dir = ".";
};

// flat "key = value" lines; '#' starts a comment
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string format_config(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

ModelParams config_params(const ExperimentConfig& c);
LatticeSpec config_lattice(const ExperimentConfig& c);
FfbcEvent config_ffbc(const ExperimentConfig& c);

// Plain-text grid: '#'-prefixed "key=value" header lines, then rows x,y,value.
// NaN marks points where the value could not be evaluated.
struct Grid {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<double> x, y, value;

    std::string get(const std::string& key, const std::string& fallback = "") const;
    void set(const std::string& key, const std::string& v);
    size_t size() const { return value.size(); }
};
std::string format_grid(const Grid& g);
Grid parse_grid(const std::string& text);
void save_grid(const std::string& path, const Grid& g);
Grid load_grid(const std::string& path);

// Full bins of bin x bin spacings (hexagonal bins on the triangular lattice) anchored at the center.
struct Binning {
    std::vector<int> cell_bin;  // per tally cell, -1 when dropped
    std::vector<cd> centroid;   // continuum coordinates
    std::vector<int> row;       // bins in one row share their centroid height
    std::vector<int> cells;
    int center = -1;
};
Binning make_binning(const TallySet& shape, int bin, int margin);

// center-normalized theory at the bin centroids
Grid theory_grid(const ExperimentConfig& c);
// raw integer tallies of one event at full lattice resolution
Grid count_grid(const TallySet& t, const std::string& event, const ExperimentConfig& c);
// binned, center-normalized view of a count grid; bins under min_count become NaN
Grid density_grid(const Grid& counts);

struct ComparisonRow {
    double y_slice = 0.0;  // requested height
    double y = 0.0;        // height of the bin row used
    double avg_error = 0.0;
    double std_dev = 0.0;
    int points = 0;
};
// theory minus simulation over x, per slice; both inputs are normalized at the center first
std::vector<ComparisonRow> compare_grids(const Grid& theory, const Grid& sim, const std::vector<double>& y_slices);

std::string event_file_tag(const std::string& event);

// Each command writes into c.out_dir and returns the paths it wrote.
std::string cmd_theory(const ExperimentConfig& c);
std::vector<std::string> cmd_simulate(const ExperimentConfig& c);
std::string cmd_compare(const ExperimentConfig& c, const std::string& theory_file, const std::string& sim_file);

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};
SuiteResult suite_special_functions();
SuiteResult suite_contour_identities(int configs_per_kappa = 20);
// fd_perturbation shifts the F_D parameter a of the Lauricella side of the comparison
SuiteResult suite_block_equivalence(double fd_perturbation = 0.0);
SuiteResult suite_pde_residuals(const std::vector<double>& kappas = {6.0, 16.0 / 3.0});
SuiteResult suite_limit_recovery();
SuiteResult suite_lattice_oracles();

struct LimitRatio {
    std::string name;
    double kappa = 0.0;
    double ratio = 0.0;  // tends to 1 as the separation shrinks
};
// (x_l - x_k)^{2 theta_1} Pi_{ij:kl} / Pi_{ij}, the hexagon two-pinch analogue and the one-pinch combination
std::vector<LimitRatio> limit_ratios(double kappa, double separation);

std::vector<SuiteResult> cmd_selftest(double fd_perturbation = 0.0);

}  // namespace pinch
