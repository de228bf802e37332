#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pinch/rng.hpp"
#include "pinch/theory.hpp"

namespace pinch {

enum class LatticeKind { square_rect, triangular_hex };
enum class ModelKind { bond_perc, site_perc, ising_fk };

struct LatticeSpec {
    LatticeKind kind = LatticeKind::square_rect;
    ModelKind model = ModelKind::bond_perc;
    int Lx = 0, Ly = 0;  // square rectangle: sites 0..Lx by 0..Ly
    int side = 0;        // triangular hexagon side, in lattice spacings
    double p_c = 0.5;
    FfbcEvent wiring;
    int chains = 8;  // independent SW chains; fixed so results do not depend on workers
    int burn_in_per_length = 10;
    int decorrelation = 2;
};

double critical_probability(LatticeKind k, ModelKind m);
// A width x height domain in lattice spacings: the free sides lie half a spacing outside the
// outermost site rows, so Lx = width and Ly = height - 1.  A square domain is self-dual.
LatticeSpec rect_spec(ModelKind m, int width, int height);
LatticeSpec hex_spec(ModelKind m, int side);

// ---------------------------------------------------------------- square lattice

// Bond states indexed by medial coordinates (X, Y) = (2x, 2y), X + Y odd,
// with one virtual row below and above: horizontal bond (i,j)-(i+1,j) sits at
// (2i+1, 2j), vertical bond (i,j)-(i,j+1) at (2i, 2j+1).  The columns x = 0 and
// x = Lx are wired; virtual bonds beyond the free sides are closed.
struct RectBonds {
    int Lx = 0, Ly = 0;
    std::vector<uint8_t> open;

    RectBonds() = default;
    RectBonds(int lx, int ly);
    int width() const { return 2 * Lx + 1; }
    int code(int X, int Y) const { return (Y + 1) * width() + X; }
    bool is_random(int X, int Y) const;
    void set(int X, int Y, bool v) { open[code(X, Y)] = v; }
    bool get(int X, int Y) const { return open[code(X, Y)]; }
    void fill_all(bool v);
};

struct Walk {
    std::vector<int> path;  // medial (square) or site (triangular) codes in visiting order
    int end_vertex = 0;
};

// Medial hull walk from a/2 below vertex 1 (start=1) or a/2 above vertex 3 (start=3),
// turning right on open bonds and left on closed ones.  Never changes bonds, so it is
// also the perimeter walk of an FK configuration.
Walk medial_hull_walk(const RectBonds& b, int start);
inline Walk fk_perimeter_walk(const RectBonds& b, int start) { return medial_hull_walk(b, start); }

void fill_rect_bonds(RectBonds& b, const CounterRng& rng, double p);

struct RectSample {
    std::array<Walk, 2> walks;
    bool horizontal = false;
};
RectSample perc_hull_walk_rect(const LatticeSpec& spec, uint64_t seed, uint64_t sample);
RectSample rect_walks(const RectBonds& b);

// ---------------------------------------------------------------- triangular lattice

// Axial coordinates (q, r), position q + r e^{i pi/3}; hexagon max(|q|,|r|,|q+r|) <= L with
// vertices 1..6 at (0,-L), (L,-L), (L,0), (0,L), (-L,L), (-L,0).  Sides 12, 34, 56 are wired.
struct HexSites {
    int L = 0;
    std::vector<uint8_t> active;  // padded by two rings

    HexSites() = default;
    explicit HexSites(int side);
    int width() const { return 2 * L + 5; }
    int code(int q, int r) const { return (r + L + 2) * width() + (q + L + 2); }
    std::array<int, 2> coords(int c) const { return {c % width() - L - 2, c / width() - L - 2}; }
    bool inside(int q, int r) const;
    bool is_random(int q, int r) const;
    void set(int q, int r, bool v) { active[code(q, r)] = v; }
    bool get(int q, int r) const { return active[code(q, r)]; }
    void fill_all(bool v);
};

// Hull walk from vertex 1, 3 or 5 into the adjacent free side with the active cluster on the
// right; the path lists the inner and outer boundary sites in order.
Walk site_hull_walk(const HexSites& s, int start);
void fill_hex_sites(HexSites& s, const CounterRng& rng, double p);

struct HexSample {
    std::array<Walk, 3> walks;
    std::array<int, 3> ends{};  // end vertex of the walks from 1, 3, 5
};
HexSample perc_hull_walk_hex(const LatticeSpec& spec, uint64_t seed, uint64_t sample);
HexSample hex_walks(const HexSites& s);

// ---------------------------------------------------------------- Swendsen-Wang

struct SpinGraph {
    int n = 0;
    std::vector<std::array<int, 2>> edges;
    std::vector<uint8_t> forced;  // always activated (wired sides)
};
// sites (i,j) -> i + j (Lx+1); with wired=true the end columns are wired independently
SpinGraph square_graph(int Lx, int Ly, bool wired);
// sites numbered by HexSites::code order restricted to the hexagon; sides 12, 34, 56 wired
SpinGraph triangular_hex_graph(int side);

struct SwState {
    std::vector<int8_t> spin;
    uint64_t chain = 0;
    uint64_t sweep = 0;
};
SwState sw_initial_state(const SpinGraph& g, uint64_t chain);
// One SW update; returns the activated-edge flags of the FK configuration it used.
std::vector<uint8_t> sw_ising_sample(const SpinGraph& g, double p, SwState& st, uint64_t seed);

RectBonds fk_rect_bonds(const SpinGraph& g, const std::vector<uint8_t>& active, int Lx, int Ly);

// ---------------------------------------------------------------- tallies

struct TallySet {
    LatticeKind kind = LatticeKind::square_rect;
    int Lx = 0, Ly = 0, side = 0;
    int nx = 0, ny = 0;
    std::map<std::string, std::vector<int64_t>> grids;
    int64_t samples = 0;
    std::map<std::string, int64_t> connectivity;
    double autocorrelation = 0.0;  // integrated time of the crossing indicator (SW only)

    bool valid(int ix, int iy) const;
    // continuum coordinates: rectangle of height 1 with vertex 1 at 0; hexagon of side 1 centered at 0.
    // Free boundaries sit half a spacing beyond the last row of cells.
    cd position(int ix, int iy) const;
    double aspect() const { return static_cast<double>(Lx) / (Ly + 1); }
    void merge(const TallySet& o);
};
TallySet empty_tallies(const LatticeSpec& spec);
std::vector<std::string> tracked_events(LatticeKind k);

void tally(const RectSample& s, TallySet& t);
void tally(const HexSample& s, TallySet& t);

TallySet run_experiment(const LatticeSpec& spec, int64_t n_samples, uint64_t seed, int workers);

}  // namespace pinch
