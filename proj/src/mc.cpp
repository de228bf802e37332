#include "pinch/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace pinch {

double critical_probability(LatticeKind k, ModelKind m) {
    if (m == ModelKind::bond_perc && k == LatticeKind::square_rect) return 0.5;
    if (m == ModelKind::site_perc && k == LatticeKind::triangular_hex) return 0.5;
    if (m == ModelKind::ising_fk && k == LatticeKind::square_rect) return std::sqrt(2.0) / (1.0 + std::sqrt(2.0));
    if (m == ModelKind::ising_fk && k == LatticeKind::triangular_hex) return (std::sqrt(3.0) - 1.0) / std::sqrt(3.0);
    throw DomainError("no critical point for this model on this lattice");
}

LatticeSpec rect_spec(ModelKind m, int width, int height) {
    if (width < 1 || height < 2) throw DomainError("rectangle needs width >= 1 and height >= 2");
    LatticeSpec s;
    s.kind = LatticeKind::square_rect;
    s.model = m;
    s.Lx = width;
    s.Ly = height - 1;
    s.p_c = critical_probability(s.kind, m);
    s.wiring = ffbc_event(2, 1);
    return s;
}

LatticeSpec hex_spec(ModelKind m, int side) {
    if (side < 1) throw DomainError("hexagon needs side >= 1");
    LatticeSpec s;
    s.kind = LatticeKind::triangular_hex;
    s.model = m;
    s.side = side;
    s.p_c = critical_probability(s.kind, m);
    s.wiring = ffbc_event(3, 3);
    return s;
}

namespace {

// Bernoulli(p) draws by decision index, caching the current Philox block.
struct Draws {
    const CounterRng& rng;
    uint64_t thr;
    bool half;
    uint64_t cur = UINT64_MAX;
    PhiloxCtr blk{};

    Draws(const CounterRng& r, double p) : rng(r), thr(static_cast<uint64_t>(std::ldexp(p, 32))), half(p == 0.5) {}
    bool operator()(size_t c) {
        uint64_t b = half ? c >> 7 : c >> 2;
        if (b != cur) {
            blk = rng.block(b);
            cur = b;
        }
        if (half) return (blk[(c >> 5) & 3] >> (c & 31)) & 1u;
        return blk[c & 3] < thr;
    }
};

}  // namespace

// ---------------------------------------------------------------- square lattice

RectBonds::RectBonds(int lx, int ly) : Lx(lx), Ly(ly), open(static_cast<size_t>(2 * lx + 1) * (2 * ly + 3), 0) {
    for (int Y = 1; Y < 2 * Ly; Y += 2) {
        set(0, Y, true);
        set(2 * Lx, Y, true);
    }
}

bool RectBonds::is_random(int X, int Y) const {
    return X >= 1 && X <= 2 * Lx - 1 && Y >= 0 && Y <= 2 * Ly && ((X + Y) & 1);
}

void RectBonds::fill_all(bool v) {
    for (int Y = 0; Y <= 2 * Ly; ++Y)
        for (int X = 1; X < 2 * Lx; ++X)
            if (is_random(X, Y)) set(X, Y, v);
}

void fill_rect_bonds(RectBonds& b, const CounterRng& rng, double p) {
    Draws draw(rng, p);
    for (int Y = 0; Y <= 2 * b.Ly; ++Y)
        for (int X = 1 + (Y & 1); X < 2 * b.Lx; X += 2) {
            int c = b.code(X, Y);
            b.open[c] = draw(c);
        }
}

Walk medial_hull_walk(const RectBonds& b, int start) {
    const int Lx = b.Lx, Ly = b.Ly;
    int X, Y, dx, dy;
    if (start == 1) {
        X = 0, Y = -1, dx = 1, dy = 1;
    } else if (start == 3) {
        X = 2 * Lx, Y = 2 * Ly + 1, dx = -1, dy = -1;
    } else {
        throw DomainError("medial walks start at vertex 1 or 3");
    }
    Walk w;
    w.path.push_back(b.code(X, Y));
    const size_t limit = 4 * b.open.size() + 16;
    for (;;) {
        X += dx;
        Y += dy;
        if (X < 0 || X > 2 * Lx || Y < -1 || Y > 2 * Ly + 1) throw std::logic_error("medial walk left the domain");
        w.path.push_back(b.code(X, Y));
        if ((Y == -1 || Y == 2 * Ly + 1) && (X == 0 || X == 2 * Lx)) break;
        if (b.open[b.code(X, Y)]) {
            int t = dx;
            dx = dy;
            dy = -t;
        } else {
            int t = dx;
            dx = -dy;
            dy = t;
        }
        if (w.path.size() > limit) throw std::logic_error("medial walk does not terminate");
    }
    if (Y == -1)
        w.end_vertex = X == 0 ? 1 : 2;
    else
        w.end_vertex = X == 0 ? 4 : 3;
    return w;
}

RectSample rect_walks(const RectBonds& b) {
    RectSample s;
    s.walks[0] = medial_hull_walk(b, 1);
    s.walks[1] = medial_hull_walk(b, 3);
    int e1 = s.walks[0].end_vertex, e2 = s.walks[1].end_vertex;
    if (!((e1 == 2 && e2 == 4) || (e1 == 4 && e2 == 2))) throw std::logic_error("inconsistent rectangle walk endpoints");
    s.horizontal = e1 == 2;
    return s;
}

RectSample perc_hull_walk_rect(const LatticeSpec& spec, uint64_t seed, uint64_t sample) {
    if (spec.kind != LatticeKind::square_rect || spec.model != ModelKind::bond_perc)
        throw DomainError("perc_hull_walk_rect needs bond percolation on the square rectangle");
    RectBonds b(spec.Lx, spec.Ly);
    fill_rect_bonds(b, CounterRng(seed, sample), spec.p_c);
    return rect_walks(b);
}

// ---------------------------------------------------------------- triangular lattice

namespace {
constexpr int kDir[6][2] = {{1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1}};  // clockwise

int hex_norm(int q, int r) { return std::max({std::abs(q), std::abs(r), std::abs(q + r)}); }

std::array<int, 2> rot120(std::array<int, 2> a) { return {-a[0] - a[1], a[0]}; }

cd axial_position(double q, double r) { return cd(q + 0.5 * r, 0.5 * std::sqrt(3.0) * r); }
}  // namespace

HexSites::HexSites(int side) : L(side), active(static_cast<size_t>(2 * side + 5) * (2 * side + 5), 0) {
    for (int r = -L - 2; r <= L + 2; ++r)
        for (int q = -L - 2; q <= L + 2; ++q) {
            bool v;
            if (!inside(q, r)) {
                bool free_violated = q > L || r > L || q + r < -L;
                v = !free_violated;
            } else {
                v = !is_random(q, r);
            }
            set(q, r, v);
        }
}

bool HexSites::inside(int q, int r) const { return hex_norm(q, r) <= L; }

bool HexSites::is_random(int q, int r) const {
    return inside(q, r) && r != -L && q + r != L && q != -L;
}

void HexSites::fill_all(bool v) {
    for (int r = -L; r <= L; ++r)
        for (int q = -L; q <= L; ++q)
            if (is_random(q, r)) set(q, r, v);
}

void fill_hex_sites(HexSites& s, const CounterRng& rng, double p) {
    Draws draw(rng, p);
    const int L = s.L;
    for (int r = -L + 1; r <= L; ++r)
        for (int q = std::max(-L + 1, -L - r); q <= std::min(L, L - r - 1); ++q) {
            int c = s.code(q, r);
            s.active[c] = draw(c);
        }
}

Walk site_hull_walk(const HexSites& s, int start) {
    if (start != 1 && start != 3 && start != 5) throw DomainError("site walks start at vertex 1, 3 or 5");
    const int L = s.L;
    std::array<int, 2> lo{-1, -L}, ro{0, -L};
    for (int k = 1; k < start; k += 2) {
        lo = rot120(lo);
        ro = rot120(ro);
    }
    Walk w;
    w.path.push_back(s.code(lo[0], lo[1]));
    w.path.push_back(s.code(ro[0], ro[1]));
    const size_t limit = 4 * s.active.size() + 16;
    for (;;) {
        if (!s.inside(lo[0], lo[1]) && !s.inside(ro[0], ro[1])) break;
        int d0 = ro[0] - lo[0], d1 = ro[1] - lo[1];
        int k = 0;
        while (kDir[k][0] != d0 || kDir[k][1] != d1) ++k;
        int j = (k + 5) % 6;
        std::array<int, 2> t{lo[0] + kDir[j][0], lo[1] + kDir[j][1]};
        if (hex_norm(t[0], t[1]) > L + 1) throw std::logic_error("site walk left the padded domain");
        w.path.push_back(s.code(t[0], t[1]));
        if (s.get(t[0], t[1]))
            ro = t;
        else
            lo = t;
        if (w.path.size() > limit) throw std::logic_error("site walk does not terminate");
    }
    cd mid = 0.5 * (axial_position(lo[0], lo[1]) + axial_position(ro[0], ro[1]));
    const int V[6][2] = {{0, -L}, {L, -L}, {L, 0}, {0, L}, {-L, L}, {-L, 0}};
    double best = INFINITY;
    for (int v = 0; v < 6; ++v) {
        double d = std::abs(mid - axial_position(V[v][0], V[v][1]));
        if (d < best) {
            best = d;
            w.end_vertex = v + 1;
        }
    }
    return w;
}

HexSample hex_walks(const HexSites& s) {
    HexSample h;
    for (int k = 0; k < 3; ++k) {
        h.walks[k] = site_hull_walk(s, 2 * k + 1);
        h.ends[k] = h.walks[k].end_vertex;
        if (h.ends[k] % 2) throw std::logic_error("site walk ended at an odd vertex");
    }
    if (h.ends[0] == h.ends[1] || h.ends[1] == h.ends[2] || h.ends[0] == h.ends[2])
        throw std::logic_error("two site walks share an end vertex");
    return h;
}

HexSample perc_hull_walk_hex(const LatticeSpec& spec, uint64_t seed, uint64_t sample) {
    if (spec.kind != LatticeKind::triangular_hex || spec.model != ModelKind::site_perc)
        throw DomainError("perc_hull_walk_hex needs site percolation on the triangular hexagon");
    HexSites s(spec.side);
    fill_hex_sites(s, CounterRng(seed, sample), spec.p_c);
    return hex_walks(s);
}

// ---------------------------------------------------------------- Swendsen-Wang

SpinGraph square_graph(int Lx, int Ly, bool wired) {
    SpinGraph g;
    g.n = (Lx + 1) * (Ly + 1);
    auto id = [&](int i, int j) { return i + j * (Lx + 1); };
    for (int j = 0; j <= Ly; ++j)
        for (int i = 0; i <= Lx; ++i) {
            if (i < Lx) {
                g.edges.push_back({id(i, j), id(i + 1, j)});
                g.forced.push_back(0);
            }
            if (j < Ly) {
                g.edges.push_back({id(i, j), id(i, j + 1)});
                g.forced.push_back(wired && (i == 0 || i == Lx));
            }
        }
    return g;
}

SpinGraph triangular_hex_graph(int side) {
    HexSites h(side);
    const int L = side;
    std::vector<int> index(h.active.size(), -1);
    SpinGraph g;
    for (int r = -L; r <= L; ++r)
        for (int q = -L; q <= L; ++q)
            if (h.inside(q, r)) index[h.code(q, r)] = g.n++;
    auto side_of = [&](int q, int r) {
        int m = 0;
        if (r == -L) m |= 1;
        if (q + r == L) m |= 2;
        if (q == -L) m |= 4;
        return m;
    };
    const int fwd[3][2] = {{1, 0}, {0, 1}, {-1, 1}};
    for (int r = -L; r <= L; ++r)
        for (int q = -L; q <= L; ++q) {
            if (!h.inside(q, r)) continue;
            for (auto& d : fwd) {
                int q2 = q + d[0], r2 = r + d[1];
                if (!h.inside(q2, r2)) continue;
                g.edges.push_back({index[h.code(q, r)], index[h.code(q2, r2)]});
                g.forced.push_back((side_of(q, r) & side_of(q2, r2)) != 0);
            }
        }
    return g;
}

SwState sw_initial_state(const SpinGraph& g, uint64_t chain) {
    SwState s;
    s.spin.assign(g.n, 1);
    s.chain = chain;
    return s;
}

namespace {
int find_root(std::vector<int>& parent, int a) {
    while (parent[a] != a) {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    return a;
}
}  // namespace

std::vector<uint8_t> sw_ising_sample(const SpinGraph& g, double p, SwState& st, uint64_t seed) {
    CounterRng rng(seed, (st.chain << 40) | st.sweep);
    const uint64_t thr = static_cast<uint64_t>(std::ldexp(p, 32));
    const size_t E = g.edges.size();
    std::vector<uint8_t> act(E, 0);
    std::vector<int> parent(g.n);
    std::iota(parent.begin(), parent.end(), 0);
    for (size_t e = 0; e < E; ++e) {
        int a = g.edges[e][0], b = g.edges[e][1];
        bool on = g.forced[e] || (st.spin[a] == st.spin[b] && rng.word(e) < thr);
        if (!on) continue;
        act[e] = 1;
        int ra = find_root(parent, a), rb = find_root(parent, b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    const uint64_t offset = 32 * static_cast<uint64_t>(E);
    for (int i = 0; i < g.n; ++i) {
        int r = find_root(parent, i);
        st.spin[i] = rng.bit(offset + r) ? 1 : -1;
    }
    ++st.sweep;
    return act;
}

RectBonds fk_rect_bonds(const SpinGraph& g, const std::vector<uint8_t>& active, int Lx, int Ly) {
    RectBonds b(Lx, Ly);
    b.fill_all(false);
    for (size_t e = 0; e < g.edges.size(); ++e) {
        int a = g.edges[e][0], c = g.edges[e][1];
        int i = a % (Lx + 1), j = a / (Lx + 1);
        bool horiz = c == a + 1;
        int X = horiz ? 2 * i + 1 : 2 * i, Y = horiz ? 2 * j : 2 * j + 1;
        if (b.is_random(X, Y)) b.set(X, Y, active[e] != 0);
    }
    return b;
}

// ---------------------------------------------------------------- tallies

std::vector<std::string> tracked_events(LatticeKind k) {
    if (k == LatticeKind::square_rect) return {"12:34", "34:12", "41:23", "23:41", "1234"};
    return {"12:34:56+12:36:45", "6123:45", "2345:61", "4561:23", "123456"};
}

TallySet empty_tallies(const LatticeSpec& spec) {
    TallySet t;
    t.kind = spec.kind;
    if (spec.kind == LatticeKind::square_rect) {
        t.Lx = spec.Lx;
        t.Ly = spec.Ly;
        t.nx = 2 * spec.Lx + 1;
        t.ny = 2 * spec.Ly + 1;
    } else {
        t.side = spec.side;
        t.nx = t.ny = 2 * spec.side + 1;
    }
    for (auto& e : tracked_events(spec.kind)) t.grids[e].assign(static_cast<size_t>(t.nx) * t.ny, 0);
    return t;
}

bool TallySet::valid(int ix, int iy) const {
    if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) return false;
    if (kind == LatticeKind::square_rect) return (ix + iy) & 1;
    return hex_norm(ix - side, iy - side) <= side;
}

cd TallySet::position(int ix, int iy) const {
    if (kind == LatticeKind::square_rect) return cd(ix, iy + 1) / (2.0 * (Ly + 1));
    return axial_position(ix - side, iy - side) / (side + 0.5);
}

void TallySet::merge(const TallySet& o) {
    if (o.nx != nx || o.ny != ny || o.kind != kind) throw DomainError("merging incompatible tallies");
    for (auto& [k, v] : o.grids) {
        auto& mine = grids[k];
        if (mine.empty()) mine.assign(v.size(), 0);
        for (size_t i = 0; i < v.size(); ++i) mine[i] += v[i];
    }
    for (auto& [k, v] : o.connectivity) connectivity[k] += v;
    samples += o.samples;
}

namespace {

// per-thread marks: which walks visited a grid cell in the current sample
struct Marks {
    std::vector<uint32_t> epoch;
    std::vector<uint8_t> mask;
    uint32_t now = 0;
    std::array<std::vector<int>, 3> lists;

    void begin(size_t n) {
        if (epoch.size() != n) {
            epoch.assign(n, 0);
            mask.assign(n, 0);
            now = 0;
        }
        ++now;
        for (auto& l : lists) l.clear();
    }
    void visit(int walk, int idx) {
        if (epoch[idx] != now) {
            epoch[idx] = now;
            mask[idx] = 0;
        }
        if (!(mask[idx] & (1 << walk))) {
            mask[idx] |= static_cast<uint8_t>(1 << walk);
            lists[walk].push_back(idx);
        }
    }
};

thread_local Marks tls_marks;

}  // namespace

void tally(const RectSample& s, TallySet& t) {
    Marks& m = tls_marks;
    m.begin(static_cast<size_t>(t.nx) * t.ny);
    const int w = t.nx;
    for (int k = 0; k < 2; ++k)
        for (int c : s.walks[k].path) {
            int i = c - w;
            if (i >= 0 && i < w * t.ny) m.visit(k, i);
        }
    auto& g1 = t.grids[s.horizontal ? "12:34" : "41:23"];
    auto& g2 = t.grids[s.horizontal ? "34:12" : "23:41"];
    auto& g12 = t.grids["1234"];
    for (int i : m.lists[0]) {
        ++g1[i];
        if (m.mask[i] & 2) ++g12[i];
    }
    for (int i : m.lists[1]) ++g2[i];
    ++t.connectivity[s.horizontal ? "12|34" : "14|23"];
    ++t.samples;
}

void tally(const HexSample& s, TallySet& t) {
    Marks& m = tls_marks;
    m.begin(static_cast<size_t>(t.nx) * t.ny);
    const int L = t.side, pw = 2 * L + 5;
    for (int k = 0; k < 3; ++k)
        for (int c : s.walks[k].path) {
            int q = c % pw - L - 2, r = c / pw - L - 2;
            if (hex_norm(q, r) > L) continue;
            m.visit(k, (q + L) + (r + L) * t.nx);
        }
    if (s.ends[0] == 2) {
        auto& g = t.grids["12:34:56+12:36:45"];
        for (int i : m.lists[0]) ++g[i];
    }
    if (s.ends[0] == 6 && s.ends[1] == 2 && s.ends[2] == 4) {
        auto& a = t.grids["6123:45"];
        auto& b = t.grids["2345:61"];
        auto& c = t.grids["4561:23"];
        auto& d = t.grids["123456"];
        for (int i : m.lists[0]) {
            if (m.mask[i] & 2) ++a[i];
            if (m.mask[i] & 4) ++c[i];
            if (m.mask[i] == 7) ++d[i];
        }
        for (int i : m.lists[1])
            if (m.mask[i] & 4) ++b[i];
    }
    std::string key = "1" + std::to_string(s.ends[0]) + "|3" + std::to_string(s.ends[1]) + "|5" + std::to_string(s.ends[2]);
    ++t.connectivity[key];
    ++t.samples;
}

namespace {

double integrated_autocorrelation(const std::vector<double>& x) {
    const size_t n = x.size();
    if (n < 4) return 0.5;
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    if (var <= 0.0) return 0.5;
    double tau = 0.5;
    for (size_t k = 1; k < n / 2; ++k) {
        double c = 0.0;
        for (size_t i = 0; i + k < n; ++i) c += (x[i] - mean) * (x[i + k] - mean);
        tau += c / ((n - k) * var);
        if (static_cast<double>(k) >= 6.0 * tau) break;
    }
    return tau;
}

template <class Job>
void run_parallel(int workers, int jobs, Job job) {
    workers = std::max(1, std::min(workers, jobs));
    if (workers == 1) {
        for (int j = 0; j < jobs; ++j) job(j);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int j = w; j < jobs; j += workers) job(j);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace

TallySet run_experiment(const LatticeSpec& spec, int64_t n_samples, uint64_t seed, int workers) {
    if (n_samples < 0) throw DomainError("n_samples must be non-negative");
    TallySet total = empty_tallies(spec);
    if (n_samples == 0) return total;
    if (spec.model == ModelKind::ising_fk) {
        if (spec.kind != LatticeKind::square_rect) throw DomainError("FK hull walks are implemented on the square rectangle only");
        const int C = std::max(1, spec.chains);
        std::vector<TallySet> parts(C, total);
        std::vector<double> taus(C, 0.5);
        SpinGraph g = square_graph(spec.Lx, spec.Ly, true);
        run_parallel(workers, C, [&](int c) {
            int64_t lo = n_samples * c / C, hi = n_samples * (c + 1) / C;
            if (hi <= lo) return;
            SwState st = sw_initial_state(g, static_cast<uint64_t>(c));
            const int burn = spec.burn_in_per_length * std::max(spec.Lx, spec.Ly);
            for (int k = 0; k < burn; ++k) sw_ising_sample(g, spec.p_c, st, seed);
            std::vector<double> series;
            for (int64_t s = lo; s < hi; ++s) {
                std::vector<uint8_t> act;
                for (int k = 0; k < std::max(1, spec.decorrelation); ++k) act = sw_ising_sample(g, spec.p_c, st, seed);
                RectSample smp = rect_walks(fk_rect_bonds(g, act, spec.Lx, spec.Ly));
                tally(smp, parts[c]);
                series.push_back(smp.horizontal ? 1.0 : 0.0);
            }
            taus[c] = integrated_autocorrelation(series);
        });
        double wsum = 0.0;
        for (int c = 0; c < C; ++c) {
            total.merge(parts[c]);
            total.autocorrelation += taus[c] * parts[c].samples;
            wsum += parts[c].samples;
        }
        if (wsum > 0) total.autocorrelation /= wsum;
        return total;
    }
    const int W = static_cast<int>(std::max<int64_t>(1, std::min<int64_t>(workers, n_samples)));
    std::vector<TallySet> parts(W, total);
    run_parallel(W, W, [&](int w) {
        int64_t lo = n_samples * w / W, hi = n_samples * (w + 1) / W;
        if (spec.kind == LatticeKind::square_rect) {
            if (spec.model != ModelKind::bond_perc) throw DomainError("the rectangle supports bond percolation and Ising FK");
            RectBonds b(spec.Lx, spec.Ly);
            for (int64_t s = lo; s < hi; ++s) {
                fill_rect_bonds(b, CounterRng(seed, static_cast<uint64_t>(s)), spec.p_c);
                tally(rect_walks(b), parts[w]);
            }
        } else {
            if (spec.model != ModelKind::site_perc) throw DomainError("the hexagon supports site percolation");
            HexSites h(spec.side);
            for (int64_t s = lo; s < hi; ++s) {
                fill_hex_sites(h, CounterRng(seed, static_cast<uint64_t>(s)), spec.p_c);
                tally(hex_walks(h), parts[w]);
            }
        }
    });
    for (auto& p : parts) total.merge(p);
    return total;
}

}  // namespace pinch
