#include "pinch/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace pinch {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    T out{};
    in >> out;
    if (in.fail() || !(in >> std::ws).eof()) throw ConfigError("bad value for " + key + ": '" + v + "'");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

TallySet shape_of(const ExperimentConfig& c) {
    LatticeSpec s;
    if (c.polygon == "rect") {
        s.kind = LatticeKind::square_rect;
        s.Lx = c.width;
        s.Ly = c.height - 1;
    } else {
        s.kind = LatticeKind::triangular_hex;
        s.side = c.side;
    }
    return empty_tallies(s);
}

// distance to the boundary in lattice spacings
double boundary_distance(const TallySet& t, cd p) {
    if (t.kind == LatticeKind::square_rect) {
        double h = t.Ly + 1, ux = p.real() * h, uy = p.imag() * h;
        return std::min({ux, t.Lx - ux, uy, h - uy});
    }
    const double s = t.side + 0.5, apothem = 0.5 * std::sqrt(3.0);
    double worst = -INFINITY;
    for (int k = 0; k < 6; ++k) {
        double a = -std::numbers::pi / 2 + k * std::numbers::pi / 3;
        worst = std::max(worst, p.real() * std::cos(a) + p.imag() * std::sin(a));
    }
    return (apothem - worst) * s;
}

int floor_div(int a, int b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

// Integer arithmetic throughout, so cells on a bin edge are assigned the same way everywhere.
std::array<int, 2> bin_key(const TallySet& t, int ix, int iy, int bin) {
    if (t.kind == LatticeKind::square_rect) {
        // offsets from the center in half spacings
        int X = ix - t.Lx, Y = iy + 1 - (t.Ly + 1);
        return {floor_div(X + bin, 2 * bin), floor_div(Y + bin, 2 * bin)};
    }
    // cube rounding of (q, r, s) / bin
    int q = ix - t.side, r = iy - t.side, z = -q - r;
    int qn = floor_div(2 * q + bin, 2 * bin), rn = floor_div(2 * r + bin, 2 * bin), zn = floor_div(2 * z + bin, 2 * bin);
    int dq = std::abs(q - bin * qn), dr = std::abs(r - bin * rn), dz = std::abs(z - bin * zn);
    if (dq > dr && dq > dz)
        qn = -rn - zn;
    else if (dr > dz)
        rn = -qn - zn;
    return {qn, rn};
}

bool same_point(double a, double b) { return std::abs(a - b) <= 1e-9; }

ExperimentConfig config_from_meta(const Grid& g) {
    std::string text;
    for (auto& [k, v] : g.meta)
        if (k.rfind("cfg.", 0) == 0) text += k.substr(4) + "=" + v + "\n";
    return parse_config(text);
}

void echo_config(Grid& g, const ExperimentConfig& c) {
    std::istringstream in(format_config(c));
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string k = trim(line.substr(0, eq));
        // run-time settings stay out of the file so reruns compare byte for byte
        if (k != "workers" && k != "out_dir") g.set("cfg." + k, trim(line.substr(eq + 1)));
    }
}

}  // namespace

// ---------------------------------------------------------------- configuration

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    double aspect = 0.0;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (k == "polygon") c.polygon = v;
        else if (k == "model") c.model = v;
        else if (k == "kappa") c.kappa = parse_number<double>(k, v);
        else if (k == "event") c.event = v;
        else if (k == "ffbc") c.ffbc = parse_number<int>(k, v);
        else if (k == "width") c.width = parse_number<int>(k, v);
        else if (k == "height") c.height = parse_number<int>(k, v);
        else if (k == "side") c.side = parse_number<int>(k, v);
        else if (k == "samples") c.samples = parse_number<int64_t>(k, v);
        else if (k == "seed") c.seed = parse_number<uint64_t>(k, v);
        else if (k == "workers") c.workers = parse_number<int>(k, v);
        else if (k == "bin") c.bin = parse_number<int>(k, v);
        else if (k == "margin") c.margin = parse_number<int>(k, v);
        else if (k == "min_count") c.min_count = parse_number<int64_t>(k, v);
        else if (k == "out_dir") c.out_dir = v;
        else if (k == "aspect") aspect = parse_number<double>(k, v);
        else if (k == "y_slices") {
            c.y_slices.clear();
            std::string item;
            std::istringstream items(v);
            while (std::getline(items, item, ','))
                if (!trim(item).empty()) c.y_slices.push_back(parse_number<double>(k, trim(item)));
        } else
            throw ConfigError("unknown key '" + k + "'");
    }
    if (aspect > 0.0 && std::abs(aspect - static_cast<double>(c.width) / c.height) > 1e-12)
        throw ConfigError("aspect does not match width / height");
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

std::string format_config(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "polygon=" << c.polygon << "\nmodel=" << c.model << "\nkappa=" << fmt(c.kappa) << "\nevent=" << c.event
      << "\nffbc=" << c.ffbc << "\nwidth=" << c.width << "\nheight=" << c.height << "\nside=" << c.side
      << "\nsamples=" << c.samples << "\nseed=" << c.seed << "\nworkers=" << c.workers << "\nbin=" << c.bin
      << "\nmargin=" << c.margin << "\nmin_count=" << c.min_count << "\ny_slices=";
    for (size_t i = 0; i < c.y_slices.size(); ++i) o << (i ? "," : "") << fmt(c.y_slices[i]);
    o << "\nout_dir=" << c.out_dir << "\n";
    return o.str();
}

void validate(const ExperimentConfig& c) {
    if (c.polygon != "rect" && c.polygon != "hex") throw ConfigError("polygon must be rect or hex");
    if (c.model != "percolation" && c.model != "ising" && c.model != "custom")
        throw ConfigError("model must be percolation, ising or custom");
    if (c.model == "custom" && !(c.kappa > 4.0 && c.kappa < 8.0)) throw ConfigError("custom kappa must lie in (4, 8)");
    if (c.polygon == "rect" && (c.width < 1 || c.height < 2)) throw ConfigError("rectangle needs width >= 1, height >= 2");
    if (c.polygon == "hex" && c.side < 1) throw ConfigError("hexagon needs side >= 1");
    if (c.samples < 0) throw ConfigError("samples must be >= 0");
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    if (c.bin < 1 || c.margin < 0 || c.min_count < 0) throw ConfigError("bin >= 1, margin >= 0, min_count >= 0 required");
    PinchEvent e;
    try {
        e = parse_event(c.event);
    } catch (const DomainError& err) {
        throw ConfigError(std::string("event: ") + err.what());
    }
    if (e.N != (c.polygon == "rect" ? 2 : 3)) throw ConfigError("event " + c.event + " does not belong to this polygon");
    try {
        config_ffbc(c);
    } catch (const DomainError& err) {
        throw ConfigError(std::string("ffbc: ") + err.what());
    }
}

ModelParams config_params(const ExperimentConfig& c) {
    if (c.model == "percolation") return from_kappa(6.0);
    if (c.model == "ising") return from_kappa(16.0 / 3.0);
    return from_kappa(c.kappa);
}

LatticeSpec config_lattice(const ExperimentConfig& c) {
    if (c.model == "custom") throw ConfigError("no lattice model for a custom kappa");
    ModelKind m = c.model == "ising" ? ModelKind::ising_fk : (c.polygon == "rect" ? ModelKind::bond_perc : ModelKind::site_perc);
    LatticeSpec s = c.polygon == "rect" ? rect_spec(m, c.width, c.height) : hex_spec(m, c.side);
    s.wiring = config_ffbc(c);
    return s;
}

FfbcEvent config_ffbc(const ExperimentConfig& c) {
    int N = c.polygon == "rect" ? 2 : 3;
    if (c.ffbc == 0) return ffbc_event(N, N == 2 ? 1 : 3);
    return ffbc_event(N, c.ffbc);
}

// ---------------------------------------------------------------- grid files

std::string Grid::get(const std::string& key, const std::string& fallback) const {
    for (auto& [k, v] : meta)
        if (k == key) return v;
    return fallback;
}

void Grid::set(const std::string& key, const std::string& v) {
    for (auto& [k, old] : meta)
        if (k == key) {
            old = v;
            return;
        }
    meta.emplace_back(key, v);
}

std::string format_grid(const Grid& g) {
    std::string out;
    for (auto& [k, v] : g.meta) out += "# " + k + "=" + v + "\n";
    out += "x,y,value\n";
    for (size_t i = 0; i < g.size(); ++i) out += fmt(g.x[i]) + "," + fmt(g.y[i]) + "," + fmt(g.value[i]) + "\n";
    return out;
}

Grid parse_grid(const std::string& text) {
    Grid g;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = trim(line.substr(1));
            auto eq = body.find('=');
            if (eq == std::string::npos) throw ConfigError("bad grid header line: " + line);
            g.meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
            continue;
        }
        if (!header) {
            if (trim(line) != "x,y,value") throw ConfigError("grid is missing the x,y,value header");
            header = true;
            continue;
        }
        double v[3];
        const char* p = line.c_str();
        for (int k = 0; k < 3; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(p, &end);
            if (end == p || (k < 2 && *end != ',')) throw ConfigError("bad grid row: " + line);
            p = end + (k < 2 ? 1 : 0);
        }
        g.x.push_back(v[0]);
        g.y.push_back(v[1]);
        g.value.push_back(v[2]);
    }
    if (!header) throw ConfigError("grid is missing the x,y,value header");
    return g;
}

void save_grid(const std::string& path, const Grid& g) { write_text(path, format_grid(g)); }
Grid load_grid(const std::string& path) { return parse_grid(read_text(path)); }

// ---------------------------------------------------------------- binning

Binning make_binning(const TallySet& t, int bin, int margin) {
    if (bin < 1) throw ConfigError("bin must be >= 1");
    std::map<std::array<int, 2>, std::vector<int>> groups;  // keyed by (row, column)
    for (int iy = 0; iy < t.ny; ++iy)
        for (int ix = 0; ix < t.nx; ++ix) {
            if (!t.valid(ix, iy)) continue;
            cd p = t.position(ix, iy);
            if (boundary_distance(t, p) < margin) continue;
            auto k = bin_key(t, ix, iy, bin);
            groups[{k[1], k[0]}].push_back(ix + iy * t.nx);
        }
    size_t full = 0;
    for (auto& [k, v] : groups) full = std::max(full, v.size());
    Binning b;
    b.cell_bin.assign(static_cast<size_t>(t.nx) * t.ny, -1);
    for (auto& [k, v] : groups) {
        if (v.size() != full) continue;
        int id = static_cast<int>(b.centroid.size());
        cd sum = 0.0;
        for (int c : v) {
            b.cell_bin[c] = id;
            sum += t.position(c % t.nx, c / t.nx);
        }
        b.centroid.push_back(sum / static_cast<double>(v.size()));
        b.row.push_back(k[0]);
        b.cells.push_back(static_cast<int>(v.size()));
        if (k[0] == 0 && k[1] == 0) b.center = id;
    }
    if (b.center < 0) throw DomainError("the center bin is not complete; reduce bin or margin");
    // bins of one row share a height up to rounding; make it exact so rows group cleanly
    std::map<int, double> row_y;
    for (size_t i = 0; i < b.row.size(); ++i)
        if (!row_y.count(b.row[i])) row_y[b.row[i]] = b.centroid[i].imag();
    for (size_t i = 0; i < b.row.size(); ++i) b.centroid[i].imag(row_y[b.row[i]]);
    return b;
}

// ---------------------------------------------------------------- theory

Grid theory_grid(const ExperimentConfig& c) {
    validate(c);
    TallySet shape = shape_of(c);
    Binning b = make_binning(shape, c.bin, c.margin);
    const PinchEvent e = parse_event(c.event);
    const FfbcEvent f = config_ffbc(c);
    const ModelParams P = config_params(c);
    const bool rect = c.polygon == "rect";
    const RectGeometry rg = rect ? rect_from_aspect(shape.aspect()) : RectGeometry{};
    HexGeometry hg;
    if (!rect) hg = hex_geometry(hex_prevertices_regular());

    std::vector<int> pick;
    if (c.y_slices.empty()) {
        for (size_t i = 0; i < b.centroid.size(); ++i) pick.push_back(static_cast<int>(i));
    } else {
        std::set<int> rows;
        for (double ys : c.y_slices) {
            int best = b.row[b.center];
            double d = INFINITY;
            for (size_t i = 0; i < b.centroid.size(); ++i)
                if (std::abs(b.centroid[i].imag() - ys) < d) {
                    d = std::abs(b.centroid[i].imag() - ys);
                    best = b.row[i];
                }
            rows.insert(best);
        }
        for (size_t i = 0; i < b.centroid.size(); ++i)
            if (rows.count(b.row[i]) || static_cast<int>(i) == b.center) pick.push_back(static_cast<int>(i));
    }

    auto eval = [&](cd w) -> double {
        try {
            return rect ? density_rect(e, f, rg, w, P) : density_hex(e, f, hg, w + hg.center, P);
        } catch (const std::exception&) {
            return NAN;
        }
    };
    std::vector<double> val(pick.size());
    const int W = std::max(1, std::min<int>(c.workers, static_cast<int>(pick.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < W; ++w)
        pool.emplace_back([&, w] {
            for (size_t i = w; i < pick.size(); i += W) val[i] = eval(b.centroid[pick[i]]);
        });
    for (auto& th : pool) th.join();

    double norm = NAN;
    for (size_t i = 0; i < pick.size(); ++i)
        if (pick[i] == b.center) norm = val[i];
    Grid g;
    g.set("schema", "1");
    g.set("kind", "theory");
    g.set("kappa", fmt(P.kappa));
    g.set("center_x", fmt(b.centroid[b.center].real()));
    g.set("center_y", fmt(b.centroid[b.center].imag()));
    g.set("seed", std::to_string(c.seed));
    echo_config(g, c);
    for (size_t i = 0; i < pick.size(); ++i) {
        g.x.push_back(b.centroid[pick[i]].real());
        g.y.push_back(b.centroid[pick[i]].imag());
        g.value.push_back(val[i] / norm);
    }
    return g;
}

// ---------------------------------------------------------------- simulation views

Grid count_grid(const TallySet& t, const std::string& event, const ExperimentConfig& c) {
    auto it = t.grids.find(event);
    if (it == t.grids.end()) throw ConfigError("event " + event + " is not tallied by the simulation");
    Grid g;
    g.set("schema", "1");
    g.set("kind", "counts");
    g.set("event", event);
    g.set("samples", std::to_string(t.samples));
    g.set("seed", std::to_string(c.seed));
    if (c.model != "custom") g.set("p_c", fmt(config_lattice(c).p_c));
    std::string conn;
    for (auto& [k, v] : t.connectivity) conn += (conn.empty() ? "" : " ") + k + ":" + std::to_string(v);
    g.set("connectivity", conn);
    g.set("autocorrelation", fmt(t.autocorrelation));
    echo_config(g, c);
    for (int iy = 0; iy < t.ny; ++iy)
        for (int ix = 0; ix < t.nx; ++ix) {
            if (!t.valid(ix, iy)) continue;
            cd p = t.position(ix, iy);
            g.x.push_back(p.real());
            g.y.push_back(p.imag());
            g.value.push_back(static_cast<double>(it->second[ix + iy * t.nx]));
        }
    return g;
}

Grid density_grid(const Grid& counts) {
    if (counts.get("kind") != "counts") throw ConfigError("density_grid needs a count grid");
    ExperimentConfig c = config_from_meta(counts);
    TallySet shape = shape_of(c);
    Binning b = make_binning(shape, c.bin, c.margin);
    std::vector<double> sum(b.centroid.size(), 0.0);
    size_t row = 0;
    for (int iy = 0; iy < shape.ny; ++iy)
        for (int ix = 0; ix < shape.nx; ++ix) {
            if (!shape.valid(ix, iy)) continue;
            if (row >= counts.size()) throw ConfigError("count grid is shorter than its lattice");
            cd p = shape.position(ix, iy);
            if (!same_point(p.real(), counts.x[row]) || !same_point(p.imag(), counts.y[row]))
                throw ConfigError("count grid does not match its lattice");
            int id = b.cell_bin[ix + iy * shape.nx];
            if (id >= 0) sum[id] += counts.value[row];
            ++row;
        }
    if (row != counts.size()) throw ConfigError("count grid is longer than its lattice");
    Grid g;
    g.meta = counts.meta;
    g.set("kind", "density");
    g.set("center_x", fmt(b.centroid[b.center].real()));
    g.set("center_y", fmt(b.centroid[b.center].imag()));
    const double norm = sum[b.center];
    for (size_t i = 0; i < b.centroid.size(); ++i) {
        g.x.push_back(b.centroid[i].real());
        g.y.push_back(b.centroid[i].imag());
        bool ok = sum[i] >= static_cast<double>(c.min_count) && norm > 0.0;
        g.value.push_back(ok ? sum[i] / norm : NAN);
    }
    return g;
}

// ---------------------------------------------------------------- comparison

std::vector<ComparisonRow> compare_grids(const Grid& a_in, const Grid& b_in, const std::vector<double>& y_slices) {
    const Grid a = a_in.get("kind") == "counts" ? density_grid(a_in) : a_in;
    const Grid b = b_in.get("kind") == "counts" ? density_grid(b_in) : b_in;
    auto normalized = [](const Grid& g) {
        std::vector<double> v = g.value;
        std::string cx = g.get("center_x"), cy = g.get("center_y");
        if (cx.empty() || cy.empty()) return v;
        double x0 = std::stod(cx), y0 = std::stod(cy);
        for (size_t i = 0; i < g.size(); ++i)
            if (same_point(g.x[i], x0) && same_point(g.y[i], y0) && std::isfinite(g.value[i]) && g.value[i] != 0.0) {
                double n = g.value[i];
                for (auto& x : v) x /= n;
                break;
            }
        return v;
    };
    const std::vector<double> va = normalized(a), vb = normalized(b);
    auto rows_of = [](const Grid& g) {
        std::vector<double> ys;
        for (double y : g.y)
            if (std::none_of(ys.begin(), ys.end(), [&](double u) { return same_point(u, y); })) ys.push_back(y);
        return ys;
    };
    const std::vector<double> ra = rows_of(a), rb = rows_of(b);
    if (ra.empty() || rb.empty()) throw ConfigError("cannot compare an empty grid");
    std::vector<double> slices = y_slices;
    if (slices.empty()) slices = ra;
    auto nearest = [](const std::vector<double>& rows, double y) {
        return *std::min_element(rows.begin(), rows.end(),
                                 [&](double p, double q) { return std::abs(p - y) < std::abs(q - y); });
    };
    std::vector<ComparisonRow> out;
    for (double ys : slices) {
        double y = nearest(ra, ys);
        if (!same_point(y, nearest(rb, ys))) throw ConfigError("grids have incompatible extents");
        std::vector<std::pair<double, double>> pa, pb;
        for (size_t i = 0; i < a.size(); ++i)
            if (same_point(a.y[i], y)) pa.emplace_back(a.x[i], va[i]);
        for (size_t i = 0; i < b.size(); ++i)
            if (same_point(b.y[i], y)) pb.emplace_back(b.x[i], vb[i]);
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        if (pa.size() != pb.size()) throw ConfigError("grids have incompatible extents");
        std::vector<double> err;
        for (size_t i = 0; i < pa.size(); ++i) {
            if (!same_point(pa[i].first, pb[i].first)) throw ConfigError("grids have incompatible extents");
            if (std::isfinite(pa[i].second) && std::isfinite(pb[i].second)) err.push_back(pa[i].second - pb[i].second);
        }
        ComparisonRow r;
        r.y_slice = ys;
        r.y = y;
        r.points = static_cast<int>(err.size());
        if (!err.empty()) {
            for (double e : err) r.avg_error += e;
            r.avg_error /= err.size();
            for (double e : err) r.std_dev += (e - r.avg_error) * (e - r.avg_error);
            r.std_dev = std::sqrt(r.std_dev / err.size());
        } else {
            r.avg_error = r.std_dev = NAN;
        }
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------- commands

std::string event_file_tag(const std::string& event) {
    std::string s = event;
    for (char& ch : s) {
        if (ch == ':') ch = '-';
        if (ch == '+') ch = '_';
    }
    return s;
}

std::string cmd_theory(const ExperimentConfig& c) {
    Grid g = theory_grid(c);
    std::string path = (std::filesystem::path(c.out_dir) / ("theory_" + event_file_tag(c.event) + ".csv")).string();
    save_grid(path, g);
    return path;
}

std::vector<std::string> cmd_simulate(const ExperimentConfig& c) {
    validate(c);
    LatticeSpec spec = config_lattice(c);
    TallySet t;
    try {
        t = run_experiment(spec, c.samples, c.seed, c.workers);
    } catch (const DomainError& err) {
        throw ConfigError(err.what());
    }
    std::vector<std::string> paths;
    for (auto& ev : tracked_events(spec.kind)) {
        std::string path = (std::filesystem::path(c.out_dir) / ("sim_" + event_file_tag(ev) + ".csv")).string();
        save_grid(path, count_grid(t, ev, c));
        paths.push_back(path);
    }
    return paths;
}

std::string cmd_compare(const ExperimentConfig& c, const std::string& theory_file, const std::string& sim_file) {
    Grid th = load_grid(theory_file), sim = load_grid(sim_file);
    auto rows = compare_grids(th, sim, c.y_slices);
    std::string text = "# schema=1\n# kind=comparison\n# theory=" + theory_file + "\n# simulation=" + sim_file +
                       "\n# samples=" + sim.get("samples", "?") + "\ny_slice,y,avg_error,std_dev,points\n";
    for (auto& r : rows)
        text += fmt(r.y_slice) + "," + fmt(r.y) + "," + fmt(r.avg_error) + "," + fmt(r.std_dev) + "," +
                std::to_string(r.points) + "\n";
    std::string path = (std::filesystem::path(c.out_dir) / ("compare_" + event_file_tag(c.event) + ".csv")).string();
    write_text(path, text);
    return path;
}

}  // namespace pinch
