#include "pinch/theory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "pinch/quad.hpp"
#include "pinch/specfun.hpp"

namespace pinch {

namespace {

constexpr double kPi = std::numbers::pi;

double binv(double k) {
    double g = rgamma(1.0 - 4.0 / k);
    return std::tgamma(2.0 - 8.0 / k) * g * g;
}

bool last_infinite(const std::vector<double>& xs) { return std::isinf(xs.back()); }

void check_points(const std::vector<double>& xs, cd z, size_t want) {
    if (xs.size() != want) throw DomainError("expected " + std::to_string(want) + " boundary points");
    for (size_t i = 0; i + 1 < xs.size(); ++i)
        if (!(xs[i] < xs[i + 1])) throw DomainError("boundary points must be strictly increasing");
    if (!(z.imag() > 0.0)) throw DomainError("bulk point must lie in the upper half-plane");
}

// prod_{i<j} (x_j - x_i)^e over finite points
double vandermonde(const std::vector<double>& xs, double e) {
    double lg = 0.0;
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = i + 1; j < xs.size(); ++j)
            if (std::isfinite(xs[j])) lg += std::log(xs[j] - xs[i]);
    return std::exp(e * lg);
}

double bulk_product(const std::vector<double>& xs, cd z, double e) {
    double lg = 0.0;
    for (double x : xs)
        if (std::isfinite(x)) lg += std::log(std::abs(z - x));
    return std::exp(e * lg);
}

// beta^{-1} int_a^b |z-u|^{2 bz} prod |u - x_j|^{bx} du with a or b possibly infinite
double real_block(const std::vector<double>& pts, double bx, cd z, double bz, double a, double b, double k) {
    if (k <= 4.0) throw DomainError("direct real-axis quadrature needs kappa > 4");
    CoulombSpec s;
    for (double x : pts)
        if (std::isfinite(x)) s.add_real(x, bx);
    s.add_pair(z, bz);
    QuadOptions o;
    o.rel_tol = 1e-11;
    cd v;
    if (std::isinf(b))
        v = integrate_to_infinity(orient(s, INFINITY), a, +1, o);
    else if (std::isinf(a))
        v = -integrate_to_infinity(orient(s, -INFINITY), b, -1, o);
    else
        v = integrate_singular_segment(orient(s, 0.5 * (a + b)), a, b, o);
    return binv(k) * v.real();
}

// the i-th interval of the real axis for points x_1..x_M (i = 1 wraps through infinity)
double interval_block(int i, const std::vector<double>& pts, double bx, cd z, double bz, double k) {
    int M = static_cast<int>(pts.size());
    if (i < 1 || i > M) throw DomainError("block index out of range");
    if (i > 1) return real_block(pts, bx, z, bz, pts[i - 2], pts[i - 1], k);
    double v = real_block(pts, bx, z, bz, -INFINITY, pts[0], k);
    if (std::isfinite(pts[M - 1])) v += real_block(pts, bx, z, bz, pts[M - 1], INFINITY, k);
    return v;
}

std::atomic<double> g_fd_shift{0.0};

double fd_real(double a, const std::vector<double>& b, double c, const std::vector<cd>& x) {
    a += g_fd_shift.load(std::memory_order_relaxed);
    FdArgs f{a, b, c, x};
    cd v = lauricella_fd(f, a <= 0.0 || c - a <= 0.0);
    return v.real();
}

int digit(char c) {
    if (c < '1' || c > '6') throw DomainError(std::string("bad vertex label '") + c + "'");
    return c - '0';
}

void matchings(std::vector<int> pts, std::vector<Arc>& cur, std::vector<std::vector<Arc>>& out) {
    if (pts.empty()) {
        out.push_back(cur);
        return;
    }
    for (size_t k = 1; k < pts.size(); k += 2) {
        std::vector<int> inside(pts.begin() + 1, pts.begin() + k);
        std::vector<int> outside(pts.begin() + k + 1, pts.end());
        cur.push_back({pts[0], pts[k]});
        std::vector<std::vector<Arc>> in_m;
        std::vector<Arc> tmp;
        matchings(inside, tmp, in_m);
        for (auto& im : in_m) {
            auto save = cur;
            cur.insert(cur.end(), im.begin(), im.end());
            matchings(outside, cur, out);
            cur = save;
        }
        cur.pop_back();
    }
}

}  // namespace

void set_fd_perturbation(double eps) { g_fd_shift.store(eps); }

double kappa_regular(const ModelParams& p, double denominator,
                     const std::function<double(const ModelParams&)>& f) {
    if (std::abs(denominator) >= 1e-6) return f(p);
    const double d = 1e-4;
    return 0.5 * (f(from_kappa(p.kappa + d)) + f(from_kappa(p.kappa - d)));
}

CrossRatios cross_ratios(const std::vector<double>& xs, cd z) {
    int M = static_cast<int>(xs.size());
    if (M != 4 && M != 6) throw DomainError("cross ratios need 4 or 6 points");
    CrossRatios r;
    r.N = M / 2;
    const double x1 = xs[0], xa = xs[M - 2], X = xs[M - 1];
    auto ratio = [&](cd u) -> cd {
        cd tail = std::isinf(X) ? cd(1.0) : (X - xa) / (X - u);
        return (u - x1) * tail / (xa - x1);
    };
    r.eta = ratio(xs[1]).real();
    if (r.N == 3) {
        r.tau = ratio(xs[2]).real();
        r.sigma = ratio(xs[3]).real();
    }
    r.mu = ratio(z);
    r.nu = std::conj(r.mu);
    return r;
}

PinchEvent parse_event(const std::string& label) {
    PinchEvent e;
    e.label = label;
    if (label == "12:34:56+12:36:45") {
        e.N = 3;
        e.s = 1;
        e.combo = true;
        e.arcs = {{1, 2}, {3, 4}, {5, 6}};
        return e;
    }
    std::vector<std::string> parts;
    size_t start = 0;
    for (size_t i = 0; i <= label.size(); ++i) {
        if (i == label.size() || label[i] == ':') {
            parts.push_back(label.substr(start, i - start));
            start = i + 1;
        }
    }
    size_t total = 0;
    std::set<int> seen;
    for (auto& q : parts) {
        if (q.empty() || q.size() % 2) throw DomainError("malformed event label '" + label + "'");
        total += q.size();
        for (size_t i = 0; i < q.size(); i += 2) {
            int a = digit(q[i]), b = digit(q[i + 1]);
            e.arcs.push_back({a, b});
            seen.insert(a);
            seen.insert(b);
        }
    }
    if (seen.size() != total) throw DomainError("repeated vertex in event label '" + label + "'");
    e.N = static_cast<int>(total / 2);
    e.s = static_cast<int>(parts[0].size() / 2);
    for (int v = 1; v <= 2 * e.N; ++v)
        if (!seen.count(v)) throw DomainError("event label '" + label + "' skips a vertex");
    if (e.N < 2 || e.N > 3) throw DomainError("events are defined for the rectangle and the hexagon only");
    // the arcs must be non-crossing and, for s >= 2, the untouched arcs may not separate the touching ones
    auto cross = [](Arc a, Arc b) {
        auto in = [&](int v) {
            int lo = std::min(a[0], a[1]), hi = std::max(a[0], a[1]);
            return v > lo && v < hi;
        };
        return in(b[0]) != in(b[1]);
    };
    for (size_t i = 0; i < e.arcs.size(); ++i)
        for (size_t j = i + 1; j < e.arcs.size(); ++j)
            if (cross(e.arcs[i], e.arcs[j])) throw DomainError("crossing arcs in event label '" + label + "'");
    if (e.s == 1 && e.N == 3) throw DomainError("single hexagon one-pinch events are not supported; use 12:34:56+12:36:45");
    if (e.s >= 2 && e.s < e.N) {
        Arc m = e.arcs.back();
        int d = std::abs(m[0] - m[1]);
        if (d != 1 && d != 2 * e.N - 1) throw DomainError("the free arc must join adjacent vertices");
    }
    return e;
}

FfbcEvent ffbc_event(int N, int index) {
    FfbcEvent f;
    f.N = N;
    f.index = index;
    if (N == 2) {
        if (index == 1) f.exterior = {{4, 1}, {2, 3}};
        else if (index == 2) f.exterior = {{1, 2}, {3, 4}};
        else throw DomainError("rectangle ffbc index must be 1 or 2");
    } else if (N == 3) {
        switch (index) {
            case 1: f.exterior = {{3, 4}, {6, 1}, {2, 5}}; break;
            case 2: f.exterior = {{2, 3}, {4, 5}, {6, 1}}; break;
            case 3: f.exterior = {{1, 2}, {3, 4}, {5, 6}}; break;
            case 4: f.exterior = {{5, 6}, {2, 3}, {4, 1}}; break;
            case 5: f.exterior = {{1, 2}, {4, 5}, {3, 6}}; break;
            default: throw DomainError("hexagon ffbc index must be 1..5");
        }
    } else {
        throw DomainError("ffbc events are defined for N = 2, 3");
    }
    return f;
}

int loop_count(const std::vector<Arc>& interior, const FfbcEvent& f) {
    int M = 2 * f.N;
    std::vector<int> a(M + 1, 0), b(M + 1, 0);
    for (auto& e : interior) {
        a[e[0]] = e[1];
        a[e[1]] = e[0];
    }
    for (auto& e : f.exterior) {
        b[e[0]] = e[1];
        b[e[1]] = e[0];
    }
    std::vector<char> seen(M + 1, 0);
    int loops = 0;
    for (int v = 1; v <= M; ++v) {
        if (seen[v]) continue;
        ++loops;
        int u = v;
        while (!seen[u]) {
            seen[u] = 1;
            u = a[u];
            seen[u] = 1;
            u = b[u];
        }
    }
    return loops;
}

// ---------------------------------------------------------------- closed forms

double weight_pi12(double x1, double x2, cd z, const ModelParams& p) {
    const double k = p.kappa;
    if (!(x1 < x2) || !(z.imag() > 0.0)) throw DomainError("weight_pi12 needs x1 < x2 and Im z > 0");
    double v = std::pow(2.0 * z.imag(), (8.0 - k) * (8.0 - k) / (8.0 * k)) * std::pow(std::abs(z - x1), 1.0 - 8.0 / k);
    if (std::isfinite(x2)) v *= std::pow(x2 - x1, 2.0 / k) * std::pow(std::abs(z - x2), 1.0 - 8.0 / k);
    return v;
}

double weight_full_polygon(int N, const std::vector<double>& xs, cd z, const ModelParams& p) {
    if (N < 1 || N > 3) throw DomainError("weight_full_polygon is exposed for N <= 3");
    check_points(xs, z, 2 * N);
    const double k = p.kappa;
    double e = 4.0 * N + 4.0 - k;
    return std::pow(2.0 * z.imag(), e * e / (8.0 * k)) * vandermonde(xs, 2.0 / k) *
           bulk_product(xs, z, 1.0 - 4.0 * (N + 1) / k);
}

double weight_full_polygon_covariant(int N, const std::vector<double>& xs, cd z, const ModelParams& p) {
    check_points(xs, z, 2 * N);
    const double k = p.kappa;
    CrossRatios r = cross_ratios(xs, z);
    const double y = 2.0 * z.imag(), dmn = 2.0 * r.mu.imag();
    auto gap = [&](int i) { return std::isfinite(xs[i]) ? xs[i] - xs[i - 1] : 1.0; };
    const double eta = r.eta, tau = r.tau, sig = r.sigma;
    const cd mu = r.mu;
    if (N == 2) {
        double q = std::norm(mu) * std::norm(eta - mu) * std::norm(1.0 - mu);
        return std::pow(gap(1) * gap(3), 1.0 - 6.0 / k) * std::pow(y, k / 8.0 - 6.0 / k - 1.0) *
               std::pow(eta, 8.0 / k - 1.0) * std::pow(1.0 - eta, 2.0 / k) * std::pow(dmn, 24.0 / k - 2.0) *
               std::pow(q, 0.5 - 6.0 / k);
    }
    if (N == 3) {
        double q = std::norm(mu) * std::norm(eta - mu) * std::norm(tau - mu) * std::norm(sig - mu) * std::norm(1.0 - mu);
        double t = tau * sig * (tau - eta) * (sig - eta) * (1.0 - eta) * (1.0 - tau) * (1.0 - sig);
        return std::pow(gap(1) * gap(3) * gap(5), 1.0 - 6.0 / k) * std::pow(y, k / 8.0 - 16.0 / k - 1.0) *
               std::pow(eta * (sig - tau), 8.0 / k - 1.0) * std::pow(t, 2.0 / k) * std::pow(dmn, 48.0 / k - 3.0) *
               std::pow(q, 0.5 - 8.0 / k);
    }
    throw DomainError("covariant form available for N = 2, 3");
}

// ---------------------------------------------------------------- rectangle

double rect_block_G(int i, const CrossRatios& r, const ModelParams& p) {
    const double k = p.kappa;
    const double a = 1.0 - 4.0 / k, c = 2.0 - 8.0 / k;
    const std::vector<double> b{4.0 / k, 1.0 - 8.0 / k, 1.0 - 8.0 / k};
    const double eta = r.eta;
    const cd mu = r.mu, nu = r.nu;
    const double dmn = 2.0 * mu.imag();
    const double q = std::norm(mu) * std::norm(eta - mu) * std::norm(1.0 - mu);
    const double h = 4.0 / k - 0.5;
    switch (i) {
        case 1:
            return std::pow(eta * dmn, 8.0 / k - 1.0) * std::pow(1.0 - eta, 2.0 / k) / std::pow(q, h) *
                   fd_real(a, b, c, {1.0 - eta, 1.0 - mu, 1.0 - nu});
        case 2:
            return std::pow(std::norm(mu) * dmn * dmn, h) * std::pow(1.0 - eta, 2.0 / k) /
                   std::pow(std::norm(eta - mu) * std::norm(1.0 - mu), h) * fd_real(a, b, c, {eta, eta / mu, eta / nu});
        case 3:
            return std::pow(eta * eta * std::norm(1.0 - mu) * dmn * dmn, h) /
                   (std::pow(std::norm(mu) * std::norm(eta - mu), h) * std::pow(1.0 - eta, 6.0 / k - 1.0)) *
                   fd_real(a, b, c, {1.0 - eta, (1.0 - eta) / (1.0 - mu), (1.0 - eta) / (1.0 - nu)});
        case 4:
            return std::pow(eta * dmn, 8.0 / k - 1.0) * std::pow(1.0 - eta, 2.0 / k) / std::pow(q, h) *
                   fd_real(a, b, c, {eta, mu, nu});
        default: throw DomainError("rect_block_G index must be 1..4");
    }
}

double rect_block_G_direct(int i, const CrossRatios& r, const ModelParams& p) {
    const double k = p.kappa;
    const double eta = r.eta;
    const cd mu = r.mu;
    double pre = std::pow(eta, 8.0 / k - 1.0) * std::pow(1.0 - eta, 2.0 / k) *
                 std::pow(2.0 * mu.imag(), 8.0 / k - 1.0) *
                 std::pow(std::abs(mu * (mu - eta) * (mu - 1.0)), 1.0 - 8.0 / k);
    return pre * interval_block(i, {0.0, eta, 1.0, INFINITY}, -4.0 / k, mu, 8.0 / k - 1.0, k);
}

double rect_J(const std::vector<double>& xs, cd z, const ModelParams& p) {
    check_points(xs, z, 4);
    const double k = p.kappa;
    return std::pow(2.0 * z.imag(), k / 8.0 + 8.0 / k - 2.0) * vandermonde(xs, 2.0 / k) *
           bulk_product(xs, z, 1.0 - 8.0 / k);
}

double rect_I(int i, const std::vector<double>& xs, cd z, const ModelParams& p) {
    check_points(xs, z, 4);
    return interval_block(i, xs, -4.0 / p.kappa, z, 8.0 / p.kappa - 1.0, p.kappa);
}

static double rect_one_pp_core(const PinchEvent& e, const std::vector<double>& xs, cd z, const ModelParams& p) {
    const double k = p.kappa, n = p.fugacity_n;
    CrossRatios r = cross_ratios(xs, z);
    double G[5];
    for (int q = 1; q <= 4; ++q) G[q] = rect_block_G(q, r, p);
    int i = e.arcs[0][0], j = e.arcs[0][1], kk = e.arcs[1][0], l = e.arcs[1][1];
    double comb = (2.0 * G[j] + (n * n - 2.0) * G[l] - n * G[i] - n * G[kk]) / (n * n - 4.0);
    double g34 = std::isfinite(xs[3]) ? xs[3] - xs[2] : 1.0;
    return std::pow((xs[1] - xs[0]) * g34, 1.0 - 6.0 / k) * std::pow(2.0 * z.imag(), k / 8.0 - 1.0) * comb;
}

double rect_one_pp_weight(const PinchEvent& e, const std::vector<double>& xs, cd z, const ModelParams& p) {
    if (e.N != 2 || e.s != 1) throw DomainError("rect_one_pp_weight needs a rectangle one-pinch label");
    check_points(xs, z, 4);
    double n = p.fugacity_n;
    return kappa_regular(p, n * n - 4.0, [&](const ModelParams& q) { return rect_one_pp_core(e, xs, z, q); });
}

double rect_one_pp_weight_contour(const PinchEvent& e, const std::vector<double>& xs, cd z, const ModelParams& p) {
    if (e.N != 2 || e.s != 1) throw DomainError("rect_one_pp_weight_contour needs a rectangle one-pinch label");
    check_points(xs, z, 4);
    if (last_infinite(xs)) throw DomainError("contour form needs finite points");
    const double k = p.kappa, n = p.fugacity_n;
    int a = std::min(e.arcs[1][0], e.arcs[1][1]), b = std::max(e.arcs[1][0], e.arcs[1][1]);
    if (b - a != 1) throw DomainError("contour form needs a finite crossing interval");
    CoulombSpec s;
    for (double x : xs) s.add_real(x, -4.0 / k);
    s.add_pair(z, 8.0 / k - 1.0);
    QuadOptions o;
    o.rel_tol = 1e-11;
    cd I = binv(k) * integrate_contour(s, ContourSpec::polyline(z, xs[a - 1], xs[b - 1]), o);
    cd v = n / (cd(0.0, 1.0) * 2.0 * std::sin(4.0 * kPi / k)) * rect_J(xs, z, p) * I;
    return v.real();
}

// ---------------------------------------------------------------- hexagon two-pinch

static double hex_prefactor(const CrossRatios& r, double k) {
    const double eta = r.eta, tau = r.tau, sig = r.sigma;
    const cd mu = r.mu;
    double t = tau * sig * (tau - eta) * (sig - eta) * (1.0 - eta) * (1.0 - tau) * (1.0 - sig);
    double q = std::norm(mu) * std::norm(mu - eta) * std::norm(mu - tau) * std::norm(mu - sig) * std::norm(mu - 1.0);
    return std::pow(eta * (sig - tau), 8.0 / k - 1.0) * std::pow(t, 2.0 / k) *
           std::pow(2.0 * mu.imag(), 24.0 / k - 2.0) * std::pow(q, 0.5 - 6.0 / k);
}

static double hex_Kprime_fd(int i, const CrossRatios& r, double k) {
    const double a = 1.0 - 4.0 / k, c = 2.0 - 8.0 / k;
    const std::vector<double> b{4.0 / k, 4.0 / k, 4.0 / k, 1.0 - 12.0 / k, 1.0 - 12.0 / k};
    const double e = r.eta, t = r.tau, s = r.sigma;
    const cd mu = r.mu, nu = r.nu;
    const double g = 12.0 / k - 1.0;
    auto pw = [](double x, double y) { return std::pow(x, y); };
    switch (i) {
        case 1: return fd_real(a, b, c, {1.0 - e, 1.0 - t, 1.0 - s, 1.0 - mu, 1.0 - nu});
        case 2:
            return pw(e, 1.0 - 8.0 / k) * pw(t, -4.0 / k) * pw(s, -4.0 / k) * pw(std::norm(mu), g) *
                   fd_real(a, b, c, {e, e / t, e / s, e / mu, e / nu});
        case 3:
            return pw(e, 1.0 - 8.0 / k) * pw(t, 4.0 / k - 1.0) * pw(t - e, 1.0 - 8.0 / k) * pw(s - e, -4.0 / k) *
                   pw(1.0 - e, -4.0 / k) * pw(std::norm(mu - e), g) *
                   fd_real(a, b, c,
                           {1.0 - e / t, s * (t - e) / (t * (s - e)), (t - e) / (t * (1.0 - e)),
                            mu * (t - e) / (t * (mu - e)), nu * (t - e) / (t * (nu - e))});
        case 4: {
            double q = (s - t) / (s - e);
            return pw(t, -4.0 / k) * pw(t - e, 1.0 - 8.0 / k) * pw(s - e, 4.0 / k - 1.0) * pw(s - t, 1.0 - 8.0 / k) *
                   pw(1.0 - t, -4.0 / k) * pw(std::norm(mu - t), g) *
                   fd_real(a, b, c,
                           {q, e * q / t, (1.0 - e) * q / (1.0 - t), (mu - e) * q / (mu - t),
                            (nu - e) * q / (nu - t)});
        }
        case 5:
            return pw(1.0 - e, -4.0 / k) * pw(1.0 - t, -4.0 / k) * pw(1.0 - s, 1.0 - 8.0 / k) *
                   pw(std::norm(1.0 - mu), g) *
                   fd_real(a, b, c,
                           {1.0 - s, (1.0 - s) / (1.0 - e), (1.0 - s) / (1.0 - t), (1.0 - s) / (1.0 - mu),
                            (1.0 - s) / (1.0 - nu)});
        case 6: return fd_real(a, b, c, {e, t, s, mu, nu});
        default: throw DomainError("hex block index must be 1..6");
    }
}

static double hex_Kprime_direct(int i, const CrossRatios& r, double k) {
    return interval_block(i, {0.0, r.eta, r.tau, r.sigma, 1.0, INFINITY}, -4.0 / k, r.mu, 12.0 / k - 1.0, k);
}

double hex_block_H(int i, const CrossRatios& r, const ModelParams& p) {
    if (r.N != 3) throw DomainError("hex_block_H needs hexagon cross ratios");
    return hex_prefactor(r, p.kappa) * hex_Kprime_fd(i, r, p.kappa);
}

double hex_block_H_direct(int i, const CrossRatios& r, const ModelParams& p) {
    if (r.N != 3) throw DomainError("hex_block_H_direct needs hexagon cross ratios");
    return hex_prefactor(r, p.kappa) * hex_Kprime_direct(i, r, p.kappa);
}

double hex_K_calibration(int i, const CrossRatios& r, const ModelParams& p) {
    return hex_Kprime_direct(i, r, p.kappa) / hex_Kprime_fd(i, r, p.kappa);
}

double hex_L(const std::vector<double>& xs, cd z, const ModelParams& p) {
    check_points(xs, z, 6);
    const double k = p.kappa;
    return std::pow(2.0 * z.imag(), k / 8.0 + 18.0 / k - 3.0) * vandermonde(xs, 2.0 / k) *
           bulk_product(xs, z, 1.0 - 12.0 / k);
}

double hex_K(int i, const std::vector<double>& xs, cd z, const ModelParams& p) {
    check_points(xs, z, 6);
    return interval_block(i, xs, -4.0 / p.kappa, z, 12.0 / p.kappa - 1.0, p.kappa);
}

static double hex_two_pp_core(const PinchEvent& e, const std::vector<double>& xs, cd z, const ModelParams& p) {
    const double k = p.kappa, n = p.fugacity_n;
    CrossRatios r = cross_ratios(xs, z);
    double H[7];
    for (int q = 1; q <= 6; ++q) H[q] = hex_block_H(q, r, p);
    int i = e.arcs[0][0], j = e.arcs[0][1], kk = e.arcs[1][0], l = e.arcs[1][1], m = e.arcs[2][0],
        nn = e.arcs[2][1];
    double num = n * (2.0 - n * n) * (H[i] + H[m]) + n * n * H[j] - 2.0 * n * H[kk] + n * n * H[l] +
                 n * n * (n * n - 3.0) * H[nn];
    double comb = num / ((n * n - 4.0) * (n * n - 1.0));
    double g56 = std::isfinite(xs[5]) ? xs[5] - xs[4] : 1.0;
    return std::pow((xs[1] - xs[0]) * (xs[3] - xs[2]) * g56, 1.0 - 6.0 / k) *
           std::pow(2.0 * z.imag(), k / 8.0 - 6.0 / k - 1.0) * comb;
}

double hex_two_pp_weight(const PinchEvent& e, const std::vector<double>& xs, cd z, const ModelParams& p) {
    if (e.N != 3 || e.s != 2) throw DomainError("hex_two_pp_weight needs a hexagon two-pinch label");
    check_points(xs, z, 6);
    double n = p.fugacity_n;
    return kappa_regular(p, (n * n - 4.0) * (n * n - 1.0),
                         [&](const ModelParams& q) { return hex_two_pp_core(e, xs, z, q); });
}

// ---------------------------------------------------------------- hexagon one-pinch combination

cd hex_one_pp_integral(const std::vector<double>& xs, cd z, const ModelParams& p, bool deformed) {
    check_points(xs, z, 6);
    const double k = p.kappa;
    if (k <= 4.0) throw DomainError("the one-pinch double integral is implemented for kappa > 4");
    CoulombSpec s;
    for (double x : xs)
        if (std::isfinite(x)) s.add_real(x, -4.0 / k);
    s.add_pair(z, 8.0 / k - 1.0);
    double cross;
    if (!deformed)
        cross = 0.5 * (xs[2] + xs[3]);
    else if (std::isfinite(xs[5]))
        cross = 0.5 * (xs[4] + xs[5]);
    else
        cross = xs[4] + std::max(1.0, std::abs(z.real() - xs[4]));
    QuadOptions outer, inner;
    outer.rel_tol = 1e-9;
    inner.rel_tol = 1e-11;
    double bi = binv(k);
    return bi * bi *
           double_integral(s, 8.0 / k, ContourSpec::polyline_at(z, cross), ContourSpec::segment(xs[3], xs[4]), outer,
                           inner);
}

double hex_one_pp_combo(const std::vector<double>& xs, cd z, const ModelParams& p, bool deformed) {
    const double k = p.kappa, n = p.fugacity_n;
    cd I = hex_one_pp_integral(xs, z, p, deformed);
    double M = std::pow(2.0 * z.imag(), k / 8.0 + 8.0 / k - 2.0) * vandermonde(xs, 2.0 / k) *
               bulk_product(xs, z, 1.0 - 8.0 / k);
    cd v = n / (cd(0.0, 1.0) * std::sqrt(4.0 - n * n)) * M * I;
    return v.real();
}

// ---------------------------------------------------------------- assembly

double pinch_weight(const PinchEvent& e, const std::vector<double>& xs, cd z, const ModelParams& p) {
    if (e.combo) return hex_one_pp_combo(xs, z, p);
    if (e.s == e.N) return weight_full_polygon(e.N, xs, z, p);
    if (e.N == 2 && e.s == 1) return rect_one_pp_weight(e, xs, z, p);
    if (e.N == 3 && e.s == 2) return hex_two_pp_weight(e, xs, z, p);
    throw DomainError("no weight formula for event '" + e.label + "'");
}

double universal_partition(const PinchEvent& e, const FfbcEvent& f, double weight, const ModelParams& p) {
    if (e.N != f.N) throw DomainError("event and ffbc belong to different polygons");
    const double n = p.fugacity_n;
    if (e.combo) {
        if (f.index != 3) throw DomainError("the hexagon one-pinch combination is defined for independent wiring");
        return n * n * n * weight;
    }
    std::vector<int> touched;
    for (int a = 0; a < e.s; ++a) {
        touched.push_back(e.arcs[a][0]);
        touched.push_back(e.arcs[a][1]);
    }
    std::sort(touched.begin(), touched.end());
    std::vector<Arc> rest(e.arcs.begin() + e.s, e.arcs.end());
    std::vector<std::vector<Arc>> res;
    std::vector<Arc> cur;
    if (e.s == 1)
        res.push_back({e.arcs[0]});
    else
        matchings(touched, cur, res);
    double sum = 0.0;
    for (auto& r : res) {
        std::vector<Arc> all = r;
        all.insert(all.end(), rest.begin(), rest.end());
        sum += std::pow(n, loop_count(all, f));
    }
    return sum * weight;
}

double partition_ffbc_rect(double m, int ffbc, const ModelParams& p) {
    if (!(m > 0.0 && m < 1.0)) throw DomainError("modulus must lie in (0,1)");
    const double k = p.kappa, n = p.fugacity_n;
    double arg = ffbc == 1 ? 1.0 - m : ffbc == 2 ? m : NAN;
    if (std::isnan(arg)) throw DomainError("rectangle ffbc index must be 1 or 2");
    double F = gauss_2f1(2.0 - 12.0 / k, 1.0 - 4.0 / k, 2.0 - 8.0 / k, arg);
    return n * n * std::pow(ellip_k(1.0 - m), 24.0 / k - 4.0) * F;
}

static double prevertex_product(double m1, double m2, double m3) {
    return m1 * m2 * m3 * (m2 - m1) * (m3 - m1) * (m3 - m2) * (1.0 - m1) * (1.0 - m2) * (1.0 - m3);
}

double partition_ffbc_hex(double m1, double m2, double m3, int ffbc, const ModelParams& p) {
    if (!(0.0 < m1 && m1 < m2 && m2 < m3 && m3 < 1.0)) throw DomainError("prevertices must satisfy 0<m1<m2<m3<1");
    const double k = p.kappa, n = p.fugacity_n;
    if (k <= 4.0) throw DomainError("hexagon partition functions are implemented for kappa > 4");
    FfbcEvent f = ffbc_event(3, ffbc);
    const double pos[6] = {0.0, m1, m2, m3, 1.0, INFINITY};
    std::vector<std::array<double, 2>> seg;
    for (auto& a : f.exterior) {
        if (a[0] == 6 || a[1] == 6) continue;
        double lo = std::min(pos[a[0] - 1], pos[a[1] - 1]), hi = std::max(pos[a[0] - 1], pos[a[1] - 1]);
        seg.push_back({lo, hi});
    }
    std::sort(seg.begin(), seg.end());
    if (seg.size() != 2 || seg[0][1] > seg[1][0])
        throw DomainError("ffbc " + std::to_string(ffbc) + " has nested exterior arcs; not supported");
    CoulombSpec s;
    for (int i = 0; i < 5; ++i) s.add_real(pos[i], -4.0 / k);
    QuadOptions outer, inner;
    outer.rel_tol = 1e-10;
    inner.rel_tol = 1e-11;
    cd I = double_integral(s, 8.0 / k, ContourSpec::segment(seg[0][0], seg[0][1]),
                           ContourSpec::segment(seg[1][0], seg[1][1]), outer, inner);
    double bi = binv(k);
    return std::pow(prevertex_product(m1, m2, m3), (10.0 - k) / (2.0 * k)) * n * n * n * bi * bi * I.real();
}

double density_rect(const PinchEvent& e, const FfbcEvent& f, const RectGeometry& g, cd w, const ModelParams& p) {
    if (e.N != 2 || f.N != 2) throw DomainError("density_rect needs rectangle events");
    if (!(w.real() > 0.0 && w.real() < g.aspect_R && w.imag() > 0.0 && w.imag() < 1.0))
        throw DomainError("point is not strictly inside the rectangle");
    const double k = p.kappa, m = g.modulus_m;
    cd z = rect_inverse(w, g);
    if (!(z.imag() > 0.0)) throw DomainError("point too close to the boundary to evaluate");
    double jac = rect_inverse_jacobian(w, g);
    double weight = pinch_weight(e, {0.0, m, 1.0, INFINITY}, z, p);
    double Y = universal_partition(e, f, weight, p);
    double cov = std::pow(jac, 2.0 * p.big_theta[e.s]) * std::pow(m * (1.0 - m), 6.0 / k - 1.0) *
                 std::pow(g.Kprime, 24.0 / k - 4.0);
    return cov * Y / partition_ffbc_rect(m, f.index, p);
}

double density_hex(const PinchEvent& e, const FfbcEvent& f, const HexGeometry& g, cd w, const ModelParams& p) {
    if (e.N != 3 || f.N != 3) throw DomainError("density_hex needs hexagon events");
    if (!hex_contains(w, g, 1e-9)) throw DomainError("point is not strictly inside the hexagon");
    const double k = p.kappa;
    const double m1 = g.prevertices[0], m2 = g.prevertices[1], m3 = g.prevertices[2];
    cd z = hex_inverse(w, g);
    if (!(z.imag() > 0.0)) throw DomainError("point too close to the boundary to evaluate");
    double dzdw = 1.0 / std::abs(hex_derivative(z, g));
    double weight = pinch_weight(e, {0.0, m1, m2, m3, 1.0, INFINITY}, z, p);
    double Y = universal_partition(e, f, weight, p);
    double cov = std::pow(dzdw, 2.0 * p.big_theta[e.s]) * std::pow(prevertex_product(m1, m2, m3), (6.0 - k) / (2.0 * k));
    return cov * Y / partition_ffbc_hex(m1, m2, m3, f.index, p);
}

// ---------------------------------------------------------------- PDE residuals

namespace {

struct Probe {
    const WeightEvaluator& w;
    std::vector<double> xs;
    cd z;
    double h;

    double at(int idx, double dx) const {
        std::vector<double> y = xs;
        cd zz = z;
        if (idx < static_cast<int>(xs.size()))
            y[idx] += dx;
        else if (idx == static_cast<int>(xs.size()))
            zz += dx;
        else
            zz += cd(0.0, dx);
        return w.f(y, zz);
    }
    double d1(int idx) const {
        auto c = [&](double s) { return (at(idx, s) - at(idx, -s)) / (2.0 * s); };
        return (4.0 * c(h / 2) - c(h)) / 3.0;
    }
    double d2(int idx, double f0) const {
        auto c = [&](double s) { return (at(idx, s) - 2.0 * f0 + at(idx, -s)) / (s * s); };
        return (4.0 * c(h / 2) - c(h)) / 3.0;
    }
};

double local_scale(const std::vector<double>& xs, cd z) {
    double s = z.imag();
    for (size_t i = 0; i < xs.size(); ++i) {
        s = std::min(s, std::abs(z - xs[i]));
        for (size_t j = i + 1; j < xs.size(); ++j) s = std::min(s, std::abs(xs[j] - xs[i]));
    }
    return s;
}

double ratio(const std::vector<double>& terms) {
    double sum = 0.0, mag = 0.0;
    for (double t : terms) {
        sum += t;
        mag += std::abs(t);
    }
    return mag > 0.0 ? std::abs(sum) / mag : 0.0;
}

}  // namespace

double verify_null_state(const WeightEvaluator& w, const std::vector<double>& xs, cd z, int i) {
    int M = static_cast<int>(xs.size());
    if (i < 1 || i > M) throw DomainError("null-state index out of range");
    for (double x : xs)
        if (!std::isfinite(x)) throw DomainError("null-state check needs finite points");
    const ModelParams& p = w.params;
    Probe pr{w, xs, z, 1e-2 * local_scale(xs, z)};
    double f0 = w.f(xs, z);
    int a = i - 1;
    std::vector<double> terms;
    terms.push_back(p.kappa / 4.0 * pr.d2(a, f0));
    for (int j = 0; j < M; ++j) {
        if (j == a) continue;
        double d = xs[j] - xs[a];
        terms.push_back(pr.d1(j) / d);
        terms.push_back(-p.theta1 * f0 / (d * d));
    }
    cd dz = 0.5 * cd(pr.d1(M), -pr.d1(M + 1));
    cd q = z - xs[a];
    terms.push_back(2.0 * (dz / q).real());
    terms.push_back(-2.0 * p.big_theta[w.s] * (1.0 / (q * q)).real() * f0);
    return ratio(terms);
}

std::array<double, 3> verify_ward(const WeightEvaluator& w, const std::vector<double>& xs, cd z) {
    int M = static_cast<int>(xs.size());
    const ModelParams& p = w.params;
    Probe pr{w, xs, z, 1e-2 * local_scale(xs, z)};
    double f0 = w.f(xs, z);
    std::vector<double> dx(M);
    for (int j = 0; j < M; ++j) dx[j] = pr.d1(j);
    double fx = pr.d1(M), fy = pr.d1(M + 1);
    const double x = z.real(), y = z.imag(), Th = p.big_theta[w.s];
    std::vector<double> t1, t2, t3;
    for (int j = 0; j < M; ++j) {
        t1.push_back(dx[j]);
        t2.push_back(xs[j] * dx[j]);
        t2.push_back(p.theta1 * f0);
        t3.push_back(xs[j] * xs[j] * dx[j]);
        t3.push_back(2.0 * p.theta1 * xs[j] * f0);
    }
    t1.push_back(fx);
    t2.push_back(x * fx);
    t2.push_back(y * fy);
    t2.push_back(2.0 * Th * f0);
    t3.push_back((x * x - y * y) * fx);
    t3.push_back(2.0 * x * y * fy);
    t3.push_back(4.0 * Th * x * f0);
    return {ratio(t1), ratio(t2), ratio(t3)};
}

}  // namespace pinch
