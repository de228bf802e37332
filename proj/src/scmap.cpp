#include "pinch/scmap.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "pinch/quad.hpp"
#include "pinch/specfun.hpp"

namespace pinch {

RectGeometry rect_from_modulus(double m) {
    if (!(m > 0.0 && m < 1.0)) throw MapError("rectangle parameter m must lie in (0,1)");
    RectGeometry g;
    g.modulus_m = m;
    g.K = ellip_k(m);
    g.Kprime = ellip_k(1.0 - m);
    g.aspect_R = g.K / g.Kprime;
    return g;
}

RectGeometry rect_from_aspect(double R) {
    if (!(R > 0.0)) throw MapError("aspect ratio must be positive");
    // K(m)/K(1-m) increases with m; solve in t = log(m/(1-m)) for resolution near both ends
    double lo = -60.0, hi = 60.0;
    for (int it = 0; it < 200; ++it) {
        double t = 0.5 * (lo + hi);
        double m = 1.0 / (1.0 + std::exp(-t));
        double r = ellip_k(m) / ellip_k(1.0 - m);
        (r < R ? lo : hi) = t;
        if (hi - lo < 1e-15) break;
    }
    double t = 0.5 * (lo + hi);
    RectGeometry g = rect_from_modulus(1.0 / (1.0 + std::exp(-t)));
    g.aspect_R = R;
    return g;
}

cd rect_inverse(cd w, const RectGeometry& g) {
    const double eps = 1e-12;
    if (w.real() < -eps || w.real() > g.aspect_R + eps || w.imag() < -eps || w.imag() > 1.0 + eps)
        throw MapError("point outside the rectangle");
    auto j = jacobi_elliptic(w * g.Kprime, g.modulus_m);
    return g.modulus_m * j.sn * j.sn;
}

double rect_inverse_jacobian(cd w, const RectGeometry& g) {
    auto j = jacobi_elliptic(w * g.Kprime, g.modulus_m);
    return std::abs(2.0 * g.modulus_m * g.Kprime * j.sn * j.cn * j.dn);
}

cd rect_forward(cd z, const RectGeometry& g) {
    if (!(z.imag() >= 0.0)) throw MapError("rect_forward needs the closed upper half-plane");
    cd best;
    double bd = INFINITY;
    for (int i = 1; i < 24; ++i)
        for (int k = 1; k < 24; ++k) {
            cd w(g.aspect_R * i / 24.0, k / 24.0);
            double d = std::abs(rect_inverse(w, g) - z);
            if (d < bd) {
                bd = d;
                best = w;
            }
        }
    cd w = best;
    for (int it = 0; it < 100; ++it) {
        auto j = jacobi_elliptic(w * g.Kprime, g.modulus_m);
        cd f = g.modulus_m * j.sn * j.sn - z;
        cd df = 2.0 * g.modulus_m * g.Kprime * j.sn * j.cn * j.dn;
        cd step = f / df;
        double lam = 1.0;
        cd wn;
        for (int h = 0; h < 40; ++h) {
            wn = w - lam * step;
            if (wn.real() >= 0 && wn.real() <= g.aspect_R && wn.imag() >= 0 && wn.imag() <= 1.0) break;
            lam *= 0.5;
        }
        w = wn;
        if (std::abs(lam * step) < 1e-15 * (1.0 + std::abs(w))) break;
    }
    return w;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kThird = 1.0 / 3.0;

cd sc_integrand(cd u, const std::array<double, 3>& m) {
    cd v = std::pow(u, -kThird);
    for (double p : m) v *= principal_pow(p - u, -kThird);
    v *= principal_pow(1.0 - u, -kThird);
    return (2.0 / 3.0) * v;
}

BranchedIntegrand sc_branched(const std::array<double, 3>& m) {
    BranchedIntegrand f;
    f.factors.push_back(u_minus_p(0.0, -kThird));
    for (double p : m) f.factors.push_back(p_minus_u(p, -kThird));
    f.factors.push_back(p_minus_u(1.0, -kThird));
    return f;
}

QuadOptions tight() {
    QuadOptions o;
    o.rel_tol = 1e-13;
    return o;
}

// unscaled images of 0, m1, m2, m3, 1, infinity
std::array<cd, 6> raw_vertices(const std::array<double, 3>& m) {
    BranchedIntegrand f = sc_branched(m);
    std::array<double, 5> p{0.0, m[0], m[1], m[2], 1.0};
    std::array<cd, 6> w{};
    for (int k = 1; k < 5; ++k)
        w[k] = w[k - 1] + (2.0 / 3.0) * integrate_singular_segment(f, cd(p[k - 1]), cd(p[k]), tight());
    w[5] = w[4] + (2.0 / 3.0) * integrate_to_infinity(f, 1.0, +1, tight());
    return w;
}

void check_prevertices(const std::array<double, 3>& m) {
    if (!(0.0 < m[0] && m[0] < m[1] && m[1] < m[2] && m[2] < 1.0))
        throw MapError("prevertices must satisfy 0 < m1 < m2 < m3 < 1");
}

}  // namespace

std::array<double, 3> hex_prevertices_regular() { return {1.0 / 3.0, 0.5, 2.0 / 3.0}; }

std::array<double, 6> hex_side_lengths(const std::array<double, 3>& m) {
    check_prevertices(m);
    auto w = raw_vertices(m);
    std::array<double, 6> L{};
    for (int k = 0; k < 6; ++k) L[k] = std::abs(w[(k + 1) % 6] - w[k]);
    return L;
}

std::array<double, 3> hex_prevertices_solve(const std::array<double, 5>& r) {
    for (double x : r)
        if (!(x > 1e-9)) throw MapError("side-length ratios must be positive");
    // equiangular closure: L1 - L4 = L5 - L2 = L3 - L6
    double d1 = 1.0 - r[2], d2 = r[3] - r[0], d3 = r[1] - r[4];
    if (std::abs(d1 - d2) > 1e-8 * (1 + r[3]) || std::abs(d1 - d3) > 1e-8 * (1 + r[1]))
        throw MapError("side-length ratios do not close an equiangular hexagon");
    auto to_m = [](const Eigen::Vector3d& th) {
        double e[4] = {1.0, std::exp(th[0]), std::exp(th[1]), std::exp(th[2])};
        double s = e[0] + e[1] + e[2] + e[3];
        std::array<double, 3> m{e[0] / s, (e[0] + e[1]) / s, (e[0] + e[1] + e[2]) / s};
        return m;
    };
    auto resid = [&](const Eigen::Vector3d& th) {
        auto L = hex_side_lengths(to_m(th));
        Eigen::Vector3d F;
        for (int k = 0; k < 3; ++k) F[k] = std::log(L[k + 1] / L[0]) - std::log(r[k]);
        return F;
    };
    Eigen::Vector3d th = Eigen::Vector3d::Zero();
    auto m0 = std::array<double, 3>{0.2, 0.5, 0.8};
    th << std::log((m0[1] - m0[0]) / m0[0]), std::log((m0[2] - m0[1]) / m0[0]), std::log((1 - m0[2]) / m0[0]);
    Eigen::Vector3d F = resid(th);
    for (int it = 0; it < 100; ++it) {
        if (F.norm() < 1e-12) return to_m(th);
        Eigen::Matrix3d J;
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d tp = th, tm = th;
            tp[j] += 1e-6;
            tm[j] -= 1e-6;
            J.col(j) = (resid(tp) - resid(tm)) / 2e-6;
        }
        Eigen::Vector3d step = J.fullPivLu().solve(-F);
        double lam = 1.0;
        bool ok = false;
        for (int h = 0; h < 30; ++h) {
            Eigen::Vector3d tn = th + lam * step;
            Eigen::Vector3d Fn = resid(tn);
            if (Fn.norm() < F.norm()) {
                th = tn;
                F = Fn;
                ok = true;
                break;
            }
            lam *= 0.5;
        }
        if (!ok) break;
    }
    if (F.norm() < 1e-9) return to_m(th);
    throw MapError("prevertex solve did not converge; residual " + std::to_string(F.norm()));
}

struct HexSeedGrid {
    std::vector<cd> z, w;
    double x0, y0, cell;
    int nx, ny;
    std::vector<std::vector<int>> bucket;
};

namespace {

cd forward_unscaled(cd z, const std::array<double, 3>& m, const std::array<cd, 6>& W) {
    std::array<double, 5> p{0.0, m[0], m[1], m[2], 1.0};
    BranchedIntegrand f = sc_branched(m);
    if (std::abs(z) > 4.0) {
        // from infinity along the ray through z
        std::function<cd(double)> g = [&](double s) {
            double om = 1.0 - s;
            cd u = z / om;
            return sc_integrand(u, m) * z / (om * om) * std::pow(om, kThird);
        };
        return W[5] - integrate_weighted(g, 0.0, -kThird, tight());
    }
    int best = 0;
    for (int k = 1; k < 5; ++k)
        if (std::abs(z - p[k]) < std::abs(z - p[best])) best = k;
    if (z == cd(p[best])) return W[best];
    return W[best] + (2.0 / 3.0) * integrate_singular_segment(f, cd(p[best]), z, tight());
}

cd local_step(cd a, cd b, const std::array<double, 3>& m) {
    std::function<cd(double)> g = [&](double s) { return sc_integrand(a + (b - a) * s, m); };
    QuadOptions o;
    o.rel_tol = 1e-13;
    return (b - a) * integrate_weighted(g, 0.0, 0.0, o);
}

}  // namespace

HexGeometry hex_geometry(const std::array<double, 3>& m) {
    check_prevertices(m);
    HexGeometry g;
    g.prevertices = m;
    auto W = raw_vertices(m);
    g.scale = 1.0 / std::abs(W[1]);
    cd c = 0.0;
    for (int k = 0; k < 6; ++k) {
        g.vertex[k] = g.scale * W[k];
        c += g.vertex[k];
    }
    g.center = c / 6.0;
    // preimage of the center by Newton on the direct forward map
    cd z(0.5, 0.3);
    for (int it = 0; it < 60; ++it) {
        cd fz = g.scale * forward_unscaled(z, m, W);
        cd step = (fz - g.center) / (g.scale * sc_integrand(z, m));
        cd zn = z - step;
        while (zn.imag() <= 0.0) {
            step *= 0.5;
            zn = z - step;
        }
        z = zn;
        if (std::abs(step) < 1e-15) break;
    }
    g.center_preimage = z;

    auto grid = std::make_shared<HexSeedGrid>();
    const int NR = 120, NA = 256;
    const cd z0 = z, z0b = std::conj(z);
    const cd w0 = g.center;
    for (int a = 0; a < NA; ++a) {
        cd dir = std::polar(1.0, 2.0 * std::numbers::pi * (a + 0.5) / NA);
        cd prev = z0, wprev = w0;
        for (int i = 1; i <= NR; ++i) {
            double t = 7.0 * i / NR;
            double r = 1.0 - std::exp(-t);
            cd d = r * dir;
            cd zz = (z0 - d * z0b) / (1.0 - d);
            cd ww = wprev + g.scale * local_step(prev, zz, m);
            grid->z.push_back(zz);
            grid->w.push_back(ww);
            prev = zz;
            wprev = ww;
        }
    }
    grid->z.push_back(z0);
    grid->w.push_back(w0);
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (auto& v : g.vertex) {
        xmin = std::min(xmin, v.real());
        xmax = std::max(xmax, v.real());
        ymin = std::min(ymin, v.imag());
        ymax = std::max(ymax, v.imag());
    }
    grid->nx = grid->ny = 64;
    grid->cell = std::max(xmax - xmin, ymax - ymin) / 64.0 * 1.0001;
    grid->x0 = xmin;
    grid->y0 = ymin;
    grid->bucket.assign(grid->nx * grid->ny, {});
    for (size_t i = 0; i < grid->w.size(); ++i) {
        int bx = std::clamp(int((grid->w[i].real() - xmin) / grid->cell), 0, grid->nx - 1);
        int by = std::clamp(int((grid->w[i].imag() - ymin) / grid->cell), 0, grid->ny - 1);
        grid->bucket[by * grid->nx + bx].push_back((int)i);
    }
    g.seeds = grid;
    return g;
}

cd hex_derivative(cd z, const HexGeometry& g) { return g.scale * sc_integrand(z, g.prevertices); }

cd hex_forward(cd z, const HexGeometry& g) {
    if (z.imag() < 0.0) throw MapError("hex_forward needs the closed upper half-plane");
    std::array<cd, 6> W;
    for (int k = 0; k < 6; ++k) W[k] = g.vertex[k] / g.scale;
    return g.scale * forward_unscaled(z, g.prevertices, W);
}

bool hex_contains(cd w, const HexGeometry& g, double margin) {
    for (int k = 0; k < 6; ++k) {
        cd a = g.vertex[k], b = g.vertex[(k + 1) % 6];
        cd e = (b - a) / std::abs(b - a);
        double cross = (std::conj(e) * (w - a)).imag();
        if (cross < margin) return false;
    }
    return true;
}

cd hex_inverse(cd w, const HexGeometry& g) {
    if (!hex_contains(w, g, 1e-14)) throw MapError("point outside the hexagon");
    const HexSeedGrid& s = *g.seeds;
    int bx = std::clamp(int((w.real() - s.x0) / s.cell), 0, s.nx - 1);
    int by = std::clamp(int((w.imag() - s.y0) / s.cell), 0, s.ny - 1);
    int best = -1;
    double bd = INFINITY;
    for (int rad = 0; rad < 64 && (best < 0 || rad <= 1); ++rad) {
        for (int j = by - rad; j <= by + rad; ++j)
            for (int i = bx - rad; i <= bx + rad; ++i) {
                if (i < 0 || j < 0 || i >= s.nx || j >= s.ny) continue;
                for (int idx : s.bucket[j * s.nx + i]) {
                    double d = std::abs(s.w[idx] - w);
                    if (d < bd) {
                        bd = d;
                        best = idx;
                    }
                }
            }
    }
    cd z = s.z[best], wz = s.w[best];
    for (int it = 0; it < 80; ++it) {
        cd err = w - wz;
        if (std::abs(err) < 1e-14) return z;
        cd step = err / hex_derivative(z, g);
        cd zn = z + step;
        int h = 0;
        while (zn.imag() <= 0.0 && h < 60) {
            step *= 0.5;
            zn = z + step;
            ++h;
        }
        cd wn = wz + g.scale * local_step(z, zn, g.prevertices);
        // accept only steps that reduce the mismatch
        int back = 0;
        while (std::abs(w - wn) > std::abs(err) && back < 30) {
            step *= 0.5;
            zn = z + step;
            wn = wz + g.scale * local_step(z, zn, g.prevertices);
            ++back;
        }
        if (std::abs(zn - z) < 1e-16 * std::abs(z)) return zn;
        z = zn;
        wz = wn;
    }
    if (std::abs(w - wz) < 1e-10) return z;
    throw MapError("hexagon inverse map did not converge");
}

}  // namespace pinch
