#include "pinch/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pinch/quad.hpp"

namespace pinch {

double rgamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) return 0.0;
    if (x > 170.0) return 0.0;
    return 1.0 / std::tgamma(x);
}

double beta_fn(double a, double b) { return std::tgamma(a) * std::tgamma(b) * rgamma(a + b); }

static double series_2f1(double a, double b, double c, double x, int max_terms) {
    double sum = 1.0, term = 1.0;
    for (int k = 0; k < max_terms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x;
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) return sum;
        if (term == 0.0) return sum;
    }
    throw NumericError("2F1 series failed to converge (a=" + std::to_string(a) + ", b=" + std::to_string(b) +
                       ", c=" + std::to_string(c) + ", x=" + std::to_string(x) + ")");
}

double gauss_2f1(double a, double b, double c, double x) {
    if (c <= 0.0 && c == std::floor(c)) throw NumericError("2F1: c is a non-positive integer");
    if (!(x > -1.0 && x < 1.0)) throw NumericError("2F1: argument outside (-1,1)");
    if (std::abs(x) <= 0.6) return series_2f1(a, b, c, x, 5000);
    if (x < 0.0) return std::pow(1.0 - x, -a) * series_2f1(a, c - b, c, x / (x - 1.0), 5000);
    double d = c - a - b;
    if (std::abs(d - std::round(d)) < 1e-5) return series_2f1(a, b, c, x, 20000000);
    double y = 1.0 - x;
    double t1 = std::tgamma(c) * std::tgamma(d) * rgamma(c - a) * rgamma(c - b);
    double t2 = std::tgamma(c) * std::tgamma(-d) * rgamma(a) * rgamma(b);
    double v = 0.0;
    if (t1 != 0.0) v += t1 * series_2f1(a, b, 1.0 - d, y, 5000);
    if (t2 != 0.0) v += t2 * std::pow(y, d) * series_2f1(c - a, c - b, 1.0 + d, y, 5000);
    return v;
}

cd lauricella_fd(const FdArgs& p, bool regularize, double rel_tol) {
    if (p.b.size() != p.x.size()) throw NumericError("lauricella_fd: b and x differ in length");
    const double e0 = p.a - 1.0, e1 = p.c - p.a - 1.0;
    BranchedIntegrand f;
    f.factors.push_back(u_minus_p(0.0, e0));
    f.factors.push_back(p_minus_u(1.0, e1));
    for (size_t j = 0; j < p.b.size(); ++j) {
        if (p.x[j] == cd(0.0) || p.b[j] == 0.0) continue;
        f.factors.push_back({cd(1.0), -p.x[j], -p.b[j]});
    }
    double norm = std::tgamma(p.c) * rgamma(p.a) * rgamma(p.c - p.a);
    bool euler = p.a > 0.0 && p.c - p.a > 0.0;
    if (!euler && !regularize)
        throw NumericError("lauricella_fd: Euler regime a>0, c-a>0 violated without regularization");
    // Arguments within ~1e-7 of 1 lose digits to cancellation near t=1; relax rather than fail.
    for (double tol = rel_tol;; tol *= 100.0) {
        QuadOptions opt;
        opt.rel_tol = tol;
        try {
            return norm * (euler ? integrate_singular_segment(f, 0.0, 1.0, opt) : regularized_segment(f, 0.0, 1.0, opt));
        } catch (const QuadError&) {
            if (tol >= 1e-6) throw;
        }
    }
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0)) throw NumericError("incomplete_beta: a must be positive");
    if (!(x >= 0.0 && x < 1.0)) throw NumericError("incomplete_beta: x outside [0,1)");
    if (x == 0.0) return 0.0;
    if (x > 0.5 && std::abs(b - std::round(b)) > 1e-4)
        return std::pow(x, a) / a * gauss_2f1(a, 1.0 - b, a + 1.0, x);
    std::function<cd(double)> g = [&](double s) { return cd(std::pow(1.0 - x * s, b - 1.0)); };
    QuadOptions opt;
    opt.rel_tol = 1e-11;
    return std::pow(x, a) * integrate_weighted(g, a - 1.0, 0.0, opt).real();
}

double ellip_k(double m) {
    if (!(m >= 0.0 && m < 1.0)) throw NumericError("ellip_k: parameter outside [0,1)");
    double a = 1.0, b = std::sqrt(1.0 - m);
    for (int i = 0; i < 60 && std::abs(a - b) > 1e-16 * a; ++i) {
        double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return std::numbers::pi / (a + b);
}

void jacobi_real(double u, double m, double& sn, double& cn, double& dn) {
    if (m < 1e-300) {
        sn = std::sin(u);
        cn = std::cos(u);
        dn = 1.0;
        return;
    }
    if (m >= 1.0) {
        sn = std::tanh(u);
        cn = dn = 1.0 / std::cosh(u);
        return;
    }
    double a[40], c[40];
    a[0] = 1.0;
    double b = std::sqrt(1.0 - m);
    c[0] = std::sqrt(m);
    int n = 0;
    while (std::abs(c[n]) > 1e-16 && n < 38) {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = std::sqrt(a[n] * b);
        ++n;
    }
    double phi = std::ldexp(a[n] * u, n);
    for (int k = n; k > 0; --k) phi = 0.5 * (phi + std::asin(c[k] / a[k] * std::sin(phi)));
    sn = std::sin(phi);
    cn = std::cos(phi);
    dn = std::sqrt(1.0 - m * sn * sn);
}

JacobiSCD jacobi_elliptic(cd u, double m) {
    if (!(m >= 0.0 && m <= 1.0)) throw NumericError("jacobi_elliptic: parameter outside [0,1]");
    double s, c, d, s1, c1, d1;
    jacobi_real(u.real(), m, s, c, d);
    jacobi_real(u.imag(), 1.0 - m, s1, c1, d1);
    double den = c1 * c1 + m * s * s * s1 * s1;
    if (std::abs(den) < 1e-14) throw NumericError("jacobi_elliptic: argument at a pole");
    JacobiSCD r;
    r.sn = cd(s * d1, c * d * s1 * c1) / den;
    r.cn = cd(c * c1, -s * d * s1 * d1) / den;
    r.dn = cd(d * c1 * d1, -m * s * c * s1) / den;
    return r;
}

}  // namespace pinch
