#include "pinch/quad.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace pinch {

namespace {

constexpr double kPi = std::numbers::pi;

Rule build_rule(int n, double alpha, double beta) {
    // Golub-Welsch on [-1,1] for (1-x)^a (1+x)^b, then s = (1+x)/2.
    const double a = beta, b = alpha;
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
    for (int k = 0; k < n; ++k) {
        double s = 2.0 * k + a + b;
        if (k == 0)
            diag(k) = (b - a) / (a + b + 2.0);
        else
            diag(k) = (b * b - a * a) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        double s = 2.0 * k + a + b;
        double v;
        if (k == 1)
            v = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) * (2.0 + a + b) * (3.0 + a + b));
        else
            v = 4.0 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1.0) * (s - 1.0));
        sub(k - 1) = std::sqrt(v);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
    double logmu0 = (a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                    std::lgamma(a + b + 2.0);
    double mu0 = std::exp(logmu0);
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    double scale = std::pow(2.0, -(a + b + 1.0));
    for (int i = 0; i < n; ++i) {
        double x = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        r.x[i] = 0.5 * (1.0 + x);
        r.w[i] = mu0 * v0 * v0 * scale;
    }
    return r;
}

bool near_point(cd a, cd b) { return std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

cd principal_pow(cd w, double beta) {
    if (beta == 0.0) return 1.0;
    if (w == cd(0.0)) return beta > 0.0 ? cd(0.0) : cd(INFINITY);
    double r = std::abs(w);
    double th = std::arg(w);
    if (th >= kPi) th -= 2.0 * kPi;  // arg in [-pi, pi)
    if (w.imag() == 0.0 && w.real() < 0.0) th = -kPi;
    return std::polar(std::pow(r, beta), beta * th);
}

cd BranchedIntegrand::operator()(cd u) const { return eval_without(u, -1, -1); }

cd BranchedIntegrand::eval_without(cd u, int skip_a, int skip_b) const {
    cd v = 1.0;
    for (int k = 0; k < (int)factors.size(); ++k) {
        if (k == skip_a || k == skip_b) continue;
        const Factor& f = factors[k];
        v *= principal_pow(f.c0 + f.c1 * u, f.beta);
    }
    if (extra) v *= extra(u);
    return v;
}

static cd eval_mask(const BranchedIntegrand& f, cd u, const std::vector<char>& skip) {
    cd v = 1.0;
    for (size_t k = 0; k < f.factors.size(); ++k) {
        if (skip[k]) continue;
        const Factor& fa = f.factors[k];
        v *= principal_pow(fa.c0 + fa.c1 * u, fa.beta);
    }
    if (f.extra) v *= f.extra(u);
    return v;
}

const Rule& jacobi_rule(int n, double alpha, double beta) {
    static std::mutex mu;
    static std::map<std::tuple<int, double, double>, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(n, alpha, beta);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    if (!(alpha > -1.0 && beta > -1.0)) throw QuadError("Gauss-Jacobi weight exponent must exceed -1");
    auto r = std::make_unique<Rule>(build_rule(n, alpha, beta));
    const Rule& ref = *r;
    cache.emplace(key, std::move(r));
    return ref;
}

namespace {

struct Engine {
    const std::function<cd(double)>& g;
    double alpha, beta;
    const Rule *both, *left, *right, *leg;
    int max_depth;

    cd panel(double lo, double hi) const {
        cd sum = 0.0;
        bool ls = (lo == 0.0 && alpha != 0.0);
        bool rs = (hi == 1.0 && beta != 0.0);
        if (ls && rs) {
            for (size_t k = 0; k < both->x.size(); ++k) sum += both->w[k] * g(both->x[k]);
        } else if (ls) {
            double L = hi;
            for (size_t k = 0; k < left->x.size(); ++k) {
                double s = L * left->x[k];
                sum += left->w[k] * std::pow(1.0 - s, beta) * g(s);
            }
            sum *= std::pow(L, alpha + 1.0);
        } else if (rs) {
            double L = 1.0 - lo;
            for (size_t k = 0; k < right->x.size(); ++k) {
                double t = L * right->x[k];
                double s = 1.0 - t;
                sum += right->w[k] * std::pow(s, alpha) * g(s);
            }
            sum *= std::pow(L, beta + 1.0);
        } else {
            double L = hi - lo;
            for (size_t k = 0; k < leg->x.size(); ++k) {
                double s = lo + L * leg->x[k];
                double wgt = 1.0;
                if (alpha != 0.0) wgt *= std::pow(s, alpha);
                if (beta != 0.0) wgt *= std::pow(1.0 - s, beta);
                sum += leg->w[k] * wgt * g(s);
            }
            sum *= L;
        }
        return sum;
    }

    cd adapt(double lo, double hi, cd whole, double tol, int depth) const {
        double mid = 0.5 * (lo + hi);
        cd l = panel(lo, mid), r = panel(mid, hi);
        cd refined = l + r;
        double diff = std::abs(refined - whole);
        if (diff <= tol || diff <= 1e-14 * (std::abs(l) + std::abs(r))) return refined;
        if (depth >= max_depth) throw QuadError("quadrature subdivision depth exceeded near a singularity");
        double t2 = tol / std::sqrt(2.0);
        return adapt(lo, mid, l, t2, depth + 1) + adapt(mid, hi, r, t2, depth + 1);
    }
};

}  // namespace

cd integrate_weighted(const std::function<cd(double)>& g, double alpha, double beta, const QuadOptions& opt) {
    if (!(alpha > -1.0) || !(beta > -1.0)) throw QuadError("endpoint exponent <= -1: use pochhammer_integral");
    Engine e{g,
             alpha,
             beta,
             &jacobi_rule(opt.nodes, alpha, beta),
             &jacobi_rule(opt.nodes, alpha, 0.0),
             &jacobi_rule(opt.nodes, beta, 0.0),
             &jacobi_rule(opt.nodes, 0.0, 0.0),
             opt.max_depth};
    cd whole = e.panel(0.0, 1.0);
    double tol = std::max({opt.rel_tol * std::abs(whole), opt.abs_floor, 1e-300});
    cd res = e.adapt(0.0, 1.0, whole, tol, 0);
    for (int pass = 0; pass < 3; ++pass) {
        double want = std::max({opt.rel_tol * std::abs(res), opt.abs_floor, 1e-300});
        if (want >= 0.25 * tol) break;
        tol = want;
        res = e.adapt(0.0, 1.0, whole, tol, 0);
    }
    return res;
}

namespace {

struct EndpointSplit {
    std::vector<char> skip;
    double alpha = 0.0, beta = 0.0;
    cd constant = 1.0;
};

EndpointSplit split_endpoints(const BranchedIntegrand& f, cd a, cd b) {
    EndpointSplit e;
    e.skip.assign(f.factors.size(), 0);
    for (size_t k = 0; k < f.factors.size(); ++k) {
        const Factor& fa = f.factors[k];
        cd root = fa.root();
        if (near_point(root, a)) {
            e.skip[k] = 1;
            e.alpha += fa.beta;
            e.constant *= principal_pow(fa.c1 * (b - a), fa.beta);
        } else if (near_point(root, b)) {
            e.skip[k] = 1;
            e.beta += fa.beta;
            e.constant *= principal_pow(-fa.c1 * (b - a), fa.beta);
        }
    }
    return e;
}

}  // namespace

cd integrate_singular_segment(const BranchedIntegrand& f, cd a, cd b, const QuadOptions& opt) {
    if (a == b) return 0.0;
    EndpointSplit e = split_endpoints(f, a, b);
    if (!(e.alpha > -1.0) || !(e.beta > -1.0))
        throw QuadError("endpoint exponent <= -1: caller must use pochhammer_integral");
    cd d = b - a;
    std::function<cd(double)> g = [&](double s) { return eval_mask(f, a + d * s, e.skip); };
    return d * e.constant * integrate_weighted(g, e.alpha, e.beta, opt);
}

cd integrate_singular_segment(const BranchedIntegrand& f, cd a, cd b, double alpha, double beta,
                              const QuadOptions& opt) {
    if (a == b) return 0.0;
    EndpointSplit e = split_endpoints(f, a, b);
    if (std::abs(e.alpha - alpha) > 1e-12 || std::abs(e.beta - beta) > 1e-12)
        throw QuadError("declared endpoint exponents disagree with the integrand");
    return integrate_singular_segment(f, a, b, opt);
}

cd integrate_to_infinity(const BranchedIntegrand& f, double a, int dir, const QuadOptions& opt) {
    std::vector<char> skip(f.factors.size(), 0);
    double total = 0.0, beta_a = 0.0, ell = 0.0;
    cd constant = 1.0;
    for (size_t k = 0; k < f.factors.size(); ++k) {
        total += f.factors[k].beta;
        cd r = f.factors[k].root();
        if (near_point(r, cd(a))) {
            skip[k] = 1;
        } else {
            ell = std::max(ell, std::abs(r - cd(a)));
        }
    }
    if (ell == 0.0) ell = 1.0;
    for (size_t k = 0; k < f.factors.size(); ++k) {
        if (!skip[k]) continue;
        beta_a += f.factors[k].beta;
        constant *= principal_pow(f.factors[k].c1 * double(dir) * ell, f.factors[k].beta);
    }
    double e_inf = -total - 2.0;
    if (!(e_inf > -1.0))
        throw QuadError("integrand is not integrable at infinity (total exponent " + std::to_string(total) + ")");
    std::function<cd(double)> g = [&](double s) {
        double om = 1.0 - s;
        cd u = cd(a + dir * ell * s / om);
        cd v = eval_mask(f, u, skip);
        return v * std::pow(om, -beta_a - 2.0 - e_inf);
    };
    return constant * double(dir) * ell * integrate_weighted(g, beta_a, e_inf, opt);
}

cd integrate_path(const BranchedIntegrand& f, const std::vector<cd>& v, bool closed, const QuadOptions& opt) {
    cd sum = 0.0;
    size_t n = v.size();
    size_t segs = closed ? n : n - 1;
    for (size_t i = 0; i < segs; ++i) {
        cd a = v[i], b = v[(i + 1) % n];
        cd d = b - a;
        std::function<cd(double)> g = [&](double s) { return f(a + d * s); };
        sum += d * integrate_weighted(g, 0.0, 0.0, opt);
    }
    return sum;
}

std::vector<cd> taylor_coefficients(const BranchedIntegrand& f, cd u0, int skip, int order) {
    std::vector<char> mask(f.factors.size(), 0);
    if (skip >= 0) mask[skip] = 1;
    if (f.extra) throw QuadError("taylor_coefficients: extra factor not supported");
    std::vector<cd> L(order + 1, 0.0);
    cd h0 = 1.0;
    for (size_t k = 0; k < f.factors.size(); ++k) {
        if (mask[k]) continue;
        const Factor& fa = f.factors[k];
        cd A = fa.c0 + fa.c1 * u0;
        h0 *= principal_pow(A, fa.beta);
        cd eps = fa.c1 / A;
        cd pw = 1.0;
        for (int j = 1; j <= order; ++j) {
            pw *= eps;
            double sgn = (j % 2 == 1) ? 1.0 : -1.0;
            L[j] += fa.beta * sgn * pw / double(j);
        }
    }
    std::vector<cd> h(order + 1, 0.0);
    h[0] = h0;
    for (int nn = 1; nn <= order; ++nn) {
        cd s = 0.0;
        for (int j = 1; j <= nn; ++j) s += double(j) * L[j] * h[nn - j];
        h[nn] = s / double(nn);
    }
    return h;
}

namespace {

int find_root_factor(const BranchedIntegrand& f, double x) {
    int idx = -1;
    for (size_t k = 0; k < f.factors.size(); ++k)
        if (near_point(f.factors[k].root(), cd(x))) {
            if (idx >= 0) throw QuadError("several factors vanish at one endpoint; merge them first");
            idx = (int)k;
        }
    return idx;
}

// finite part of int_0^L t^beta h(t) dt with h analytic near 0; h(t) and its
// Taylor coefficients supplied.
cd continued_piece(double beta, double L, const std::function<cd(double)>& h, const std::vector<cd>& coef,
                   double radius, const QuadOptions& opt) {
    if (beta > -1.0) {
        std::function<cd(double)> g = [&](double s) { return h(L * s); };
        return std::pow(L, beta + 1.0) * integrate_weighted(g, beta, 0.0, opt);
    }
    int K = (int)std::ceil(-1.0 - beta);
    if (beta + K <= -1.0) ++K;
    for (int j = 0; j < K; ++j)
        if (std::abs(beta + j + 1.0) < 1e-12) throw QuadError("integer exponent: limit evaluation required");
    if ((int)coef.size() < K + 26) throw QuadError("not enough Taylor coefficients");
    cd sum = 0.0;
    for (int j = 0; j < K; ++j) sum += coef[j] * std::pow(L, beta + j + 1.0) / (beta + j + 1.0);
    std::function<cd(double)> g = [&](double s) {
        double t = L * s;
        if (t < 0.25 * radius) {
            cd v = 0.0, tp = 1.0;
            for (int j = K; j < K + 26; ++j) {
                v += coef[j] * tp;
                tp *= t;
            }
            return v;
        }
        cd poly = 0.0, tp = 1.0;
        for (int j = 0; j < K; ++j) {
            poly += coef[j] * tp;
            tp *= t;
        }
        return (h(t) - poly) / tp;
    };
    sum += std::pow(L, beta + K + 1.0) * integrate_weighted(g, beta + K, 0.0, opt);
    return sum;
}

}  // namespace

cd regularized_segment(const BranchedIntegrand& f, double a, double b, const QuadOptions& opt) {
    int ia = find_root_factor(f, a), ib = find_root_factor(f, b);
    double b1 = ia >= 0 ? f.factors[ia].beta : 0.0;
    double b2 = ib >= 0 ? f.factors[ib].beta : 0.0;
    if (b1 > -1.0 && b2 > -1.0) return integrate_singular_segment(f, cd(a), cd(b), opt);
    double m = 0.5 * (a + b);
    double radius_a = INFINITY, radius_b = INFINITY;
    for (size_t k = 0; k < f.factors.size(); ++k) {
        cd r = f.factors[k].root();
        if ((int)k != ia) radius_a = std::min(radius_a, std::abs(r - cd(a)));
        if ((int)k != ib) radius_b = std::min(radius_b, std::abs(r - cd(b)));
    }
    cd total = 0.0;
    // left half: u = a + t
    {
        cd ca = ia >= 0 ? principal_pow(f.factors[ia].c1, b1) : cd(1.0);
        std::vector<cd> coef;
        if (b1 <= -1.0) coef = taylor_coefficients(f, cd(a), ia, (int)std::ceil(-b1) + 30);
        std::function<cd(double)> h = [&](double t) { return f.eval_without(cd(a + t), ia, -1); };
        total += ca * continued_piece(b1, m - a, h, coef, radius_a, opt);
    }
    // right half: u = b - t
    {
        cd cb = ib >= 0 ? principal_pow(-f.factors[ib].c1, b2) : cd(1.0);
        std::vector<cd> coef;
        if (b2 <= -1.0) {
            // coefficients in t = b - u: reflect the odd terms
            coef = taylor_coefficients(f, cd(b), ib, (int)std::ceil(-b2) + 30);
            for (size_t j = 1; j < coef.size(); j += 2) coef[j] = -coef[j];
        }
        std::function<cd(double)> h = [&](double t) { return f.eval_without(cd(b - t), ib, -1); };
        total += cb * continued_piece(b2, b - m, h, coef, radius_b, opt);
    }
    return total;
}

cd pochhammer_integral(const BranchedIntegrand& f, double a, double b, const QuadOptions& opt) {
    int ia = find_root_factor(f, a), ib = find_root_factor(f, b);
    double b1 = ia >= 0 ? f.factors[ia].beta : 0.0;
    double b2 = ib >= 0 ? f.factors[ib].beta : 0.0;
    cd pref = 4.0 * std::exp(cd(0.0, kPi * (b1 - b2))) * std::sin(kPi * b1) * std::sin(kPi * b2);
    return pref * regularized_segment(f, a, b, opt);
}

// ---------------------------------------------------------------------------

double CoulombSpec::total_exponent() const {
    double t = 0.0;
    for (auto& p : pts) t += p.conj_pair ? 2.0 * p.beta : p.beta;
    return t;
}

BranchedIntegrand orient(const CoulombSpec& spec, double ref) {
    BranchedIntegrand f;
    for (auto& p : spec.pts) {
        if (p.beta == 0.0) continue;
        if (p.conj_pair) {
            f.factors.push_back(p_minus_u(p.p, p.beta));
            f.factors.push_back(p_minus_u(std::conj(p.p), p.beta));
        } else if (p.pos < ref) {
            f.factors.push_back(u_minus_p(p.p, p.beta));
        } else if (p.pos > ref) {
            f.factors.push_back(p_minus_u(p.p, p.beta));
        } else {
            throw GeometryError("orientation reference coincides with a branch point");
        }
    }
    return f;
}

ContourSpec ContourSpec::segment(double a, double b) {
    ContourSpec c;
    c.kind = ContourKind::real_segment;
    c.a = a;
    c.b = b;
    return c;
}
ContourSpec ContourSpec::through_infinity(double right, double left) {
    ContourSpec c;
    c.kind = ContourKind::real_through_infinity;
    c.a = right;
    c.b = left;
    return c;
}
ContourSpec ContourSpec::polyline(cd z, double x_left, double x_right) { return polyline_at(z, 0.5 * (x_left + x_right)); }
ContourSpec ContourSpec::polyline_at(cd z, double cross) {
    ContourSpec c;
    c.kind = ContourKind::polyline;
    c.z = z;
    c.cross = cross;
    return c;
}
ContourSpec ContourSpec::loop(double left, double right, double height) {
    ContourSpec c;
    c.kind = ContourKind::loop;
    c.loop_left = left;
    c.cross = right;
    c.loop_height = height;
    return c;
}
double ContourSpec::anchor() const {
    switch (kind) {
        case ContourKind::polyline:
        case ContourKind::loop: return cross;
        default: return NAN;
    }
}

namespace {

cd contour_impl(const CoulombSpec& spec, const ContourSpec& c, const std::function<cd(cd)>& extra,
                const QuadOptions& opt, double inside_extra = 0.0) {
    auto make = [&](double ref) {
        BranchedIntegrand f = orient(spec, ref);
        f.extra = extra;
        return f;
    };
    switch (c.kind) {
        case ContourKind::real_segment: {
            double a = std::min(c.a, c.b), b = std::max(c.a, c.b);
            std::vector<double> cuts{a, b};
            for (auto& p : spec.pts) {
                if (p.conj_pair) continue;
                bool real_pt = p.p.imag() == 0.0;
                if (p.pos > a && p.pos < b) {
                    if (!real_pt && p.beta != 0.0)
                        throw GeometryError("oriented complex point projects inside a real segment");
                    if (!near_point(cd(p.pos), cd(a)) && !near_point(cd(p.pos), cd(b))) cuts.push_back(p.pos);
                }
            }
            std::sort(cuts.begin(), cuts.end());
            cd sum = 0.0;
            for (size_t i = 0; i + 1 < cuts.size(); ++i) {
                if (cuts[i + 1] - cuts[i] <= 0.0) continue;
                BranchedIntegrand f = make(0.5 * (cuts[i] + cuts[i + 1]));
                sum += integrate_singular_segment(f, cuts[i], cuts[i + 1], opt);
            }
            return c.a <= c.b ? sum : -sum;
        }
        case ContourKind::real_through_infinity: {
            double right = c.a, left = c.b;
            std::vector<double> hi{right}, lo{left};
            for (auto& p : spec.pts) {
                if (p.conj_pair || p.beta == 0.0) continue;
                if (p.p.imag() != 0.0) {
                    if (p.pos > right || p.pos < left)
                        throw GeometryError("oriented complex point projects onto the arc");
                    continue;
                }
                if (p.pos > right && !near_point(cd(p.pos), cd(right))) hi.push_back(p.pos);
                if (p.pos < left && !near_point(cd(p.pos), cd(left))) lo.push_back(p.pos);
            }
            std::sort(hi.begin(), hi.end());
            std::sort(lo.begin(), lo.end());
            cd sum = 0.0;
            for (size_t i = 0; i + 1 < hi.size(); ++i)
                sum += integrate_singular_segment(make(0.5 * (hi[i] + hi[i + 1])), hi[i], hi[i + 1], opt);
            sum += integrate_to_infinity(make(INFINITY), hi.back(), +1, opt);
            sum -= integrate_to_infinity(make(-INFINITY), lo.front(), -1, opt);
            for (size_t i = 0; i + 1 < lo.size(); ++i)
                sum += integrate_singular_segment(make(0.5 * (lo[i] + lo[i + 1])), lo[i], lo[i + 1], opt);
            return sum;
        }
        case ContourKind::polyline: {
            cd z = c.z;
            if (!(z.imag() > 0.0)) {
                if (z.imag() == 0.0) return 0.0;
                throw GeometryError("polyline endpoint must lie in the upper half-plane");
            }
            double scale = 1.0;
            for (auto& p : spec.pts) scale = std::max(scale, std::abs(p.p));
            for (auto& p : spec.pts)
                if (!p.conj_pair && std::abs(p.pos - c.cross) < 1e-10 * scale)
                    throw GeometryError("polyline passes through a branch point");
            BranchedIntegrand f = make(c.cross);
            return integrate_singular_segment(f, std::conj(z), cd(c.cross), opt) +
                   integrate_singular_segment(f, cd(c.cross), z, opt);
        }
        case ContourKind::loop: {
            double inside = inside_extra;
            for (auto& p : spec.pts)
                if (!p.conj_pair && p.pos > c.loop_left && p.pos < c.cross) inside += p.beta;
            if (std::abs(inside - std::round(inside)) > 1e-9)
                throw GeometryError("loop encloses non-integer total monodromy");
            for (auto& p : spec.pts)
                if (p.conj_pair && std::abs(p.p.imag()) <= c.loop_height)
                    throw GeometryError("loop crosses the cut of a bulk point");
            BranchedIntegrand f = make(c.cross);
            double h = c.loop_height;
            std::vector<cd> v{cd(c.cross, 0.0), cd(c.cross, h), cd(c.loop_left, h), cd(c.loop_left, -h),
                              cd(c.cross, -h)};
            return integrate_path(f, v, true, opt);
        }
    }
    return 0.0;
}

}  // namespace

cd integrate_contour(const CoulombSpec& spec, const ContourSpec& c, const QuadOptions& opt) {
    return contour_impl(spec, c, nullptr, opt);
}

cd integrate_complex_polyline(const BranchedIntegrand& f, const ContourSpec& path, const QuadOptions& opt) {
    if (path.kind != ContourKind::polyline) throw GeometryError("integrate_complex_polyline needs a polyline");
    cd z = path.z;
    if (z.imag() == 0.0) return 0.0;
    for (auto& fa : f.factors) {
        cd r = fa.root();
        if (std::abs(r.imag()) < 1e-14 && std::abs(r.real() - path.cross) < 1e-10 * (1.0 + std::abs(r)))
            throw GeometryError("polyline passes through a branch point");
    }
    return integrate_singular_segment(f, std::conj(z), cd(path.cross), opt) +
           integrate_singular_segment(f, cd(path.cross), z, opt);
}

cd double_integral(const CoulombSpec& spec, double gamma, const ContourSpec& c1, const ContourSpec& c2,
                   const QuadOptions& opt_outer, const QuadOptions& opt_inner) {
    if (c1.kind == ContourKind::polyline && c2.kind == ContourKind::polyline)
        throw GeometryError("two complex contours would intersect");
    auto inner = [&](cd u1) {
        CoulombSpec s2 = spec;
        double pos = (c1.kind == ContourKind::polyline || c1.kind == ContourKind::loop) ? c1.anchor() : u1.real();
        s2.add_oriented(u1, gamma, pos);
        return contour_impl(s2, c2, nullptr, opt_inner);
    };
    double inside = 0.0;
    if (c1.kind == ContourKind::loop) {
        double lo = c2.kind == ContourKind::real_segment ? std::min(c2.a, c2.b) : -INFINITY;
        double hi = c2.kind == ContourKind::real_segment ? std::max(c2.a, c2.b) : INFINITY;
        if (lo > c1.loop_left && hi < c1.cross) inside = gamma;
    }
    return contour_impl(spec, c1, inner, opt_outer, inside);
}

RelationResult linear_relation_check(const std::vector<double>& xs, cd z, double kappa) {
    if (xs.size() != 4) throw GeometryError("linear_relation_check needs four real points");
    const double a = -4.0 / kappa, g = 8.0 / kappa - 1.0;
    const cd zb = std::conj(z);
    const double span = xs[3] - xs[0];
    const double c = xs[3] + 0.5 * span + std::max(0.0, z.real() - xs[3]);
    QuadOptions opt;
    opt.rel_tol = 1e-11;
    auto base_right = [&]() {
        BranchedIntegrand f;
        for (double x : xs) f.factors.push_back(u_minus_p(x, a));
        return f;
    };
    RelationResult R;
    R.I.assign(7, 0.0);
    for (int i = 2; i <= 4; ++i) {
        CoulombSpec s;
        for (double x : xs) s.add_real(x, a);
        s.add_pair(z, g);
        R.I[i] = integrate_contour(s, ContourSpec::segment(xs[i - 2], xs[i - 1]), opt);
    }
    {
        BranchedIntegrand f = base_right();
        f.factors.push_back(p_minus_u(z, g));
        f.factors.push_back(p_minus_u(zb, g));
        R.I[5] = integrate_singular_segment(f, cd(xs[3]), z, opt);
    }
    {
        BranchedIntegrand f = base_right();
        f.factors.push_back(u_minus_p(z, g));
        f.factors.push_back(p_minus_u(zb, g));
        R.I[6] = integrate_singular_segment(f, z, cd(c), opt) + integrate_singular_segment(f, cd(c), zb, opt);
    }
    {
        BranchedIntegrand f = base_right();
        f.factors.push_back(u_minus_p(z, g));
        f.factors.push_back(u_minus_p(zb, g));
        cd part = integrate_singular_segment(f, zb, cd(c), opt) + integrate_to_infinity(f, c, +1, opt);
        BranchedIntegrand h;
        for (double x : xs) h.factors.push_back(p_minus_u(x, a));
        h.factors.push_back(p_minus_u(z, g));
        h.factors.push_back(p_minus_u(zb, g));
        part -= integrate_to_infinity(h, xs[0], -1, opt);
        R.I[1] = part;
    }
    double mx = 0.0;
    for (int i = 1; i <= 6; ++i) mx = std::max(mx, std::abs(R.I[i]));
    double worst = 0.0;
    for (int sg : {+1, -1}) {
        auto ph = [&](double k) { return std::exp(cd(0.0, sg * k * kPi / kappa)); };
        cd S = R.I[1] + ph(4) * R.I[2] + ph(8) * R.I[3] + ph(12) * R.I[4] + ph(16) * R.I[5] - ph(8) * R.I[6];
        worst = std::max(worst, std::abs(S) / mx);
    }
    R.residual = worst;
    return R;
}

}  // namespace pinch
