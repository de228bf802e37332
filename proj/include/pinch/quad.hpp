#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinch {

using cd = std::complex<double>;

struct QuadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadOptions {
    double rel_tol = 1e-8;
    double abs_floor = 0.0;  // absolute tolerance floor
    int max_depth = 40;
    int nodes = 20;
};

// A factor (c0 + c1 u)^beta on the principal branch, arg in [-pi, pi).
struct Factor {
    cd c0, c1;
    double beta;
    cd root() const { return -c0 / c1; }
};
inline Factor p_minus_u(cd p, double beta) { return {p, cd(-1.0), beta}; }
inline Factor u_minus_p(cd p, double beta) { return {-p, cd(1.0), beta}; }

cd principal_pow(cd w, double beta);

struct BranchedIntegrand {
    std::vector<Factor> factors;
    std::function<cd(cd)> extra;  // optional smooth factor

    cd operator()(cd u) const;
    // product over all factors except the listed indices, times extra
    cd eval_without(cd u, int skip_a, int skip_b) const;
};

// Gauss-Jacobi rule on [0,1] for the weight s^alpha (1-s)^beta.
struct Rule {
    std::vector<double> x, w;
};
const Rule& jacobi_rule(int n, double alpha, double beta);

// Core engine: int_0^1 s^alpha (1-s)^beta g(s) ds, adaptive bisection with
// Gauss-Jacobi panels at the two ends and Gauss-Legendre panels inside.
cd integrate_weighted(const std::function<cd(double)>& g, double alpha, double beta,
                      const QuadOptions& opt = {});

// Straight segment a -> b.  Factors vanishing at an endpoint are pulled out
// analytically and treated by the Jacobi weight.
cd integrate_singular_segment(const BranchedIntegrand& f, cd a, cd b, const QuadOptions& opt = {});
// Variant with the caller stating the endpoint exponents; checked against f.
cd integrate_singular_segment(const BranchedIntegrand& f, cd a, cd b, double alpha, double beta,
                              const QuadOptions& opt = {});

// Segment from real a to +infinity (dir=+1) or -infinity (dir=-1).
cd integrate_to_infinity(const BranchedIntegrand& f, double a, int dir, const QuadOptions& opt = {});

// Closed or open polygonal path through the given vertices (no singular endpoints).
cd integrate_path(const BranchedIntegrand& f, const std::vector<cd>& vertices, bool closed,
                  const QuadOptions& opt = {});

// Taylor coefficients of the product of all factors (extra must be empty)
// except skip, about the point u0.
std::vector<cd> taylor_coefficients(const BranchedIntegrand& f, cd u0, int skip, int order);

// Pochhammer contour entwining a and b.  With endpoint exponents above -1 this is
// 4 e^{i pi (b1-b2)} sin(pi b1) sin(pi b2) times the segment integral; otherwise the
// segment integral is continued analytically in the exponents.
cd pochhammer_integral(const BranchedIntegrand& f, double a, double b, const QuadOptions& opt = {});
// The analytically continued segment integral itself (finite part).
cd regularized_segment(const BranchedIntegrand& f, double a, double b, const QuadOptions& opt = {});

// ---------------------------------------------------------------------------
// Coulomb-gas integrands: real points x_j, conjugate pairs (z, zbar), and
// points with a declared real position used for orientation.

struct CoulombPoint {
    cd p;
    double beta = 0.0;
    double pos = 0.0;  // real coordinate used to orient the factor
    bool conj_pair = false;  // contributes (p-u)^beta (conj(p)-u)^beta
};

struct CoulombSpec {
    std::vector<CoulombPoint> pts;
    void add_real(double x, double beta) { pts.push_back({cd(x, 0.0), beta, x, false}); }
    void add_pair(cd z, double beta) { pts.push_back({z, beta, z.real(), true}); }
    void add_oriented(cd p, double beta, double pos) { pts.push_back({p, beta, pos, false}); }
    double total_exponent() const;
};

// The "N" orientation table relative to a reference real coordinate r: points with
// pos < r give (u - p)^beta, points with pos > r give (p - u)^beta, conjugate pairs
// give (z-u)^beta (zbar-u)^beta.
BranchedIntegrand orient(const CoulombSpec& spec, double ref);

enum class ContourKind { real_segment, real_through_infinity, polyline, loop };

struct ContourSpec {
    ContourKind kind = ContourKind::real_segment;
    double a = 0.0, b = 0.0;  // segment ends; for through_infinity a=right end, b=left end
    cd z;                     // polyline: zbar -> cross -> z
    double cross = 0.0;       // polyline crossing point / loop right crossing
    double loop_left = 0.0, loop_height = 0.0;

    static ContourSpec segment(double a, double b);
    static ContourSpec through_infinity(double right, double left);
    static ContourSpec polyline(cd z, double x_left, double x_right);  // crosses at the midpoint
    static ContourSpec polyline_at(cd z, double cross);
    static ContourSpec loop(double left, double right, double height);
    // real coordinate at which the contour meets the axis (for orientation of partners)
    double anchor() const;
};

cd integrate_contour(const CoulombSpec& spec, const ContourSpec& c, const QuadOptions& opt = {});
cd integrate_complex_polyline(const BranchedIntegrand& f, const ContourSpec& path,
                              const QuadOptions& opt = {});

// Iterated integral over u1 on c1 and u2 on c2 of
//   [spec at u1][spec at u2] (coupling)^gamma
// with the coupling oriented by the N table.
cd double_integral(const CoulombSpec& spec, double gamma, const ContourSpec& c1, const ContourSpec& c2,
                   const QuadOptions& opt_outer = {1e-7}, const QuadOptions& opt_inner = {1e-9});

// The six integrals I_1..I_6 with x5 := z, x6 := zbar, continued from the real
// configuration, and the residual of the two linear relations between them.
struct RelationResult {
    std::vector<cd> I;  // I[1..6]
    double residual = 0.0;
};
RelationResult linear_relation_check(const std::vector<double>& xs, cd z, double kappa);

}  // namespace pinch
