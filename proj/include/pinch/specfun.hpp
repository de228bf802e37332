#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace pinch {

using cd = std::complex<double>;

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double rgamma(double x);  // 1/Gamma(x), zero at the poles
double beta_fn(double a, double b);

double gauss_2f1(double a, double b, double c, double x);

struct FdArgs {
    double a = 0.0;
    std::vector<double> b;
    double c = 0.0;
    std::vector<cd> x;
};

// Gamma(c)/(Gamma(a)Gamma(c-a)) int_0^1 t^{a-1}(1-t)^{c-a-1} prod (1-x_j t)^{-b_j} dt.
// With regularize=true the Euler integral is continued in a and c-a.
cd lauricella_fd(const FdArgs& args, bool regularize = false, double rel_tol = 1e-11);

// int_0^x t^{a-1}(1-t)^{b-1} dt, any real b, x in [0,1).
double incomplete_beta(double a, double b, double x);

// Complete elliptic integral of the first kind; m is the parameter (modulus squared).
double ellip_k(double m);

struct JacobiSCD {
    cd sn, cn, dn;
};
JacobiSCD jacobi_elliptic(cd u, double m);
void jacobi_real(double u, double m, double& sn, double& cn, double& dn);

}  // namespace pinch
