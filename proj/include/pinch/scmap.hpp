#pragma once

#include <array>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

namespace pinch {

using cd = std::complex<double>;

struct MapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rectangle [0,R] x [0,1]; the half-plane points {0,m,1,inf} go to {0, R, R+i, i}.
struct RectGeometry {
    double aspect_R = 1.0;
    double modulus_m = 0.5;  // parameter, modulus squared
    double K = 0.0, Kprime = 0.0;
};

RectGeometry rect_from_aspect(double R);
RectGeometry rect_from_modulus(double m);
cd rect_inverse(cd w, const RectGeometry& g);  // z = m sn(w K' | m)^2
cd rect_forward(cd z, const RectGeometry& g);  // Newton on rect_inverse
double rect_inverse_jacobian(cd w, const RectGeometry& g);  // |2 m K' sn cn dn|

// Hexagon with interior angles 2 pi / 3; {0,m1,m2,m3,1,inf} go to w1..w6,
// w1 = 0, w2 > 0, side w1w2 of length 1.
struct HexSeedGrid;

struct HexGeometry {
    std::array<double, 3> prevertices{};
    std::array<cd, 6> vertex{};
    cd center;
    double scale = 1.0;  // multiplies the (2/3) integral
    cd center_preimage;
    std::shared_ptr<const HexSeedGrid> seeds;
};

std::array<double, 3> hex_prevertices_regular();
// side lengths |w_{k+1} - w_k|, k = 1..6 (index 0..5), of the unscaled (2/3) map
std::array<double, 6> hex_side_lengths(const std::array<double, 3>& m);
// target: L2/L1 ... L6/L1
std::array<double, 3> hex_prevertices_solve(const std::array<double, 5>& target_ratios);

HexGeometry hex_geometry(const std::array<double, 3>& m);
cd hex_forward(cd z, const HexGeometry& g);
cd hex_derivative(cd z, const HexGeometry& g);
cd hex_inverse(cd w, const HexGeometry& g);
bool hex_contains(cd w, const HexGeometry& g, double margin = 0.0);

}  // namespace pinch
