#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "pinch/params.hpp"
#include "pinch/scmap.hpp"

namespace pinch {

using cd = std::complex<double>;

// A last real point equal to +infinity is allowed throughout: the weight
// functions then return lim_{x -> inf} x^{2 theta_1} Pi(..., x; z).

struct CrossRatios {
    int N = 2;
    double eta = 0.0, tau = 0.0, sigma = 0.0;
    cd mu, nu;
};
CrossRatios cross_ratios(const std::vector<double>& xs, cd z);

using Arc = std::array<int, 2>;

struct PinchEvent {
    int N = 2;
    int s = 1;
    std::string label;
    std::vector<Arc> arcs;  // arcs touching the bulk point come first
    bool combo = false;     // the measured hexagon one-pinch combination
};
// "12:34", "23:41", "34:12", "41:23", "1234", "6123:45" (and rotations),
// "12:34:56+12:36:45", "123456"
PinchEvent parse_event(const std::string& label);

struct FfbcEvent {
    int N = 2;
    int index = 1;
    std::vector<Arc> exterior;
};
// rectangle: 1 independent, 2 mutual; hexagon: 1..5 with 3 independent, 2 mutual
FfbcEvent ffbc_event(int N, int index);
int loop_count(const std::vector<Arc>& interior, const FfbcEvent& f);

// ---------------------------------------------------------------- weights

double weight_pi12(double x1, double x2, cd z, const ModelParams& p);
double weight_full_polygon(int N, const std::vector<double>& xs, cd z, const ModelParams& p);
// the same weight written through cross-ratios (N = 2, 3)
double weight_full_polygon_covariant(int N, const std::vector<double>& xs, cd z, const ModelParams& p);

double rect_block_G(int i, const CrossRatios& r, const ModelParams& p);
// the defining real integral, evaluated by quadrature
double rect_block_G_direct(int i, const CrossRatios& r, const ModelParams& p);

double rect_J(const std::vector<double>& xs, cd z, const ModelParams& p);
// calligraphic I_i by direct quadrature on the real axis
double rect_I(int i, const std::vector<double>& xs, cd z, const ModelParams& p);

double rect_one_pp_weight(const PinchEvent& e, const std::vector<double>& xs, cd z, const ModelParams& p);
// contour from zbar to z crossing (x_k, x_l); finite crossings only
double rect_one_pp_weight_contour(const PinchEvent& e, const std::vector<double>& xs, cd z,
                                  const ModelParams& p);

double hex_block_H(int i, const CrossRatios& r, const ModelParams& p);
double hex_block_H_direct(int i, const CrossRatios& r, const ModelParams& p);
// ratio of the quadrature K'_i to the Lauricella expression
double hex_K_calibration(int i, const CrossRatios& r, const ModelParams& p);

double hex_L(const std::vector<double>& xs, cd z, const ModelParams& p);
double hex_K(int i, const std::vector<double>& xs, cd z, const ModelParams& p);

double hex_two_pp_weight(const PinchEvent& e, const std::vector<double>& xs, cd z, const ModelParams& p);

// Pi_{12:34:56} + n Pi_{12:36:45}.  With deformed=true the first contour
// crosses (x5, x6) instead of (x3, x4).
double hex_one_pp_combo(const std::vector<double>& xs, cd z, const ModelParams& p, bool deformed = false);
// the double integral over Gamma_12 x [x4, x5] including the 1/beta^2 normalization
cd hex_one_pp_integral(const std::vector<double>& xs, cd z, const ModelParams& p, bool deformed = false);

// Dispatch on the event; the removable singularities in kappa are handled here.
double pinch_weight(const PinchEvent& e, const std::vector<double>& xs, cd z, const ModelParams& p);

double universal_partition(const PinchEvent& e, const FfbcEvent& f, double weight, const ModelParams& p);

double partition_ffbc_rect(double m, int ffbc, const ModelParams& p);
double partition_ffbc_hex(double m1, double m2, double m3, int ffbc, const ModelParams& p);

// Densities up to the non-universal constant and the delta power.
double density_rect(const PinchEvent& e, const FfbcEvent& f, const RectGeometry& g, cd w, const ModelParams& p);
double density_hex(const PinchEvent& e, const FfbcEvent& f, const HexGeometry& g, cd w, const ModelParams& p);

// Negative-control hook: shifts the first F_D parameter of every block by eps.
void set_fd_perturbation(double eps);

// Evaluates f at kappa +- 1e-4 and averages when |denominator| < 1e-6.
double kappa_regular(const ModelParams& p, double denominator, const std::function<double(const ModelParams&)>& f);

// ---------------------------------------------------------------- PDE checks

struct WeightEvaluator {
    std::function<double(const std::vector<double>&, cd)> f;
    int s = 1;
    ModelParams params;
};

// |residual| / sum of |terms| for the i-th null-state equation (i = 1..2N)
double verify_null_state(const WeightEvaluator& w, const std::vector<double>& xs, cd z, int i);
// translation, dilation, special conformal
std::array<double, 3> verify_ward(const WeightEvaluator& w, const std::vector<double>& xs, cd z);

}  // namespace pinch
