#include "pinch/params.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pinch {

static double kac_raw(int r, int s, double k) {
    double a = k > 4.0 ? (k * r - 4.0 * s) : (k * s - 4.0 * r);
    return (a * a - (k - 4.0) * (k - 4.0)) / (16.0 * k);
}

ModelParams from_kappa(double kappa) {
    if (!(kappa > 0.0 && kappa < 8.0))
        throw DomainError("kappa must lie in (0,8), got " + std::to_string(kappa));
    ModelParams p;
    const double k = kappa;
    p.kappa = k;
    p.dense = k > 4.0;
    p.fugacity_n = -2.0 * std::cos(4.0 * std::numbers::pi / k);
    p.potts_q = p.fugacity_n * p.fugacity_n;
    p.central_charge = (6.0 - k) * (3.0 * k - 8.0) / (2.0 * k);
    p.theta1 = p.dense ? kac_raw(1, 2, k) : kac_raw(2, 1, k);
    for (int s = 1; s <= 3; ++s) {
        p.big_theta[s] = (16.0 * s * s - (k - 4.0) * (k - 4.0)) / (16.0 * k);
        p.leg_theta[s] = s * (2.0 * s + 4.0 - k) / (2.0 * k);
    }
    const double rk = std::sqrt(k) / 2.0;
    if (p.dense) {
        p.alpha_plus = rk;
        p.alpha_minus = -1.0 / rk;
    } else {
        p.alpha_plus = 1.0 / rk;
        p.alpha_minus = -rk;
    }
    p.two_alpha0 = p.alpha_plus + p.alpha_minus;
    return p;
}

double kac_weight(int r, int s, const ModelParams& p) {
    if (r < 0 || s < 0) throw DomainError("kac_weight needs r,s >= 0");
    return kac_raw(r, s, p.kappa);
}

Charge kac_charge(int r, int s, int sign, const ModelParams& p) {
    Charge c;
    c.kind = ChargeKind::kac;
    c.r = r;
    c.s = s;
    c.sign = sign >= 0 ? 1 : -1;
    double sg = c.sign;
    c.value = (1.0 + sg * r) / 2.0 * p.alpha_plus + (1.0 + sg * s) / 2.0 * p.alpha_minus;
    return c;
}

Charge screening_charge(int sign, const ModelParams& p) {
    Charge c;
    c.kind = sign >= 0 ? ChargeKind::screening_plus : ChargeKind::screening_minus;
    c.value = sign >= 0 ? p.alpha_plus : p.alpha_minus;
    return c;
}

double charge_weight(double alpha, const ModelParams& p) { return alpha * (alpha - p.two_alpha0); }

int screening_count(int N, int s, ChargeCase c) {
    if (s < 1 || N < 1) throw DomainError("screening_count needs N,s >= 1");
    if (s > N) throw DomainError("screening_count: s > N has no neutral configuration");
    switch (c) {
        case ChargeCase::pp: return N - s;
        case ChargeCase::mm: return N + s;
        case ChargeCase::pm: return N;
    }
    return N - s;
}

}  // namespace pinch
