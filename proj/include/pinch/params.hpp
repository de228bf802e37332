#pragma once

#include <array>
#include <stdexcept>

namespace pinch {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

enum class ChargeKind { kac, screening_plus, screening_minus };

struct Charge {
    double value = 0.0;
    ChargeKind kind = ChargeKind::kac;
    int r = 0, s = 0, sign = 0;
};

struct ModelParams {
    double kappa = 6.0;
    bool dense = true;  // kappa > 4
    double fugacity_n = 1.0;
    double potts_q = 1.0;  // n^2, read-only
    double central_charge = 0.0;
    double theta1 = 0.0;
    std::array<double, 4> big_theta{};  // index s = 1..3
    std::array<double, 4> leg_theta{};  // theta_s, index s = 1..3
    double alpha_plus = 0.0, alpha_minus = 0.0, two_alpha0 = 0.0;
};

ModelParams from_kappa(double kappa);

double kac_weight(int r, int s, const ModelParams& p);

// alpha^{+/-}_{r,s}
Charge kac_charge(int r, int s, int sign, const ModelParams& p);
Charge screening_charge(int sign, const ModelParams& p);
double charge_weight(double alpha, const ModelParams& p);

enum class ChargeCase { pp, mm, pm };
int screening_count(int N, int s, ChargeCase c);

}  // namespace pinch
