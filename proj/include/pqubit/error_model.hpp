#pragma once

// Closed-form alpha/beta performance model of a correction cycle:
//   F_storage = 1 - alpha M^2 lambda^2,   F_circuit = 1 - beta lambda + beta' lambda^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pqubit/errors.hpp"
#include "pqubit/noisy_gates.hpp"

namespace pqubit {

struct ErrorModelParams {
    double alpha = 0.75;
    double beta = 3.92;
    double beta_prime = 0.0;
    std::size_t N = 5;

    double f_storage(double lambda, std::size_t M) const {
        const double ml = double(M) * lambda;
        return 1.0 - alpha * ml * ml;
    }
    double f_circuit(double lambda) const { return 1.0 - beta * lambda + beta_prime * lambda * lambda; }
};

/// Fitted values for the three-qubit circuit with continuous phase damping.
inline constexpr ErrorModelParams kFittedParams{0.75, 3.92, 0.0, 5};

inline std::optional<double> model_lambda_eff(const ErrorModelParams& p, double lambda, std::size_t M) {
    if (lambda == 0.0) return 0.0;
    const double arg = 2.0 * p.f_circuit(lambda) * p.f_storage(lambda, M) - 1.0;
    if (!(arg > 0.0)) return std::nullopt;
    return -std::log(arg) / double(M + p.N);
}

inline std::size_t m_opt(const ErrorModelParams& p, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("m_opt: lambda must be > 0");
    const double m = std::sqrt(p.beta / (p.alpha * lambda)) - double(p.N);
    return m <= 0.0 ? 0 : static_cast<std::size_t>(std::llround(m));
}

inline double lambda_opt(const ErrorModelParams& p, double lambda, bool empirical_halving = false) {
    if (!(lambda >= 0.0)) throw DomainError("lambda_opt: lambda must be >= 0");
    const double v = 4.0 * std::sqrt(p.alpha * p.beta) * std::pow(lambda, 1.5);
    return empirical_halving ? 0.5 * v : v;
}

inline double f_opt_at_time(const ErrorModelParams& p, double lambda, double t, bool empirical_halving = false) {
    if (!(t >= 0.0)) throw DomainError("f_opt_at_time: t must be >= 0");
    return 1.0 - 0.5 * lambda_opt(p, lambda, empirical_halving) * t;
}

/// Threshold estimate 1/(4 beta sqrt(alpha)); +inf for an error-free circuit.
inline double lambda_crit(const ErrorModelParams& p) {
    if (p.beta == 0.0) return std::numeric_limits<double>::infinity();
    if (!(p.beta > 0.0) || !(p.alpha > 0.0)) throw DomainError("lambda_crit: need alpha > 0, beta >= 0");
    return 1.0 / (4.0 * p.beta * std::sqrt(p.alpha));
}

struct GateSlopes {
    double rotation;
    double cnot;
};

inline GateSlopes gate_slopes(DampingKind kind) {
    return kind == DampingKind::phase ? GateSlopes{0.40, 0.86} : GateSlopes{1.80, 2.20};
}

/// Upper bound on beta from per-gate error slopes.
inline double beta_bound_from_gates(std::size_t r_count, std::size_t cn_count, DampingKind kind) {
    const auto s = gate_slopes(kind);
    return double(r_count) * s.rotation + double(cn_count) * s.cnot;
}

using Curve = std::vector<std::pair<double, double>>;

namespace detail {

inline void check_fit_input(const Curve& c, const char* which) {
    if (c.size() < 3) throw DomainError(std::string("fit_alpha_beta: need >= 3 points in ") + which);
    bool distinct = false;
    for (const auto& [l, f] : c) {
        if (!(l > 0.0) || !std::isfinite(f)) throw DomainError(std::string("fit_alpha_beta: bad point in ") + which);
        if (l != c.front().first) distinct = true;
    }
    if (!distinct) throw DomainError(std::string("fit_alpha_beta: all lambda values equal in ") + which);
}

}  // namespace detail

/// Least squares: alpha through the origin on 1 - F_ideal = alpha (M lambda)^2; then
/// beta, beta' on 1 - F_cycle / F_storage = beta lambda - beta' lambda^2.
inline ErrorModelParams fit_alpha_beta(const Curve& ideal_curve, const Curve& noisy_curve, std::size_t M,
                                       std::size_t N = 5) {
    detail::check_fit_input(ideal_curve, "ideal curve");
    detail::check_fit_input(noisy_curve, "noisy curve");
    if (M == 0) throw DomainError("fit_alpha_beta: M must be > 0");

    double sxy = 0.0, sxx = 0.0;
    for (const auto& [l, f] : ideal_curve) {
        const double x = double(M) * double(M) * l * l;
        sxy += x * (1.0 - f);
        sxx += x * x;
    }
    ErrorModelParams p;
    p.N = N;
    p.alpha = sxy / sxx;
    p.beta_prime = 0.0;

    // Normal equations for y = beta*l + c*l^2 (c = -beta').
    double s11 = 0.0, s12 = 0.0, s22 = 0.0, t1 = 0.0, t2 = 0.0;
    for (const auto& [l, f] : noisy_curve) {
        const double y = 1.0 - f / p.f_storage(l, M);
        const double a = l, b = l * l;
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        t1 += a * y;
        t2 += b * y;
    }
    const double det = s11 * s22 - s12 * s12;
    if (!(std::abs(det) > 0.0)) throw DomainError("fit_alpha_beta: degenerate lambda set");
    p.beta = (t1 * s22 - t2 * s12) / det;
    p.beta_prime = -(s11 * t2 - s12 * t1) / det;
    return p;
}

/// lambda -> 0 limit of (1 - F)/lambda from the two smallest nonzero lambda samples
/// (linear Richardson step). Needs two distinct positive lambdas.
inline double extrapolated_slope(const Curve& samples) {
    Curve pos;
    for (const auto& s : samples) {
        if (s.first > 0.0) pos.push_back(s);
    }
    if (pos.size() < 2) throw DomainError("extrapolated_slope: need two positive lambda values");
    std::sort(pos.begin(), pos.end());
    const auto [l1, f1] = pos[0];
    const auto [l2, f2] = pos[1];
    if (l1 == l2) throw DomainError("extrapolated_slope: lambda values must differ");
    const double s1 = (1.0 - f1) / l1;
    const double s2 = (1.0 - f2) / l2;
    return (l2 * s1 - l1 * s2) / (l2 - l1);
}

}  // namespace pqubit
