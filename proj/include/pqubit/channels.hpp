#pragma once

// Kraus-operator channels: construction and application to density matrices
// and to direct-sum (single-wavefunction) mixed states.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pqubit/qmath.hpp"

namespace pqubit {

/// Branches whose squared norm falls below this are dropped.
inline constexpr double kBranchPruneNorm2 = 1e-30;

/// An ordered set of operators A_k with Sum A_k^dag A_k = I on the declared support.
class KrausChannel {
public:
    KrausChannel() = default;
    KrausChannel(std::vector<ComplexMatrix> operators, std::string label,
                 std::vector<Eigen::Index> support = {})
        : ops_(std::move(operators)), label_(std::move(label)), support_(std::move(support)) {
        if (ops_.empty()) throw DimensionError("KrausChannel: no operators");
        const auto d = ops_.front().rows();
        for (const auto& a : ops_) {
            if (a.rows() != d || a.cols() != d) throw DimensionError("KrausChannel: operators differ in shape");
        }
        for (auto s : support_) {
            if (s < 0 || s >= d) throw DimensionError("KrausChannel: support index out of range");
        }
    }

    const std::vector<ComplexMatrix>& operators() const { return ops_; }
    const ComplexMatrix& operator[](std::size_t k) const { return ops_[k]; }
    std::size_t size() const { return ops_.size(); }
    const std::string& label() const { return label_; }
    Eigen::Index dimension() const { return ops_.empty() ? 0 : ops_.front().rows(); }

    /// Basis indices spanning the subspace where completeness is promised.
    /// Empty means the whole space.
    const std::vector<Eigen::Index>& support() const { return support_; }
    bool full_support() const { return support_.empty(); }

    ComplexMatrix completeness_sum() const {
        ComplexMatrix s = ComplexMatrix::Zero(dimension(), dimension());
        for (const auto& a : ops_) s.noalias() += a.adjoint() * a;
        return s;
    }

    /// max |(Sum A^dag A - I)_{ij}| over i, j in the support.
    double completeness_residual() const {
        const ComplexMatrix s = completeness_sum();
        const ComplexMatrix id = ComplexMatrix::Identity(dimension(), dimension());
        if (full_support()) return max_abs_diff(s, id);
        double r = 0.0;
        for (auto i : support_) {
            for (auto j : support_) r = std::max(r, std::abs(s(i, j) - id(i, j)));
        }
        return r;
    }

    /// Conjugates every operator by u: A_k -> u A_k u^dag.
    KrausChannel in_frame(const ComplexMatrix& u, std::string label) const {
        std::vector<ComplexMatrix> ops;
        ops.reserve(ops_.size());
        for (const auto& a : ops_) ops.push_back(u * a * u.adjoint());
        return {std::move(ops), std::move(label), support_};
    }

    /// Lifts the channel onto `on_qubits` of an n-qubit register.
    KrausChannel embedded(std::span<const std::size_t> on_qubits, std::size_t total_qubits) const {
        std::vector<ComplexMatrix> ops;
        ops.reserve(ops_.size());
        for (const auto& a : ops_) ops.push_back(embed_operator(a, on_qubits, total_qubits));
        return {std::move(ops), label_};
    }
    KrausChannel embedded(std::initializer_list<std::size_t> on_qubits, std::size_t total_qubits) const {
        return embedded(std::span<const std::size_t>(on_qubits.begin(), on_qubits.size()), total_qubits);
    }

private:
    std::vector<ComplexMatrix> ops_;
    std::string label_;
    std::vector<Eigen::Index> support_;
};

/// Damping parameters and the probabilities derived from them.
struct DampingParams {
    double lambda = 0.0;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    double gamma = 0.0;

    /// No-flip probability (1 + e^-lambda)/2.
    double alpha() const { return 0.5 * (1.0 + std::exp(-lambda)); }
    /// Upward transition probability 1 - e^-gamma0.
    double p() const { return -std::expm1(-gamma0); }
    /// Downward transition probability 1 - e^-gamma1.
    double q() const { return -std::expm1(-gamma1); }
};

inline double alpha_from_lambda(double lambda) { return DampingParams{lambda}.alpha(); }

inline ComplexMatrix apply_to_density(const KrausChannel& ch, const ComplexMatrix& rho) {
    if (rho.rows() != ch.dimension() || rho.cols() != ch.dimension()) {
        throw DimensionError("apply_to_density: channel '" + ch.label() + "' has dimension " +
                             std::to_string(ch.dimension()) + ", state has " + std::to_string(rho.rows()));
    }
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (const auto& a : ch.operators()) out.noalias() += a * rho * a.adjoint();
    return out;
}

inline MixedState apply_to_mixed(const KrausChannel& ch, const MixedState& psi) {
    if (psi.dimension() != ch.dimension()) {
        throw DimensionError("apply_to_mixed: dimension mismatch for channel '" + ch.label() + "'");
    }
    std::vector<StateVector> out;
    out.reserve(psi.size() * ch.size());
    for (const auto& branch : psi.branches()) {
        for (const auto& a : ch.operators()) {
            StateVector b = a * branch;
            if (b.squaredNorm() >= kBranchPruneNorm2) out.push_back(std::move(b));
        }
    }
    return MixedState(std::move(out));
}

enum class PhaseDampingForm {
    computational_dephasing,  // {diag(1, e^-l), diag(0, sqrt(1 - e^-2l))}
    bell_bitflip,             // {sqrt(a) I, sqrt(1-a) sigma_x}, Bell-basis representation
    pauli_dephasing,          // {sqrt(a) I, sqrt(1-a) sigma_z}
};

inline KrausChannel phase_damping_1q(double lambda, PhaseDampingForm form = PhaseDampingForm::computational_dephasing) {
    if (!(lambda >= 0.0) || std::isinf(lambda)) throw DomainError("phase_damping_1q: lambda must be finite and >= 0");
    const double a = alpha_from_lambda(lambda);
    switch (form) {
        case PhaseDampingForm::computational_dephasing: {
            ComplexMatrix a0 = ComplexMatrix::Zero(2, 2);
            a0(0, 0) = 1.0;
            a0(1, 1) = std::exp(-lambda);
            ComplexMatrix a1 = ComplexMatrix::Zero(2, 2);
            a1(1, 1) = std::sqrt(-std::expm1(-2.0 * lambda));
            return {{a0, a1}, "phase"};
        }
        case PhaseDampingForm::bell_bitflip:
            return {{std::sqrt(a) * pauli::identity(), std::sqrt(1.0 - a) * pauli::x()}, "phase-bell"};
        case PhaseDampingForm::pauli_dephasing:
            return {{std::sqrt(a) * pauli::identity(), std::sqrt(1.0 - a) * pauli::z()}, "phase-pauli"};
    }
    throw DomainError("phase_damping_1q: unknown form");
}

/// Probability C(n, m) alpha^{n-m} (1-alpha)^m that exactly m of n bits flip.
inline double flip_count_prob(std::size_t n, std::size_t m, double alpha) {
    if (m > n) throw DomainError("flip_count_prob: m > n");
    double binom = 1.0;
    for (std::size_t i = 1; i <= m; ++i) binom = binom * double(n - m + i) / double(i);
    return binom * std::pow(alpha, double(n - m)) * std::pow(1.0 - alpha, double(m));
}

namespace detail {

inline void check_alpha(double alpha, const char* who) {
    if (!(alpha >= 0.5 && alpha <= 1.0)) {
        throw DomainError(std::string(who) + ": alpha must lie in [1/2, 1]");
    }
}

inline double flip_pattern_weight(std::size_t n, std::uint64_t k, double alpha) {
    const int h = std::popcount(k);
    return std::sqrt(std::pow(alpha, double(n) - h) * std::pow(1.0 - alpha, double(h)));
}

}  // namespace detail

/// Phase damping of n qubits in the Bell-basis representation: 2^n operators,
/// one per flip pattern k, weighted by sqrt(alpha^{n-h(k)} (1-alpha)^{h(k)}).
inline KrausChannel phase_damping_nq(std::size_t n, double alpha) {
    if (n < 1 || n > 10) throw DomainError("phase_damping_nq: n must be in [1, 10]");
    detail::check_alpha(alpha, "phase_damping_nq");
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<ComplexMatrix> ops;
    ops.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        ComplexMatrix op = ComplexMatrix::Identity(1, 1);
        for (std::size_t q = n; q-- > 0;) {
            op = tensor_product(op, ((k >> q) & 1u) ? pauli::x() : pauli::identity());
        }
        ops.push_back(detail::flip_pattern_weight(n, k, alpha) * op);
    }
    return {std::move(ops), "phase-nq"};
}

/// Same map as apply_to_mixed(phase_damping_nq(n, alpha), psi) without building
/// the 2^n operators: each branch is permuted by index XOR k and rescaled.
inline MixedState phase_damping_apply_fast(const MixedState& psi, double alpha) {
    detail::check_alpha(alpha, "phase_damping_apply_fast");
    if (psi.empty()) return psi;
    const std::size_t n = qubit_count(psi.dimension());
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<StateVector> out;
    out.reserve(psi.size() * count);
    for (const auto& branch : psi.branches()) {
        for (std::uint64_t k = 0; k < count; ++k) {
            const double w = detail::flip_pattern_weight(n, k, alpha);
            if (w * w * branch.squaredNorm() < kBranchPruneNorm2) continue;
            StateVector b(branch.size());
            for (Eigen::Index i = 0; i < branch.size(); ++i) {
                b(static_cast<Eigen::Index>(static_cast<std::uint64_t>(i) ^ k)) = w * branch(i);
            }
            out.push_back(std::move(b));
        }
    }
    return MixedState(std::move(out));
}

/// Finite-temperature amplitude damping {sqrt(p)|1><0|, sqrt(1-p)|0><0| + sqrt(1-q)|1><1|, sqrt(q)|0><1|}.
inline KrausChannel amplitude_damping_1q(double gamma0, double gamma1) {
    if (!(gamma0 >= 0.0) || !(gamma1 >= 0.0)) throw DomainError("amplitude_damping_1q: exponents must be >= 0");
    const DampingParams dp{0.0, gamma0, gamma1};
    const double p = dp.p();
    const double q = dp.q();
    ComplexMatrix up = ComplexMatrix::Zero(2, 2);
    up(1, 0) = std::sqrt(p);
    ComplexMatrix stay = ComplexMatrix::Zero(2, 2);
    stay(0, 0) = std::sqrt(1.0 - p);
    stay(1, 1) = std::sqrt(1.0 - q);
    ComplexMatrix down = ComplexMatrix::Zero(2, 2);
    down(0, 1) = std::sqrt(q);
    return {{up, stay, down}, "amplitude"};
}

struct StationaryState {
    ComplexMatrix rho;
    /// k_B T / Delta E. +inf when p == q, 0 when p == 0, -0 when q == 0.
    double temperature = 0.0;
};

inline StationaryState amplitude_damping_stationary(double gamma0, double gamma1) {
    if (!(gamma0 >= 0.0) || !(gamma1 >= 0.0)) throw DomainError("amplitude_damping_stationary: exponents must be >= 0");
    const DampingParams dp{0.0, gamma0, gamma1};
    const double p = dp.p();
    const double q = dp.q();
    if (p + q <= 0.0) throw DomainError("amplitude_damping_stationary: p = q = 0, no unique stationary state");
    StationaryState s;
    s.rho = ComplexMatrix::Zero(2, 2);
    s.rho(0, 0) = q / (p + q);
    s.rho(1, 1) = p / (p + q);
    if (p == q) {
        s.temperature = std::numeric_limits<double>::infinity();
    } else if (p == 0.0) {
        s.temperature = 0.0;
    } else if (q == 0.0) {
        s.temperature = -0.0;
    } else {
        s.temperature = 1.0 / std::log(q / p);
    }
    return s;
}

/// Balanced loss of a dual-rail photon a|01> + b|10> on the two-mode space
/// {|00>, |01>, |10>, |11>}. Completeness holds on span{|00>, |01>, |10>}.
inline KrausChannel dual_rail_channel(double gamma) {
    if (!(gamma >= 0.0)) throw DomainError("dual_rail_channel: gamma must be >= 0");
    const double keep = std::exp(-gamma);
    const double lose = std::sqrt(-std::expm1(-gamma));
    ComplexMatrix survive = std::sqrt(keep) * ComplexMatrix::Identity(4, 4);
    ComplexMatrix from01 = ComplexMatrix::Zero(4, 4);
    from01(0b00, 0b01) = lose;
    ComplexMatrix from10 = ComplexMatrix::Zero(4, 4);
    from10(0b00, 0b10) = lose;
    ComplexMatrix vacuum = ComplexMatrix::Zero(4, 4);
    vacuum(0b00, 0b00) = lose;
    return {{survive, from01, from10, vacuum}, "dual-rail", {0b00, 0b01, 0b10}};
}

}  // namespace pqubit
