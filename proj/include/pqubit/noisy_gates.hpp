#pragma once

// Noisy logic gates: the system is evolved together with one environment
// qubit per system qubit under H = H_logic + H_env, and the environment is
// projected onto its basis states to give the gate's Kraus operators.
//
// Joint register layout: system qubits are the high-order bits, environment
// qubits the low-order bits, with environment qubit j paired to system qubit j
// (counted from the low end of each block).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pqubit/channels.hpp"
#include "pqubit/qmath.hpp"

namespace pqubit {

enum class DampingKind { phase, amplitude };

inline std::string to_string(DampingKind k) { return k == DampingKind::phase ? "phase" : "amplitude"; }

enum class RotationSense { forward, inverse };

/// Input states over which a gate's fidelity is minimized.
enum class FidelityDomain {
    real_product,  // product states with real amplitudes
    full,          // complex product states plus a seeded sample of entangled states
};

inline constexpr std::uint64_t kDefaultSeed = 1996;
inline constexpr std::size_t kEntangledSamples = 1000;

/// Amplitude coupling is scaled so that, with the logic term switched off,
/// <1|A_0|1> = cos(chi) = e^-lambda, the same survival amplitude as phase damping.
inline constexpr double kAmplitudeCouplingScale = 0.5;

struct NoisyGate {
    KrausChannel kraus;
    ComplexMatrix ideal;
    DampingKind damping_kind = DampingKind::phase;
    double chi = 0.0;
    double lambda = 0.0;
    /// Joint system (x) environment unitary the Kraus set was read from.
    ComplexMatrix joint_unitary;
    std::size_t system_qubits = 1;
};

/// Environment coupling angle for a decoherence-per-timestep lambda (first Rabi cycle).
inline double chi_from_lambda(double lambda, DampingKind /*kind*/ = DampingKind::phase) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw DomainError("chi_from_lambda: lambda must be finite and >= 0 (chi must stay below pi/2)");
    }
    const double chi = std::acos(std::exp(-lambda));
    if (!(chi < std::numbers::pi / 2)) throw DomainError("chi_from_lambda: chi reaches pi/2");
    return chi;
}

/// exp(i (pi/4) sigma_y) = (1/sqrt2)[[1, 1], [-1, 1]].
inline ComplexMatrix ideal_rotation() {
    ComplexMatrix r(2, 2);
    const double s = 1.0 / std::numbers::sqrt2;
    r << s, s, -s, s;
    return r;
}

/// Controlled-not, control = high qubit, target = low qubit.
inline ComplexMatrix ideal_cnot() {
    ComplexMatrix c = ComplexMatrix::Zero(4, 4);
    c(0, 0) = 1.0;
    c(1, 1) = 1.0;
    c(2, 3) = 1.0;
    c(3, 2) = 1.0;
    return c;
}

/// (pi/4)(1 - sigma_z^a)(sigma_x^b - 1); its exponential is ideal_cnot().
inline ComplexMatrix cnot_hamiltonian() {
    const ComplexMatrix id = pauli::identity();
    return (std::numbers::pi / 4.0) * tensor_product(ComplexMatrix(id - pauli::z()), ComplexMatrix(pauli::x() - id));
}

/// Two-qubit (system high, environment low) coupling Hamiltonian.
inline ComplexMatrix environment_coupling(DampingKind kind, double chi) {
    const ComplexMatrix id = pauli::identity();
    if (kind == DampingKind::phase) {
        return (chi / 2.0) * tensor_product(ComplexMatrix(id - pauli::z()), pauli::y());
    }
    const Complex i(0.0, 1.0);
    const ComplexMatrix raise = pauli::x() + i * pauli::y();
    const ComplexMatrix lower = pauli::x() - i * pauli::y();
    return kAmplitudeCouplingScale * (chi / 2.0) *
           (tensor_product(lower, raise) + tensor_product(raise, lower));
}

/// A_k = <k_env| U |env_init> for a unitary on (system qubits) (x) (environment qubits).
inline KrausChannel kraus_from_joint_unitary(const ComplexMatrix& u, std::size_t system_qubits,
                                             std::size_t env_qubits, std::uint64_t env_init,
                                             std::string label) {
    const Eigen::Index sd = Eigen::Index{1} << system_qubits;
    const Eigen::Index ed = Eigen::Index{1} << env_qubits;
    if (u.rows() != sd * ed || u.cols() != sd * ed) throw DimensionError("kraus_from_joint_unitary: size mismatch");
    const auto init = static_cast<Eigen::Index>(env_init);
    std::vector<ComplexMatrix> ops;
    ops.reserve(static_cast<std::size_t>(ed));
    for (Eigen::Index k = 0; k < ed; ++k) {
        ComplexMatrix a(sd, sd);
        for (Eigen::Index i = 0; i < sd; ++i) {
            for (Eigen::Index j = 0; j < sd; ++j) a(i, j) = u(i * ed + k, j * ed + init);
        }
        ops.push_back(std::move(a));
    }
    return {std::move(ops), std::move(label)};
}

inline NoisyGate noisy_rotation(double lambda, DampingKind kind, RotationSense sense = RotationSense::forward) {
    const double chi = chi_from_lambda(lambda, kind);
    const double sign = sense == RotationSense::forward ? 1.0 : -1.0;
    const ComplexMatrix h = sign * (std::numbers::pi / 4.0) * tensor_product(pauli::y(), pauli::identity()) +
                            environment_coupling(kind, chi);
    NoisyGate g;
    g.joint_unitary = unitary_from_hamiltonian(h);
    g.kraus = kraus_from_joint_unitary(g.joint_unitary, 1, 1, 0,
                                       sense == RotationSense::forward ? "R" : "Rbar");
    g.ideal = sense == RotationSense::forward ? ideal_rotation() : ComplexMatrix(ideal_rotation().adjoint());
    g.damping_kind = kind;
    g.chi = chi;
    g.lambda = lambda;
    g.system_qubits = 1;
    return g;
}

inline NoisyGate noisy_cnot(double lambda, DampingKind kind) {
    const double chi = chi_from_lambda(lambda, kind);
    // Register: a = 3, b = 2, e_a = 1, e_b = 0.
    const ComplexMatrix coupling = environment_coupling(kind, chi);
    const ComplexMatrix h = tensor_product(cnot_hamiltonian(), ComplexMatrix::Identity(4, 4)) +
                            embed_operator(coupling, {3, 1}, 4) + embed_operator(coupling, {2, 0}, 4);
    NoisyGate g;
    g.joint_unitary = unitary_from_hamiltonian(h);
    g.kraus = kraus_from_joint_unitary(g.joint_unitary, 2, 2, 0, "CN");
    g.ideal = ideal_cnot();
    g.damping_kind = kind;
    g.chi = chi;
    g.lambda = lambda;
    g.system_qubits = 2;
    return g;
}

/// Sum_k |<psi| ideal^dag A_k |psi>|^2 for a normalized pure input.
inline double gate_state_fidelity(const NoisyGate& g, const StateVector& psi) {
    double f = 0.0;
    for (const auto& a : g.kraus.operators()) f += std::norm((psi.adjoint() * g.ideal.adjoint() * a * psi)(0, 0));
    return f;
}

/// Haar-distributed pure states of the given dimension (normalized complex Gaussians).
inline std::vector<StateVector> haar_states(Eigen::Index dim, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<StateVector> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        StateVector v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            v(i) = Complex(re, im);
        }
        out.push_back(v / v.norm());
    }
    return out;
}

struct GateFidelity {
    double fidelity = 1.0;
    StateVector minimizer;
};

namespace detail {

inline StateVector real_qubit(double theta) {
    StateVector v(2);
    v << std::cos(theta / 2.0), std::sin(theta / 2.0);
    return v;
}

}  // namespace detail

/// Minimum over the chosen input domain of the gate's overlap with the ideal output.
inline GateFidelity gate_fidelity_detail(const NoisyGate& g, FidelityDomain domain = FidelityDomain::real_product,
                                         std::uint64_t seed = kDefaultSeed) {
    // Precompute ideal^dag A_k once.
    std::vector<ComplexMatrix> overlaps;
    for (const auto& a : g.kraus.operators()) overlaps.push_back(g.ideal.adjoint() * a);
    auto fid = [&](const StateVector& psi) {
        double f = 0.0;
        for (const auto& b : overlaps) f += std::norm(psi.dot(b * psi));
        return f;
    };
    constexpr double two_pi = 2.0 * std::numbers::pi;
    GateFidelity best;
    if (g.system_qubits == 1) {
        if (domain == FidelityDomain::real_product) {
            RefineOptions opt;
            opt.grid_per_axis = 256;
            auto m = minimize_angles<1>([&](const std::array<double, 1>& a) { return fid(detail::real_qubit(a[0])); },
                                        {{{0.0, two_pi}}}, opt);
            return {m.value, detail::real_qubit(m.angles[0])};
        }
        auto m = min_fidelity_over_inputs([&](const BlochPoint& b) { return fid(b.state()); });
        return {m.fidelity, m.input.state()};
    }
    if (g.system_qubits != 2) throw DimensionError("gate_fidelity: only 1- and 2-qubit gates are supported");

    if (domain == FidelityDomain::real_product) {
        auto state = [](const std::array<double, 2>& a) {
            return tensor_product(detail::real_qubit(a[0]), detail::real_qubit(a[1]));
        };
        RefineOptions opt;
        opt.grid_per_axis = 64;
        auto m = minimize_angles<2>([&](const auto& a) { return fid(state(a)); }, {{{0.0, two_pi}, {0.0, two_pi}}}, opt);
        return {m.value, state(m.angles)};
    }

    auto state = [](const std::array<double, 4>& a) {
        return tensor_product(BlochPoint{a[0], a[1]}.state(), BlochPoint{a[2], a[3]}.state());
    };
    RefineOptions opt;
    opt.grid_per_axis = 12;
    opt.seeds = 8;
    constexpr double pi = std::numbers::pi;
    auto m = minimize_angles<4>([&](const auto& a) { return fid(state(a)); },
                                {{{0.0, pi}, {0.0, two_pi}, {0.0, pi}, {0.0, two_pi}}}, opt);
    best = {m.value, state(m.angles)};
    for (const auto& psi : haar_states(4, kEntangledSamples, seed)) {
        const double f = fid(psi);
        if (f < best.fidelity) best = {f, psi};
    }
    return best;
}

inline double gate_fidelity(const NoisyGate& g, FidelityDomain domain = FidelityDomain::real_product,
                            std::uint64_t seed = kDefaultSeed) {
    return gate_fidelity_detail(g, domain, seed).fidelity;
}

}  // namespace pqubit
