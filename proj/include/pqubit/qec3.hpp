#pragma once

// Three-qubit phase-damping code and the persistent-qubit cycle.
//
// Register: data on qubit 2 (high bit), syndrome ancillas on qubits 1 and 0.
// Codewords are |---> and |+++>; encoding runs CN(2->1), CN(2->0), then R on
// every qubit. Decoding runs Rbar on every qubit, CN(2->1), CN(2->0), and reads
// the syndrome s = 2*b1 + b0 from the ancillas.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pqubit/channels.hpp"
#include "pqubit/noisy_gates.hpp"
#include "pqubit/qmath.hpp"

namespace pqubit {

inline constexpr std::size_t kCodeQubits = 3;
inline constexpr std::size_t kDataQubit = 2;
inline constexpr std::size_t kCircuitTimesteps = 5;

enum class CorrectionAction { none, flip_qubit0, flip_qubit1, flip_qubit2 };

struct SyndromeRow {
    std::string_view codeword_a;  // Bell-basis string, qubit 2 first
    std::string_view codeword_b;
    unsigned syndrome;
    CorrectionAction action;
};

struct SyndromeTable {
    static constexpr std::array<CorrectionAction, 4> actions{CorrectionAction::none, CorrectionAction::flip_qubit0,
                                                             CorrectionAction::flip_qubit1,
                                                             CorrectionAction::flip_qubit2};

    static CorrectionAction action(unsigned syndrome) {
        if (syndrome > 3) throw DimensionError("SyndromeTable: syndrome must be 2 bits");
        return actions[syndrome];
    }

    /// The eight Bell-basis strings grouped by syndrome, bit complements paired.
    static constexpr std::array<SyndromeRow, 4> rows() {
        return {{{"---", "+++", 0, CorrectionAction::none},
                 {"--+", "++-", 1, CorrectionAction::flip_qubit0},
                 {"-+-", "+-+", 2, CorrectionAction::flip_qubit1},
                 {"+--", "-++", 3, CorrectionAction::flip_qubit2}}};
    }
};

inline std::size_t flipped_qubit(CorrectionAction a) {
    switch (a) {
        case CorrectionAction::flip_qubit0: return 0;
        case CorrectionAction::flip_qubit1: return 1;
        case CorrectionAction::flip_qubit2: return 2;
        case CorrectionAction::none: break;
    }
    throw DomainError("flipped_qubit: no flip for this action");
}

enum class CycleMode { ideal, lumped_phase, continuous_phase, continuous_amplitude };

inline std::string to_string(CycleMode m) {
    switch (m) {
        case CycleMode::ideal: return "ideal";
        case CycleMode::lumped_phase: return "lumped-phase";
        case CycleMode::continuous_phase: return "continuous-phase";
        case CycleMode::continuous_amplitude: return "continuous-amplitude";
    }
    return "?";
}

inline std::optional<CycleMode> parse_cycle_mode(std::string_view s) {
    for (auto m : {CycleMode::ideal, CycleMode::lumped_phase, CycleMode::continuous_phase,
                   CycleMode::continuous_amplitude}) {
        if (s == to_string(m)) return m;
    }
    return std::nullopt;
}

struct CycleConfig {
    double lambda = 0.0;
    std::size_t M = 0;
    CycleMode mode = CycleMode::ideal;
    std::size_t cycles = 1;
    /// Inputs minimized over: real amplitudes by default, or the whole Bloch sphere.
    FidelityDomain inputs = FidelityDomain::real_product;
    /// One timestep of data-qubit damping during the measurement step (continuous modes).
    bool t3_idle_damping = false;

    void validate() const {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("CycleConfig: lambda must be finite and >= 0");
        if (cycles < 1) throw DomainError("CycleConfig: cycles must be >= 1");
    }
};

struct CycleResult {
    double f_cycle = 1.0;
    double f_single = 1.0;
    double f_ideal = 1.0;
    std::optional<double> lambda_eff;  // empty when F_cycle <= 1/2
    BlochPoint min_input;
    std::size_t elapsed_timesteps = 0;
};

// ---------------------------------------------------------------------------
// Closed forms

/// Ideal-circuit fidelity after one cycle with M storage steps.
inline double f_ideal(double lambda, std::size_t M) {
    if (!(lambda >= 0.0)) throw DomainError("f_ideal: lambda must be >= 0");
    const double ml = double(M) * lambda;
    return (2.0 - std::exp(-3.0 * ml) + 3.0 * std::exp(-ml)) / 4.0;
}

/// Ideal fidelity after n cycles; each ideal cycle is a data bit flip with probability 1 - f_ideal.
inline double f_ideal_cycles(double lambda, std::size_t M, std::size_t n) {
    return 0.5 * (1.0 + std::pow(2.0 * f_ideal(lambda, M) - 1.0, double(n)));
}

/// Unprotected qubit exposed for t timesteps.
inline double f_single_at_time(double lambda, double t) {
    if (!(lambda >= 0.0)) throw DomainError("f_single: lambda must be >= 0");
    return 0.5 * (1.0 + std::exp(-lambda * t));
}

inline double f_single(double lambda, std::size_t M) {
    return f_single_at_time(lambda, double(M + kCircuitTimesteps));
}

/// -(1/t) ln(2F - 1); empty when 2F - 1 <= 0.
inline std::optional<double> lambda_eff_from_fidelity(double f, double timesteps) {
    const double arg = 2.0 * f - 1.0;
    if (!(arg > 0.0) || !(timesteps > 0.0)) return std::nullopt;
    return -std::log(std::min(arg, 1.0)) / timesteps;
}

// ---------------------------------------------------------------------------
// States

/// Product of single-qubit Bell states, e.g. "+--" (qubit 2 first).
inline StateVector bell_product(std::string_view signs) {
    StateVector out = StateVector::Ones(1);
    const double s = 1.0 / std::numbers::sqrt2;
    for (char c : signs) {
        StateVector q(2);
        if (c == '+') {
            q << s, s;
        } else if (c == '-') {
            q << s, -s;
        } else {
            throw DomainError("bell_product: expected '+' or '-'");
        }
        out = tensor_product(out, q);
    }
    return out;
}

/// a|---> + b|+++>.
inline StateVector codeword(Complex a, Complex b) { return a * bell_product("---") + b * bell_product("+++"); }

namespace detail {

inline ComplexMatrix syndrome_projector(unsigned s) {
    ComplexMatrix p = ComplexMatrix::Zero(8, 8);
    for (unsigned d = 0; d < 2; ++d) p((d << 2) | s, (d << 2) | s) = 1.0;
    return p;
}

inline ComplexMatrix reset_syndrome_bits(unsigned s) {
    ComplexMatrix x = ComplexMatrix::Identity(8, 8);
    if (s & 2u) x = embed_operator(pauli::x(), {1}, 3) * x;
    if (s & 1u) x = embed_operator(pauli::x(), {0}, 3) * x;
    return x;
}

}  // namespace detail

/// Measure the syndrome, apply the table's flip, and return the ancillas to |00>.
inline KrausChannel correction_channel() {
    std::vector<ComplexMatrix> ops;
    for (unsigned s = 0; s < 4; ++s) {
        const auto action = SyndromeTable::action(s);
        ComplexMatrix flip = ComplexMatrix::Identity(8, 8);
        unsigned residual = s;
        if (action != CorrectionAction::none) {
            const auto q = flipped_qubit(action);
            flip = embed_operator(pauli::x(), {q}, 3);
            if (q < 2) residual ^= 1u << q;
        }
        ops.push_back(detail::reset_syndrome_bits(residual) * flip * detail::syndrome_projector(s));
    }
    return {std::move(ops), "correct"};
}

// ---------------------------------------------------------------------------
// Cycle circuit

/// Linear map on single-qubit operators, stored as the images of |i><j|.
class SingleQubitMap {
public:
    SingleQubitMap() {
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                ComplexMatrix e = ComplexMatrix::Zero(2, 2);
                e(i, j) = 1.0;
                images_[std::size_t(2 * i + j)] = e;
            }
        }
    }
    explicit SingleQubitMap(std::array<ComplexMatrix, 4> images) : images_(std::move(images)) {}

    ComplexMatrix apply(const ComplexMatrix& rho) const {
        ComplexMatrix out = ComplexMatrix::Zero(2, 2);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) out += rho(i, j) * images_[std::size_t(2 * i + j)];
        }
        return out;
    }

    /// this after other.
    SingleQubitMap after(const SingleQubitMap& other) const {
        std::array<ComplexMatrix, 4> im;
        for (std::size_t k = 0; k < 4; ++k) im[k] = apply(other.images_[k]);
        return SingleQubitMap(std::move(im));
    }

    SingleQubitMap power(std::size_t n) const {
        SingleQubitMap out;
        for (std::size_t i = 0; i < n; ++i) out = after(out);
        return out;
    }

    double fidelity(const StateVector& psi) const { return overlap_fidelity(apply(projector(psi)), psi); }

    /// real_product restricts inputs to real amplitudes (the x-z great circle).
    FidelityMinimum min_fidelity(FidelityDomain domain = FidelityDomain::real_product) const {
        if (domain == FidelityDomain::full) {
            return min_fidelity_over_inputs([this](const BlochPoint& b) { return fidelity(b.state()); });
        }
        RefineOptions opt;
        opt.grid_per_axis = 256;
        const auto m = minimize_angles<1>(
            [this](const std::array<double, 1>& a) { return fidelity(BlochPoint{a[0], 0.0}.state()); },
            {{{0.0, 2.0 * std::numbers::pi}}}, opt);
        return {BlochPoint::normalized(m.angles[0], 0.0), m.value};
    }

    const ComplexMatrix& image(std::size_t i, std::size_t j) const { return images_[2 * i + j]; }

private:
    std::array<ComplexMatrix, 4> images_;
};

class CycleCircuit {
public:
    CycleCircuit(CycleMode mode, double lambda, bool t3_idle_damping = false)
        : mode_(mode), lambda_(lambda), correction_(correction_channel()) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("CycleCircuit: lambda must be finite and >= 0");
        const bool ideal_gates = mode == CycleMode::ideal || mode == CycleMode::lumped_phase;
        const auto kind = mode == CycleMode::continuous_amplitude ? DampingKind::amplitude : DampingKind::phase;

        KrausChannel cn = ideal_gates ? KrausChannel({ideal_cnot()}, "CN") : noisy_cnot(lambda, kind).kraus;
        KrausChannel r = ideal_gates ? KrausChannel({ideal_rotation()}, "R")
                                     : noisy_rotation(lambda, kind, RotationSense::forward).kraus;
        KrausChannel rbar = ideal_gates ? KrausChannel({ComplexMatrix(ideal_rotation().adjoint())}, "Rbar")
                                        : noisy_rotation(lambda, kind, RotationSense::inverse).kraus;

        auto lump = [&](std::vector<KrausChannel>& steps) {
            if (mode != CycleMode::lumped_phase) return;
            for (std::size_t q = 0; q < kCodeQubits; ++q) steps.push_back(phase_damping_1q(lambda).embedded({q}, 3));
        };

        // T4, T5
        encode_.push_back(cn.embedded({2, 1}, 3));
        lump(encode_);
        encode_.push_back(cn.embedded({2, 0}, 3));
        lump(encode_);
        for (std::size_t q = 0; q < kCodeQubits; ++q) encode_.push_back(r.embedded({q}, 3));
        lump(encode_);

        // T1, T2
        for (std::size_t q = 0; q < kCodeQubits; ++q) decode_.push_back(rbar.embedded({q}, 3));
        lump(decode_);
        decode_.push_back(cn.embedded({2, 1}, 3));
        lump(decode_);
        decode_.push_back(cn.embedded({2, 0}, 3));
        lump(decode_);

        // T3
        if (t3_idle_damping && !ideal_gates) {
            after_correction_.push_back(kind == DampingKind::phase
                                            ? phase_damping_1q(lambda).embedded({kDataQubit}, 3)
                                            : amplitude_damping_1q(0.0, 2.0 * lambda).embedded({kDataQubit}, 3));
        }
    }

    CycleMode mode() const { return mode_; }
    double lambda() const { return lambda_; }

    /// Data qubit state -> encoded 3-qubit state (ancillas start in |00>).
    ComplexMatrix encode(const ComplexMatrix& rho_data) const {
        ComplexMatrix rho = tensor_product(rho_data, projector(basis_state(2, 0)));
        for (const auto& ch : encode_) rho = apply_to_density(ch, rho);
        return rho;
    }

    ComplexMatrix store(const ComplexMatrix& rho, std::size_t M) const {
        if (M == 0 || lambda_ == 0.0) return rho;
        // Bell-basis bit flips are sigma_z flips in the computational frame.
        const auto ch = phase_damping_nq(kCodeQubits, alpha_from_lambda(double(M) * lambda_))
                            .in_frame(tensor_power(pauli::hadamard(), kCodeQubits), "storage");
        return apply_to_density(ch, rho);
    }

    ComplexMatrix decode_and_correct(const ComplexMatrix& rho_in) const {
        ComplexMatrix rho = rho_in;
        for (const auto& ch : decode_) rho = apply_to_density(ch, rho);
        rho = apply_to_density(correction_, rho);
        for (const auto& ch : after_correction_) rho = apply_to_density(ch, rho);
        return rho;
    }

    /// Syndrome probabilities after the decoding gates, before correction.
    std::array<double, 4> syndrome_distribution(const ComplexMatrix& rho_in) const {
        ComplexMatrix rho = rho_in;
        for (const auto& ch : decode_) rho = apply_to_density(ch, rho);
        std::array<double, 4> p{};
        for (unsigned s = 0; s < 4; ++s) p[s] = (detail::syndrome_projector(s) * rho).trace().real();
        return p;
    }

    /// Full cycle (encode, store M steps, decode and correct) as a map on the data qubit.
    SingleQubitMap cycle_map(std::size_t M) const {
        std::array<ComplexMatrix, 4> im;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                ComplexMatrix e = ComplexMatrix::Zero(2, 2);
                e(i, j) = 1.0;
                const ComplexMatrix out = decode_and_correct(store(encode(e), M));
                im[std::size_t(2 * i + j)] = partial_trace(out, 3, {1, 0});
            }
        }
        return SingleQubitMap(std::move(im));
    }

private:
    CycleMode mode_;
    double lambda_;
    std::vector<KrausChannel> encode_;
    std::vector<KrausChannel> decode_;
    KrausChannel correction_;
    std::vector<KrausChannel> after_correction_;
};

// ---------------------------------------------------------------------------
// Ideal-circuit helpers

inline StateVector encode(const StateVector& psi) {
    if (psi.size() != 2) throw DimensionError("encode: expected a single-qubit state");
    StateVector v = tensor_product(psi, basis_state(2, 0));
    v = embed_operator(ideal_cnot(), {2, 1}, 3) * v;
    v = embed_operator(ideal_cnot(), {2, 0}, 3) * v;
    v = tensor_power(ideal_rotation(), 3) * v;
    return v;
}

inline ComplexMatrix decode_and_correct(const ComplexMatrix& rho) {
    return CycleCircuit(CycleMode::ideal, 0.0).decode_and_correct(rho);
}

/// Reduced state of the data qubit.
inline ComplexMatrix data_qubit(const ComplexMatrix& rho3) { return partial_trace(rho3, 3, {1, 0}); }

// ---------------------------------------------------------------------------
// Cycle runs

inline CycleResult summarize(const CycleConfig& cfg, const SingleQubitMap& map, std::size_t cycles_done) {
    const auto m = map.min_fidelity(cfg.inputs);
    CycleResult r;
    r.f_cycle = m.fidelity;
    r.min_input = m.input;
    r.elapsed_timesteps = cycles_done * (cfg.M + kCircuitTimesteps);
    r.f_single = f_single_at_time(cfg.lambda, double(r.elapsed_timesteps));
    r.f_ideal = f_ideal_cycles(cfg.lambda, cfg.M, cycles_done);
    r.lambda_eff = lambda_eff_from_fidelity(r.f_cycle, double(r.elapsed_timesteps));
    return r;
}

inline double run_cycle(const CycleConfig& cfg, const BlochPoint& input) {
    cfg.validate();
    const CycleCircuit c(cfg.mode, cfg.lambda, cfg.t3_idle_damping);
    return c.cycle_map(cfg.M).power(cfg.cycles).fidelity(input.state());
}

inline CycleResult f_cycle_min(const CycleConfig& cfg) {
    cfg.validate();
    const CycleCircuit c(cfg.mode, cfg.lambda, cfg.t3_idle_damping);
    return summarize(cfg, c.cycle_map(cfg.M).power(cfg.cycles), cfg.cycles);
}

/// One result per cycle boundary, cycles 1..cfg.cycles.
inline std::vector<CycleResult> multi_cycle_fidelity(const CycleConfig& cfg) {
    cfg.validate();
    const CycleCircuit c(cfg.mode, cfg.lambda, cfg.t3_idle_damping);
    const SingleQubitMap one = c.cycle_map(cfg.M);
    std::vector<CycleResult> out;
    SingleQubitMap acc;
    for (std::size_t n = 1; n <= cfg.cycles; ++n) {
        acc = one.after(acc);
        out.push_back(summarize(cfg, acc, n));
    }
    return out;
}

/// First time the curve (t, F) drops below threshold, linearly interpolated
/// between samples; the curve starts at (0, 1). Empty if it never does.
inline std::optional<double> crossing_time(const std::vector<std::pair<double, double>>& curve, double threshold) {
    double t0 = 0.0, f0 = 1.0;
    for (const auto& [t, f] : curve) {
        if (f < threshold) return t0 + (f0 - threshold) / (f0 - f) * (t - t0);
        t0 = t;
        f0 = f;
    }
    return std::nullopt;
}

struct SweepPoint {
    std::size_t M = 0;
    CycleResult result;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::optional<std::size_t> m_opt;
    std::optional<double> lambda_eff_min;
};

inline SweepResult sweep_storage(double lambda, CycleMode mode, const std::vector<std::size_t>& M_values,
                                 FidelityDomain inputs = FidelityDomain::real_product, bool t3_idle_damping = false) {
    if (M_values.empty()) throw DomainError("sweep_storage: empty M range");
    const CycleCircuit c(mode, lambda, t3_idle_damping);
    SweepResult out;
    for (auto M : M_values) {
        CycleConfig cfg{lambda, M, mode, 1, inputs, t3_idle_damping};
        out.points.push_back({M, summarize(cfg, c.cycle_map(M), 1)});
        const auto& le = out.points.back().result.lambda_eff;
        if (le && (!out.lambda_eff_min || *le < *out.lambda_eff_min)) {
            out.lambda_eff_min = le;
            out.m_opt = M;
        }
    }
    return out;
}

inline std::vector<std::size_t> m_range(std::size_t lo, std::size_t hi) {
    if (lo > hi) throw DomainError("m_range: m_min > m_max");
    std::vector<std::size_t> v;
    for (std::size_t m = lo; m <= hi; ++m) v.push_back(m);
    return v;
}

}  // namespace pqubit
