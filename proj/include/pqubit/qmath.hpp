#pragma once

// Dense complex linear algebra for small qubit registers.
//
// Bit convention used throughout the library: qubit q is bit q of the
// basis-state integer, so qubit N-1 is the most significant bit and the
// leftmost symbol of a ket string. For |b2 b1 b0>, index = 4*b2 + 2*b1 + b0.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pqubit/errors.hpp"

namespace pqubit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kStructuralTol = 1e-10;

namespace pauli {

inline ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }

inline ComplexMatrix x() {
    ComplexMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

inline ComplexMatrix y() {
    ComplexMatrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    return m;
}

// sigma_z |0> = +|0>
inline ComplexMatrix z() {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

// (|0> + |1>)/sqrt2 and (|0> - |1>)/sqrt2 as columns 0 and 1.
inline ComplexMatrix hadamard() {
    ComplexMatrix m(2, 2);
    const double s = 1.0 / std::numbers::sqrt2;
    m << s, s, s, -s;
    return m;
}

}  // namespace pauli

/// Largest absolute entrywise difference. Shapes must agree.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("max_abs_diff: shape mismatch");
    }
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

inline bool is_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
    return m.rows() == m.cols() && max_abs_diff(m, m.adjoint()) <= tol;
}

inline bool is_unitary(const ComplexMatrix& u, double tol = kUnitaryTol) {
    if (u.rows() != u.cols()) return false;
    return max_abs_diff(u.adjoint() * u, ComplexMatrix::Identity(u.rows(), u.cols())) <= tol;
}

/// Number of qubits for a 2^N dimension; throws if dim is not a power of two.
inline std::size_t qubit_count(Eigen::Index dim) {
    if (dim < 1) throw DimensionError("qubit_count: empty dimension");
    const auto d = static_cast<std::uint64_t>(dim);
    if ((d & (d - 1)) != 0) {
        throw DimensionError("dimension " + std::to_string(dim) + " is not a power of two");
    }
    return static_cast<std::size_t>(std::countr_zero(d));
}

/// Kronecker product. The left factor owns the high-order index bits.
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline ComplexMatrix tensor_product(std::span<const ComplexMatrix> factors) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (const auto& f : factors) out = tensor_product(out, f);
    return out;
}

inline ComplexMatrix tensor_power(const ComplexMatrix& m, std::size_t n) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (std::size_t i = 0; i < n; ++i) out = tensor_product(out, m);
    return out;
}

inline StateVector tensor_product(const StateVector& a, const StateVector& b) {
    StateVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

/// Traces out `traced_qubits` of a 2^N x 2^N matrix. The remaining qubits keep
/// their relative order (higher index stays more significant).
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, std::size_t total_qubits,
                                   std::span<const std::size_t> traced_qubits) {
    const Eigen::Index dim = Eigen::Index{1} << total_qubits;
    if (rho.rows() != dim || rho.cols() != dim) {
        throw DimensionError("partial_trace: matrix is not 2^N x 2^N for N = " +
                             std::to_string(total_qubits));
    }
    std::uint64_t traced_mask = 0;
    for (auto q : traced_qubits) {
        if (q >= total_qubits) throw DimensionError("partial_trace: qubit index out of range");
        if (traced_mask & (std::uint64_t{1} << q)) {
            throw DimensionError("partial_trace: duplicate traced qubit");
        }
        traced_mask |= std::uint64_t{1} << q;
    }
    std::vector<std::size_t> kept;
    for (std::size_t q = 0; q < total_qubits; ++q) {
        if (!(traced_mask & (std::uint64_t{1} << q))) kept.push_back(q);
    }
    // Compress the kept bits of a full index into the reduced index.
    auto reduced_index = [&](std::uint64_t full) {
        std::uint64_t r = 0;
        for (std::size_t j = 0; j < kept.size(); ++j) r |= ((full >> kept[j]) & 1u) << j;
        return static_cast<Eigen::Index>(r);
    };
    const Eigen::Index out_dim = Eigen::Index{1} << kept.size();
    ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            const auto ui = static_cast<std::uint64_t>(i);
            const auto uj = static_cast<std::uint64_t>(j);
            if ((ui & traced_mask) != (uj & traced_mask)) continue;
            out(reduced_index(ui), reduced_index(uj)) += rho(i, j);
        }
    }
    return out;
}

inline ComplexMatrix partial_trace(const ComplexMatrix& rho, std::size_t total_qubits,
                                   std::initializer_list<std::size_t> traced_qubits) {
    return partial_trace(rho, total_qubits,
                         std::span<const std::size_t>(traced_qubits.begin(), traced_qubits.size()));
}

/// exp(i t H) for Hermitian H, computed as V diag(e^{i t w}) V^dag.
inline ComplexMatrix unitary_from_hamiltonian(const ComplexMatrix& h, double t = 1.0) {
    if (!is_hermitian(h)) throw DomainError("unitary_from_hamiltonian: H is not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw DomainError("unitary_from_hamiltonian: eigendecomposition failed");
    }
    const auto& w = solver.eigenvalues();
    Eigen::VectorXcd phases(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::polar(1.0, t * w(k));
    const auto& v = solver.eigenvectors();
    return v * phases.asDiagonal() * v.adjoint();
}

/// Lifts `op` acting on `on_qubits` (listed high bit first, matching op's own
/// qubit order) into the full 2^total register, identity elsewhere.
inline ComplexMatrix embed_operator(const ComplexMatrix& op, std::span<const std::size_t> on_qubits,
                                    std::size_t total_qubits) {
    const std::size_t k = on_qubits.size();
    const Eigen::Index sub_dim = Eigen::Index{1} << k;
    if (op.rows() != sub_dim || op.cols() != sub_dim) {
        throw DimensionError("embed_operator: operator size does not match qubit list");
    }
    std::uint64_t mask = 0;
    for (auto q : on_qubits) {
        if (q >= total_qubits) throw DimensionError("embed_operator: qubit index out of range");
        if (mask & (std::uint64_t{1} << q)) throw DimensionError("embed_operator: qubit listed twice");
        mask |= std::uint64_t{1} << q;
    }
    const Eigen::Index dim = Eigen::Index{1} << total_qubits;
    auto sub_index = [&](std::uint64_t full) {
        std::uint64_t s = 0;
        for (std::size_t j = 0; j < k; ++j) s |= ((full >> on_qubits[j]) & 1u) << (k - 1 - j);
        return s;
    };
    auto scatter = [&](std::uint64_t rest, std::uint64_t sub) {
        for (std::size_t j = 0; j < k; ++j) rest |= ((sub >> (k - 1 - j)) & 1u) << on_qubits[j];
        return rest;
    };
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const auto ucol = static_cast<std::uint64_t>(col);
        const auto rest = ucol & ~mask;
        const auto sc = static_cast<Eigen::Index>(sub_index(ucol));
        for (Eigen::Index sr = 0; sr < sub_dim; ++sr) {
            const Complex amp = op(sr, sc);
            if (amp == Complex(0.0)) continue;
            out(static_cast<Eigen::Index>(scatter(rest, static_cast<std::uint64_t>(sr))), col) += amp;
        }
    }
    return out;
}

inline ComplexMatrix embed_operator(const ComplexMatrix& op, std::initializer_list<std::size_t> on_qubits,
                                    std::size_t total_qubits) {
    return embed_operator(op, std::span<const std::size_t>(on_qubits.begin(), on_qubits.size()),
                          total_qubits);
}

/// Computational basis ket |index> of a 2^n register.
inline StateVector basis_state(std::size_t n_qubits, std::uint64_t index) {
    StateVector v = StateVector::Zero(Eigen::Index{1} << n_qubits);
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return v;
}

/// Pure single-qubit state on the Bloch sphere: cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
struct BlochPoint {
    double theta = 0.0;
    double phi = 0.0;

    StateVector state() const {
        StateVector v(2);
        v(0) = std::cos(theta / 2.0);
        v(1) = std::polar(std::sin(theta / 2.0), phi);
        return v;
    }

    /// Folds arbitrary angles back into theta in [0, pi], phi in [0, 2 pi).
    static BlochPoint normalized(double theta, double phi) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        theta = std::fmod(theta, two_pi);
        if (theta < 0) theta += two_pi;
        if (theta > std::numbers::pi) {
            theta = two_pi - theta;
            phi += std::numbers::pi;
        }
        phi = std::fmod(phi, two_pi);
        if (phi < 0) phi += two_pi;
        if (phi >= two_pi) phi = 0.0;
        return {theta, phi};
    }
};

inline ComplexMatrix projector(const StateVector& psi) { return psi * psi.adjoint(); }

/// <psi| rho |psi>, real part.
inline double overlap_fidelity(const ComplexMatrix& rho, const StateVector& psi) {
    return (psi.adjoint() * rho * psi)(0, 0).real();
}

/// A mixed state stored as a direct sum of unnormalized pure branches.
class MixedState {
public:
    MixedState() = default;
    explicit MixedState(StateVector pure) { branches_.push_back(std::move(pure)); }
    explicit MixedState(std::vector<StateVector> branches) : branches_(std::move(branches)) {
        for (const auto& b : branches_) {
            if (b.size() != branches_.front().size()) {
                throw DimensionError("MixedState: branches have different dimensions");
            }
        }
    }

    const std::vector<StateVector>& branches() const { return branches_; }
    std::size_t size() const { return branches_.size(); }
    bool empty() const { return branches_.empty(); }
    Eigen::Index dimension() const { return branches_.empty() ? 0 : branches_.front().size(); }

    void add_branch(StateVector b) {
        if (!branches_.empty() && b.size() != dimension()) {
            throw DimensionError("MixedState: branch dimension mismatch");
        }
        branches_.push_back(std::move(b));
    }

    double total_probability() const {
        double p = 0.0;
        for (const auto& b : branches_) p += b.squaredNorm();
        return p;
    }

    ComplexMatrix density_matrix() const {
        const auto d = dimension();
        ComplexMatrix rho = ComplexMatrix::Zero(d, d);
        for (const auto& b : branches_) rho.noalias() += b * b.adjoint();
        return rho;
    }

    /// Expectation value summed over branches.
    Complex expectation(const ComplexMatrix& op) const {
        Complex e = 0.0;
        for (const auto& b : branches_) e += (b.adjoint() * op * b)(0, 0);
        return e;
    }

private:
    std::vector<StateVector> branches_;
};

/// Result of a minimization over a box of angles.
template <std::size_t Dim>
struct AngleMinimum {
    std::array<double, Dim> angles{};
    double value = std::numeric_limits<double>::infinity();
};

struct RefineOptions {
    std::size_t grid_per_axis = 32;
    /// Stop refining once a full step-halving round improves the value by less than this.
    double tol = 1e-14;
    /// Number of best grid points used as refinement seeds.
    std::size_t seeds = 4;
};

namespace detail {

template <std::size_t Dim, class F>
AngleMinimum<Dim> compass_refine(F& f, AngleMinimum<Dim> start, double step, double tol) {
    constexpr double kMinStep = 1e-12;
    AngleMinimum<Dim> best = start;
    while (step > kMinStep) {
        const double round_start = best.value;
        bool moved = true;
        while (moved) {
            moved = false;
            for (std::size_t d = 0; d < Dim; ++d) {
                for (double dir : {+1.0, -1.0}) {
                    auto trial = best.angles;
                    trial[d] += dir * step;
                    const double v = f(trial);
                    if (v < best.value) {
                        best.angles = trial;
                        best.value = v;
                        moved = true;
                    }
                }
            }
        }
        step *= 0.5;
        if (round_start - best.value < tol && step < 1e-6) break;
    }
    return best;
}

}  // namespace detail

/// Global-then-local minimization of f over Dim angles, each axis ranging over
/// [lo, hi]. The grid stage samples grid_per_axis points per axis; the best
/// `seeds` points are refined with a shrinking compass search. f must accept
/// any real angles (refinement may step outside the box; callers map angles
/// periodically).
template <std::size_t Dim, class F>
AngleMinimum<Dim> minimize_angles(F&& f, const std::array<std::pair<double, double>, Dim>& box,
                                  const RefineOptions& opt = {}) {
    const std::size_t n = std::max<std::size_t>(opt.grid_per_axis, 2);
    std::array<double, Dim> spacing{};
    for (std::size_t d = 0; d < Dim; ++d) spacing[d] = (box[d].second - box[d].first) / double(n - 1);

    std::vector<AngleMinimum<Dim>> samples;
    std::size_t total = 1;
    for (std::size_t d = 0; d < Dim; ++d) total *= n;
    samples.reserve(total);
    std::array<std::size_t, Dim> idx{};
    for (std::size_t s = 0; s < total; ++s) {
        AngleMinimum<Dim> m;
        for (std::size_t d = 0; d < Dim; ++d) m.angles[d] = box[d].first + spacing[d] * double(idx[d]);
        m.value = f(m.angles);
        samples.push_back(m);
        for (std::size_t d = 0; d < Dim; ++d) {
            if (++idx[d] < n) break;
            idx[d] = 0;
        }
    }
    const std::size_t k = std::min(opt.seeds, samples.size());
    std::partial_sort(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k), samples.end(),
                      [](const auto& a, const auto& b) { return a.value < b.value; });
    const double step = *std::max_element(spacing.begin(), spacing.end());
    AngleMinimum<Dim> best = samples.front();
    for (std::size_t i = 0; i < k; ++i) {
        auto r = detail::compass_refine(f, samples[i], step, opt.tol);
        if (r.value < best.value) best = r;
    }
    return best;
}

struct FidelityMinimum {
    BlochPoint input;
    double fidelity = 1.0;
};

/// Minimum of channel_eval over all pure single-qubit inputs: a theta x phi grid
/// (at least 32 x 32) followed by local refinement.
inline FidelityMinimum min_fidelity_over_inputs(const std::function<double(const BlochPoint&)>& channel_eval,
                                                double tol = 1e-14, std::size_t grid = 32) {
    auto f = [&](const std::array<double, 2>& a) {
        return channel_eval(BlochPoint::normalized(a[0], a[1]));
    };
    RefineOptions opt;
    opt.grid_per_axis = std::max<std::size_t>(grid, 32);
    opt.tol = tol;
    constexpr double pi = std::numbers::pi;
    // Phi grid stops one spacing short of 2 pi so the periodic endpoint is not sampled twice.
    const double phi_hi = 2.0 * pi * double(opt.grid_per_axis - 1) / double(opt.grid_per_axis);
    const auto m = minimize_angles<2>(f, {{{0.0, pi}, {0.0, phi_hi}}}, opt);
    return {BlochPoint::normalized(m.angles[0], m.angles[1]), m.value};
}

}  // namespace pqubit
