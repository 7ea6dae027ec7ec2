// Acceptance gate: one PASS/FAIL line per criterion.
//   acceptance          run everything
//   acceptance 5c       run a single criterion
// Exit status is 0 only if every selected criterion passes.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pqubit/pqubit.hpp"

using namespace pqubit;

namespace {

// Tolerances.
constexpr double kAlgebraTol = 1e-10;
constexpr double kBruteForceTol = 1e-10;
constexpr double kGateSlopeRel = 0.05;
constexpr double kIdealCycleTol = 1e-9;
constexpr double kSmallLambdaRel = 0.01;
constexpr double kCycleSlopeRel = 0.10;
constexpr double kAmplitudeSlopeRel = 0.15;
constexpr double kMOptRel = 0.15;
constexpr double kAlphaRel = 0.02;
constexpr double kBetaRel = 0.10;
constexpr double kLifetimeRatio = 5.0;
constexpr double kThresholdDecade = 10.0;
constexpr double kCorrectionTol = 1e-12;

// Targets.
constexpr double kSlopeRPhase = 0.40, kSlopeCnPhase = 0.86, kSlopeRAmp = 1.80, kSlopeCnAmp = 2.20;
constexpr double kSlopeContinuous = 3.92, kSlopeLumped = 5.50, kSlopeAmplitude = 13.5;
constexpr double kAlphaTarget = 0.75, kBetaTarget = 3.92;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

bool within_rel(double v, double target, double rel) { return std::abs(v - target) <= rel * std::abs(target); }

StateVector random_state(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    StateVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(d(rng), d(rng));
    return v / v.norm();
}

const std::vector<double> kSlopeGrid{1e-5, 3e-5};

double gate_slope(bool cnot, DampingKind kind) {
    Curve c;
    for (double l : kSlopeGrid) c.push_back({l, gate_fidelity(cnot ? noisy_cnot(l, kind) : noisy_rotation(l, kind))});
    return extrapolated_slope(c);
}

double cycle_slope(CycleMode mode, std::size_t M) {
    Curve c;
    for (double l : kSlopeGrid) c.push_back({l, f_cycle_min({l, M, mode}).f_cycle});
    return extrapolated_slope(c);
}

// alpha and beta fitted from continuous-phase cycles at M = 8.
ErrorModelParams fitted_params() {
    constexpr std::size_t M = 8;
    Curve ideal, noisy;
    for (double l : {1e-5, 3e-5, 1e-4, 3e-4}) {
        ideal.push_back({l, f_ideal(l, M)});
        noisy.push_back({l, f_cycle_min({l, M, CycleMode::continuous_phase}).f_cycle});
    }
    return fit_alpha_beta(ideal, noisy, M);
}

Outcome c1_channel_algebra() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    double comp = 0.0, trace = 0.0, equiv = 0.0;
    auto check = [&](const KrausChannel& ch, const StateVector& psi) {
        comp = std::max(comp, ch.completeness_residual());
        const ComplexMatrix rho = projector(psi);
        const ComplexMatrix out = apply_to_density(ch, rho);
        trace = std::max(trace, std::abs(out.trace() - rho.trace()));
        equiv = std::max(equiv, max_abs_diff(apply_to_mixed(ch, MixedState({psi})).density_matrix(), out));
    };
    for (int draw = 0; draw < 100; ++draw) {
        for (std::size_t n = 1; n <= 4; ++n) {
            const auto ch = phase_damping_nq(n, alpha_from_lambda(u(rng)));
            check(ch, random_state(ch.dimension(), rng));
        }
        check(phase_damping_1q(u(rng)), random_state(2, rng));
        check(amplitude_damping_1q(u(rng), u(rng)), random_state(2, rng));
        const StateVector ab = random_state(2, rng);
        StateVector v = StateVector::Zero(4);
        v(1) = ab(0);
        v(2) = ab(1);
        check(dual_rail_channel(u(rng)), v);
    }
    const bool ok = comp < kAlgebraTol && trace < kAlgebraTol && equiv < kAlgebraTol;
    return {ok, "completeness " + fmt(comp) + ", trace " + fmt(trace) + ", wavefunction-vs-density " + fmt(equiv) +
                    " (tol 1e-10, 100 draws)"};
}

// Environment qubit per system qubit, rotated by chi when its system qubit is
// set; controls are taken in the Bell basis.
ComplexMatrix brute_force(const StateVector& psi, double chi) {
    const std::size_t n = qubit_count(psi.size());
    const std::size_t total = 2 * n;
    ComplexMatrix ry(2, 2);
    ry << std::cos(chi), -std::sin(chi), std::sin(chi), std::cos(chi);
    ComplexMatrix cr = ComplexMatrix::Identity(4, 4);
    cr.bottomRightCorner(2, 2) = ry;
    ComplexMatrix u = ComplexMatrix::Identity(Eigen::Index(1) << total, Eigen::Index(1) << total);
    for (std::size_t j = 0; j < n; ++j) {
        const ComplexMatrix h = embed_operator(pauli::hadamard(), {n + j}, total);
        u = h * embed_operator(cr, {n + j, j}, total) * h * u;
    }
    const StateVector joint = u * tensor_product(psi, basis_state(n, 0));
    std::vector<std::size_t> env;
    for (std::size_t j = 0; j < n; ++j) env.push_back(j);
    return partial_trace(projector(joint), total, env);
}

Outcome c2_fast_vs_brute_force() {
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> u(0.0, 1.5);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 3; ++n) {
        for (int t = 0; t < 10; ++t) {
            const double chi = u(rng);
            const StateVector psi = random_state(Eigen::Index(1) << n, rng);
            const auto fast = phase_damping_apply_fast(MixedState({psi}), (1 + std::cos(chi)) / 2).density_matrix();
            worst = std::max(worst, max_abs_diff(fast, brute_force(psi, chi)));
        }
    }
    return {worst < kBruteForceTol, "max entry difference " + fmt(worst) + " for N = 1..3 (tol 1e-10)"};
}

Outcome c3_gate_slopes() {
    const double rp = gate_slope(false, DampingKind::phase), cp = gate_slope(true, DampingKind::phase);
    const double ra = gate_slope(false, DampingKind::amplitude), ca = gate_slope(true, DampingKind::amplitude);
    const bool ok = within_rel(rp, kSlopeRPhase, kGateSlopeRel) && within_rel(cp, kSlopeCnPhase, kGateSlopeRel) &&
                    within_rel(ra, kSlopeRAmp, kGateSlopeRel) && within_rel(ca, kSlopeCnAmp, kGateSlopeRel);
    return {ok, "R/phase " + fmt(rp) + " (0.40), CN/phase " + fmt(cp) + " (0.86), R/amp " + fmt(ra) +
                    " (1.80), CN/amp " + fmt(ca) + " (2.20), tol 5%"};
}

Outcome c4_ideal_code() {
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> ul(0.0, 1e-2);
    std::uniform_int_distribution<std::size_t> um(0, 100);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const double l = ul(rng);
        const std::size_t M = um(rng);
        worst = std::max(worst, std::abs(f_cycle_min({l, M, CycleMode::ideal}).f_cycle - f_ideal(l, M)));
    }
    const double l = 1e-3;
    const double ratio = (1.0 - f_cycle_min({l, 1, CycleMode::ideal}).f_cycle) / (0.75 * l * l);
    const bool ok = worst < kIdealCycleTol && std::abs(ratio - 1.0) <= kSmallLambdaRel;
    return {ok, "max |F - closed form| " + fmt(worst) + " (tol 1e-9); M=1 (1-F)/(0.75 l^2) = " + fmt(ratio, 6) +
                    " (tol 1%)"};
}

Outcome c5_slope(CycleMode mode, std::size_t M, double target, double rel) {
    const double s = cycle_slope(mode, M);
    return {within_rel(s, target, rel), to_string(mode) + " M=" + std::to_string(M) + ": slope " + fmt(s) +
                                            " (target " + fmt(target) + " +/- " + fmt(rel * 100, 3) + "%)"};
}

Outcome c6_sweep() {
    const double l = 3e-4;
    const auto sw = sweep_storage(l, CycleMode::continuous_phase, m_range(1, 400));
    if (!sw.m_opt) return {false, "no defined lambda_eff in sweep"};
    const bool interior = *sw.m_opt > 1 && *sw.m_opt < 400;
    const auto p = fitted_params();
    const auto model = m_opt(p, l);
    const bool ok = interior && within_rel(double(*sw.m_opt), double(model), kMOptRel) &&
                    within_rel(p.alpha, kAlphaTarget, kAlphaRel) && within_rel(p.beta, kBetaTarget, kBetaRel);
    return {ok, "simulated M_opt " + std::to_string(*sw.m_opt) + (interior ? " (interior)" : " (edge)") +
                    ", model M_opt " + std::to_string(model) + " (tol 15%); fitted alpha " + fmt(p.alpha) +
                    " (0.75 +/- 2%), beta " + fmt(p.beta) + " (3.92 +/- 10%)"};
}

Outcome c7_lifetime() {
    const double l = 1e-3;
    const std::size_t M = 72;
    const auto curve = multi_cycle_fidelity({l, M, CycleMode::continuous_phase, 40});
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : curve) pts.push_back({double(r.elapsed_timesteps), r.f_cycle});
    const auto t_code = crossing_time(pts, 0.95);
    const double t_single = -std::log(2 * 0.95 - 1) / l;
    if (!t_code) return {false, "persistent qubit never dropped below 0.95 in 40 cycles"};
    const double ratio = *t_code / t_single;
    return {ratio >= kLifetimeRatio, "F >= 0.95 until t = " + fmt(*t_code) + " vs single qubit " + fmt(t_single) +
                                         ": ratio " + fmt(ratio) + " (need >= 5)"};
}

Outcome c8_threshold() {
    const auto p = fitted_params();
    const double crit = lambda_crit(p);
    constexpr std::size_t M = 8;
    std::optional<double> crossover;
    for (int k = 0; k <= 80; ++k) {
        const double l = 1e-3 * std::pow(10.0, k / 40.0);  // 1e-3 .. 1e-1
        const auto r = f_cycle_min({l, M, CycleMode::continuous_phase});
        if (r.f_cycle < r.f_single) {
            crossover = l;
            break;
        }
    }
    const double bound = beta_bound_from_gates(6, 4, DampingKind::phase);
    const bool in_decade = crossover && *crossover <= crit * kThresholdDecade && *crossover >= crit / kThresholdDecade;
    const bool ok = in_decade && bound >= p.beta;
    return {ok, "crossover lambda " + (crossover ? fmt(*crossover) : std::string("none")) + " vs lambda_crit " +
                    fmt(crit) + " (within 10x); bound 6*0.40+4*0.86 = " + fmt(bound) + " >= fitted beta " +
                    fmt(p.beta)};
}

Outcome c9_single_error() {
    std::mt19937_64 rng(109);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const StateVector psi = random_state(2, rng);
        for (std::size_t q = 0; q < 3; ++q) {
            const StateVector err = embed_operator(pauli::z(), {q}, 3) * encode(psi);
            const double f = overlap_fidelity(data_qubit(decode_and_correct(projector(err))), psi);
            worst = std::max(worst, std::abs(1.0 - f));
        }
    }
    const CycleCircuit ideal(CycleMode::ideal, 0.0);
    int rows = 0;
    for (const auto& row : SyndromeTable::rows()) {
        for (auto word : {row.codeword_a, row.codeword_b}) {
            const auto p = ideal.syndrome_distribution(projector(bell_product(word)));
            if (std::abs(p[row.syndrome] - 1.0) < 1e-14) ++rows;
        }
    }
    return {worst < kCorrectionTol && rows == 8,
            "worst single-flip infidelity " + fmt(worst) + " (tol 1e-12); syndrome rows reproduced " +
                std::to_string(rows) + "/8"};
}

std::string run_cli(const std::string& args, int& code) {
    const std::string cmd = std::string(PQUBIT_CLI_PATH) + " " + args + " 2>/dev/null";
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) {
        code = -1;
        return out;
    }
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int st = pclose(p);
    code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return out;
}

Outcome c10_cli_determinism() {
    const std::vector<std::string> cmds{
        "--seed 11 channel-check phase --lambda 0.1 --qubits 2",
        "--seed 11 channel-check amplitude --gamma0 0.1 --gamma1 0.3",
        "--seed 11 gate-fidelity --gate CN --damping amplitude --domain full --lambda 1e-3,3e-3",
        "--seed 11 gate-fidelity --gate R --damping phase",
        "--seed 11 cycle --mode continuous-phase --lambda 1e-3 --m 72 --cycles 5",
        "--seed 11 sweep --lambda 3e-4 --mode continuous-phase --m-min 120 --m-max 140",
    };
    int identical = 0;
    for (const auto& c : cmds) {
        int a = 0, b = 0;
        const auto x = run_cli(c, a), y = run_cli(c, b);
        if (a == 0 && b == 0 && !x.empty() && x == y) ++identical;
    }
    return {identical == int(cmds.size()),
            std::to_string(identical) + "/" + std::to_string(cmds.size()) + " commands byte-identical across runs"};
}

struct Criterion {
    std::string id;
    std::string name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {"1", "channel algebra", c1_channel_algebra},
        {"2", "fast phase damping vs brute force", c2_fast_vs_brute_force},
        {"3", "gate-fidelity slopes", c3_gate_slopes},
        {"4", "ideal-code fidelity", c4_ideal_code},
        {"5a", "continuous-phase cycle slope",
         [] { return c5_slope(CycleMode::continuous_phase, 8, kSlopeContinuous, kCycleSlopeRel); }},
        {"5b", "lumped-phase cycle slope",
         [] { return c5_slope(CycleMode::lumped_phase, 8, kSlopeLumped, kCycleSlopeRel); }},
        {"5c", "continuous-amplitude cycle slope",
         [] { return c5_slope(CycleMode::continuous_amplitude, 80, kSlopeAmplitude, kAmplitudeSlopeRel); }},
        {"6", "storage sweep structure and fit", c6_sweep},
        {"7", "multi-cycle lifetime", c7_lifetime},
        {"8", "threshold and gate-count bound", c8_threshold},
        {"9", "single-error correction and syndrome table", c9_single_error},
        {"10", "CLI determinism", c10_cli_determinism},
    };
    const std::string only = argc > 1 ? argv[1] : "";
    bool all_ok = true;
    bool matched = false;
    for (const auto& c : all) {
        if (!only.empty() && c.id != only) continue;
        matched = true;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all_ok = all_ok && o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
    }
    if (!matched) {
        std::cerr << "unknown criterion '" << only << "'\n";
        return 2;
    }
    return all_ok ? 0 : 1;
}
