// pqubit_cli: channel checks, gate-fidelity scans, correction cycles and storage sweeps.
//
// Tables go to stdout (CSV by default, or one JSON document); a run manifest
// goes to stderr. Exit codes: 0 success, 1 failed channel check, 2 usage error.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pqubit/pqubit.hpp"

using namespace pqubit;
using nlohmann::ordered_json;

namespace {

constexpr const char* kOutOfModel = "out-of-model";
constexpr const char* kNotApplicable = "n/a";
constexpr double kResidualTol = 1e-10;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.14g", v);
    return buf;
}

std::string num(std::optional<double> v) { return v ? num(*v) : std::string(kOutOfModel); }

// Cells are kept as strings so the CSV and JSON bodies carry identical text.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> footer;

    void emit(bool json) const {
        if (json) {
            ordered_json j;
            j["columns"] = columns;
            j["rows"] = rows;
            ordered_json f = ordered_json::object();
            for (const auto& [k, v] : footer) f[k] = v;
            j["footer"] = f;
            std::cout << j.dump(2) << "\n";
            return;
        }
        auto line = [](const std::vector<std::string>& cells) {
            std::string s;
            for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
            return s;
        };
        std::cout << line(columns) << "\n";
        for (const auto& r : rows) std::cout << line(r) << "\n";
        if (!footer.empty()) {
            std::string s;
            for (std::size_t i = 0; i < footer.size(); ++i) s += (i ? " " : "") + footer[i].first + "=" + footer[i].second;
            std::cout << s << "\n";
        }
    }
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

StateVector random_state(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    StateVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double re = n(rng);
        const double im = n(rng);
        v(i) = Complex(re, im);
    }
    return v / v.norm();
}

void add_matrix_rows(Table& t, const std::string& name, const ComplexMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            t.rows.push_back({name, std::to_string(i), std::to_string(j), num(m(i, j).real()), num(m(i, j).imag())});
        }
    }
}

struct ChannelCheckArgs {
    std::string channel;
    double lambda = 0.1;
    std::size_t qubits = 1;
    double gamma0 = 0.0;
    double gamma1 = 0.1;
    double gamma = 0.1;
};

int cmd_channel_check(const ChannelCheckArgs& a, std::uint64_t seed, Table& t) {
    KrausChannel ch;
    std::vector<Eigen::Index> sample_support;
    if (a.channel == "phase") {
        if (a.qubits < 1 || a.qubits > 10) throw UsageError("--qubits must be in [1, 10]");
        if (!(a.lambda >= 0.0)) throw UsageError("--lambda must be >= 0");
        ch = a.qubits == 1 ? phase_damping_1q(a.lambda) : phase_damping_nq(a.qubits, alpha_from_lambda(a.lambda));
    } else if (a.channel == "amplitude") {
        if (!(a.gamma0 >= 0.0) || !(a.gamma1 >= 0.0)) throw UsageError("--gamma0/--gamma1 must be >= 0");
        ch = amplitude_damping_1q(a.gamma0, a.gamma1);
    } else if (a.channel == "dual-rail") {
        if (!(a.gamma >= 0.0)) throw UsageError("--gamma must be >= 0");
        ch = dual_rail_channel(a.gamma);
        sample_support = {1, 2};
    } else {
        throw UsageError("unknown channel '" + a.channel + "' (phase, amplitude, dual-rail)");
    }

    std::mt19937_64 rng(seed);
    const Eigen::Index dim = ch.dimension();
    auto sample = [&] {
        if (sample_support.empty()) return random_state(dim, rng);
        const StateVector sub = random_state(Eigen::Index(sample_support.size()), rng);
        StateVector v = StateVector::Zero(dim);
        for (std::size_t k = 0; k < sample_support.size(); ++k) v(sample_support[k]) = sub(Eigen::Index(k));
        return v;
    };

    double trace_res = 0.0;
    ComplexMatrix first_in, first_out;
    for (int s = 0; s < 16; ++s) {
        const ComplexMatrix rho = projector(sample());
        const ComplexMatrix out = apply_to_density(ch, rho);
        trace_res = std::max(trace_res, std::abs(out.trace() - rho.trace()));
        if (s == 0) {
            first_in = rho;
            first_out = out;
        }
    }
    const double comp_res = ch.completeness_residual();

    t.columns = {"quantity", "row", "col", "re", "im"};
    t.rows.push_back({"completeness_residual", "", "", num(comp_res), "0"});
    t.rows.push_back({"trace_residual", "", "", num(trace_res), "0"});
    add_matrix_rows(t, "rho_in", first_in);
    add_matrix_rows(t, "rho_out", first_out);
    if (a.channel == "amplitude" && !(a.gamma0 == 0.0 && a.gamma1 == 0.0)) {
        const auto st = amplitude_damping_stationary(a.gamma0, a.gamma1);
        add_matrix_rows(t, "fixed_point", st.rho);
        t.footer.push_back({"temperature", num(st.temperature)});
    }
    const bool ok = comp_res < kResidualTol && trace_res < kResidualTol;
    t.footer.push_back({"status", ok ? "pass" : "fail"});
    return ok ? 0 : 1;
}

struct GateArgs {
    std::string gate = "R";
    std::string damping = "phase";
    std::vector<double> lambdas{1e-5, 3e-5, 1e-4, 3e-4, 1e-3};
    std::string domain = "real-product";
};

void cmd_gate_fidelity(const GateArgs& a, std::uint64_t seed, Table& t) {
    if (a.gate != "R" && a.gate != "Rbar" && a.gate != "CN") throw UsageError("--gate must be R, Rbar or CN");
    if (a.damping != "phase" && a.damping != "amplitude") throw UsageError("--damping must be phase or amplitude");
    if (a.domain != "real-product" && a.domain != "full") throw UsageError("--domain must be real-product or full");
    for (double l : a.lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw UsageError("lambda values must be finite and >= 0");
    }
    const auto kind = a.damping == "phase" ? DampingKind::phase : DampingKind::amplitude;
    const auto domain = a.domain == "full" ? FidelityDomain::full : FidelityDomain::real_product;

    auto lambdas = a.lambdas;
    std::sort(lambdas.begin(), lambdas.end());
    lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

    t.columns = {"lambda", "fidelity", "slope_estimate"};
    Curve curve;
    for (double l : lambdas) {
        const NoisyGate g = a.gate == "CN"     ? noisy_cnot(l, kind)
                            : a.gate == "R"    ? noisy_rotation(l, kind, RotationSense::forward)
                                               : noisy_rotation(l, kind, RotationSense::inverse);
        const double f = gate_fidelity(g, domain, seed);
        curve.push_back({l, f});
        t.rows.push_back({num(l), num(f), l > 0.0 ? num((1.0 - f) / l) : std::string(kNotApplicable)});
    }
    std::size_t positive = 0;
    for (double l : lambdas) positive += l > 0.0;
    t.rows.push_back({"0", "1", positive >= 2 ? num(extrapolated_slope(curve)) : std::string(kNotApplicable)});
}

FidelityDomain inputs_or_throw(const std::string& s) {
    if (s == "full") return FidelityDomain::full;
    if (s == "real-product") return FidelityDomain::real_product;
    throw UsageError("--inputs must be full or real-product");
}

CycleMode mode_or_throw(const std::string& s) {
    const auto m = parse_cycle_mode(s);
    if (!m) throw UsageError("--mode must be ideal, lumped-phase, continuous-phase or continuous-amplitude");
    return *m;
}

struct CycleArgs {
    std::string mode = "continuous-phase";
    double lambda = 1e-3;
    std::size_t M = 8;
    std::size_t cycles = 1;
    std::string inputs = "real-product";
    bool t3_idle = false;
};

void cmd_cycle(const CycleArgs& a, Table& t) {
    CycleConfig cfg{a.lambda, a.M, mode_or_throw(a.mode), a.cycles, inputs_or_throw(a.inputs), a.t3_idle};
    if (!(a.lambda >= 0.0) || !std::isfinite(a.lambda)) throw UsageError("--lambda must be finite and >= 0");
    if (a.cycles < 1) throw UsageError("--cycles must be >= 1");
    t.columns = {"t", "f_cycle", "f_single", "f_ideal", "lambda_eff", "min_theta", "min_phi"};
    for (const auto& r : multi_cycle_fidelity(cfg)) {
        t.rows.push_back({std::to_string(r.elapsed_timesteps), num(r.f_cycle), num(r.f_single), num(r.f_ideal),
                          num(r.lambda_eff), num(r.min_input.theta), num(r.min_input.phi)});
    }
}

struct SweepArgs {
    std::string mode = "continuous-phase";
    double lambda = 3e-4;
    std::size_t m_min = 1;
    std::size_t m_max = 300;
    double alpha = kFittedParams.alpha;
    double beta = kFittedParams.beta;
    std::string inputs = "real-product";
    bool t3_idle = false;
};

void cmd_sweep(const SweepArgs& a, Table& t) {
    const auto mode = mode_or_throw(a.mode);
    if (!(a.lambda > 0.0) || !std::isfinite(a.lambda)) throw UsageError("--lambda must be finite and > 0");
    if (a.m_min > a.m_max) throw UsageError("--m-min must not exceed --m-max");
    if (!(a.alpha > 0.0) || !(a.beta >= 0.0)) throw UsageError("--alpha must be > 0 and --beta >= 0");

    const auto sw = sweep_storage(a.lambda, mode, m_range(a.m_min, a.m_max), inputs_or_throw(a.inputs), a.t3_idle);
    t.columns = {"M", "lambda_eff"};
    for (const auto& p : sw.points) t.rows.push_back({std::to_string(p.M), num(p.result.lambda_eff)});
    t.footer.push_back({"M_opt", sw.m_opt ? std::to_string(*sw.m_opt) : std::string(kOutOfModel)});
    t.footer.push_back({"lambda_eff_min", num(sw.lambda_eff_min)});

    const ErrorModelParams p{a.alpha, a.beta, 0.0, kCircuitTimesteps};
    const auto mm = m_opt(p, a.lambda);
    t.footer.push_back({"model_alpha", num(p.alpha)});
    t.footer.push_back({"model_beta", num(p.beta)});
    t.footer.push_back({"model_M_opt", std::to_string(mm)});
    t.footer.push_back({"model_lambda_eff_min", num(model_lambda_eff(p, a.lambda, mm))});
    t.footer.push_back({"model_lambda_opt", num(lambda_opt(p, a.lambda))});
    t.footer.push_back({"model_lambda_crit", num(lambda_crit(p))});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Persistent-qubit channel and error-correction simulator"};
    app.require_subcommand(1);
    std::uint64_t seed = kDefaultSeed;
    std::string format = "csv";
    app.add_option("--seed", seed, "Seed for sampled input states")->capture_default_str();
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    ChannelCheckArgs cc;
    auto* sc_channel = app.add_subcommand("channel-check", "Completeness and trace checks for a channel");
    sc_channel->add_option("channel", cc.channel, "phase | amplitude | dual-rail")->required();
    sc_channel->add_option("--lambda", cc.lambda, "Phase damping per step")->capture_default_str();
    sc_channel->add_option("--qubits", cc.qubits, "Qubits for phase damping")->capture_default_str();
    sc_channel->add_option("--gamma0", cc.gamma0, "Amplitude damping excitation exponent")->capture_default_str();
    sc_channel->add_option("--gamma1", cc.gamma1, "Amplitude damping decay exponent")->capture_default_str();
    sc_channel->add_option("--gamma", cc.gamma, "Dual-rail loss exponent")->capture_default_str();

    GateArgs ga;
    auto* sc_gate = app.add_subcommand("gate-fidelity", "Noisy gate fidelity and error slope");
    sc_gate->add_option("--gate", ga.gate, "R | Rbar | CN")->capture_default_str();
    sc_gate->add_option("--damping", ga.damping, "phase | amplitude")->capture_default_str();
    sc_gate->add_option("--lambda", ga.lambdas, "Comma-separated lambda values")->delimiter(',')->capture_default_str();
    sc_gate->add_option("--domain", ga.domain, "real-product | full")->capture_default_str();

    CycleArgs ca;
    auto* sc_cycle = app.add_subcommand("cycle", "Encode, store, decode and correct; one row per cycle");
    sc_cycle->add_option("--mode", ca.mode, "ideal | lumped-phase | continuous-phase | continuous-amplitude")
        ->capture_default_str();
    sc_cycle->add_option("--lambda", ca.lambda, "Decoherence per timestep")->capture_default_str();
    sc_cycle->add_option("--m", ca.M, "Storage timesteps")->capture_default_str();
    sc_cycle->add_option("--cycles", ca.cycles, "Number of cycles")->capture_default_str();
    sc_cycle->add_option("--inputs", ca.inputs, "Input states minimized over: full | real-product")
        ->capture_default_str();
    sc_cycle->add_flag("--t3-idle-damping", ca.t3_idle, "Damp the data qubit during measurement");

    SweepArgs sa;
    auto* sc_sweep = app.add_subcommand("sweep", "Effective decoherence rate over storage time");
    sc_sweep->add_option("--mode", sa.mode, "Cycle mode")->capture_default_str();
    sc_sweep->add_option("--lambda", sa.lambda, "Decoherence per timestep")->capture_default_str();
    sc_sweep->add_option("--m-min", sa.m_min, "Smallest M")->capture_default_str();
    sc_sweep->add_option("--m-max", sa.m_max, "Largest M")->capture_default_str();
    sc_sweep->add_option("--alpha", sa.alpha, "Model alpha")->capture_default_str();
    sc_sweep->add_option("--beta", sa.beta, "Model beta")->capture_default_str();
    sc_sweep->add_option("--inputs", sa.inputs, "Input states minimized over: full | real-product")
        ->capture_default_str();
    sc_sweep->add_flag("--t3-idle-damping", sa.t3_idle, "Damp the data qubit during measurement");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    Table table;
    int rc = 0;
    std::string command;
    ordered_json params;
    try {
        if (sc_channel->parsed()) {
            command = "channel-check";
            params = {{"channel", cc.channel}, {"lambda", cc.lambda}, {"qubits", cc.qubits},
                      {"gamma0", cc.gamma0},   {"gamma1", cc.gamma1}, {"gamma", cc.gamma}};
            rc = cmd_channel_check(cc, seed, table);
        } else if (sc_gate->parsed()) {
            command = "gate-fidelity";
            params = {{"gate", ga.gate}, {"damping", ga.damping}, {"lambda", ga.lambdas}, {"domain", ga.domain}};
            cmd_gate_fidelity(ga, seed, table);
        } else if (sc_cycle->parsed()) {
            command = "cycle";
            params = {{"mode", ca.mode},     {"lambda", ca.lambda},        {"m", ca.M},
                      {"cycles", ca.cycles}, {"inputs", ca.inputs}, {"t3_idle_damping", ca.t3_idle}};
            cmd_cycle(ca, table);
        } else if (sc_sweep->parsed()) {
            command = "sweep";
            params = {{"mode", sa.mode},   {"lambda", sa.lambda}, {"m_min", sa.m_min},
                      {"m_max", sa.m_max}, {"alpha", sa.alpha},   {"beta", sa.beta},
                      {"inputs", sa.inputs}, {"t3_idle_damping", sa.t3_idle}};
            cmd_sweep(sa, table);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    table.emit(format == "json");

    ordered_json manifest;
    manifest["command"] = command;
    manifest["parameters"] = params;
    manifest["seed"] = seed;
    manifest["format"] = format;
    manifest["version"] = kVersion;
    manifest["duration_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << manifest.dump() << "\n";
    return rc;
}
