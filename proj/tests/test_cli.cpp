#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(PQUBIT_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Cli, HeadersMatchColumns) {
    EXPECT_EQ(first_line(run("gate-fidelity --gate R --lambda 1e-4").out), "lambda,fidelity,slope_estimate");
    EXPECT_EQ(first_line(run("cycle --mode ideal --lambda 0 --m 8").out),
              "t,f_cycle,f_single,f_ideal,lambda_eff,min_theta,min_phi");
    EXPECT_EQ(first_line(run("sweep --lambda 1e-3 --m-min 10 --m-max 12").out), "M,lambda_eff");
}

TEST(Cli, DeterministicOutput) {
    for (const char* args : {"--seed 7 gate-fidelity --gate CN --damping amplitude --domain full --lambda 1e-3,1e-2",
                             "cycle --mode continuous-phase --lambda 1e-3 --m 20 --cycles 3",
                             "sweep --lambda 3e-4 --m-min 100 --m-max 110",
                             "--seed 3 channel-check dual-rail --gamma 0.3"}) {
        const auto a = run(args), b = run(args);
        EXPECT_EQ(a.code, 0) << args;
        EXPECT_EQ(a.out, b.out) << args;
        EXPECT_FALSE(a.out.empty());
    }
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("no-such-command").code, 2);
    EXPECT_EQ(run("channel-check nonsense").code, 2);
    EXPECT_EQ(run("--format xml cycle").code, 2);
    EXPECT_EQ(run("cycle --mode sideways").code, 2);
    EXPECT_EQ(run("cycle --lambda -1").code, 2);
    EXPECT_EQ(run("sweep --m-min 5 --m-max 4").code, 2);
    EXPECT_EQ(run("gate-fidelity --gate T").code, 2);
}

TEST(Cli, ChannelCheckPasses) {
    for (const char* args : {"channel-check phase --lambda 0.1", "channel-check phase --lambda 0.4 --qubits 3",
                             "channel-check amplitude --gamma0 0 --gamma1 0.2", "channel-check dual-rail --gamma 0.3"}) {
        const auto r = run(args);
        EXPECT_EQ(r.code, 0) << args;
        EXPECT_NE(r.out.find("status=pass"), std::string::npos) << args;
    }
    const auto amp = run("channel-check amplitude --gamma0 0 --gamma1 0.2");
    EXPECT_NE(amp.out.find("fixed_point,0,0,1,0"), std::string::npos);
    EXPECT_NE(amp.out.find("fixed_point,1,1,0,0"), std::string::npos);
}

TEST(Cli, GateFidelityRows) {
    const auto r = run("gate-fidelity --gate R --lambda 0");
    const auto l = lines(r.out);
    ASSERT_EQ(l.size(), 3u);
    EXPECT_EQ(l[1], "0,1,n/a");
    EXPECT_EQ(l[2], "0,1,n/a");
    const auto d = lines(run("gate-fidelity --gate R --damping phase").out);
    ASSERT_EQ(d.size(), 7u);
    const double slope = std::stod(d.back().substr(d.back().rfind(',') + 1));
    EXPECT_NEAR(slope, 0.40, 0.02);
}

TEST(Cli, CycleOutputs) {
    const auto l = lines(run("cycle --mode ideal --lambda 0 --m 8").out);
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[1].substr(0, 5), "13,1,");
    const auto many = lines(run("cycle --mode continuous-phase --lambda 0.4 --m 30 --cycles 3").out);
    ASSERT_EQ(many.size(), 4u);
    EXPECT_NE(many.back().find("out-of-model"), std::string::npos);
}

TEST(Cli, SweepFooter) {
    const auto l = lines(run("sweep --lambda 1e-3 --m-min 40 --m-max 40").out);
    ASSERT_EQ(l.size(), 3u);
    EXPECT_EQ(l[2].rfind("M_opt=40 lambda_eff_min=", 0), 0u);
    EXPECT_NE(l[2].find("model_M_opt=67"), std::string::npos);
}

TEST(Cli, JsonFormat) {
    const auto r = run("--format json cycle --mode ideal --lambda 0 --m 8");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("\"columns\""), std::string::npos);
    EXPECT_NE(r.out.find("\"f_cycle\""), std::string::npos);
}
