#include <doctest.h>

#include "botmosaic/cli.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

using namespace botmosaic;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// Runs the real executable and captures stdout.
std::string run_tool(const std::string& args) {
    std::string cmd = std::string(BOTMOSAIC_TOOL_PATH) + " " + args;
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
    CHECK(pclose(pipe) == 0);
    return out;
}

} // namespace

TEST_CASE("help and usage errors") {
    const auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("keygen") != std::string::npos);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"keygen", "--l", "4", "--T", "0.5", "--out", "/tmp/x"}).code == 2);  // --seed missing
    CHECK(run({"keygen", "--seed", "1", "--l", "4", "--T", "0.5", "--out", "/tmp/x", "--bogus"}).code == 2);
}

TEST_CASE("validation failures exit 1 naming the input") {
    testutil::TempDir dir;
    testutil::write(dir.file("bad.csv"), "flow_id,timestamp\na,-1\n");
    testutil::write(dir.file("k.txt"), "T=0.5 l=1 epoch=0\n0 1 HI\n1 1 LO\n");
    const auto r = run({"detect", "--key", dir.file("k.txt"), "--trace", dir.file("bad.csv"), "--eta", "1", "--theta", "1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("bad.csv:2") != std::string::npos);

    testutil::write(dir.file("c.cfg"), "eta = -1\n");
    const auto e = run({"eval", "--config", dir.file("c.cfg"), "--seed", "1"});
    CHECK(e.code == 1);
    CHECK(e.err.find("eta") != std::string::npos);

    CHECK(run({"keygen", "--seed", "1", "--l", "0", "--T", "0.5", "--out", dir.file("k2.txt")}).code == 1);
}

TEST_CASE("clean watermarked trace is reported WATERMARKED") {
    testutil::TempDir dir;
    const auto key = dir.file("k.txt"), flows = dir.file("flows.csv"), mixed = dir.file("m.csv");
    REQUIRE(run({"keygen", "--seed", "7", "--l", "64", "--T", "0.5", "--out", key}).code == 0);
    REQUIRE(run({"inject", "--key", key, "--seed", "8", "--R", "10", "--out", flows}).code == 0);
    REQUIRE(run({"mix", "--trace", flows, "--out-id", "candidate", "--out", mixed}).code == 0);
    const auto r = run({"detect", "--key", key, "--trace", mixed, "--eta", "1", "--theta", "32"});
    CHECK(r.code == 0);
    CHECK(r.out == "candidate 64 0.000000 WATERMARKED\n");

    // Each captured flow alone stays clean.
    const auto per_flow = run({"detect", "--key", key, "--trace", flows, "--eta", "1", "--theta", "32"});
    std::istringstream lines(per_flow.out);
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        CHECK(line.find("CLEAN") != std::string::npos);
        ++count;
    }
    CHECK(count == 10);
}

TEST_CASE("full file pipeline is deterministic end to end") {
    auto pipeline = [] {
        testutil::TempDir dir;
        const auto key = dir.file("k.txt");
        run_tool("keygen --seed 1 --l 64 --T 0.5 --epoch 10 --out " + key);
        run_tool("inject --key " + key + " --seed 2 --R 10 --out " + dir.file("wm.csv"));
        run_tool("simulate --seed 3 --duration 80 --cap-interval 0.5 --out " + dir.file("bg.csv"));
        run_tool("mix --trace " + dir.file("wm.csv") + " --trace " + dir.file("bg.csv") + " --out-id suspect --out " + dir.file("mix.csv"));
        run_tool("mix --trace " + dir.file("bg.csv") + " --out-id innocent --out " + dir.file("bgm.csv"));
        testutil::write(dir.file("both.csv"), testutil::read(dir.file("mix.csv")) +
                                                  testutil::read(dir.file("bgm.csv")).substr(std::string("flow_id,timestamp\n").size()));
        run_tool("channel --trace " + dir.file("both.csv") + " --seed 4 --stages 5 --base-delay 0.02 --jitter-sigma 0.002 --out " + dir.file("obs.csv"));
        return run_tool("detect --key " + key + " --trace " + dir.file("obs.csv") + " --eta 1 --theta 32");
    };
    const auto first = pipeline();
    CHECK(first == pipeline());
    CHECK(first.find("suspect") == 0);
    CHECK(first.find("WATERMARKED") != std::string::npos);
    CHECK(first.find("innocent") != std::string::npos);
    CHECK(first.substr(first.find("innocent")).find("CLEAN") != std::string::npos);
}

TEST_CASE("inputs are never modified") {
    testutil::TempDir dir;
    const auto key = dir.file("k.txt");
    REQUIRE(run({"keygen", "--seed", "1", "--l", "8", "--T", "0.5", "--out", key}).code == 0);
    REQUIRE(run({"inject", "--key", key, "--seed", "2", "--out", dir.file("w.csv")}).code == 0);
    const auto key_before = testutil::read(key), trace_before = testutil::read(dir.file("w.csv"));
    REQUIRE(run({"channel", "--trace", dir.file("w.csv"), "--seed", "1", "--out", dir.file("o.csv")}).code == 0);
    REQUIRE(run({"detect", "--key", key, "--trace", dir.file("w.csv"), "--eta", "1", "--theta", "4"}).code == 0);
    CHECK(testutil::read(key) == key_before);
    CHECK(testutil::read(dir.file("w.csv")) == trace_before);
}

TEST_CASE("eval and sweep write reproducible reports") {
    testutil::TempDir dir;
    testutil::write(dir.file("c.cfg"), "trials = 20\n");
    const auto a = run({"eval", "--config", dir.file("c.cfg"), "--seed", "5"});
    CHECK(a.code == 0);
    CHECK(a.out.find("theta_hat") != std::string::npos);
    CHECK(a.out.find("(extrapolated)") != std::string::npos);
    CHECK(a.out == run({"eval", "--config", dir.file("c.cfg"), "--seed", "5", "--threads", "1"}).out);

    const std::vector<std::string> sweep_args{"sweep", "--config", dir.file("c.cfg"), "--seed", "2", "--l", "16,32",
                                              "--trials", "10", "--out", dir.file("s.csv")};
    REQUIRE(run(sweep_args).code == 0);
    const auto first = testutil::read(dir.file("s.csv"));
    REQUIRE(run(sweep_args).code == 0);
    CHECK(first == testutil::read(dir.file("s.csv")));
    CHECK(std::count(first.begin(), first.end(), '\n') == 3);
}

TEST_CASE("bench subcommand") {
    const auto r = run({"bench", "--flows", "1000", "--l", "32", "--seed", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("state_bytes_per_flow 256") != std::string::npos);
    CHECK(run({"bench", "--flows", "10"}).code == 2);
}
