#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "ivflow/report.hpp"

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run ivflow_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + IVFLOW_CLI_PATH + "\" " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string quoted(const std::string& file) { return "\"" + ivflow::test::case_path(file) + "\""; }

bool has_line(const std::string& text, const std::string& line) {
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        if (l == line) return true;
    }
    return false;
}

std::string value(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        if (l.rfind(key + "=", 0) == 0) return l.substr(key.size() + 1);
    }
    return {};
}

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ivflow_cli_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("solve prints a converged summary") {
    const auto r = ivflow_cli("solve " + quoted("case9.m"));
    INFO(r.out);
    CHECK(r.status == 0);
    CHECK(has_line(r.out, "converged=true"));
    CHECK(has_line(r.out, "case=case9.m"));
    CHECK_FALSE(value(r.out, "v_max_pu").empty());
    CHECK_FALSE(value(r.out, "v_min_pu").empty());
    CHECK(value(r.out, "unstable_generators") == "0");
}

TEST_CASE("an iteration cap that stops the solve exits with 1") {
    const auto r = ivflow_cli("solve " + quoted("case118.m") + " --max-iter 1");
    INFO(r.out);
    CHECK(r.status == 1);
    CHECK(has_line(r.out, "converged=false"));
}

TEST_CASE("malformed case file exits with 2 and names the line") {
    const auto path = scratch("bad.m");
    std::ofstream(path) << "function mpc = bad\nmpc.baseMVA = 100;\nmpc.bus = [\n\t1\t3\t0\t0;\n];\n";
    const auto r = ivflow_cli("solve \"" + path.string() + "\"");
    std::filesystem::remove(path);
    INFO(r.out);
    CHECK(r.status == 2);
    CHECK(r.out.find("line 4") != std::string::npos);
}

TEST_CASE("bad arguments exit with 2") {
    CHECK(ivflow_cli("solve " + quoted("case9.m") + " --no-such-flag").status == 2);
    CHECK(ivflow_cli("solve " + quoted("case9.m") + " --homotopy sideways").status == 2);
    CHECK(ivflow_cli("solve " + quoted("savnw_like.json") + " --contingency drop-gen:999").status == 2);
    CHECK(ivflow_cli("solve " + quoted("savnw_like.json") + " --contingency trip-line:3").status == 2);
    CHECK(ivflow_cli("solve /nonexistent/case.m").status == 2);
    CHECK(ivflow_cli("").status == 2);
}

TEST_CASE("AGC dispatch after losing generator 211") {
    const auto r = ivflow_cli("solve " + quoted("savnw_like.json") + " --agc --contingency drop-gen:211 --dispatch");
    INFO(r.out);
    REQUIRE(r.status == 0);
    CHECK(has_line(r.out, "outer_iterations=0"));
    CHECK(has_line(r.out, "gen,bus,p_sched_mw,delta_p_mw,p_final_mw,p_max_mw"));
    CHECK(has_line(r.out, "101,101,750,60,810,810"));
    CHECK(has_line(r.out, "102,102,750,60,810,810"));
    CHECK(r.out.find("\n211,") == std::string::npos);
}

TEST_CASE("trace file is written") {
    const auto path = scratch("trace.csv");
    const auto r = ivflow_cli("solve " + quoted("qlimit_3bus.json") + " --homotopy composite --trace \"" +
                              path.string() + "\"");
    REQUIRE(r.status == 0);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == ivflow::kTraceHeader);
    int rows = 0;
    for (std::string l; std::getline(in, l);) ++rows;
    CHECK(rows > 0);
    in.close();
    std::filesystem::remove(path);
}

TEST_CASE("outer-loop model through the CLI") {
    const auto r = ivflow_cli("solve " + quoted("oscillation_3bus.json") + " --models outer-loop");
    INFO(r.out);
    CHECK(r.status == 0);
    CHECK(std::stoi(value(r.out, "pv_to_pq")) + std::stoi(value(r.out, "pq_to_pv")) >= 4);
    CHECK(std::stoi(value(r.out, "unstable_generators")) >= 1);
}

TEST_CASE("compare shows the oscillation case side by side") {
    const auto r = ivflow_cli("compare " + quoted("oscillation_3bus.json"));
    INFO(r.out);
    CHECK(r.status == 0);
    std::istringstream in(r.out);
    bool seen = false;
    for (std::string l; std::getline(in, l);) {
        std::istringstream row(l);
        std::string name, cont, outer;
        row >> name >> cont >> outer;
        if (name != "unstable_generators") continue;
        seen = true;
        CHECK(cont == "0");
        CHECK(std::stoi(outer) >= 1);
    }
    CHECK(seen);
}

TEST_CASE("compare reports order-dependent outer-loop voltages") {
    const auto small = ivflow_cli("solve " + quoted("order_sensitivity_5bus.json") + " --models outer-loop");
    const auto large = ivflow_cli("solve " + quoted("order_sensitivity_5bus.json") +
                                  " --models outer-loop --order largest-first");
    REQUIRE(small.status == 0);
    REQUIRE(large.status == 0);
    const double dv = std::stod(value(small.out, "v_max_pu")) - std::stod(value(large.out, "v_max_pu"));
    CHECK(std::abs(dv) > 1e-3);
}
