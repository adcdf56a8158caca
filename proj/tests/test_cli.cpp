#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DWSIM_CLI;
const fs::path kConfigs = DWSIM_CONFIGS;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dwsim_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = "\"" + kCli + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("dwsim_test_cli_" + name + ".json");
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("simulate writes reproducible outputs") {
    const fs::path a = scratch("sim_a"), b = scratch("sim_b");
    const std::string cfg = (kConfigs / "remark1.json").string();
    REQUIRE(run("simulate --config " + cfg + " --out " + a.string()) == 0);
    REQUIRE(run("simulate --config " + cfg + " --out " + b.string()) == 0);
    CHECK(tree(a) == tree(b));
    CHECK(fs::exists(a / "summary.json"));
    CHECK(fs::exists(a / "run_0000" / "trace.csv"));
    CHECK(fs::exists(a / "run_0000" / "events.csv"));

    const nlohmann::json rep = nlohmann::json::parse(slurp(a / "run_0003" / "report.json"));
    CHECK(rep["converged"] == true);
    const double x1 = rep["limits"][0][0], x2 = rep["limits"][1][0], x3 = rep["limits"][2][0];
    CHECK(x1 == 0.0);
    CHECK(std::abs(x2 - 1.0) < 1e-6);
    CHECK(std::abs(x3 - 1.0) < 1e-6);
    CHECK(rep["boundary_pairs"] == nlohmann::json::parse("[[1,3]]"));

    const fs::path c = scratch("sim_c");
    REQUIRE(run("simulate --config " + cfg + " --out " + c.string() + " --seed 99") == 0);
    CHECK(slurp(a / "run_0000" / "trace.csv") != slurp(c / "run_0000" / "trace.csv"));
    for (const fs::path& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("configuration errors exit with 2") {
    const fs::path out = scratch("bad");
    const fs::path two = write_config(
        "two_agents", R"({"n": 2, "d": 1, "r": [1, 1], "mu": [0.5, 0.5], "init": [[0], [1]]})");
    CHECK(run("simulate --config " + two.string() + " --out " + out.string()) == 2);
    const fs::path broken = write_config("broken", "{ \"n\": ");
    CHECK(run("simulate --config " + broken.string() + " --out " + out.string()) == 2);
    CHECK(run("simulate --out " + out.string()) == 2);
    CHECK(run("repro fig3 --out " + out.string()) == 2);
    CHECK(run("no-such-command") == 2);
    CHECK(run("slow --K 10 --mui 0.5 --muj 0.5 --out " + out.string()) == 2);
    CHECK(run("merge-demo --config " + (kConfigs / "remark1.json").string() + " --a 1 --b 4 --eps 0.05 --out " +
              out.string()) == 2);
    fs::remove(two);
    fs::remove(broken);
    fs::remove_all(out);
}

TEST_CASE("unreadable input or unwritable output exits with 3") {
    CHECK(run("simulate --config /nonexistent/dwsim.json --out " + scratch("io").string()) == 3);
    const fs::path blocker = scratch("blocker");
    std::ofstream(blocker) << "x";
    CHECK(run("slow --K 3 --out " + (blocker / "sub").string()) == 3);
    fs::remove(blocker);
}

TEST_CASE("slow verifies, and a tampered instance exits with 1") {
    const fs::path out = scratch("slow");
    CHECK(run("slow --K 10 --out " + out.string()) == 0);
    const nlohmann::json ok = nlohmann::json::parse(slurp(out / "slow_report.json"));
    CHECK(ok["passed"] == true);
    const double dev = ok["landing_deviation"];
    CHECK(dev < 1e-12);

    const fs::path bad = scratch("slow_bad");
    CHECK(run("slow --K 10 --tamper-a 0.001 --out " + bad.string()) == 1);
    const nlohmann::json failed = nlohmann::json::parse(slurp(bad / "slow_report.json"));
    CHECK(failed["passed"] == false);
    CHECK(failed["checks"]["landing_ok"] == false);

    const fs::path curve = scratch("slow_curve");
    CHECK(run("slow --K 5 --tau-K 1 --tau-K 5 --tau-seeds 5 --out " + curve.string()) == 0);
    CHECK(slurp(curve / "tau_curve.csv").rfind("K,runs,censored,median_tau\n1,5,", 0) == 0);
    for (const fs::path& p : {out, bad, curve}) fs::remove_all(p);
}

TEST_CASE("merge-demo writes the forced schedule") {
    const fs::path a = scratch("merge_a"), b = scratch("merge_b");
    const std::string args = "merge-demo --config " + (kConfigs / "remark1.json").string() + " --a 2 --b 3 --eps 0.05 --out ";
    REQUIRE(run(args + a.string()) == 0);
    REQUIRE(run(args + b.string()) == 0);
    CHECK(tree(a) == tree(b));
    const nlohmann::json m = nlohmann::json::parse(slurp(a / "merge_trace.json"));
    CHECK(m["hub"] == 3);
    CHECK(m["members"] == nlohmann::json::array({2, 3}));
    CHECK(slurp(a / "trace.csv").rfind("t,agent,x1\n0,1,0\n0,2,0.75\n0,3,1.25\n", 0) == 0);
    fs::remove_all(a);
    fs::remove_all(b);
}
