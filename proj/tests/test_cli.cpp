#include "doctest.h"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

std::string cli() {
    const char* p = std::getenv("PINLAB_CLI_PATH");
    return p ? p : "pinlab";
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("pinlab_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const Json& j) {
    auto p = dir / "config.json";
    std::ofstream(p) << j.dump();
    return p;
}

struct Result {
    int rc = -1;
    std::string err;
};

// Runs the CLI with stderr captured; `env` is prepended to the command line.
Result run(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const auto err = dir / "stderr.txt";
    const std::string cmd = env + " \"" + cli() + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Result r;
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
}

Json small_quenched(const fs::path& out) {
    return {{"command", "quenched"},
            {"params", {{"mode", "discrete"}, {"d", 1}, {"beta", 0.2}, {"N", 64}, {"replicas", 20}, {"seed", 1}}},
            {"output", out.string()}};
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("successful run and determinism") {
    auto dir = scratch("ok");
    auto cfg = write_config(dir, small_quenched(dir / "a"));
    CHECK(run("quenched --config " + cfg.string(), dir).rc == 0);
    CHECK(run("quenched --config " + cfg.string() + " --out " + (dir / "b").string() + " --threads 3", dir).rc == 0);
    const auto ma = Json::parse(slurp(dir / "a" / "manifest.json"));
    const auto mb = Json::parse(slurp(dir / "b" / "manifest.json"));
    CHECK(ma["files"] == mb["files"]);
    CHECK(mb["threads"] == 3);
    // a different seed changes the samples
    CHECK(run("quenched --config " + cfg.string() + " --out " + (dir / "c").string() + " --seed 99", dir).rc == 0);
    CHECK(Json::parse(slurp(dir / "c" / "manifest.json"))["files"] != ma["files"]);
    fs::remove_all(dir);
}

TEST_CASE("config errors exit with 1 and write nothing") {
    auto dir = scratch("bad");
    auto j = small_quenched(dir / "out");
    j["params"].erase("d");
    auto cfg = write_config(dir, j);
    auto r = run("quenched --config " + cfg.string(), dir);
    CHECK(r.rc == 1);
    CHECK(r.err.find("params.d") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));

    j = small_quenched(dir / "out");
    j["params"]["bogus"] = 1;
    r = run("quenched --config " + write_config(dir, j).string(), dir);
    CHECK(r.rc == 1);
    CHECK(r.err.find("bogus") != std::string::npos);

    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(run("quenched --config " + (dir / "broken.json").string(), dir).rc == 1);
    CHECK(run("quenched", dir).rc == 1);
    CHECK(run("", dir).rc == 1);
    // subcommand and file disagree
    CHECK(run("annealed --config " + write_config(dir, small_quenched(dir / "out")).string(), dir).rc == 1);
    CHECK_FALSE(fs::exists(dir / "out"));
    fs::remove_all(dir);
}

TEST_CASE("unreachable tolerance exits with 2 and names it") {
    auto dir = scratch("tol");
    Json j = {{"command", "green"}, {"params", {{"d", {3}}, {"eps", 1e-18}}}, {"output", (dir / "out").string()}};
    auto r = run("green --config " + write_config(dir, j).string(), dir);
    CHECK(r.rc == 2);
    CHECK(r.err.find("eps") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cache location from the environment") {
    auto dir = scratch("cache");
    // d = 3 takes the kernel-table route, which is what gets cached
    auto j = small_quenched(dir / "out");
    j["params"]["d"] = 3;
    j["params"]["N"] = 32;
    auto cfg = write_config(dir, j);
    const auto cache = dir / "kcache";
    const std::string env = "PINLAB_CACHE=\"" + cache.string() + "\"";
    CHECK(run("quenched --config " + cfg.string(), dir, env).rc == 0);
    CHECK(fs::exists(cache));
    CHECK(!fs::is_empty(cache));
    CHECK_FALSE(fs::exists(dir / "out" / "cache"));
    CHECK(run("quenched --config " + cfg.string(), dir, env).rc == 0);
    const auto m = Json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(m["cache"]["dir"] == cache.string());
    CHECK(m["cache"]["disk_hits"].get<int>() > 0);
    CHECK(m["cache"]["builds"].get<int>() == 0);
    fs::remove_all(dir);
}

TEST_CASE("shipped annealed config") {
    auto dir = scratch("annealed");
    const char* src = std::getenv("PINLAB_SOURCE_DIR");
    REQUIRE(src != nullptr);
    const auto cfg = fs::path(src) / "configs" / "annealed.json";
    REQUIRE(run("annealed --config " + cfg.string() + " --out " + (dir / "out").string(), dir).rc == 0);
    const auto csv = slurp(dir / "out" / "critical.csv");
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    int low_d = 0;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) f.push_back(c);
        REQUIRE(f.size() >= 4);
        if (f[1] == "1" || f[1] == "2") {
            ++low_d;
            CHECK(std::stod(f[3]) == 0.0);
        } else {
            CHECK(std::stod(f[3]) > 0.0);
        }
    }
    CHECK(low_d >= 2);
    fs::remove_all(dir);
}

} // TEST_SUITE
