#include "doctest.h"

#include "pinlab/common.hpp"
#include "pinlab/io.hpp"
#include "pinlab/runner.hpp"

#include <cmath>
#include <filesystem>
#include <map>

using namespace pinlab;
using namespace pinlab::io;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("pinlab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string config_error_message(const Json& j) {
    try {
        runner::parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::map<std::string, std::string> result_digests(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.json")
            out[e.path().filename().string()] = sha256_hex(read_file(e.path()));
    return out;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(NAN) == "nan");
    CHECK(format_double(INFINITY) == "inf");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("CSV writing and parsing") {
    CHECK(quote_csv("plain") == "plain");
    CHECK(quote_csv("a,b") == "\"a,b\"");
    CHECK(quote_csv("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(quote_csv("two\nlines") == "\"two\nlines\"");
    Table t{{"name", "x", "n", "ok"}, {}};
    t.add({std::string("a,b"), 0.5, std::int64_t{3}, true});
    t.add({std::string("q\"x"), NAN, std::int64_t{-1}, false});
    const auto csv = to_csv(t);
    CHECK(csv.substr(0, 14) == "name,x,n,ok\r\n\"");
    CHECK(csv.substr(csv.size() - 2) == "\r\n");
    auto back = parse_csv(csv);
    REQUIRE(back.size() == 3);
    CHECK(back[0] == std::vector<std::string>{"name", "x", "n", "ok"});
    CHECK(back[1][0] == "a,b");
    CHECK(back[2][0] == "q\"x");
    CHECK(back[2][1] == "nan");
    Table empty{{"only"}, {}};
    CHECK(to_csv(empty) == "only\r\n");
    CHECK(parse_csv(to_csv(empty)).size() == 1);
    CHECK_THROWS(t.add({1.0}));
}

TEST_CASE("JSON output") {
    Json j = {{"zeta", 1}, {"alpha", {{"b", 2.5}, {"a", "s"}}}};
    const auto s = dump_json(j);
    CHECK(s.find("\"alpha\"") < s.find("\"zeta\""));
    CHECK(s.find("\"a\"") < s.find("\"b\""));
    CHECK(s.back() == '\n');
    CHECK(Json::parse(s) == j);
    Table t{{"x", "y"}, {}};
    t.add({1.5, std::string("u")});
    auto tj = to_json(t);
    CHECK(tj.is_array());
    CHECK(tj[0]["x"] == 1.5);
    CHECK(tj[0]["y"] == "u");
}

TEST_CASE("files and digests") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    auto dir = fresh_dir("atomic");
    fs::create_directories(dir);
    write_atomic(dir / "f.txt", "one");
    write_atomic(dir / "f.txt", "two");
    CHECK(read_file(dir / "f.txt") == "two");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
    CHECK(n == 1);
    fs::remove_all(dir);
}

} // TEST_SUITE

TEST_SUITE("runner") {

TEST_CASE("config validation names the key") {
    Json ok = {{"command", "green"}, {"params", {{"d", {3}}}}, {"output", "o"}};
    CHECK_NOTHROW(runner::parse_config(ok));
    CHECK_THROWS_AS(runner::parse_config(ok, "annealed"), ConfigError);

    auto missing = ok;
    missing["params"].erase("d");
    CHECK(config_error_message(missing).find("params.d") != std::string::npos);
    auto unknown = ok;
    unknown["params"]["dee"] = 3;
    CHECK(config_error_message(unknown).find("dee") != std::string::npos);
    auto wrong = ok;
    wrong["params"]["d"] = "three";
    CHECK(config_error_message(wrong).find("params.d") != std::string::npos);
    Json nocmd = {{"params", Json::object()}, {"output", "o"}};
    CHECK(config_error_message(nocmd).find("command") != std::string::npos);
    Json badcmd = {{"command", "nope"}, {"params", Json::object()}, {"output", "o"}};
    CHECK(config_error_message(badcmd).find("command") != std::string::npos);
    Json q = {{"command", "quenched"}, {"params", {{"mode", "sideways"}, {"d", 1}, {"beta", 0.1}, {"N", 8}}}, {"output", "o"}};
    CHECK(config_error_message(q).find("params.mode") != std::string::npos);
}

TEST_CASE("run writes a verifiable manifest") {
    auto dir = fresh_dir("run");
    Json j = {{"command", "annealed"}, {"params", {{"d", {1, 2, 5}}, {"z_grid", {1.01, 1.02}}, {"N", 50}}}, {"output", dir.string()}};
    auto cfg = runner::parse_config(j);
    runner::Overrides ov;
    ov.cache_dir = (dir / "cache").string();
    auto m = runner::run(cfg, ov);
    CHECK(!m.files.empty());
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(runner::verify_manifest(dir));
    auto mj = Json::parse(read_file(dir / "manifest.json"));
    CHECK(mj.contains("config"));
    CHECK(mj["files"].size() == m.files.size());
    // tampering breaks verification
    const auto victim = dir / m.files.front().name;
    write_atomic(victim, read_file(victim) + " ");
    CHECK_FALSE(runner::verify_manifest(dir));
    fs::remove_all(dir);
}

TEST_CASE("results do not depend on the thread count") {
    std::map<std::string, std::string> first;
    for (unsigned th : {1u, 4u, 8u}) {
        auto dir = fresh_dir("threads" + std::to_string(th));
        Json j = {{"command", "quenched"},
                  {"params", {{"mode", "discrete"}, {"d", 1}, {"beta", 0.3}, {"N", 64}, {"replicas", 40}, {"seed", 7}}},
                  {"output", dir.string()}};
        runner::Overrides ov;
        ov.threads = th;
        ov.cache_dir = (dir / "cache").string();
        runner::run(runner::parse_config(j), ov);
        auto dig = result_digests(dir);
        CHECK(!dig.empty());
        if (first.empty())
            first = dig;
        else
            CHECK(dig == first);
        fs::remove_all(dir);
    }
}

} // TEST_SUITE
