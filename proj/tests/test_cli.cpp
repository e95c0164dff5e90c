#include <doctest.h>
#include <nlohmann/json.hpp>

#include "cli_runner.hpp"
#include "countermachine/data.hpp"
#include "countermachine/model_io.hpp"

using namespace cfm;
using namespace cfm::test;
using nlohmann::json;

namespace {

const std::string kFixture = std::string(COUNTERMACHINE_FIXTURE_DIR) + "/war_fixture_model.json";
const std::string kFactual = "0,1,0.4,0.1,0.3,0.1,0.6";

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("gen writes the requested rows and is seed-deterministic") {
    const auto dir = scratch_dir("cli_gen");
    const auto a = (dir / "a.csv").string();
    const auto b = (dir / "b.csv").string();

    const auto r1 = run_cli({"gen", "--rows", "50", "--out", a, "--seed", "7"});
    const auto r2 = run_cli({"gen", "--rows", "50", "--out", b, "--seed", "7"});
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(count_lines(slurp(a)) == 51);
    CHECK(load_csv(a).size() == 50);

    const auto doc = json::parse(r1.out);
    CHECK(doc["rows"] == 50);
    CHECK(doc["war"].get<int>() + doc["peace"].get<int>() == 50);

    const auto c = (dir / "c.csv").string();
    REQUIRE(run_cli({"gen", "--rows", "50", "--out", c, "--seed", "8"}).code == 0);
    CHECK(slurp(a) != slurp(c));
    std::filesystem::remove_all(dir);
}

TEST_CASE("seed can come from the environment") {
    const auto dir = scratch_dir("cli_env");
    const auto a = (dir / "a.csv").string();
    const auto b = (dir / "b.csv").string();
    REQUIRE(run_cli({"gen", "--rows", "30", "--out", a, "--seed", "5"}).code == 0);
    ::setenv("COUNTERMACHINE_SEED", "5", 1);
    const auto r = run_cli({"gen", "--rows", "30", "--out", b});
    ::unsetenv("COUNTERMACHINE_SEED");
    REQUIRE(r.code == 0);
    CHECK(slurp(a) == slurp(b));
    std::filesystem::remove_all(dir);
}

TEST_CASE("usage errors exit with code 2") {
    const auto dir = scratch_dir("cli_usage");
    CHECK(run_cli({"gen", "--rows", "0", "--out", (dir / "x.csv").string()}).code == 2);
    CHECK(run_cli({"gen", "--rows", "ten", "--out", (dir / "x.csv").string()}).code == 2);
    CHECK(run_cli({"cf", "--bogus"}).code == 2);
    CHECK(run_cli({"nosuchcommand"}).code == 2);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"cf", "--model", kFixture, "--features", kFactual, "--target", "maybe"}).code == 2);
    CHECK(run_cli({"cf", "--model", kFixture, "--features", kFactual, "--target", "peace", "--free",
                   "allies", "--realistic-locks"})
              .code == 2);
    CHECK(run_cli({"cf", "--model", kFixture, "--features", kFactual, "--target", "peace", "--free",
                   "not_a_feature"})
              .code == 2);
    CHECK(run_cli({"cf", "--model", kFixture, "--features", kFactual, "--target", "peace", "--cooling",
                   "1.5"})
              .code == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("runtime errors exit with code 1 and name the file") {
    const auto r = run_cli({"train", "--data", "/definitely/missing.csv", "--out", "/tmp/never.json"});
    CHECK(r.code == 1);
    CHECK(r.err.find("/definitely/missing.csv") != std::string::npos);

    const auto e = run_cli({"eval", "--model", "/definitely/missing.json", "--features", kFactual});
    CHECK(e.code == 1);
    CHECK(e.err.find("/definitely/missing.json") != std::string::npos);

    const auto dir = scratch_dir("cli_bad");
    const auto bad = dir / "bad.json";
    std::ofstream(bad) << "{\"version\": 99}";
    CHECK(run_cli({"eval", "--model", bad.string(), "--features", kFactual}).code == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("eval on the fixture model") {
    const auto r = run_cli({"eval", "--model", kFixture, "--features", kFactual});
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc["class"] == "war");
    // 0.75 - 0.3*0 + 0.25*1 + 0 - 0.15*0.1 - 0.2*0.3 - 0.1*0.1 + 0*0.6
    CHECK(doc["y"].get<double>() == doctest::Approx(0.915).epsilon(1e-12));
    CHECK(doc["degenerate_activation"] == false);

    CHECK(run_cli({"eval", "--model", kFixture, "--features", "0,1,0.4,0.1,0.3,0.1,1.6"}).code == 2);
    CHECK(run_cli({"eval", "--model", kFixture, "--features", "0,1,0.4"}).code == 2);
    CHECK(run_cli({"eval", "--model", kFixture, "--features", "0,1,x,0.1,0.3,0.1,0.6"}).code == 2);
}

TEST_CASE("cf with an empty free set reports no free variables") {
    const auto r = run_cli({"cf", "--model", kFixture, "--features", kFactual, "--target", "peace", "--free", ""});
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc["no_free_variables"] == true);
    CHECK(doc["success"] == false);
    CHECK(doc["trace"]["evaluations"] == 0);
    CHECK(doc["antecedent"] == json::parse("[0.0,1.0,0.4,0.1,0.3,0.1,0.6]"));
}

TEST_CASE("cf finds peace on the fixture and honors locks") {
    const auto r = run_cli({"cf", "--model", kFixture, "--features", kFactual, "--target", "peace", "--seed", "7"});
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc["success"] == true);
    CHECK(doc["achieved_class"] == "peace");

    const auto locked = run_cli({"cf", "--model", kFixture, "--features", kFactual, "--target", "peace",
                                 "--realistic-locks", "--seed", "7"});
    REQUIRE(locked.code == 0);
    const auto ldoc = json::parse(locked.out);
    for (const auto& d : ldoc["deltas"]) {
        const auto name = d["name"].get<std::string>();
        if (name == "distance" || name == "contiguity" || name == "major_power") {
            CHECK(d["direction"] == "unchanged");
            CHECK(d["counterfactual"] == d["factual"]);
        }
    }
}

TEST_CASE("cf output is byte-identical for a fixed seed") {
    const std::vector<std::string> args{"cf", "--model", kFixture, "--features", kFactual, "--target", "peace",
                                        "--free", "allies,democracy,capability", "--seed", "7"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("cf writes a trace CSV and can embed the full trace") {
    const auto dir = scratch_dir("cli_trace");
    const auto csv = (dir / "trace.csv").string();
    const auto r = run_cli({"cf", "--model", kFixture, "--features", kFactual, "--target", "peace", "--seed", "3",
                            "--trace-csv", csv, "--full-trace"});
    REQUIRE(r.code == 0);
    const auto text = slurp(csv);
    CHECK(text.rfind("eval_index,temperature,error\n", 0) == 0);
    const auto doc = json::parse(r.out);
    REQUIRE(doc["trace"].contains("records"));
    CHECK(count_lines(text) == doc["trace"]["records"].size() + 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("train round trip on a small synthetic set") {
    const auto dir = scratch_dir("cli_train");
    const auto data = (dir / "d.csv").string();
    const auto model = (dir / "m.json").string();
    REQUIRE(run_cli({"gen", "--rows", "300", "--out", data, "--seed", "7"}).code == 0);
    const std::vector<std::string> train{"train", "--data", data, "--out", model, "--train-per-class", "60",
                                         "--test-per-class", "40", "--epochs", "3", "--seed", "7"};
    const auto r = run_cli(train);
    REQUIRE(r.code == 0);
    const auto report = json::parse(r.out);
    CHECK(report.contains("loss"));
    CHECK(report["train_acc"].get<double>() >= 0.0);
    CHECK(report["test_acc"].get<double>() <= 1.0);
    const auto m = load_model(model);
    CHECK(m.n_inputs() == 7);
    CHECK(m.n_rules() == 128);

    const auto first = slurp(model);
    REQUIRE(run_cli(train).code == 0);
    CHECK(slurp(model) == first);

    // more rows requested than the minority class has
    CHECK(run_cli({"train", "--data", data, "--out", model, "--train-per-class", "5000"}).code != 0);
    std::filesystem::remove_all(dir);
}
