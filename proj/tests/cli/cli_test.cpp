#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "aufuse/io_util.hpp"
#include "generators.hpp"

using aufuse::read_file;
using aufuse::testing::TempDir;

namespace {

std::string cli_binary() {
    const char* path = std::getenv("AUFUSE_CLI_BIN");
    REQUIRE_MESSAGE(path != nullptr, "AUFUSE_CLI_BIN must point at the aufuse binary");
    return path;
}

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const TempDir& dir, const std::string& args) {
    static int counter = 0;
    const auto log = dir.path() / ("cli_out_" + std::to_string(counter++) + ".log");
    const std::string command = cli_binary() + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = read_file(log);
    return result;
}

void write_sim_config(const std::filesystem::path& path) {
    std::ofstream out(path);
    out << R"({"format_version":"1","generator":"demo-small","subjects":3,)"
        << R"("sequences_per_subject":3,"frames_per_sequence":25,)"
        << R"("subject_jitter":60,"noise":"clean-like"})";
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (const char c : text) lines += c == '\n' ? 1 : 0;
    return lines;
}

} // namespace

TEST_CASE("simulate is deterministic for a fixed seed") {
    const TempDir dir("cli_sim");
    write_sim_config(dir.path() / "sim.json");
    const std::string base = " --config " + (dir.path() / "sim.json").string();
    auto first = run_cli(dir, "simulate" + base + " --out " + (dir.path() / "a.jsonl").string() +
                                  " --seed 7");
    auto second = run_cli(dir, "simulate" + base + " --out " + (dir.path() / "b.jsonl").string() +
                                   " --seed 7");
    REQUIRE(first.exit_code == 0);
    REQUIRE(second.exit_code == 0);
    CHECK(read_file(dir.path() / "a.jsonl") == read_file(dir.path() / "b.jsonl"));

    auto other = run_cli(dir, "simulate" + base + " --out " + (dir.path() / "c.jsonl").string() +
                                  " --seed 8");
    REQUIRE(other.exit_code == 0);
    CHECK(read_file(dir.path() / "a.jsonl") != read_file(dir.path() / "c.jsonl"));
}

TEST_CASE("infer writes one belief record per input frame") {
    const TempDir dir("cli_infer");
    write_sim_config(dir.path() / "sim.json");
    const auto corpus = (dir.path() / "corpus.jsonl").string();
    REQUIRE(run_cli(dir, "simulate --config " + (dir.path() / "sim.json").string() + " --out " +
                             corpus + " --seed 7")
                .exit_code == 0);
    const auto model = (dir.path() / "static.json").string();
    REQUIRE(run_cli(dir, "learn-structure --corpus " + corpus + " --out " + model).exit_code == 0);
    const auto dbn = (dir.path() / "dbn.json").string();
    REQUIRE(run_cli(dir, "learn-transitions --corpus " + corpus + " --model " + model + " --out " +
                             dbn)
                .exit_code == 0);
    const auto beliefs = (dir.path() / "beliefs.jsonl").string();
    REQUIRE(run_cli(dir, "infer --model " + dbn + " --corpus " + corpus + " --mode filtered --out " +
                             beliefs)
                .exit_code == 0);
    CHECK(count_lines(read_file(beliefs)) == 3 * 3 * 25);
}

TEST_CASE("evaluate writes the report shape and stats the fixture columns") {
    const TempDir dir("cli_eval");
    write_sim_config(dir.path() / "sim.json");
    const auto corpus = (dir.path() / "corpus.jsonl").string();
    REQUIRE(run_cli(dir, "simulate --config " + (dir.path() / "sim.json").string() + " --out " +
                             corpus + " --seed 9")
                .exit_code == 0);
    const auto report = (dir.path() / "report.csv").string();
    auto eval = run_cli(dir, "evaluate --corpus " + corpus +
                                 " --methods dbn-expert,measurement-only --out " + report);
    REQUIRE(eval.exit_code == 0);
    const std::string csv = read_file(report);
    // header + 2 methods * (4 AU rows + 1 macro row)
    CHECK(count_lines(csv) == 1 + 2 * (4 + 1));
    CHECK(csv.rfind("method,au,f1,tpr,fpr,mcc,tp,fp,fn,tn\n", 0) == 0);

    const auto stats_csv = (dir.path() / "stats.csv").string();
    REQUIRE(run_cli(dir, "stats --corpus " + corpus + " --csv " + stats_csv).exit_code == 0);
    const std::string stats = read_file(stats_csv);
    CHECK(stats.rfind("AU18,AU24,AU25,AU26,Total Frames\n", 0) == 0);
}

TEST_CASE("usage errors exit 2, data errors exit 1, help exits 0") {
    const TempDir dir("cli_codes");
    CHECK(run_cli(dir, "--help").exit_code == 0);
    CHECK(run_cli(dir, "simulate --help").exit_code == 0);

    auto help = run_cli(dir, "evaluate --help");
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("--max-parents") != std::string::npos);
    CHECK(help.output.find("--threshold") != std::string::npos);

    // Unknown flag and missing required flag are usage errors.
    CHECK(run_cli(dir, "simulate --bogus 1").exit_code == 2);
    CHECK(run_cli(dir, "simulate --config x.json").exit_code == 2);
    CHECK(run_cli(dir, "no-such-command").exit_code == 2);

    // Missing file is a data error.
    auto missing = run_cli(dir, "validate-model --model " + (dir.path() / "nope.json").string());
    CHECK(missing.exit_code == 1);
    CHECK(missing.output.find("nope.json") != std::string::npos);
}

TEST_CASE("validate-model reports violations and exits 1") {
    const TempDir dir("cli_validate");
    const auto bad = dir.path() / "bad.json";
    std::ofstream out(bad);
    out << R"({"format_version":"1",
               "variables":[{"name":"A","cardinality":2,"role":"hidden-AU"}],
               "intra_edges":[],"inter_edges":[],
               "cpts":[{"child":"A","parents":[],"table":[0.7,0.2]}],
               "transition_cpts":[]})";
    out.close();
    auto result = run_cli(dir, "validate-model --model " + bad.string());
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("sums to") != std::string::npos);
}

TEST_CASE("failed commands leave no partial outputs") {
    const TempDir dir("cli_atomic");
    const auto out = dir.path() / "corpus.jsonl";
    auto result = run_cli(dir, "simulate --config " + (dir.path() / "absent.json").string() +
                                   " --out " + out.string() + " --seed 1");
    CHECK(result.exit_code == 1);
    CHECK(!std::filesystem::exists(out));
}
