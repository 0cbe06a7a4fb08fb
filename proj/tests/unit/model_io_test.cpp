#include <doctest.h>

#include "aufuse/model_io.hpp"
#include "aufuse/rng.hpp"
#include "aufuse/simulate.hpp"
#include "generators.hpp"

using namespace aufuse;

TEST_CASE("model serialization round-trips bit-exactly") {
    Rng rng(5150);
    for (int round = 0; round < 10; ++round) {
        const NetworkSpec spec = testing::random_spec(rng);
        const std::string once = model_to_json(spec);
        const NetworkSpec reparsed = parse_model_json(once);
        const std::string twice = model_to_json(reparsed);
        CHECK(once == twice);

        REQUIRE(reparsed.cpts.size() == spec.cpts.size());
        for (std::size_t i = 0; i < spec.cpts.size(); ++i) {
            REQUIRE(reparsed.cpts[i].table.size() == spec.cpts[i].table.size());
            for (std::size_t t = 0; t < spec.cpts[i].table.size(); ++t) {
                // Exact double equality: serialization must not lose bits.
                CHECK(reparsed.cpts[i].table[t] == spec.cpts[i].table[t]);
            }
        }
    }
}

TEST_CASE("the speech-full-scale fixture survives a save/load cycle") {
    const NetworkSpec fixture = builtin_generator("speech-full");
    const NetworkSpec loaded = parse_model_json(model_to_json(fixture));
    CHECK(validate(loaded).empty());
    CHECK(loaded.variables.size() == fixture.variables.size());
    CHECK(loaded.inter_edges == fixture.inter_edges);
}

TEST_CASE("previous-slice parents use the prev: prefix") {
    CHECK(ParentRef{"Phone", 1}.to_string() == "prev:Phone");
    CHECK(ParentRef::parse("prev:Phone") == ParentRef{"Phone", 1});
    CHECK(ParentRef::parse("Phone") == ParentRef{"Phone", 0});
}

TEST_CASE("model parsing reports the origin and failure") {
    CHECK_THROWS_WITH_AS((void)parse_model_json("{", "m.json"),
                         doctest::Contains("m.json"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)parse_model_json("{}", "m.json"),
                         doctest::Contains("format_version"), std::runtime_error);
    const std::string bad_role = R"({"format_version":"1",
        "variables":[{"name":"A","cardinality":2,"role":"spooky"}]})";
    CHECK_THROWS_WITH_AS((void)parse_model_json(bad_role, "m.json"),
                         doctest::Contains("role"), std::runtime_error);
}

TEST_CASE("save_model writes atomically and load_model reads it back") {
    const testing::TempDir dir("model_io");
    const auto path = dir.path() / "model.json";
    const NetworkSpec fixture = builtin_generator("demo-small");
    save_model(fixture, path);
    CHECK(!std::filesystem::exists(dir.path() / "model.json.tmp"));
    const NetworkSpec loaded = load_model(path);
    CHECK(model_to_json(loaded) == model_to_json(fixture));
}
