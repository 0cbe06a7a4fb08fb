#include <doctest.h>

#include <cmath>

#include "aufuse/graph.hpp"
#include "aufuse/simulate.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace aufuse;

namespace {

// Two independent fair binary hidden nodes, no edges.
NetworkSpec two_fair_coins() {
    NetworkSpec spec;
    spec.variables = {{"A", 2, VarRole::HiddenAu}, {"B", 2, VarRole::HiddenAu}};
    spec.cpts = {{"A", {}, {0.5, 0.5}}, {"B", {}, {0.5, 0.5}}};
    return spec;
}

NetworkSpec chain_ab() {
    NetworkSpec spec;
    spec.variables = {{"A", 2, VarRole::HiddenAu}, {"B", 2, VarRole::HiddenAu}};
    spec.intra_edges = {{"A", "B"}};
    spec.cpts = {{"A", {}, {0.7, 0.3}}, {"B", {{"A", 0}}, {0.8, 0.2, 0.1, 0.9}}};
    return spec;
}

} // namespace

TEST_CASE("validate flags a CPT row that does not sum to one") {
    NetworkSpec spec = two_fair_coins();
    spec.cpts[1].table = {0.49, 0.49};
    const auto violations = validate(spec);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].location.find("cpts[B]") != std::string::npos);
    CHECK(violations[0].message.find("row 0") != std::string::npos);
}

TEST_CASE("the bundled speech fixtures are valid by construction") {
    CHECK(validate(builtin_generator("speech-full")).empty());
    CHECK(validate(builtin_generator("demo-small")).empty());
}

TEST_CASE("validate reports an intra-slice cycle") {
    NetworkSpec spec;
    spec.variables = {{"AU25", 2, VarRole::HiddenAu}, {"AU26", 2, VarRole::HiddenAu}};
    spec.intra_edges = {{"AU25", "AU26"}, {"AU26", "AU25"}};
    spec.cpts = {{"AU25", {{"AU26", 0}}, {0.5, 0.5, 0.5, 0.5}},
                 {"AU26", {{"AU25", 0}}, {0.5, 0.5, 0.5, 0.5}}};
    bool found_cycle = false;
    for (const auto& v : validate(spec)) {
        if (v.message.find("cycle") != std::string::npos) found_cycle = true;
    }
    CHECK(found_cycle);
}

TEST_CASE("validate catches measurement-node contract breaches") {
    NetworkSpec spec;
    spec.variables = {{"AU25", 2, VarRole::HiddenAu},
                      {"O_AU25", 2, VarRole::MeasurementAu},
                      {"X", 2, VarRole::HiddenAu}};
    spec.intra_edges = {{"AU25", "O_AU25"}, {"O_AU25", "X"}};
    spec.cpts = {{"AU25", {}, {0.5, 0.5}},
                 {"O_AU25", {{"AU25", 0}}, {1.0, 0.0, 0.0, 1.0}},
                 {"X", {{"O_AU25", 0}}, {0.5, 0.5, 0.5, 0.5}}};
    bool flagged = false;
    for (const auto& v : validate(spec)) {
        if (v.message.find("measurement variable has a child") != std::string::npos) flagged = true;
    }
    CHECK(flagged);
}

TEST_CASE("joint_log_prob multiplies the factorization") {
    // Independent fair coins: P(0,0) = 0.25.
    CHECK(joint_log_prob(two_fair_coins(), {{"A", 0}, {"B", 0}}) ==
          doctest::Approx(std::log(0.25)).epsilon(1e-12));
    // Chain: P(A=1) = 0.3, P(B=1|A=1) = 0.9 -> 0.27.
    CHECK(joint_log_prob(chain_ab(), {{"A", 1}, {"B", 1}}) ==
          doctest::Approx(std::log(0.27)).epsilon(1e-12));
}

TEST_CASE("joint_log_prob returns -infinity on zero-probability entries") {
    NetworkSpec spec = chain_ab();
    spec.cpts[1].table = {1.0, 0.0, 0.0, 1.0};  // B copies A exactly
    CHECK(joint_log_prob(spec, {{"A", 0}, {"B", 1}}) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("joint_log_prob rejects missing variables and missing CPTs") {
    CHECK_THROWS_AS((void)joint_log_prob(two_fair_coins(), {{"A", 0}}), std::invalid_argument);
    NetworkSpec spec = two_fair_coins();
    spec.cpts.pop_back();
    CHECK_THROWS_AS((void)joint_log_prob(spec, {{"A", 0}, {"B", 0}}), std::invalid_argument);
}

TEST_CASE("topological order respects edges and declaration-order ties") {
    NetworkSpec spec;
    spec.variables = {{"AU25", 2, VarRole::HiddenAu},
                      {"AU26", 2, VarRole::HiddenAu},
                      {"Phone", 3, VarRole::HiddenPhone}};
    spec.intra_edges = {{"Phone", "AU25"}, {"AU25", "AU26"}};
    CHECK(topological_order(spec) == std::vector<std::string>{"Phone", "AU25", "AU26"});

    spec.intra_edges.clear();
    CHECK(topological_order(spec) == std::vector<std::string>{"AU25", "AU26", "Phone"});

    spec.intra_edges = {{"AU25", "AU26"}, {"AU26", "AU25"}};
    CHECK_THROWS_AS((void)topological_order(spec), std::invalid_argument);
}

TEST_CASE("exp(joint_log_prob) sums to one over all full assignments") {
    Rng rng(2024);
    for (int round = 0; round < 25; ++round) {
        testing::SpecShape shape;
        shape.max_binaries = 2;
        shape.phone_card_max = 3;
        shape.dynamic = false;
        const NetworkSpec spec = testing::random_spec(rng, shape);
        REQUIRE(validate(spec).empty());

        std::size_t product_space = 1;
        for (const auto& v : spec.variables) product_space *= static_cast<std::size_t>(v.cardinality);
        REQUIRE(product_space <= 4096);

        Assignment assignment;
        for (const auto& v : spec.variables) assignment[v.name] = 0;
        double total = 0.0;
        for (;;) {
            total += std::exp(joint_log_prob(spec, assignment));
            auto it = spec.variables.rbegin();
            for (; it != spec.variables.rend(); ++it) {
                if (++assignment[it->name] < it->cardinality) break;
                assignment[it->name] = 0;
            }
            if (it == spec.variables.rend()) break;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("topological order is a permutation that respects every edge") {
    Rng rng(77);
    for (int round = 0; round < 25; ++round) {
        const NetworkSpec spec = testing::random_spec(rng);
        const auto order = topological_order(spec);
        REQUIRE(order.size() == spec.variables.size());
        std::map<std::string, std::size_t> position;
        for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
        CHECK(position.size() == spec.variables.size());
        for (const auto& [src, dst] : spec.intra_edges) {
            CHECK(position.at(src) < position.at(dst));
        }
    }
}

TEST_CASE("family shape indexing is row-major over the declared parent order") {
    const FamilyShape shape{2, {3, 2}};
    CHECK(shape.config_count() == 6);
    CHECK(shape.table_size() == 12);
    // First parent varies slowest.
    CHECK(shape.config_index(std::vector<int>{0, 0}) == 0);
    CHECK(shape.config_index(std::vector<int>{0, 1}) == 1);
    CHECK(shape.config_index(std::vector<int>{1, 0}) == 2);
    CHECK(shape.config_index(std::vector<int>{2, 1}) == 5);
    std::vector<int> decoded(2);
    shape.decode_config(5, decoded);
    CHECK(decoded == std::vector<int>{2, 1});
    CHECK_THROWS_AS((void)shape.config_index(std::vector<int>{3, 0}), std::out_of_range);
}

TEST_CASE("a valid spec is accepted by downstream engines") {
    // validate() empty implies other modules take the spec without error.
    Rng rng(11);
    for (int round = 0; round < 10; ++round) {
        const NetworkSpec spec = testing::random_spec(rng);
        REQUIRE(validate(spec).empty());
        const auto evidence = testing::random_evidence(rng, spec, 3, 0.3);
        CHECK_NOTHROW((void)filter(spec, evidence));
        CHECK_NOTHROW((void)smooth(spec, evidence));
        CHECK_NOTHROW((void)topological_order(spec));
    }
}
