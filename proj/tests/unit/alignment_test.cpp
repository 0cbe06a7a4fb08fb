#include <doctest.h>

#include "aufuse/alignment.hpp"
#include "aufuse/rng.hpp"

using namespace aufuse;

TEST_CASE("discretize reproduces the worked CH example") {
    // fps 60, CH over [0, 0.05): midpoints 0.00833, 0.025, 0.04167 fall
    // inside, 0.05833 does not.
    const PhoneAlphabet alphabet({"SIL", "CH", "AE"});
    SegmentTrack track;
    track.segments = {{"CH", 0.0, 0.05}};
    track.total_duration = 0.05;
    const auto states = discretize(track, 60.0, 5, alphabet);
    const int ch = alphabet.index_of("CH");
    CHECK(states == std::vector<int>{ch, ch, ch, 0, 0});
}

TEST_CASE("an empty track maps every frame to silence") {
    const PhoneAlphabet alphabet({"SIL", "CH"});
    CHECK(discretize(SegmentTrack{}, 60.0, 5, alphabet) == std::vector<int>(5, 0));
}

TEST_CASE("a boundary exactly on a midpoint goes to the later segment") {
    const PhoneAlphabet alphabet({"SIL", "CH", "AE"});
    SegmentTrack track;
    track.segments = {{"CH", 0.0, 0.025}, {"AE", 0.025, 0.05}};
    track.total_duration = 0.05;
    // Frame 1 midpoint is exactly 0.025: half-open [start, end) puts it in AE.
    const auto states = discretize(track, 60.0, 3, alphabet);
    CHECK(states[1] == alphabet.index_of("AE"));
}

TEST_CASE("segment parsing accepts the documented format") {
    const PhoneAlphabet alphabet({"SIL", "CH", "AE"});
    const auto track = parse_segments("# word: chaps\nCH,0.0,0.05\nAE,0.05,0.12\n", alphabet);
    REQUIRE(track.segments.size() == 2);
    CHECK(track.segments[0].label == "CH");
    CHECK(track.segments[1].start == doctest::Approx(0.05));
    CHECK(track.total_duration == doctest::Approx(0.12));
}

TEST_CASE("segment parsing rejects invariant breaches with line numbers") {
    const PhoneAlphabet alphabet({"SIL", "CH", "AE"});
    CHECK_THROWS_WITH_AS((void)parse_segments("CH,0.0,0.05\nCH,0.05,0.1\n", alphabet, "seg.csv"),
                         doctest::Contains("seg.csv:2"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)parse_segments("AE,0.05,0.04\n", alphabet, "seg.csv"),
                         doctest::Contains("precede"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)parse_segments("CH,0.0,0.05\nAE,0.03,0.1\n", alphabet, "seg.csv"),
                         doctest::Contains("overlap"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)parse_segments("ZZ,0.0,0.05\n", alphabet, "seg.csv"),
                         doctest::Contains("unknown phone label"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)parse_segments("CH,0.0\n", alphabet, "seg.csv"),
                         doctest::Contains("expected label,start_s,end_s"), std::runtime_error);
}

TEST_CASE("the phone alphabet pins SIL at index zero") {
    CHECK_THROWS_AS(PhoneAlphabet({"CH", "SIL"}), std::invalid_argument);
    CHECK_THROWS_AS(PhoneAlphabet({"SIL", "CH", "CH"}), std::invalid_argument);
    const PhoneAlphabet paper = PhoneAlphabet::speech_set();
    CHECK(paper.size() == 29);
    CHECK(paper.label(0) == "SIL");
    CHECK_THROWS_AS((void)paper.index_of("AA"), std::invalid_argument);
}

namespace {

SegmentTrack random_track(Rng& rng, const PhoneAlphabet& alphabet) {
    SegmentTrack track;
    double clock = 0.0;
    const int segments = 1 + rng.uniform_int(6);
    int previous = -1;
    for (int s = 0; s < segments; ++s) {
        if (rng.uniform01() < 0.3) clock += 0.01 + 0.05 * rng.uniform01();  // gap -> SIL
        int label = 1 + rng.uniform_int(alphabet.size() - 1);
        if (label == previous) label = 1 + label % (alphabet.size() - 1);
        const double length = 0.01 + 0.08 * rng.uniform01();
        track.segments.push_back({alphabet.label(label), clock, clock + length});
        clock += length;
        previous = label;
    }
    track.total_duration = clock;
    return track;
}

} // namespace

TEST_CASE("discretize properties hold on generated tracks") {
    const PhoneAlphabet alphabet({"SIL", "CH", "AE", "UW", "M"});
    Rng rng(20250810);
    for (int round = 0; round < 1000; ++round) {
        const SegmentTrack track = random_track(rng, alphabet);
        const double fps = 30.0 + 60.0 * rng.uniform01();
        const int frames = 1 + rng.uniform_int(40);
        const auto coarse = discretize(track, fps, frames, alphabet);

        // Length and single-label totality.
        CHECK(coarse.size() == static_cast<std::size_t>(frames));
        for (const int state : coarse) {
            CHECK(state >= 0);
            CHECK(state < alphabet.size());
        }

        // Refinement: doubling fps and frame count only disagrees where a
        // segment boundary falls between the two midpoint sampling times.
        const auto fine = discretize(track, 2.0 * fps, 2 * frames, alphabet);
        for (int t = 0; t < frames; ++t) {
            for (const int half : {0, 1}) {
                const int fine_state = fine[static_cast<std::size_t>(2 * t + half)];
                if (fine_state == coarse[static_cast<std::size_t>(t)]) continue;
                const double coarse_mid = (t + 0.5) / fps;
                const double fine_mid = (2.0 * t + half + 0.5) / (2.0 * fps);
                const double lo = std::min(coarse_mid, fine_mid);
                const double hi = std::max(coarse_mid, fine_mid);
                bool boundary_between = false;
                for (const auto& segment : track.segments) {
                    for (const double edge : {segment.start, segment.end}) {
                        if (edge > lo && edge <= hi) boundary_between = true;
                    }
                }
                CHECK(boundary_between);
            }
        }
    }
}
