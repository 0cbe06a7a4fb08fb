#include <doctest.h>

#include "aufuse/corpus.hpp"
#include "aufuse/rng.hpp"
#include "generators.hpp"

using namespace aufuse;

namespace {

Corpus random_corpus(Rng& rng) {
    Corpus corpus;
    corpus.fps = 59.94;
    corpus.au_names = {"AU25", "AU26"};
    corpus.alphabet = PhoneAlphabet({"SIL", "CH", "AE"});
    corpus.rng_id = "mt19937_64";
    const int sequences = 1 + rng.uniform_int(4);
    for (int s = 0; s < sequences; ++s) {
        FrameSequence sequence;
        sequence.subject = "S0" + std::to_string(rng.uniform_int(3));
        sequence.word = "w" + std::to_string(rng.uniform_int(10));
        const int frames = rng.uniform_int(6);
        for (int t = 0; t < frames; ++t) {
            Frame frame;
            for (int a = 0; a < 2; ++a) {
                frame.au_truth.push_back(static_cast<std::uint8_t>(rng.uniform_int(2)));
                frame.au_meas.push_back(rng.uniform01() < 0.2
                                            ? Frame::kMissing
                                            : static_cast<std::int8_t>(rng.uniform_int(2)));
            }
            frame.phone_truth = rng.uniform_int(3);
            frame.phone_meas = rng.uniform01() < 0.2 ? Frame::kMissing : rng.uniform_int(3);
            sequence.frames.push_back(frame);
        }
        corpus.sequences.push_back(std::move(sequence));
    }
    return corpus;
}

bool structurally_equal(const Corpus& a, const Corpus& b) {
    if (a.fps != b.fps || a.au_names != b.au_names || !(a.alphabet == b.alphabet) ||
        a.rng_id != b.rng_id || a.sequences.size() != b.sequences.size()) {
        return false;
    }
    for (std::size_t s = 0; s < a.sequences.size(); ++s) {
        const auto& sa = a.sequences[s];
        const auto& sb = b.sequences[s];
        if (sa.subject != sb.subject || sa.word != sb.word || sa.frames.size() != sb.frames.size()) {
            return false;
        }
        for (std::size_t t = 0; t < sa.frames.size(); ++t) {
            const auto& fa = sa.frames[t];
            const auto& fb = sb.frames[t];
            if (fa.au_truth != fb.au_truth || fa.au_meas != fb.au_meas ||
                fa.phone_truth != fb.phone_truth || fa.phone_meas != fb.phone_meas) {
                return false;
            }
        }
    }
    return true;
}

} // namespace

TEST_CASE("corpus serialization round-trips as the identity") {
    Rng rng(31337);
    for (int round = 0; round < 50; ++round) {
        const Corpus corpus = random_corpus(rng);
        const std::string once = corpus_to_jsonl(corpus);
        const Corpus reparsed = parse_corpus_jsonl(once);
        CHECK(structurally_equal(corpus, reparsed));
        CHECK(corpus_to_jsonl(reparsed) == once);
    }
}

TEST_CASE("corpus parse errors carry the line number") {
    const std::string header =
        R"({"format_version":"1","fps":60.0,"au_names":["AU25"],"phone_alphabet":["SIL","CH"]})";
    const std::string bad_au = header + "\n" +
        R"({"subject":"S00","word":"w0","frames":[{"au":[2],"phone":0,"au_meas":[0],"phone_meas":0}]})" +
        "\n";
    CHECK_THROWS_WITH_AS((void)parse_corpus_jsonl(bad_au, "c.jsonl"), doctest::Contains("c.jsonl:2"),
                         std::runtime_error);
    const std::string bad_phone = header + "\n" +
        R"({"subject":"S00","word":"w0","frames":[{"au":[1],"phone":7,"au_meas":[0],"phone_meas":0}]})" +
        "\n";
    CHECK_THROWS_WITH_AS((void)parse_corpus_jsonl(bad_phone, "c.jsonl"),
                         doctest::Contains("phone state out of range"), std::runtime_error);
    const std::string bad_width = header + "\n" +
        R"({"subject":"S00","word":"w0","frames":[{"au":[1,0],"phone":0,"au_meas":[0,1],"phone_meas":0}]})" +
        "\n";
    CHECK_THROWS_WITH_AS((void)parse_corpus_jsonl(bad_width, "c.jsonl"),
                         doctest::Contains("header AU name list"), std::runtime_error);
    CHECK_THROWS_WITH_AS((void)parse_corpus_jsonl("{}\n", "c.jsonl"),
                         doctest::Contains("corpus header"), std::runtime_error);
}

TEST_CASE("an empty file parses to an empty corpus") {
    const Corpus corpus = parse_corpus_jsonl("");
    CHECK(corpus.sequences.empty());
    CHECK(corpus.total_frames() == 0);
}

TEST_CASE("write_corpus and read_corpus agree through the filesystem") {
    Rng rng(999);
    const testing::TempDir dir("corpus_io");
    const Corpus corpus = random_corpus(rng);
    const auto path = dir.path() / "corpus.jsonl";
    write_corpus(corpus, path);
    CHECK(structurally_equal(read_corpus(path), corpus));
}
