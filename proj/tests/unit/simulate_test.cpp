#include <doctest.h>

#include <cmath>

#include "aufuse/inference.hpp"
#include "aufuse/model_io.hpp"
#include "aufuse/simulate.hpp"
#include "generators.hpp"

using namespace aufuse;

namespace {

SimConfig demo_config(std::uint64_t seed) {
    SimConfig config;
    config.generator = builtin_generator("demo-small");
    config.alphabet = builtin_alphabet("demo-small");
    config.subjects = 2;
    config.sequences_per_subject = 3;
    config.frames_min = config.frames_max = 50;
    config.seed = seed;
    config.noise = NoiseModel::none(4);
    return config;
}

} // namespace

TEST_CASE("noise-free sampling copies truth into the measurements") {
    const Corpus corpus = sample_corpus(demo_config(12));
    for (const auto& sequence : corpus.sequences) {
        for (const auto& frame : sequence.frames) {
            for (std::size_t a = 0; a < frame.au_truth.size(); ++a) {
                CHECK(frame.au_meas[a] == frame.au_truth[a]);
            }
            CHECK(frame.phone_meas == frame.phone_truth);
        }
    }
}

TEST_CASE("noise-free corpora decode perfectly through the generator model") {
    const SimConfig config = demo_config(13);
    const Corpus corpus = sample_corpus(config);
    const DbnEngine engine(config.generator);
    for (const auto& sequence : corpus.sequences) {
        const auto evidence = build_evidence(config.generator, corpus, sequence);
        const auto decoded = decode(engine.filter(evidence), DecodePolicy{}, config.generator);
        for (std::size_t t = 0; t < sequence.frames.size(); ++t) {
            for (std::size_t a = 0; a < corpus.au_names.size(); ++a) {
                CHECK(decoded[t].au.at(corpus.au_names[a]) == sequence.frames[t].au_truth[a]);
            }
            CHECK(decoded[t].phone.value() == sequence.frames[t].phone_truth);
        }
    }
}

TEST_CASE("sampling is byte-deterministic and independent of the job count") {
    SimConfig config = demo_config(777);
    config.subject_jitter = 50.0;
    config.noise = NoiseModel::preset("clean-like", 4);
    const std::string once = corpus_to_jsonl(sample_corpus(config, 1));
    const std::string again = corpus_to_jsonl(sample_corpus(config, 1));
    const std::string parallel = corpus_to_jsonl(sample_corpus(config, 4));
    CHECK(once == again);
    CHECK(once == parallel);

    SimConfig other = config;
    other.seed = 778;
    CHECK(corpus_to_jsonl(sample_corpus(other)) != once);
}

TEST_CASE("false-positive corruption hits the configured rate") {
    SimConfig config = demo_config(4096);
    config.subjects = 1;
    config.sequences_per_subject = 1000;
    config.frames_min = config.frames_max = 100;  // 100k frames
    config.noise = NoiseModel::none(4);
    config.noise.au_fp[1] = 0.3;  // AU24
    const Corpus corpus = sample_corpus(config);
    long long flipped = 0;
    long long zero_truth = 0;
    for (const auto& sequence : corpus.sequences) {
        for (const auto& frame : sequence.frames) {
            if (frame.au_truth[1] == 0) {
                ++zero_truth;
                if (frame.au_meas[1] == 1) ++flipped;
            }
        }
    }
    const double rate = static_cast<double>(flipped) / static_cast<double>(zero_truth);
    CHECK(std::abs(rate - 0.3) < 0.01);
}

TEST_CASE("phone confusion tables drive the measured phone") {
    SimConfig config = demo_config(5050);
    config.subjects = 1;
    config.sequences_per_subject = 200;
    config.frames_min = config.frames_max = 100;
    const int p = config.alphabet.size();
    // Deterministic cyclic shift.
    std::vector<double> confusion(static_cast<std::size_t>(p) * p, 0.0);
    for (int s = 0; s < p; ++s) {
        confusion[static_cast<std::size_t>(s) * p + static_cast<std::size_t>((s + 1) % p)] = 1.0;
    }
    config.noise.phone_confusion = confusion;
    const Corpus corpus = sample_corpus(config);
    for (const auto& sequence : corpus.sequences) {
        for (const auto& frame : sequence.frames) {
            CHECK(frame.phone_meas == (frame.phone_truth + 1) % p);
        }
    }
}

TEST_CASE("missing rates produce explicit missing markers") {
    SimConfig config = demo_config(616);
    config.subjects = 1;
    config.sequences_per_subject = 100;
    config.frames_min = config.frames_max = 100;
    config.noise.au_missing_rate = 0.5;
    config.noise.phone_missing_rate = 0.25;
    const Corpus corpus = sample_corpus(config);
    long long au_missing = 0;
    long long au_total = 0;
    long long phone_missing = 0;
    for (const auto& sequence : corpus.sequences) {
        for (const auto& frame : sequence.frames) {
            for (const auto m : frame.au_meas) {
                ++au_total;
                if (m == Frame::kMissing) ++au_missing;
            }
            if (frame.phone_meas == Frame::kMissing) ++phone_missing;
        }
    }
    CHECK(std::abs(double(au_missing) / double(au_total) - 0.5) < 0.02);
    CHECK(std::abs(double(phone_missing) / 10000.0 - 0.25) < 0.02);
}

TEST_CASE("empirical transition frequencies converge to the generator rows") {
    SimConfig config = demo_config(31415);
    config.subjects = 1;
    config.sequences_per_subject = 1000;
    config.frames_min = config.frames_max = 101;  // ~100k transitions
    const Corpus corpus = sample_corpus(config);

    // AU24 self-transition conditioned on (Phone_t, AU24_{t-1}).
    const NetworkSpec& gen = config.generator;
    const Cpt* cpt = gen.transition_cpt("AU24");
    const FamilyShape shape = gen.family_shape(*cpt);
    std::vector<long long> active(shape.config_count(), 0);
    std::vector<long long> visits(shape.config_count(), 0);
    for (const auto& sequence : corpus.sequences) {
        for (std::size_t t = 1; t < sequence.frames.size(); ++t) {
            const int phone = sequence.frames[t].phone_truth;
            const int prev = sequence.frames[t - 1].au_truth[1];
            const std::size_t j = shape.config_index(std::vector<int>{phone, prev});
            ++visits[j];
            if (sequence.frames[t].au_truth[1] == 1) ++active[j];
        }
    }
    for (std::size_t j = 0; j < shape.config_count(); ++j) {
        if (visits[j] < 3000) continue;
        const double expected = cpt->table[j * 2 + 1];
        const double observed = static_cast<double>(active[j]) / static_cast<double>(visits[j]);
        const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(visits[j]));
        CHECK(std::abs(observed - expected) < 5.0 * sigma + 1e-9);
    }
}

TEST_CASE("subject jitter varies parameters across subjects") {
    SimConfig config = demo_config(5);
    config.subject_jitter = 30.0;
    config.sequences_per_subject = 200;
    config.frames_min = config.frames_max = 60;
    const Corpus corpus = sample_corpus(config);
    // Activation frequencies should differ noticeably between subjects.
    std::map<std::string, std::pair<long long, long long>> per_subject;  // active, frames
    for (const auto& sequence : corpus.sequences) {
        auto& [active, frames] = per_subject[sequence.subject];
        for (const auto& frame : sequence.frames) {
            frames += 1;
            active += frame.au_truth[2];
        }
    }
    REQUIRE(per_subject.size() == 2);
    const auto first = per_subject.begin()->second;
    const auto second = std::next(per_subject.begin())->second;
    const double f0 = double(first.first) / double(first.second);
    const double f1 = double(second.first) / double(second.second);
    CHECK(f0 != doctest::Approx(f1).epsilon(1e-4));
}

TEST_CASE("empirical stats count exactly and add over concatenation") {
    Corpus corpus;
    corpus.au_names = {"AU25", "AU26"};
    corpus.alphabet = PhoneAlphabet({"SIL", "CH"});
    FrameSequence zero;
    zero.subject = "S00";
    zero.word = "w0";
    zero.frames.assign(5, Frame{{0, 0}, 0, {0, 0}, 0});
    corpus.sequences.push_back(zero);
    const CorpusStats stats = empirical_stats(corpus);
    CHECK(stats.au_active == std::vector<long long>{0, 0});
    CHECK(stats.total_frames == 5);
    CHECK(stats.phone_occupancy[0] == 5);

    Corpus more = corpus;
    FrameSequence active;
    active.subject = "S01";
    active.word = "w1";
    active.frames.assign(3, Frame{{1, 0}, 1, {1, 0}, 1});
    more.sequences.push_back(active);
    const CorpusStats merged = empirical_stats(more);
    for (std::size_t a = 0; a < 2; ++a) {
        CHECK(merged.au_active[a] ==
              stats.au_active[a] + empirical_stats({60.0,
                                                    corpus.au_names,
                                                    corpus.alphabet,
                                                    "",
                                                    {active}})
                                       .au_active[a]);
    }
}

TEST_CASE("the stats table reproduces the speech-AU column layout") {
    SimConfig config;
    config.generator = builtin_generator("speech-full");
    config.alphabet = builtin_alphabet("speech-full");
    config.subjects = 1;
    config.sequences_per_subject = 2;
    config.frames_min = config.frames_max = 20;
    config.seed = 42;
    config.noise = NoiseModel::none(7);
    const Corpus corpus = sample_corpus(config);
    const std::string csv = stats_to_csv(empirical_stats(corpus));
    const std::string header = csv.substr(0, csv.find('\n'));
    CHECK(header == "AU18,AU20,AU22,AU24,AU25,AU26,AU27,Total Frames");
}

TEST_CASE("sim configs resolve builtin names, inline models, and paths") {
    const testing::TempDir dir("sim_config");
    save_model(builtin_generator("demo-small"), dir.path() / "gen.json");
    const std::string by_path = R"({"format_version":"1","generator_path":"gen.json",)"
                                R"("phone_alphabet":["SIL","AE","B","IY","M","UW"],)"
                                R"("subjects":2,"sequences_per_subject":1,"frames_per_sequence":5})";
    const SimConfig config = parse_sim_config(by_path, "sim.json", dir.path());
    CHECK(config.generator.variables.size() == 10);
    CHECK(config.alphabet.size() == 6);
    CHECK(config.subjects == 2);
    CHECK_NOTHROW((void)sample_corpus(config));

    const std::string builtin = R"({"format_version":"1","generator":"demo-small",)"
                                R"("noise":"challenging-like"})";
    const SimConfig with_preset = parse_sim_config(builtin, "sim.json", dir.path());
    CHECK(with_preset.noise.phone_epsilon == 0.05);
    CHECK(with_preset.alphabet.size() == 6);

    const std::string bad = R"({"format_version":"1"})";
    CHECK_THROWS_AS((void)parse_sim_config(bad, "sim.json", dir.path()), std::runtime_error);
}

TEST_CASE("noise presets carry the documented rates") {
    const NoiseModel clean = NoiseModel::preset("clean-like", 3);
    CHECK(clean.phone_epsilon == 0.02);
    CHECK(clean.au_fp == std::vector<double>(3, 0.10));
    CHECK(clean.au_fn == std::vector<double>(3, 0.25));
    CHECK(clean.au_missing_rate == 0.0);
    const NoiseModel hard = NoiseModel::preset("challenging-like", 2);
    CHECK(hard.phone_epsilon == 0.05);
    CHECK(hard.au_fp == std::vector<double>(2, 0.20));
    CHECK(hard.au_fn == std::vector<double>(2, 0.40));
    CHECK_THROWS_AS((void)NoiseModel::preset("bogus", 2), std::invalid_argument);
}

TEST_CASE("invalid configurations are rejected") {
    SimConfig config = demo_config(1);
    config.subjects = 0;
    CHECK_THROWS_AS((void)sample_corpus(config), std::invalid_argument);
    config = demo_config(1);
    config.noise.au_fp[0] = 1.5;
    CHECK_THROWS_AS((void)sample_corpus(config), std::invalid_argument);
    config = demo_config(1);
    config.generator.transition_cpts.clear();
    config.generator.inter_edges.clear();
    CHECK_THROWS_AS((void)sample_corpus(config), std::invalid_argument);
}
