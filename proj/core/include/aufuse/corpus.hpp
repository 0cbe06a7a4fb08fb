#ifndef AUFUSE_CORPUS_HPP
#define AUFUSE_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aufuse/alignment.hpp"

namespace aufuse {

/// One frame-synchronous record. au_truth/au_meas are aligned with the
/// corpus AU name list; -1 marks a missing measurement.
struct Frame {
    static constexpr int kMissing = -1;

    std::vector<std::uint8_t> au_truth;
    int phone_truth = 0;
    std::vector<std::int8_t> au_meas;
    int phone_meas = kMissing;
};

/// One spoken-word recording.
struct FrameSequence {
    std::string subject;
    std::string word;
    std::vector<Frame> frames;
};

/// A frame-aligned corpus. Serialized as JSON lines: a header record
/// (format_version "1", fps, au_names, phone_alphabet, optional rng id)
/// followed by one sequence per line.
struct Corpus {
    double fps = 60.0;
    std::vector<std::string> au_names;
    PhoneAlphabet alphabet;
    std::string rng_id;  // set by the simulator, empty otherwise
    std::vector<FrameSequence> sequences;

    std::size_t total_frames() const;
    std::vector<std::string> subject_ids() const;  // unique, in first-appearance order
};

std::string corpus_to_jsonl(const Corpus& corpus);
Corpus parse_corpus_jsonl(const std::string& text, const std::string& origin = "<memory>");

Corpus read_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

} // namespace aufuse

#endif // AUFUSE_CORPUS_HPP
