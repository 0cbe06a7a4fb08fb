#include "aufuse/corpus.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "aufuse/io_util.hpp"

namespace aufuse {

using nlohmann::ordered_json;

std::size_t Corpus::total_frames() const {
    std::size_t count = 0;
    for (const auto& sequence : sequences) count += sequence.frames.size();
    return count;
}

std::vector<std::string> Corpus::subject_ids() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& sequence : sequences) {
        if (seen.insert(sequence.subject).second) out.push_back(sequence.subject);
    }
    return out;
}

namespace {

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& message) {
    std::ostringstream out;
    out << origin << ":" << line << ": " << message;
    throw std::runtime_error(out.str());
}

ordered_json frame_to_json(const Frame& frame) {
    ordered_json record;
    record["au"] = frame.au_truth;
    record["phone"] = frame.phone_truth;
    ordered_json meas = ordered_json::array();
    for (const auto value : frame.au_meas) {
        if (value == Frame::kMissing) {
            meas.push_back(nullptr);
        } else {
            meas.push_back(static_cast<int>(value));
        }
    }
    record["au_meas"] = std::move(meas);
    if (frame.phone_meas == Frame::kMissing) {
        record["phone_meas"] = nullptr;
    } else {
        record["phone_meas"] = frame.phone_meas;
    }
    return record;
}

Frame frame_from_json(const ordered_json& record, std::size_t au_count, int phone_card,
                      const std::string& origin, std::size_t line) {
    Frame frame;
    if (!record.is_object() || !record.contains("au") || !record.contains("phone") ||
        !record.contains("au_meas") || !record.contains("phone_meas")) {
        fail(origin, line, "frame records need au, phone, au_meas, phone_meas");
    }
    const auto& au = record.at("au");
    const auto& au_meas = record.at("au_meas");
    if (!au.is_array() || au.size() != au_count || !au_meas.is_array() || au_meas.size() != au_count) {
        fail(origin, line, "AU arrays must match the header AU name list");
    }
    for (const auto& value : au) {
        if (!value.is_number_integer() || (value != 0 && value != 1)) {
            fail(origin, line, "AU truth values must be 0 or 1");
        }
        frame.au_truth.push_back(value.get<std::uint8_t>());
    }
    for (const auto& value : au_meas) {
        if (value.is_null()) {
            frame.au_meas.push_back(Frame::kMissing);
        } else if (value.is_number_integer() && (value == 0 || value == 1)) {
            frame.au_meas.push_back(static_cast<std::int8_t>(value.get<int>()));
        } else {
            fail(origin, line, "AU measurements must be 0, 1, or null");
        }
    }
    const auto& phone = record.at("phone");
    if (!phone.is_number_integer() || phone.get<int>() < 0 || phone.get<int>() >= phone_card) {
        fail(origin, line, "phone state out of range");
    }
    frame.phone_truth = phone.get<int>();
    const auto& phone_meas = record.at("phone_meas");
    if (phone_meas.is_null()) {
        frame.phone_meas = Frame::kMissing;
    } else if (phone_meas.is_number_integer() && phone_meas.get<int>() >= 0 &&
               phone_meas.get<int>() < phone_card) {
        frame.phone_meas = phone_meas.get<int>();
    } else {
        fail(origin, line, "phone measurement out of range");
    }
    return frame;
}

} // namespace

std::string corpus_to_jsonl(const Corpus& corpus) {
    ordered_json header;
    header["format_version"] = "1";
    header["fps"] = corpus.fps;
    header["au_names"] = corpus.au_names;
    header["phone_alphabet"] = corpus.alphabet.labels();
    if (!corpus.rng_id.empty()) header["rng"] = corpus.rng_id;

    std::string out = header.dump();
    out += '\n';
    for (const auto& sequence : corpus.sequences) {
        ordered_json record;
        record["subject"] = sequence.subject;
        record["word"] = sequence.word;
        ordered_json frames = ordered_json::array();
        for (const auto& frame : sequence.frames) frames.push_back(frame_to_json(frame));
        record["frames"] = std::move(frames);
        out += record.dump();
        out += '\n';
    }
    return out;
}

Corpus parse_corpus_jsonl(const std::string& text, const std::string& origin) {
    Corpus corpus;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ordered_json record;
        try {
            record = ordered_json::parse(line);
        } catch (const ordered_json::parse_error& e) {
            fail(origin, line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!have_header) {
            if (!record.is_object() || record.value("format_version", "") != "1") {
                fail(origin, line_no, "missing or unsupported corpus header (format_version \"1\")");
            }
            corpus.fps = record.value("fps", 60.0);
            if (!(corpus.fps > 0.0)) fail(origin, line_no, "fps must be > 0");
            if (!record.contains("au_names") || !record.at("au_names").is_array()) {
                fail(origin, line_no, "header needs an au_names array");
            }
            corpus.au_names = record.at("au_names").get<std::vector<std::string>>();
            std::set<std::string> unique(corpus.au_names.begin(), corpus.au_names.end());
            if (unique.size() != corpus.au_names.size()) {
                fail(origin, line_no, "duplicate AU names in header");
            }
            if (!record.contains("phone_alphabet")) {
                fail(origin, line_no, "header needs a phone_alphabet array");
            }
            try {
                corpus.alphabet =
                    PhoneAlphabet(record.at("phone_alphabet").get<std::vector<std::string>>());
            } catch (const std::invalid_argument& e) {
                fail(origin, line_no, e.what());
            }
            corpus.rng_id = record.value("rng", "");
            have_header = true;
            continue;
        }
        if (!record.is_object() || !record.contains("subject") || !record.contains("word") ||
            !record.contains("frames") || !record.at("frames").is_array()) {
            fail(origin, line_no, "sequence records need subject, word, frames");
        }
        FrameSequence sequence;
        sequence.subject = record.at("subject").get<std::string>();
        sequence.word = record.at("word").get<std::string>();
        for (const auto& frame : record.at("frames")) {
            sequence.frames.push_back(frame_from_json(frame, corpus.au_names.size(),
                                                      corpus.alphabet.size(), origin, line_no));
        }
        corpus.sequences.push_back(std::move(sequence));
    }
    return corpus;
}

Corpus read_corpus(const std::filesystem::path& path) {
    return parse_corpus_jsonl(read_file(path), path.string());
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    atomic_write_file(path, corpus_to_jsonl(corpus));
}

} // namespace aufuse
