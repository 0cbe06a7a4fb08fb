#include "aufuse/alignment.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>

#include "aufuse/io_util.hpp"

namespace aufuse {

PhoneAlphabet::PhoneAlphabet() : labels_{kSilence} {}

PhoneAlphabet::PhoneAlphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty() || labels_[0] != kSilence) {
        throw std::invalid_argument("phone alphabet must start with SIL");
    }
    std::set<std::string> seen;
    for (const auto& label : labels_) {
        if (label.empty()) throw std::invalid_argument("empty phone label");
        if (!seen.insert(label).second) {
            throw std::invalid_argument("duplicate phone label: " + label);
        }
    }
}

PhoneAlphabet PhoneAlphabet::speech_set() {
    return PhoneAlphabet({"SIL", "AE", "AH", "AO", "AW", "B",  "CH", "D",  "ER", "EY",
                          "G",   "HH", "IY", "JH", "K",  "M",  "N",  "OY", "P",  "R",
                          "S",   "SH", "T",  "UH", "UW", "W",  "Y",  "Z",  "ZH"});
}

const std::string& PhoneAlphabet::label(int index) const {
    if (index < 0 || index >= size()) throw std::out_of_range("phone state out of range");
    return labels_[static_cast<std::size_t>(index)];
}

int PhoneAlphabet::index_of(const std::string& label) const {
    const int index = try_index(label);
    if (index < 0) throw std::invalid_argument("unknown phone label: " + label);
    return index;
}

int PhoneAlphabet::try_index(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) return static_cast<int>(i);
    }
    return -1;
}

namespace {

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& message) {
    std::ostringstream out;
    out << origin << ":" << line << ": " << message;
    throw std::runtime_error(out.str());
}

std::string strip(std::string_view text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = text.find_last_not_of(" \t\r");
    return std::string(text.substr(begin, end - begin + 1));
}

double parse_seconds(const std::string& token, const std::string& origin, std::size_t line) {
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') fail(origin, line, "malformed time '" + token + "'");
    return value;
}

} // namespace

SegmentTrack parse_segments(const std::string& text, const PhoneAlphabet& alphabet,
                            const std::string& origin) {
    SegmentTrack track;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = strip(raw);
        if (line.empty()) continue;

        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            fail(origin, line_no, "expected label,start_s,end_s");
        }
        Segment segment;
        segment.label = strip(line.substr(0, c1));
        segment.start = parse_seconds(strip(line.substr(c1 + 1, c2 - c1 - 1)), origin, line_no);
        segment.end = parse_seconds(strip(line.substr(c2 + 1)), origin, line_no);

        if (alphabet.try_index(segment.label) < 0) {
            fail(origin, line_no, "unknown phone label: " + segment.label);
        }
        if (!(segment.start < segment.end)) {
            fail(origin, line_no, "segment start must precede its end");
        }
        if (!track.segments.empty()) {
            const Segment& prev = track.segments.back();
            if (segment.start < prev.start) fail(origin, line_no, "segments out of order");
            if (segment.start < prev.end) fail(origin, line_no, "segments overlap");
            if (segment.label == prev.label) {
                fail(origin, line_no, "consecutive segments repeat label " + segment.label);
            }
        }
        track.segments.push_back(std::move(segment));
    }
    track.total_duration = track.segments.empty() ? 0.0 : track.segments.back().end;
    return track;
}

SegmentTrack read_segments(const std::filesystem::path& path, const PhoneAlphabet& alphabet) {
    return parse_segments(read_file(path), alphabet, path.string());
}

std::vector<int> discretize(const SegmentTrack& track, double fps, int frame_count,
                            const PhoneAlphabet& alphabet) {
    if (!(fps > 0.0)) throw std::invalid_argument("fps must be > 0");
    if (frame_count < 1) throw std::invalid_argument("frame_count must be >= 1");

    std::vector<int> label_indices(track.segments.size());
    for (std::size_t i = 0; i < track.segments.size(); ++i) {
        label_indices[i] = alphabet.index_of(track.segments[i].label);
    }

    std::vector<int> out(static_cast<std::size_t>(frame_count), 0);
    std::size_t cursor = 0;
    for (int t = 0; t < frame_count; ++t) {
        const double midpoint = (static_cast<double>(t) + 0.5) / fps;
        while (cursor < track.segments.size() && track.segments[cursor].end <= midpoint) ++cursor;
        if (cursor < track.segments.size() && track.segments[cursor].start <= midpoint) {
            out[static_cast<std::size_t>(t)] = label_indices[cursor];
        }
        // else: gap or past the track -> SIL (index 0)
    }
    return out;
}

} // namespace aufuse
