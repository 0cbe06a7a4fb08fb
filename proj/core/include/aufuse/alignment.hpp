#ifndef AUFUSE_ALIGNMENT_HPP
#define AUFUSE_ALIGNMENT_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace aufuse {

/// Ordered phone label set with the silence label SIL pinned at index 0.
class PhoneAlphabet {
  public:
    static constexpr const char* kSilence = "SIL";

    PhoneAlphabet();  // just SIL
    explicit PhoneAlphabet(std::vector<std::string> labels);

    /// The 29-label set of the bundled full speech model: SIL plus 28
    /// CMUdict phonemes.
    static PhoneAlphabet speech_set();

    int size() const { return static_cast<int>(labels_.size()); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(int index) const;
    int index_of(const std::string& label) const;  // throws on unknown
    int try_index(const std::string& label) const; // -1 on unknown

    bool operator==(const PhoneAlphabet& other) const { return labels_ == other.labels_; }

  private:
    std::vector<std::string> labels_;
};

/// One continuous phoneme interval, seconds.
struct Segment {
    std::string label;
    double start = 0.0;
    double end = 0.0;
};

/// Non-overlapping, time-ordered segments; gaps mean silence. Consecutive
/// segments never repeat a label.
struct SegmentTrack {
    std::vector<Segment> segments;
    double total_duration = 0.0;
};

/// Parses the CSV segment format `label,start_s,end_s` ('#' starts a
/// comment) and checks every track invariant; errors carry the offending
/// line number.
SegmentTrack parse_segments(const std::string& text, const PhoneAlphabet& alphabet,
                            const std::string& origin = "<memory>");
SegmentTrack read_segments(const std::filesystem::path& path, const PhoneAlphabet& alphabet);

/// Frame-synchronous phone states: frame t takes the label of the segment
/// containing its midpoint time (t + 0.5) / fps; midpoints in gaps or past
/// the end of the track map to SIL. Segments are half-open [start, end).
std::vector<int> discretize(const SegmentTrack& track, double fps, int frame_count,
                            const PhoneAlphabet& alphabet);

} // namespace aufuse

#endif // AUFUSE_ALIGNMENT_HPP
