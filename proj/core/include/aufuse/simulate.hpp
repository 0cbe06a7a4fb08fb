#ifndef AUFUSE_SIMULATE_HPP
#define AUFUSE_SIMULATE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aufuse/corpus.hpp"
#include "aufuse/graph.hpp"

namespace aufuse {

/// Measurement corruption applied on top of the generator's measurement
/// CPTs: per-AU false-positive/false-negative flips, a phone confusion
/// channel (symmetric error rate or a full row-stochastic table), and
/// per-channel missing rates.
struct NoiseModel {
    std::vector<double> au_fp;  // aligned to the generator AU list
    std::vector<double> au_fn;
    double phone_epsilon = 0.0;
    std::optional<std::vector<double>> phone_confusion;  // row-major P x P
    double au_missing_rate = 0.0;
    double phone_missing_rate = 0.0;

    static NoiseModel none(std::size_t au_count);
    /// "clean-like" (eps 0.02, fp 0.10, fn 0.25) or "challenging-like"
    /// (eps 0.05, fp 0.20, fn 0.40), both with nothing missing.
    static NoiseModel preset(std::string_view name, std::size_t au_count);

    void check(std::size_t au_count, int phone_card) const;
};

struct SimConfig {
    NetworkSpec generator;  // must be a valid dynamic spec
    PhoneAlphabet alphabet;
    int subjects = 1;
    int sequences_per_subject = 1;
    int frames_min = 1;
    int frames_max = 1;
    std::uint64_t seed = 0;
    double subject_jitter = 0.0;  // Dirichlet concentration; 0 = identical subjects
    NoiseModel noise = NoiseModel::none(0);
    double fps = 60.0;
};

/// Built-in generator models: "demo-small" (4 AUs, 6 phones; fast enough
/// for exact inference everywhere) and "speech-full" (7 AUs, 29 phones,
/// the full speech-related AU set).
NetworkSpec builtin_generator(std::string_view name);
PhoneAlphabet builtin_alphabet(std::string_view name);

SimConfig parse_sim_config(const std::string& text, const std::string& origin,
                           const std::filesystem::path& base_dir);
SimConfig load_sim_config(const std::filesystem::path& path);

/// Ancestral sampling of hidden trajectories, measurement sampling through
/// the measurement CPTs, then NoiseModel corruption. Per-subject CPTs are
/// Dirichlet-jittered copies of the generator when subject_jitter > 0.
/// Byte-deterministic for a given config and independent of jobs: every
/// sequence samples from its own derived seed.
Corpus sample_corpus(const SimConfig& config, int jobs = 1);

struct CorpusStats {
    std::vector<std::string> au_names;
    std::vector<long long> au_active;        // frames with the AU present
    std::vector<std::string> phone_labels;
    std::vector<long long> phone_occupancy;  // frames per phone state
    long long total_frames = 0;
    long long sequence_count = 0;
    std::map<std::string, std::vector<long long>> per_subject_au;
    std::map<std::string, long long> per_subject_frames;
};

CorpusStats empirical_stats(const Corpus& corpus);

/// Activation-count table in the report shape used for corpus statistics:
/// one CSV row, columns = AU names + "Total Frames".
std::string stats_to_csv(const CorpusStats& stats);
std::string stats_to_json(const CorpusStats& stats);

} // namespace aufuse

#endif // AUFUSE_SIMULATE_HPP
