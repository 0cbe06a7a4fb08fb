#ifndef AUFUSE_EVALUATE_HPP
#define AUFUSE_EVALUATE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aufuse/corpus.hpp"
#include "aufuse/inference.hpp"
#include "aufuse/metrics.hpp"
#include "aufuse/params.hpp"
#include "aufuse/structure.hpp"

namespace aufuse {

/// The baseline ladder. measurement-only passes the AU measurements
/// through; static-bn fuses per frame with no dynamics; dbn-visual-only
/// drops the phone and its measurement node; dbn-learned is the learned
/// two-slice model; dbn-expert adds the AU_{t-1} -> Phone_t links.
enum class MethodKind {
    MeasurementOnly,
    StaticBn,
    DbnVisualOnly,
    DbnLearned,
    DbnExpert,
};

std::string_view method_name(MethodKind kind);
MethodKind method_from_name(std::string_view name);

struct MethodConfig {
    MethodKind kind = MethodKind::DbnExpert;
    DecodePolicy decode{};
};

struct LosoOptions {
    SmoothingPolicy smoothing{1.0};
    OrderingPolicy ordering{};
    /// AU sources of the injected expert edges; all AUs when absent.
    std::optional<std::vector<std::string>> expert_sources;
    int jobs = 1;
    /// Pool confusions across folds before computing rates (default) or
    /// average per-fold rates instead.
    bool pool_across_folds = true;
    /// Fit initial-slice CPTs from every frame instead of first frames.
    bool priors_from_all_frames = false;
    /// When set, each fold's trained models are written beneath
    /// <dir>/fold_<subject>/<method>.json.
    std::optional<std::filesystem::path> dump_models_dir;
    std::size_t transition_cache_cap = 4096;
};

struct AuMetrics {
    Confusion confusion;
    double f1 = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double mcc = 0.0;
    std::vector<RocPoint> roc;
};

struct MethodReport {
    std::string method;
    std::map<std::string, AuMetrics> per_au;
    double macro_f1 = 0.0;
    double macro_tpr = 0.0;
    double macro_fpr = 0.0;
    double macro_mcc = 0.0;
};

struct MetricsReport {
    std::vector<std::string> au_names;
    std::vector<MethodReport> methods;
};

/// Trains one method's model on a training corpus: K2 intra-slice search,
/// BIC transition search for the dynamic methods, expert-edge injection for
/// dbn-expert, and a full parameter fit. Not defined for measurement-only.
NetworkSpec train_method_model(MethodKind kind, const Corpus& train, const LosoOptions& options);

/// Leave-one-subject-out protocol: per held-out subject, learn structure
/// and parameters on the remaining subjects, decode the held-out sequences,
/// and pool per-AU confusions across folds. Deterministic for fixed inputs
/// and independent of the job count.
MetricsReport run_loso(const Corpus& corpus, std::span<const MethodConfig> methods,
                       const LosoOptions& options = {});

std::string report_to_csv(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);
/// One "roc_<method>_<au>.csv" per method/AU pair.
std::map<std::string, std::string> roc_csv_files(const MetricsReport& report);

} // namespace aufuse

#endif // AUFUSE_EVALUATE_HPP
