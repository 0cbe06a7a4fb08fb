#include "aufuse/evaluate.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "aufuse/dataset.hpp"
#include "aufuse/io_util.hpp"
#include "aufuse/model_io.hpp"
#include "aufuse/parallel.hpp"

namespace aufuse {

using nlohmann::ordered_json;

std::string_view method_name(MethodKind kind) {
    switch (kind) {
        case MethodKind::MeasurementOnly: return "measurement-only";
        case MethodKind::StaticBn: return "static-bn";
        case MethodKind::DbnVisualOnly: return "dbn-visual-only";
        case MethodKind::DbnLearned: return "dbn-learned";
        case MethodKind::DbnExpert: return "dbn-expert";
    }
    throw std::logic_error("unreachable method kind");
}

MethodKind method_from_name(std::string_view name) {
    if (name == "measurement-only") return MethodKind::MeasurementOnly;
    if (name == "static-bn") return MethodKind::StaticBn;
    if (name == "dbn-visual-only") return MethodKind::DbnVisualOnly;
    if (name == "dbn-learned") return MethodKind::DbnLearned;
    if (name == "dbn-expert") return MethodKind::DbnExpert;
    throw std::invalid_argument("unknown method: " + std::string(name));
}

namespace {

bool uses_phone(MethodKind kind) {
    return kind == MethodKind::StaticBn || kind == MethodKind::DbnLearned ||
           kind == MethodKind::DbnExpert;
}

std::vector<Variable> hidden_variables(const Corpus& corpus, bool with_phone) {
    std::vector<Variable> vars;
    if (with_phone) vars.push_back({kPhoneVarName, corpus.alphabet.size(), VarRole::HiddenPhone});
    for (const auto& name : corpus.au_names) vars.push_back({name, 2, VarRole::HiddenAu});
    return vars;
}

NetworkSpec structure_from_edges(const std::vector<Variable>& hidden,
                                 const std::vector<Edge>& intra,
                                 const std::vector<Edge>& inter) {
    NetworkSpec spec;
    spec.variables = hidden;
    for (const auto& v : hidden) {
        const bool phone = v.role == VarRole::HiddenPhone;
        spec.variables.push_back({"O_" + v.name, v.cardinality,
                                  phone ? VarRole::MeasurementPhone : VarRole::MeasurementAu});
    }
    spec.intra_edges = intra;
    for (const auto& v : hidden) spec.intra_edges.emplace_back(v.name, "O_" + v.name);
    spec.inter_edges = inter;
    return spec;
}

OrderingPolicy method_ordering(const LosoOptions& options, bool with_phone) {
    OrderingPolicy ordering = options.ordering;
    if (ordering.explicit_order && !with_phone) {
        // The visual-only ladder rung drops the phone variable.
        auto order = *ordering.explicit_order;
        order.erase(std::remove(order.begin(), order.end(), std::string(kPhoneVarName)), order.end());
        ordering.explicit_order = std::move(order);
    }
    return ordering;
}

} // namespace

NetworkSpec train_method_model(MethodKind kind, const Corpus& train, const LosoOptions& options) {
    if (kind == MethodKind::MeasurementOnly) {
        throw std::invalid_argument("measurement-only has no model to train");
    }
    const bool with_phone = uses_phone(kind);
    const std::vector<Variable> hidden = hidden_variables(train, with_phone);
    const OrderingPolicy ordering = method_ordering(options, with_phone);

    const DataTable truth = build_truth_table(train, with_phone);
    const std::vector<Edge> intra = k2_search(truth, hidden, ordering);

    if (kind == MethodKind::StaticBn) {
        const NetworkSpec structure = structure_from_edges(hidden, intra, {});
        const DataTable all = build_full_table(train, structure);
        return fit_all(structure, all, nullptr, options.smoothing);
    }

    const DataTable truth_pairs = build_truth_pair_table(train, with_phone);
    const std::vector<Edge> inter = transition_search(truth_pairs, hidden, intra, ordering);
    NetworkSpec structure = structure_from_edges(hidden, intra, inter);

    const DataTable initial = options.priors_from_all_frames ? build_full_table(train, structure)
                                                             : build_initial_table(train, structure);
    const DataTable pairs = build_pair_table(train, structure);
    NetworkSpec fitted = fit_all(structure, initial, &pairs, options.smoothing);

    if (kind == MethodKind::DbnExpert) {
        std::vector<Edge> expert;
        const auto& sources =
            options.expert_sources ? *options.expert_sources : train.au_names;
        for (const auto& au : sources) expert.emplace_back(au, kPhoneVarName);
        fitted = inject_expert_edges(fitted, expert);
        fitted = fit_all(fitted, initial, &pairs, options.smoothing);
    }
    return fitted;
}

namespace {

// Per-fold, per-method prediction pool for one AU.
struct AuPool {
    Confusion confusion;
    std::vector<std::uint8_t> truth;
    std::vector<double> scores;
    std::vector<double> fold_f1;  // per-fold rates for the non-pooled flag
    std::vector<double> fold_tpr;
    std::vector<double> fold_fpr;
    std::vector<double> fold_mcc;
};

struct FoldResult {
    // [method][au] -> pool
    std::vector<std::vector<AuPool>> pools;
};

void run_fold(const Corpus& corpus, const std::string& held_out,
              std::span<const MethodConfig> methods, const LosoOptions& options,
              FoldResult& result) {
    Corpus train;
    train.fps = corpus.fps;
    train.au_names = corpus.au_names;
    train.alphabet = corpus.alphabet;
    std::vector<const FrameSequence*> test;
    for (const auto& sequence : corpus.sequences) {
        if (sequence.frames.empty()) continue;
        if (sequence.subject == held_out) {
            test.push_back(&sequence);
        } else {
            train.sequences.push_back(sequence);
        }
    }

    const std::size_t au_count = corpus.au_names.size();
    result.pools.assign(methods.size(), std::vector<AuPool>(au_count));

    for (std::size_t m = 0; m < methods.size(); ++m) {
        const MethodConfig& method = methods[m];
        auto& pools = result.pools[m];

        if (method.kind == MethodKind::MeasurementOnly) {
            for (const auto* sequence : test) {
                for (const auto& frame : sequence->frames) {
                    for (std::size_t a = 0; a < au_count; ++a) {
                        const int meas = frame.au_meas[a];
                        const int label = meas == Frame::kMissing ? 0 : meas;
                        const double score = meas == Frame::kMissing ? 0.5 : meas;
                        pools[a].truth.push_back(frame.au_truth[a]);
                        pools[a].scores.push_back(score);
                        if (frame.au_truth[a] == 1) {
                            label == 1 ? ++pools[a].confusion.tp : ++pools[a].confusion.fn;
                        } else {
                            label == 1 ? ++pools[a].confusion.fp : ++pools[a].confusion.tn;
                        }
                    }
                }
            }
            continue;
        }

        const NetworkSpec model = train_method_model(method.kind, train, options);
        if (options.dump_models_dir) {
            const auto dir = *options.dump_models_dir / ("fold_" + held_out);
            std::filesystem::create_directories(dir);
            save_model(model, dir / (std::string(method_name(method.kind)) + ".json"));
        }
        EngineOptions engine_options;
        engine_options.transition_cache_cap = options.transition_cache_cap;
        const DbnEngine engine(model, engine_options);
        const bool smoothed = method.decode.mode == DecodeMode::SmoothedMarginal;

        for (const auto* sequence : test) {
            const auto evidence = build_evidence(model, corpus, *sequence);
            const BeliefSequence beliefs = smoothed ? engine.smooth(evidence) : engine.filter(evidence);
            const auto decoded = decode(beliefs, method.decode, model);
            for (std::size_t t = 0; t < sequence->frames.size(); ++t) {
                const Frame& frame = sequence->frames[t];
                for (std::size_t a = 0; a < au_count; ++a) {
                    const auto& au = corpus.au_names[a];
                    const int label = decoded[t].au.at(au);
                    const double score = beliefs.frames[t].marginals.at(au)[1];
                    pools[a].truth.push_back(frame.au_truth[a]);
                    pools[a].scores.push_back(score);
                    if (frame.au_truth[a] == 1) {
                        label == 1 ? ++pools[a].confusion.tp : ++pools[a].confusion.fn;
                    } else {
                        label == 1 ? ++pools[a].confusion.fp : ++pools[a].confusion.tn;
                    }
                }
            }
        }
    }

    for (auto& pools : result.pools) {
        for (auto& pool : pools) {
            pool.fold_f1.push_back(f1(pool.confusion));
            pool.fold_tpr.push_back(tpr(pool.confusion));
            pool.fold_fpr.push_back(fpr(pool.confusion));
            pool.fold_mcc.push_back(mcc(pool.confusion));
        }
    }
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double total = 0.0;
    for (const double v : values) total += v;
    return total / static_cast<double>(values.size());
}

} // namespace

MetricsReport run_loso(const Corpus& corpus, std::span<const MethodConfig> methods,
                       const LosoOptions& options) {
    auto subjects = corpus.subject_ids();
    std::sort(subjects.begin(), subjects.end());
    if (subjects.size() < 2) {
        throw std::invalid_argument("leave-one-subject-out needs at least two subjects");
    }
    bool any_phone_meas = false;
    for (const auto& sequence : corpus.sequences) {
        for (const auto& frame : sequence.frames) {
            if (frame.phone_meas != Frame::kMissing) {
                any_phone_meas = true;
                break;
            }
        }
        if (any_phone_meas) break;
    }
    for (const auto& method : methods) {
        if (uses_phone(method.kind) && !any_phone_meas) {
            throw std::invalid_argument(std::string(method_name(method.kind)) +
                                        " requires phone measurements, which the corpus lacks");
        }
        if (method.decode.mode == DecodeMode::JointMap) {
            throw std::invalid_argument("the evaluation harness decodes marginals, not joint MAP");
        }
    }

    std::vector<FoldResult> folds(subjects.size());
    parallel_for(static_cast<int>(subjects.size()), options.jobs, [&](int f) {
        run_fold(corpus, subjects[static_cast<std::size_t>(f)], methods, options,
                 folds[static_cast<std::size_t>(f)]);
    });

    MetricsReport report;
    report.au_names = corpus.au_names;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        MethodReport method_report;
        method_report.method = std::string(method_name(methods[m].kind));
        std::vector<double> macro_f1;
        std::vector<double> macro_tpr;
        std::vector<double> macro_fpr;
        std::vector<double> macro_mcc;
        for (std::size_t a = 0; a < corpus.au_names.size(); ++a) {
            AuPool merged;
            std::vector<double> fold_f1;
            std::vector<double> fold_tpr;
            std::vector<double> fold_fpr;
            std::vector<double> fold_mcc;
            for (const auto& fold : folds) {
                const AuPool& pool = fold.pools[m][a];
                merged.confusion += pool.confusion;
                merged.truth.insert(merged.truth.end(), pool.truth.begin(), pool.truth.end());
                merged.scores.insert(merged.scores.end(), pool.scores.begin(), pool.scores.end());
                fold_f1.insert(fold_f1.end(), pool.fold_f1.begin(), pool.fold_f1.end());
                fold_tpr.insert(fold_tpr.end(), pool.fold_tpr.begin(), pool.fold_tpr.end());
                fold_fpr.insert(fold_fpr.end(), pool.fold_fpr.begin(), pool.fold_fpr.end());
                fold_mcc.insert(fold_mcc.end(), pool.fold_mcc.begin(), pool.fold_mcc.end());
            }
            AuMetrics metrics;
            metrics.confusion = merged.confusion;
            if (options.pool_across_folds) {
                metrics.f1 = f1(merged.confusion);
                metrics.tpr = tpr(merged.confusion);
                metrics.fpr = fpr(merged.confusion);
                metrics.mcc = mcc(merged.confusion);
            } else {
                metrics.f1 = mean(fold_f1);
                metrics.tpr = mean(fold_tpr);
                metrics.fpr = mean(fold_fpr);
                metrics.mcc = mean(fold_mcc);
            }
            metrics.roc = roc(merged.truth, merged.scores);
            macro_f1.push_back(metrics.f1);
            macro_tpr.push_back(metrics.tpr);
            macro_fpr.push_back(metrics.fpr);
            macro_mcc.push_back(metrics.mcc);
            method_report.per_au.emplace(corpus.au_names[a], std::move(metrics));
        }
        method_report.macro_f1 = mean(macro_f1);
        method_report.macro_tpr = mean(macro_tpr);
        method_report.macro_fpr = mean(macro_fpr);
        method_report.macro_mcc = mean(macro_mcc);
        report.methods.push_back(std::move(method_report));
    }
    return report;
}

std::string report_to_csv(const MetricsReport& report) {
    std::string out = "method,au,f1,tpr,fpr,mcc,tp,fp,fn,tn\n";
    for (const auto& method : report.methods) {
        for (const auto& au : report.au_names) {
            const AuMetrics& m = method.per_au.at(au);
            out += method.method + ',' + au + ',' + format_double(m.f1) + ',' +
                   format_double(m.tpr) + ',' + format_double(m.fpr) + ',' + format_double(m.mcc) +
                   ',' + std::to_string(m.confusion.tp) + ',' + std::to_string(m.confusion.fp) +
                   ',' + std::to_string(m.confusion.fn) + ',' + std::to_string(m.confusion.tn) + '\n';
        }
        out += method.method + ",macro," + format_double(method.macro_f1) + ',' +
               format_double(method.macro_tpr) + ',' + format_double(method.macro_fpr) + ',' +
               format_double(method.macro_mcc) + ",,,,\n";
    }
    return out;
}

std::string report_to_json(const MetricsReport& report) {
    ordered_json doc;
    doc["format_version"] = "1";
    doc["conventions"] = {{"zero_denominator_rates", 0.0}};
    doc["au_names"] = report.au_names;
    ordered_json methods;
    for (const auto& method : report.methods) {
        ordered_json entry;
        ordered_json per_au;
        for (const auto& au : report.au_names) {
            const AuMetrics& m = method.per_au.at(au);
            ordered_json metrics;
            metrics["f1"] = m.f1;
            metrics["tpr"] = m.tpr;
            metrics["fpr"] = m.fpr;
            metrics["mcc"] = m.mcc;
            metrics["confusion"] = {{"tp", m.confusion.tp},
                                    {"fp", m.confusion.fp},
                                    {"fn", m.confusion.fn},
                                    {"tn", m.confusion.tn}};
            per_au[au] = std::move(metrics);
        }
        entry["per_au"] = std::move(per_au);
        entry["macro"] = {{"f1", method.macro_f1},
                          {"tpr", method.macro_tpr},
                          {"fpr", method.macro_fpr},
                          {"mcc", method.macro_mcc}};
        methods[method.method] = std::move(entry);
    }
    doc["methods"] = std::move(methods);
    return doc.dump(2) + "\n";
}

std::map<std::string, std::string> roc_csv_files(const MetricsReport& report) {
    std::map<std::string, std::string> files;
    for (const auto& method : report.methods) {
        for (const auto& au : report.au_names) {
            std::string content = "threshold,fpr,tpr\n";
            for (const auto& point : method.per_au.at(au).roc) {
                content += format_double(point.threshold) + ',' + format_double(point.fpr) + ',' +
                           format_double(point.tpr) + '\n';
            }
            files["roc_" + method.method + "_" + au + ".csv"] = std::move(content);
        }
    }
    return files;
}

} // namespace aufuse
