// aufuse: batch pipeline for the audiovisual AU fusion models.
//
// Subcommands mirror the train/infer/evaluate workflow: simulate a corpus,
// learn structure and transitions, inject expert edges, fit parameters,
// run inference, and score the baseline ladder with leave-one-subject-out.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aufuse/dataset.hpp"
#include "aufuse/evaluate.hpp"
#include "aufuse/inference.hpp"
#include "aufuse/io_util.hpp"
#include "aufuse/model_io.hpp"
#include "aufuse/parallel.hpp"
#include "aufuse/simulate.hpp"

namespace fs = std::filesystem;
using namespace aufuse;

namespace {

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct CommonLearnFlags {
    int max_parents = 3;
    double alpha = 1.0;
    std::string order;  // explicit comma list; empty = phone-first rule
    std::string priors = "first";

    OrderingPolicy ordering() const {
        OrderingPolicy policy;
        policy.max_parents = max_parents;
        if (!order.empty()) policy.explicit_order = split_csv(order);
        return policy;
    }
};

std::vector<Variable> corpus_hidden_vars(const Corpus& corpus, bool with_phone) {
    std::vector<Variable> vars;
    if (with_phone) vars.push_back({kPhoneVarName, corpus.alphabet.size(), VarRole::HiddenPhone});
    for (const auto& name : corpus.au_names) vars.push_back({name, 2, VarRole::HiddenAu});
    return vars;
}

NetworkSpec add_measurement_layer(const std::vector<Variable>& hidden,
                                  const std::vector<Edge>& intra,
                                  const std::vector<Edge>& inter) {
    NetworkSpec spec;
    spec.variables = hidden;
    for (const auto& v : hidden) {
        spec.variables.push_back({"O_" + v.name, v.cardinality,
                                  v.role == VarRole::HiddenPhone ? VarRole::MeasurementPhone
                                                                 : VarRole::MeasurementAu});
    }
    spec.intra_edges = intra;
    for (const auto& v : hidden) spec.intra_edges.emplace_back(v.name, "O_" + v.name);
    spec.inter_edges = inter;
    return spec;
}

std::vector<Variable> model_hidden_vars(const NetworkSpec& spec) {
    std::vector<Variable> out;
    for (const auto& v : spec.variables) {
        if (is_hidden(v.role)) out.push_back(v);
    }
    return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::uint64_t seed, int jobs) {
    SimConfig config = load_sim_config(config_path);
    config.seed = seed;
    const Corpus corpus = sample_corpus(config, jobs);
    atomic_write_file(out_path, corpus_to_jsonl(corpus));
    std::cout << "wrote " << corpus.sequences.size() << " sequences (" << corpus.total_frames()
              << " frames) to " << out_path << "\n";
    return 0;
}

int cmd_learn_structure(const std::string& corpus_path, const std::string& out_path,
                        const CommonLearnFlags& flags, bool no_phone) {
    const Corpus corpus = read_corpus(corpus_path);
    const auto hidden = corpus_hidden_vars(corpus, !no_phone);
    const DataTable truth = build_truth_table(corpus, !no_phone);
    const auto intra = k2_search(truth, hidden, flags.ordering());
    NetworkSpec structure = add_measurement_layer(hidden, intra, {});
    const DataTable all = build_full_table(corpus, structure);
    const NetworkSpec fitted = fit_all(structure, all, nullptr, SmoothingPolicy{flags.alpha});
    save_model(fitted, out_path);
    std::cout << "learned " << intra.size() << " intra-slice edges; wrote " << out_path << "\n";
    return 0;
}

int cmd_learn_transitions(const std::string& corpus_path, const std::string& model_path,
                          const std::string& out_path, const CommonLearnFlags& flags) {
    const Corpus corpus = read_corpus(corpus_path);
    const NetworkSpec base = load_model(model_path);
    const auto hidden = model_hidden_vars(base);
    const bool with_phone =
        std::any_of(hidden.begin(), hidden.end(),
                    [](const Variable& v) { return v.role == VarRole::HiddenPhone; });
    const DataTable pairs_truth = build_truth_pair_table(corpus, with_phone);
    const auto inter = transition_search(pairs_truth, hidden, base.intra_edges, flags.ordering());

    NetworkSpec structure = base;
    structure.inter_edges = inter;
    const DataTable initial = flags.priors == "all" ? build_full_table(corpus, structure)
                                                    : build_initial_table(corpus, structure);
    const DataTable pairs = build_pair_table(corpus, structure);
    const NetworkSpec fitted = fit_all(structure, initial, &pairs, SmoothingPolicy{flags.alpha});
    save_model(fitted, out_path);
    std::cout << "learned " << inter.size() << " inter-slice edges; wrote " << out_path << "\n";
    return 0;
}

int cmd_inject_expert(const std::string& model_path, const std::string& out_path,
                      const std::string& edges_csv) {
    const NetworkSpec base = load_model(model_path);
    std::string phone_name;
    for (const auto& v : base.variables) {
        if (v.role == VarRole::HiddenPhone) phone_name = v.name;
    }
    if (phone_name.empty()) throw std::runtime_error(model_path + ": model has no hidden phone node");
    std::vector<std::string> sources = split_csv(edges_csv);
    if (sources.empty()) {
        for (const auto& v : base.variables) {
            if (v.role == VarRole::HiddenAu) sources.push_back(v.name);
        }
    }
    std::vector<Edge> edges;
    for (const auto& au : sources) edges.emplace_back(au, phone_name);
    const NetworkSpec expert = inject_expert_edges(base, edges);
    save_model(expert, out_path);
    std::cout << "injected " << edges.size() << " expert edges (refit parameters before inference); wrote "
              << out_path << "\n";
    return 0;
}

int cmd_fit_params(const std::string& model_path, const std::string& corpus_path,
                   const std::string& out_path, double alpha, const std::string& priors) {
    const Corpus corpus = read_corpus(corpus_path);
    const NetworkSpec structure = load_model(model_path);
    const DataTable initial = priors == "all" || !structure.is_dynamic()
                                  ? build_full_table(corpus, structure)
                                  : build_initial_table(corpus, structure);
    NetworkSpec fitted;
    if (structure.is_dynamic()) {
        const DataTable pairs = build_pair_table(corpus, structure);
        fitted = fit_all(structure, initial, &pairs, SmoothingPolicy{alpha});
    } else {
        fitted = fit_all(structure, initial, nullptr, SmoothingPolicy{alpha});
    }
    save_model(fitted, out_path);
    std::cout << "fitted " << fitted.cpts.size() + fitted.transition_cpts.size() << " CPTs; wrote "
              << out_path << "\n";
    return 0;
}

void check_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw CLI::ValidationError("--threshold", "must lie strictly inside (0, 1)");
    }
}

int cmd_infer(const std::string& model_path, const std::string& corpus_path,
              const std::string& out_path, const std::string& mode, double threshold, int jobs) {
    check_threshold(threshold);
    if (mode != "filtered" && mode != "smoothed" && mode != "joint-map") {
        throw CLI::ValidationError("--mode", "must be filtered, smoothed, or joint-map");
    }
    const NetworkSpec model = load_model(model_path);
    const Corpus corpus = read_corpus(corpus_path);
    for (const auto& v : model.variables) {
        if (v.role == VarRole::HiddenAu &&
            std::find(corpus.au_names.begin(), corpus.au_names.end(), v.name) ==
                corpus.au_names.end()) {
            throw std::runtime_error(corpus_path + ": corpus has no AU channel named " + v.name);
        }
        if (v.role == VarRole::HiddenPhone && v.cardinality != corpus.alphabet.size()) {
            throw std::runtime_error(corpus_path + ": phone alphabet does not match the model");
        }
    }

    DecodePolicy policy;
    policy.threshold = threshold;
    EngineOptions engine_options;
    if (mode == "filtered") {
        policy.mode = DecodeMode::FilteredMarginal;
    } else if (mode == "smoothed") {
        policy.mode = DecodeMode::SmoothedMarginal;
    } else {
        policy.mode = DecodeMode::JointMap;
        engine_options.keep_joint = true;
    }
    const DbnEngine engine(model, engine_options);

    std::vector<std::string> chunks(corpus.sequences.size());
    parallel_for(static_cast<int>(corpus.sequences.size()), jobs, [&](int i) {
        const auto& sequence = corpus.sequences[static_cast<std::size_t>(i)];
        if (sequence.frames.empty()) return;
        const auto evidence = build_evidence(model, corpus, sequence);
        const BeliefSequence beliefs = policy.mode == DecodeMode::SmoothedMarginal
                                           ? engine.smooth(evidence)
                                           : engine.filter(evidence);
        const auto decoded = decode(beliefs, policy, model);
        append_beliefs_jsonl(chunks[static_cast<std::size_t>(i)], beliefs, decoded,
                             sequence.subject, sequence.word, i);
    });
    std::string out;
    for (const auto& chunk : chunks) out += chunk;
    atomic_write_file(out_path, out);
    std::cout << "wrote beliefs for " << corpus.total_frames() << " frames to " << out_path << "\n";
    return 0;
}

int cmd_evaluate(const std::string& corpus_path, const std::string& methods_csv,
                 const std::string& out_csv, const std::string& out_json,
                 const std::string& roc_dir, const std::string& dump_models,
                 const CommonLearnFlags& flags, const std::string& expert_edges,
                 const std::string& mode, double threshold, bool per_fold_rates, int jobs) {
    check_threshold(threshold);
    DecodePolicy policy;
    policy.threshold = threshold;
    if (mode == "filtered") {
        policy.mode = DecodeMode::FilteredMarginal;
    } else if (mode == "smoothed") {
        policy.mode = DecodeMode::SmoothedMarginal;
    } else {
        throw CLI::ValidationError("--mode", "must be filtered or smoothed");
    }
    std::vector<MethodConfig> methods;
    for (const auto& name : split_csv(methods_csv)) {
        try {
            methods.push_back(MethodConfig{method_from_name(name), policy});
        } catch (const std::invalid_argument& e) {
            throw CLI::ValidationError("--methods", e.what());
        }
    }
    if (methods.empty()) throw CLI::ValidationError("--methods", "needs at least one method");
    const Corpus corpus = read_corpus(corpus_path);

    LosoOptions options;
    options.smoothing.alpha = flags.alpha;
    options.ordering = flags.ordering();
    options.jobs = jobs;
    options.pool_across_folds = !per_fold_rates;
    options.priors_from_all_frames = flags.priors == "all";
    if (!expert_edges.empty()) options.expert_sources = split_csv(expert_edges);
    if (!dump_models.empty()) options.dump_models_dir = fs::path(dump_models);

    const MetricsReport report = run_loso(corpus, methods, options);

    OutputStager stager;
    stager.add(out_csv, report_to_csv(report));
    if (!out_json.empty()) stager.add(out_json, report_to_json(report));
    if (!roc_dir.empty()) {
        for (const auto& [name, content] : roc_csv_files(report)) {
            stager.add(fs::path(roc_dir) / name, content);
        }
    }
    stager.commit();
    for (const auto& method : report.methods) {
        std::cout << method.method << ": macro-F1 " << format_double(method.macro_f1) << "\n";
    }
    return 0;
}

int cmd_stats(const std::string& corpus_path, const std::string& csv_path,
              const std::string& json_path) {
    const Corpus corpus = read_corpus(corpus_path);
    const CorpusStats stats = empirical_stats(corpus);
    OutputStager stager;
    if (!csv_path.empty()) stager.add(csv_path, stats_to_csv(stats));
    if (!json_path.empty()) stager.add(json_path, stats_to_json(stats));
    stager.commit();
    std::cout << "frames: " << stats.total_frames << ", sequences: " << stats.sequence_count
              << ", subjects: " << stats.per_subject_frames.size() << "\n";
    for (std::size_t a = 0; a < stats.au_names.size(); ++a) {
        std::cout << stats.au_names[a] << ": " << stats.au_active[a] << "\n";
    }
    return 0;
}

int cmd_validate_model(const std::string& model_path) {
    const NetworkSpec spec = load_model(model_path);
    const auto violations = validate(spec);
    if (violations.empty()) {
        std::cout << model_path << ": valid (" << spec.variables.size() << " variables, "
                  << (spec.is_dynamic() ? "dynamic" : "static") << ")\n";
        return 0;
    }
    for (const auto& violation : violations) {
        std::cout << model_path << ": " << to_string(violation) << "\n";
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audiovisual action-unit fusion pipeline"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Sample a synthetic frame-aligned corpus");
    std::string sim_config;
    std::string sim_out;
    std::uint64_t sim_seed = 0;
    int sim_jobs = 1;
    simulate->add_option("--config", sim_config, "Simulation config (JSON)")->required();
    simulate->add_option("--out", sim_out, "Output corpus (JSONL)")->required();
    simulate->add_option("--seed", sim_seed, "Random seed (all randomness flows from it)")->required();
    simulate->add_option("--jobs", sim_jobs, "Worker threads")->capture_default_str();

    // shared learn flags
    const auto add_learn_flags = [](CLI::App* cmd, CommonLearnFlags& flags, bool with_priors) {
        cmd->add_option("--max-parents", flags.max_parents, "Parent cap per family")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        cmd->add_option("--alpha", flags.alpha, "Additive smoothing pseudo-count")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        cmd->add_option("--order", flags.order,
                        "Explicit K2 ordering (comma list; default phone-first, then AUs by "
                        "activation frequency)");
        if (with_priors) {
            cmd->add_option("--priors", flags.priors, "Fit initial-slice CPTs from: first|all frames")
                ->check(CLI::IsMember({"first", "all"}))
                ->capture_default_str();
        }
    };

    // learn-structure
    auto* learn_structure =
        app.add_subcommand("learn-structure", "K2 intra-slice structure + static BN fit");
    std::string ls_corpus;
    std::string ls_out;
    CommonLearnFlags ls_flags;
    bool ls_no_phone = false;
    learn_structure->add_option("--corpus", ls_corpus, "Training corpus (JSONL)")->required();
    learn_structure->add_option("--out", ls_out, "Output model (JSON)")->required();
    add_learn_flags(learn_structure, ls_flags, false);
    learn_structure->add_flag("--no-phone", ls_no_phone, "Drop the phone node (visual-only model)");

    // learn-transitions
    auto* learn_transitions =
        app.add_subcommand("learn-transitions", "BIC transition structure + DBN fit");
    std::string lt_corpus;
    std::string lt_model;
    std::string lt_out;
    CommonLearnFlags lt_flags;
    learn_transitions->add_option("--corpus", lt_corpus, "Training corpus (JSONL)")->required();
    learn_transitions->add_option("--model", lt_model, "Static model with intra edges (JSON)")
        ->required();
    learn_transitions->add_option("--out", lt_out, "Output model (JSON)")->required();
    add_learn_flags(learn_transitions, lt_flags, true);

    // inject-expert
    auto* inject = app.add_subcommand("inject-expert",
                                      "Add AU_{t-1} -> Phone_t links to a learned DBN");
    std::string ie_model;
    std::string ie_out;
    std::string ie_edges;
    inject->add_option("--model", ie_model, "Learned DBN model (JSON)")->required();
    inject->add_option("--out", ie_out, "Output model (JSON)")->required();
    inject->add_option("--edges", ie_edges, "AU sources (comma list; default: every AU)");

    // fit-params
    auto* fit = app.add_subcommand("fit-params", "Refit all CPTs of a model structure");
    std::string fp_model;
    std::string fp_corpus;
    std::string fp_out;
    double fp_alpha = 1.0;
    std::string fp_priors = "first";
    fit->add_option("--model", fp_model, "Model structure (JSON)")->required();
    fit->add_option("--corpus", fp_corpus, "Training corpus (JSONL)")->required();
    fit->add_option("--out", fp_out, "Output model (JSON)")->required();
    fit->add_option("--alpha", fp_alpha, "Additive smoothing pseudo-count")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    fit->add_option("--priors", fp_priors, "Fit initial-slice CPTs from: first|all frames")
        ->check(CLI::IsMember({"first", "all"}))
        ->capture_default_str();

    // infer
    auto* infer = app.add_subcommand("infer", "Filter/smooth a corpus and decode AU activations");
    std::string in_model;
    std::string in_corpus;
    std::string in_out;
    std::string in_mode = "filtered";
    double in_threshold = 0.5;
    int in_jobs = 1;
    infer->add_option("--model", in_model, "Model (JSON)")->required();
    infer->add_option("--corpus", in_corpus, "Corpus with measurements (JSONL)")->required();
    infer->add_option("--out", in_out, "Output beliefs (JSONL)")->required();
    infer->add_option("--mode", in_mode, "filtered|smoothed|joint-map")->capture_default_str();
    infer->add_option("--threshold", in_threshold, "AU activation threshold")->capture_default_str();
    infer->add_option("--jobs", in_jobs, "Worker threads")->capture_default_str();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Leave-one-subject-out baseline ladder");
    std::string ev_corpus;
    std::string ev_methods = "measurement-only,static-bn,dbn-visual-only,dbn-learned,dbn-expert";
    std::string ev_out;
    std::string ev_json;
    std::string ev_roc_dir;
    std::string ev_dump_models;
    std::string ev_expert_edges;
    std::string ev_mode = "filtered";
    double ev_threshold = 0.5;
    bool ev_per_fold = false;
    int ev_jobs = 1;
    CommonLearnFlags ev_flags;
    evaluate->add_option("--corpus", ev_corpus, "Corpus (JSONL)")->required();
    evaluate->add_option("--methods", ev_methods, "Comma list of methods")->capture_default_str();
    evaluate->add_option("--out", ev_out, "Output report (CSV)")->required();
    evaluate->add_option("--json", ev_json, "Also write the report as JSON");
    evaluate->add_option("--roc-dir", ev_roc_dir, "Directory for per-method/AU ROC CSVs");
    evaluate->add_option("--dump-models", ev_dump_models, "Directory for per-fold trained models");
    evaluate->add_option("--expert-edges", ev_expert_edges,
                         "AU sources for dbn-expert (comma list; default: every AU)");
    evaluate->add_option("--mode", ev_mode, "filtered|smoothed decoding")->capture_default_str();
    evaluate->add_option("--threshold", ev_threshold, "AU activation threshold")
        ->capture_default_str();
    evaluate->add_flag("--per-fold", ev_per_fold,
                       "Average per-fold rates instead of pooling confusions");
    evaluate->add_option("--jobs", ev_jobs, "Worker threads (output is independent of this)")
        ->capture_default_str();
    add_learn_flags(evaluate, ev_flags, true);

    // stats
    auto* stats = app.add_subcommand("stats", "Corpus activation statistics");
    std::string st_corpus;
    std::string st_csv;
    std::string st_json;
    stats->add_option("--corpus", st_corpus, "Corpus (JSONL)")->required();
    stats->add_option("--csv", st_csv, "AU activation counts (CSV)");
    stats->add_option("--json", st_json, "Full statistics (JSON)");

    // validate-model
    auto* validate_model = app.add_subcommand("validate-model", "Check every model invariant");
    std::string vm_model;
    validate_model->add_option("--model", vm_model, "Model (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(simulate)) return cmd_simulate(sim_config, sim_out, sim_seed, sim_jobs);
        if (app.got_subcommand(learn_structure)) {
            return cmd_learn_structure(ls_corpus, ls_out, ls_flags, ls_no_phone);
        }
        if (app.got_subcommand(learn_transitions)) {
            return cmd_learn_transitions(lt_corpus, lt_model, lt_out, lt_flags);
        }
        if (app.got_subcommand(inject)) return cmd_inject_expert(ie_model, ie_out, ie_edges);
        if (app.got_subcommand(fit)) return cmd_fit_params(fp_model, fp_corpus, fp_out, fp_alpha, fp_priors);
        if (app.got_subcommand(infer)) {
            return cmd_infer(in_model, in_corpus, in_out, in_mode, in_threshold, in_jobs);
        }
        if (app.got_subcommand(evaluate)) {
            return cmd_evaluate(ev_corpus, ev_methods, ev_out, ev_json, ev_roc_dir, ev_dump_models,
                                ev_flags, ev_expert_edges, ev_mode, ev_threshold, ev_per_fold, ev_jobs);
        }
        if (app.got_subcommand(stats)) return cmd_stats(st_corpus, st_csv, st_json);
        if (app.got_subcommand(validate_model)) return cmd_validate_model(vm_model);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
