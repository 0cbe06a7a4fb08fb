#include "aufuse/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "aufuse/io_util.hpp"
#include "aufuse/model_io.hpp"
#include "aufuse/parallel.hpp"
#include "aufuse/rng.hpp"

namespace aufuse {

using nlohmann::json;
using nlohmann::ordered_json;

NoiseModel NoiseModel::none(std::size_t au_count) {
    NoiseModel noise;
    noise.au_fp.assign(au_count, 0.0);
    noise.au_fn.assign(au_count, 0.0);
    return noise;
}

NoiseModel NoiseModel::preset(std::string_view name, std::size_t au_count) {
    NoiseModel noise = none(au_count);
    if (name == "none") return noise;
    if (name == "clean-like") {
        noise.au_fp.assign(au_count, 0.10);
        noise.au_fn.assign(au_count, 0.25);
        noise.phone_epsilon = 0.02;
        return noise;
    }
    if (name == "challenging-like") {
        noise.au_fp.assign(au_count, 0.20);
        noise.au_fn.assign(au_count, 0.40);
        noise.phone_epsilon = 0.05;
        return noise;
    }
    throw std::invalid_argument("unknown noise preset: " + std::string(name));
}

void NoiseModel::check(std::size_t au_count, int phone_card) const {
    const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (au_fp.size() != au_count || au_fn.size() != au_count) {
        throw std::invalid_argument("noise rates are not aligned with the AU list");
    }
    for (double v : au_fp) {
        if (!in_unit(v)) throw std::invalid_argument("AU false-positive rate out of [0,1]");
    }
    for (double v : au_fn) {
        if (!in_unit(v)) throw std::invalid_argument("AU false-negative rate out of [0,1]");
    }
    if (!in_unit(phone_epsilon)) throw std::invalid_argument("phone epsilon out of [0,1]");
    if (!(au_missing_rate >= 0.0 && au_missing_rate < 1.0) ||
        !(phone_missing_rate >= 0.0 && phone_missing_rate < 1.0)) {
        throw std::invalid_argument("missing rates must lie in [0,1)");
    }
    if (phone_confusion) {
        const auto p = static_cast<std::size_t>(phone_card);
        if (phone_confusion->size() != p * p) {
            throw std::invalid_argument("phone confusion table must be P x P");
        }
        for (std::size_t row = 0; row < p; ++row) {
            double sum = 0.0;
            for (std::size_t col = 0; col < p; ++col) {
                const double v = (*phone_confusion)[row * p + col];
                if (!in_unit(v)) throw std::invalid_argument("confusion entry out of [0,1]");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                throw std::invalid_argument("confusion row " + std::to_string(row) + " does not sum to 1");
            }
        }
    }
}

namespace {

constexpr double kAuFloor = 0.02;
constexpr double kAuCeil = 0.98;

double clamp_prob(double p) {
    return std::min(kAuCeil, std::max(kAuFloor, p));
}

struct AuProfile {
    std::string name;
    std::vector<double> activation;  // P(AU = 1 | phone), per phone state
};

struct GeneratorRecipe {
    PhoneAlphabet alphabet;
    std::vector<AuProfile> aus;
    std::vector<std::pair<int, int>> chains;  // (src AU index, dst AU index), +/- boost on dst
    double chain_boost = 0.08;
    double phone_stay = 0.82;
    double phone_to_sil = 0.06;
    double sil_stay = 0.70;
    double anticipation = 0.8;  // weight of prev-slice AUs on the next phone
    double au_persistence = 0.40;
};

// P(AU = 1 | phone, chain parents) shared by the initial and transition AU rows.
double effective_activation(const GeneratorRecipe& recipe, std::size_t au, int phone,
                            std::span<const int> chain_values) {
    double p = recipe.aus[au].activation[static_cast<std::size_t>(phone)];
    std::size_t chain_slot = 0;
    for (const auto& [src, dst] : recipe.chains) {
        if (static_cast<std::size_t>(dst) == au) {
            p += chain_values[chain_slot] == 1 ? recipe.chain_boost : -recipe.chain_boost;
            ++chain_slot;
        }
    }
    return clamp_prob(p);
}

std::vector<int> chain_parents_of(const GeneratorRecipe& recipe, std::size_t au) {
    std::vector<int> parents;
    for (const auto& [src, dst] : recipe.chains) {
        if (static_cast<std::size_t>(dst) == au) parents.push_back(src);
    }
    return parents;
}

NetworkSpec build_generator(const GeneratorRecipe& recipe) {
    const int phone_card = recipe.alphabet.size();
    NetworkSpec spec;
    spec.variables.push_back({"Phone", phone_card, VarRole::HiddenPhone});
    for (const auto& au : recipe.aus) spec.variables.push_back({au.name, 2, VarRole::HiddenAu});
    spec.variables.push_back({"O_Phone", phone_card, VarRole::MeasurementPhone});
    for (const auto& au : recipe.aus) spec.variables.push_back({"O_" + au.name, 2, VarRole::MeasurementAu});

    for (const auto& au : recipe.aus) spec.intra_edges.emplace_back("Phone", au.name);
    for (const auto& [src, dst] : recipe.chains) {
        spec.intra_edges.emplace_back(recipe.aus[static_cast<std::size_t>(src)].name,
                                      recipe.aus[static_cast<std::size_t>(dst)].name);
    }
    spec.intra_edges.emplace_back("Phone", "O_Phone");
    for (const auto& au : recipe.aus) spec.intra_edges.emplace_back(au.name, "O_" + au.name);

    spec.inter_edges.emplace_back("Phone", "Phone");
    for (const auto& au : recipe.aus) spec.inter_edges.emplace_back(au.name, au.name);
    for (const auto& au : recipe.aus) spec.inter_edges.emplace_back(au.name, "Phone");

    // --- initial slice ---
    const auto p_count = static_cast<std::size_t>(phone_card);
    {
        Cpt phone;
        phone.child = "Phone";
        phone.table.assign(p_count, 0.5 / static_cast<double>(phone_card - 1));
        phone.table[0] = 0.5;  // silence-heavy prior
        spec.cpts.push_back(std::move(phone));
    }
    for (std::size_t a = 0; a < recipe.aus.size(); ++a) {
        Cpt cpt;
        cpt.child = recipe.aus[a].name;
        cpt.parents.push_back({"Phone", 0});
        const auto chain = chain_parents_of(recipe, a);
        for (int src : chain) cpt.parents.push_back({recipe.aus[static_cast<std::size_t>(src)].name, 0});
        // Declaration order == (Phone, chain parents): chains point from
        // earlier AUs to later ones, matching canonical parent order.
        const std::size_t configs = p_count << chain.size();
        cpt.table.resize(configs * 2);
        std::vector<int> chain_values(chain.size());
        for (std::size_t j = 0; j < configs; ++j) {
            std::size_t rest = j;
            for (std::size_t c = chain.size(); c-- > 0;) {
                chain_values[c] = static_cast<int>(rest % 2);
                rest /= 2;
            }
            const int phone = static_cast<int>(rest);
            const double active = effective_activation(recipe, a, phone, chain_values);
            cpt.table[j * 2] = 1.0 - active;
            cpt.table[j * 2 + 1] = active;
        }
        spec.cpts.push_back(std::move(cpt));
    }
    const auto identity_cpt = [](const std::string& child, const std::string& parent, int card) {
        Cpt cpt;
        cpt.child = child;
        cpt.parents.push_back({parent, 0});
        cpt.table.assign(static_cast<std::size_t>(card) * static_cast<std::size_t>(card), 0.0);
        for (int s = 0; s < card; ++s) {
            cpt.table[static_cast<std::size_t>(s) * static_cast<std::size_t>(card) +
                      static_cast<std::size_t>(s)] = 1.0;
        }
        return cpt;
    };
    spec.cpts.push_back(identity_cpt("O_Phone", "Phone", phone_card));
    for (const auto& au : recipe.aus) spec.cpts.push_back(identity_cpt("O_" + au.name, au.name, 2));

    // --- transition slice ---
    {
        // Phone_t | Phone_{t-1}, AU*_{t-1}: a sticky base chain reweighted by
        // how compatible each next phone is with the previous facial pose
        // (mouth shape leads voice).
        Cpt cpt;
        cpt.child = "Phone";
        cpt.parents.push_back({"Phone", 1});
        for (const auto& au : recipe.aus) cpt.parents.push_back({au.name, 1});
        const std::size_t configs = p_count << recipe.aus.size();
        cpt.table.resize(configs * p_count);
        std::vector<int> au_values(recipe.aus.size());
        std::vector<double> row(p_count);
        for (std::size_t j = 0; j < configs; ++j) {
            std::size_t rest = j;
            for (std::size_t a = recipe.aus.size(); a-- > 0;) {
                au_values[a] = static_cast<int>(rest % 2);
                rest /= 2;
            }
            const int prev = static_cast<int>(rest);
            for (std::size_t p = 0; p < p_count; ++p) {
                double base;
                if (static_cast<int>(p) == prev) {
                    base = prev == 0 ? recipe.sil_stay : recipe.phone_stay;
                } else if (prev == 0) {
                    base = (1.0 - recipe.sil_stay) / static_cast<double>(phone_card - 1);
                } else if (p == 0) {
                    base = recipe.phone_to_sil;
                } else {
                    base = (1.0 - recipe.phone_stay - recipe.phone_to_sil) /
                           static_cast<double>(phone_card - 2);
                }
                double compat = 1.0;
                for (std::size_t a = 0; a < recipe.aus.size(); ++a) {
                    const double act = recipe.aus[a].activation[p];
                    compat *= au_values[a] == 1 ? act : 1.0 - act;
                }
                row[p] = base * std::pow(compat, recipe.anticipation);
            }
            double total = 0.0;
            for (double v : row) total += v;
            for (std::size_t p = 0; p < p_count; ++p) cpt.table[j * p_count + p] = row[p] / total;
        }
        spec.transition_cpts.push_back(std::move(cpt));
    }
    for (std::size_t a = 0; a < recipe.aus.size(); ++a) {
        Cpt cpt;
        cpt.child = recipe.aus[a].name;
        cpt.parents.push_back({"Phone", 0});
        const auto chain = chain_parents_of(recipe, a);
        for (int src : chain) cpt.parents.push_back({recipe.aus[static_cast<std::size_t>(src)].name, 0});
        cpt.parents.push_back({recipe.aus[a].name, 1});
        const std::size_t configs = (p_count << chain.size()) * 2;
        cpt.table.resize(configs * 2);
        std::vector<int> chain_values(chain.size());
        for (std::size_t j = 0; j < configs; ++j) {
            std::size_t rest = j;
            const int prev = static_cast<int>(rest % 2);
            rest /= 2;
            for (std::size_t c = chain.size(); c-- > 0;) {
                chain_values[c] = static_cast<int>(rest % 2);
                rest /= 2;
            }
            const int phone = static_cast<int>(rest);
            const double target = effective_activation(recipe, a, phone, chain_values);
            const double active =
                clamp_prob((1.0 - recipe.au_persistence) * target + recipe.au_persistence * prev);
            cpt.table[j * 2] = 1.0 - active;
            cpt.table[j * 2 + 1] = active;
        }
        spec.transition_cpts.push_back(std::move(cpt));
    }
    spec.transition_cpts.push_back(identity_cpt("O_Phone", "Phone", phone_card));
    for (const auto& au : recipe.aus) {
        spec.transition_cpts.push_back(identity_cpt("O_" + au.name, au.name, 2));
    }
    return spec;
}

// Activation profile helper: `strong` phones activate with prob hi, the
// rest with prob lo (SIL always lo unless listed).
std::vector<double> profile(const PhoneAlphabet& alphabet, const std::set<std::string>& strong,
                            double hi, double lo) {
    std::vector<double> out(static_cast<std::size_t>(alphabet.size()), lo);
    for (const auto& label : strong) {
        out[static_cast<std::size_t>(alphabet.index_of(label))] = hi;
    }
    return out;
}

GeneratorRecipe demo_small_recipe() {
    GeneratorRecipe recipe;
    recipe.alphabet = PhoneAlphabet({"SIL", "AE", "B", "IY", "M", "UW"});
    recipe.aus.push_back({"AU18", profile(recipe.alphabet, {"UW"}, 0.95, 0.05)});
    recipe.aus.push_back({"AU24", profile(recipe.alphabet, {"B", "M"}, 0.94, 0.05)});
    recipe.aus.push_back({"AU25", {0.08, 0.95, 0.15, 0.92, 0.05, 0.85}});
    recipe.aus.push_back({"AU26", {0.05, 0.90, 0.60, 0.50, 0.55, 0.70}});
    recipe.chains = {{2, 3}};  // AU25 -> AU26
    return recipe;
}

GeneratorRecipe speech_full_recipe() {
    GeneratorRecipe recipe;
    recipe.alphabet = PhoneAlphabet::speech_set();
    const auto& a = recipe.alphabet;
    recipe.aus.push_back({"AU18", profile(a, {"UW", "UH", "OY", "W", "AO", "ER"}, 0.90, 0.05)});
    recipe.aus.push_back({"AU20", profile(a, {"AE", "IY", "EY", "S", "Z"}, 0.35, 0.05)});
    recipe.aus.push_back({"AU22", profile(a, {"SH", "ZH", "CH", "JH", "R", "OY", "UW"}, 0.85, 0.05)});
    recipe.aus.push_back({"AU24", profile(a, {"B", "M", "P"}, 0.92, 0.04)});
    std::vector<double> au25 =
        profile(a, {"AE", "AH", "AO", "AW", "CH", "D", "ER", "EY", "G",  "HH", "IY", "JH", "K",
                    "N",  "OY", "R",  "S",  "SH", "T",  "UH", "UW", "W", "Y",  "Z",  "ZH"},
                0.92, 0.15);
    au25[0] = 0.10;  // SIL
    recipe.aus.push_back({"AU25", std::move(au25)});
    std::vector<double> au26 = profile(
        a, {"AE", "AH", "AO", "AW", "ER", "EY", "IY", "OY", "UH", "UW"}, 0.85, 0.45);
    au26[0] = 0.08;
    recipe.aus.push_back({"AU26", std::move(au26)});
    recipe.aus.push_back({"AU27", profile(a, {"AW", "AO", "AE"}, 0.60, 0.03)});
    recipe.chains = {{4, 5}, {5, 6}};  // AU25 -> AU26 -> AU27
    return recipe;
}

} // namespace

NetworkSpec builtin_generator(std::string_view name) {
    if (name == "demo-small") return build_generator(demo_small_recipe());
    if (name == "speech-full") return build_generator(speech_full_recipe());
    throw std::invalid_argument("unknown builtin generator: " + std::string(name));
}

PhoneAlphabet builtin_alphabet(std::string_view name) {
    if (name == "demo-small") return demo_small_recipe().alphabet;
    if (name == "speech-full") return PhoneAlphabet::speech_set();
    throw std::invalid_argument("unknown builtin generator: " + std::string(name));
}

namespace {

std::vector<std::string> hidden_au_names(const NetworkSpec& spec) {
    std::vector<std::string> out;
    for (const auto& v : spec.variables) {
        if (v.role == VarRole::HiddenAu) out.push_back(v.name);
    }
    return out;
}

int phone_cardinality(const NetworkSpec& spec) {
    for (const auto& v : spec.variables) {
        if (v.role == VarRole::HiddenPhone) return v.cardinality;
    }
    throw std::invalid_argument("generator has no hidden phone variable");
}

void parse_au_rates(const json& node, const std::vector<std::string>& au_names,
                    std::vector<double>& out, const std::string& field) {
    if (node.is_number()) {
        out.assign(au_names.size(), node.get<double>());
        return;
    }
    if (node.is_array()) {
        if (node.size() != au_names.size()) {
            throw std::runtime_error(field + " array must match the generator AU count");
        }
        out = node.get<std::vector<double>>();
        return;
    }
    if (node.is_object()) {
        for (const auto& [name, value] : node.items()) {
            const auto it = std::find(au_names.begin(), au_names.end(), name);
            if (it == au_names.end()) throw std::runtime_error(field + ": unknown AU " + name);
            out[static_cast<std::size_t>(it - au_names.begin())] = value.get<double>();
        }
        return;
    }
    throw std::runtime_error(field + " must be a number, array, or AU->rate object");
}

NoiseModel parse_noise(const json& node, const std::vector<std::string>& au_names) {
    if (node.is_string()) return NoiseModel::preset(node.get<std::string>(), au_names.size());
    if (!node.is_object()) throw std::runtime_error("noise must be a preset name or an object");
    NoiseModel noise = node.contains("preset")
                           ? NoiseModel::preset(node.at("preset").get<std::string>(), au_names.size())
                           : NoiseModel::none(au_names.size());
    if (node.contains("au_fp")) parse_au_rates(node.at("au_fp"), au_names, noise.au_fp, "au_fp");
    if (node.contains("au_fn")) parse_au_rates(node.at("au_fn"), au_names, noise.au_fn, "au_fn");
    if (node.contains("phone_epsilon")) noise.phone_epsilon = node.at("phone_epsilon").get<double>();
    if (node.contains("phone_confusion")) {
        std::vector<double> table;
        for (const auto& row : node.at("phone_confusion")) {
            for (const auto& value : row) table.push_back(value.get<double>());
        }
        noise.phone_confusion = std::move(table);
    }
    if (node.contains("au_missing_rate")) noise.au_missing_rate = node.at("au_missing_rate").get<double>();
    if (node.contains("phone_missing_rate")) {
        noise.phone_missing_rate = node.at("phone_missing_rate").get<double>();
    }
    return noise;
}

} // namespace

SimConfig parse_sim_config(const std::string& text, const std::string& origin,
                           const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(origin + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object() || doc.value("format_version", "") != "1") {
        throw std::runtime_error(origin + ": missing or unsupported format_version (expected \"1\")");
    }

    SimConfig config;
    bool builtin = false;
    std::string builtin_name;
    if (doc.contains("generator") && doc.at("generator").is_string()) {
        builtin_name = doc.at("generator").get<std::string>();
        config.generator = builtin_generator(builtin_name);
        builtin = true;
    } else if (doc.contains("generator") && doc.at("generator").is_object()) {
        config.generator = parse_model_json(doc.at("generator").dump(), origin + "#generator");
    } else if (doc.contains("generator_path")) {
        std::filesystem::path path = doc.at("generator_path").get<std::string>();
        if (path.is_relative()) path = base_dir / path;
        config.generator = load_model(path);
    } else {
        throw std::runtime_error(origin + ": config needs generator, generator_path, or a builtin name");
    }

    const int phone_card = phone_cardinality(config.generator);
    if (doc.contains("phone_alphabet")) {
        config.alphabet = PhoneAlphabet(doc.at("phone_alphabet").get<std::vector<std::string>>());
    } else if (builtin) {
        config.alphabet = builtin_alphabet(builtin_name);
    } else {
        std::vector<std::string> labels{"SIL"};
        for (int i = 1; i < phone_card; ++i) labels.push_back("P" + std::to_string(i));
        config.alphabet = PhoneAlphabet(std::move(labels));
    }
    if (config.alphabet.size() != phone_card) {
        throw std::runtime_error(origin + ": phone alphabet size does not match the generator");
    }

    config.subjects = doc.value("subjects", 1);
    config.sequences_per_subject = doc.value("sequences_per_subject", 1);
    if (doc.contains("frames_per_sequence")) {
        config.frames_min = config.frames_max = doc.at("frames_per_sequence").get<int>();
    }
    if (doc.contains("frames_min")) config.frames_min = doc.at("frames_min").get<int>();
    if (doc.contains("frames_max")) config.frames_max = doc.at("frames_max").get<int>();
    config.seed = doc.value("seed", 0ULL);
    config.subject_jitter = doc.value("subject_jitter", 0.0);
    config.fps = doc.value("fps", 60.0);
    const auto au_names = hidden_au_names(config.generator);
    config.noise = doc.contains("noise") ? parse_noise(doc.at("noise"), au_names)
                                         : NoiseModel::none(au_names.size());
    return config;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    return parse_sim_config(read_file(path), path.string(),
                            path.has_parent_path() ? path.parent_path() : ".");
}

namespace {

NetworkSpec jitter_spec(const NetworkSpec& spec, double concentration, Rng& rng) {
    NetworkSpec out = spec;
    const auto jitter_list = [&](std::vector<Cpt>& cpts) {
        for (auto& cpt : cpts) {
            const FamilyShape shape = out.family_shape(cpt);
            const auto k = static_cast<std::size_t>(shape.child_card);
            std::vector<double> alpha(k);
            for (std::size_t j = 0; j < shape.config_count(); ++j) {
                double* row = cpt.table.data() + j * k;
                for (std::size_t s = 0; s < k; ++s) alpha[s] = concentration * row[s];
                rng.dirichlet(alpha, std::span<double>(row, k));
            }
        }
    };
    jitter_list(out.cpts);
    jitter_list(out.transition_cpts);
    return out;
}

struct SamplerPlan {
    std::vector<int> topo_index;  // spec variable indices in topological order
    std::vector<std::string> au_names;
    int phone_index = -1;  // index into spec.variables
};

SamplerPlan make_plan(const NetworkSpec& spec) {
    SamplerPlan plan;
    for (const auto& name : topological_order(spec)) {
        plan.topo_index.push_back(spec.var_index(name));
    }
    plan.au_names = hidden_au_names(spec);
    for (std::size_t i = 0; i < spec.variables.size(); ++i) {
        if (spec.variables[i].role == VarRole::HiddenPhone) plan.phone_index = static_cast<int>(i);
    }
    return plan;
}

FrameSequence sample_sequence(const NetworkSpec& spec, const SamplerPlan& plan,
                              const SimConfig& config, Rng& rng) {
    FrameSequence sequence;
    int length = config.frames_min;
    if (config.frames_max > config.frames_min) {
        length += rng.uniform_int(config.frames_max - config.frames_min + 1);
    }

    const std::size_t var_count = spec.variables.size();
    std::vector<int> current(var_count, 0);
    std::vector<int> previous(var_count, 0);
    std::vector<int> parent_values;

    for (int t = 0; t < length; ++t) {
        for (const int index : plan.topo_index) {
            const Variable& var = spec.variables[static_cast<std::size_t>(index)];
            const Cpt* cpt = t == 0 ? spec.initial_cpt(var.name) : spec.transition_cpt(var.name);
            const FamilyShape shape = spec.family_shape(*cpt);
            parent_values.clear();
            for (const auto& parent : cpt->parents) {
                const auto slot = static_cast<std::size_t>(spec.var_index(parent.name));
                parent_values.push_back(parent.lag == 0 ? current[slot] : previous[slot]);
            }
            const std::size_t row = shape.config_index(parent_values);
            const auto k = static_cast<std::size_t>(shape.child_card);
            current[static_cast<std::size_t>(index)] =
                rng.categorical(std::span<const double>(cpt->table.data() + row * k, k));
        }

        Frame frame;
        frame.phone_truth = current[static_cast<std::size_t>(plan.phone_index)];
        for (const auto& au : plan.au_names) {
            frame.au_truth.push_back(
                static_cast<std::uint8_t>(current[static_cast<std::size_t>(spec.var_index(au))]));
        }

        // Measurement channel: sampled value, then the noise model.
        for (std::size_t a = 0; a < plan.au_names.size(); ++a) {
            const auto meas_name = spec.measurement_of(plan.au_names[a]);
            int value = current[static_cast<std::size_t>(spec.var_index(*meas_name))];
            if (value == 0) {
                if (rng.bernoulli(config.noise.au_fp[a])) value = 1;
            } else {
                if (rng.bernoulli(config.noise.au_fn[a])) value = 0;
            }
            if (rng.bernoulli(config.noise.au_missing_rate)) {
                frame.au_meas.push_back(Frame::kMissing);
            } else {
                frame.au_meas.push_back(static_cast<std::int8_t>(value));
            }
        }
        {
            const auto meas_name = spec.measurement_of(spec.variables[
                static_cast<std::size_t>(plan.phone_index)].name);
            int value = current[static_cast<std::size_t>(spec.var_index(*meas_name))];
            const int phone_card = config.alphabet.size();
            if (config.noise.phone_confusion) {
                const auto p = static_cast<std::size_t>(phone_card);
                value = rng.categorical(std::span<const double>(
                    config.noise.phone_confusion->data() + static_cast<std::size_t>(value) * p, p));
            } else if (rng.bernoulli(config.noise.phone_epsilon)) {
                const int other = rng.uniform_int(phone_card - 1);
                value = other >= value ? other + 1 : other;
            }
            if (rng.bernoulli(config.noise.phone_missing_rate)) {
                frame.phone_meas = Frame::kMissing;
            } else {
                frame.phone_meas = value;
            }
        }
        sequence.frames.push_back(std::move(frame));
        previous = current;
    }
    return sequence;
}

std::string zero_pad(int value, int width) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%0*d", width, value);
    return buf;
}

} // namespace

Corpus sample_corpus(const SimConfig& config, int jobs) {
    if (config.subjects < 1 || config.sequences_per_subject < 1 || config.frames_min < 1 ||
        config.frames_max < config.frames_min) {
        throw std::invalid_argument("simulation counts must be >= 1 and frames_min <= frames_max");
    }
    if (const auto violations = validate(config.generator); !violations.empty()) {
        throw std::invalid_argument("invalid generator spec: " + to_string(violations.front()));
    }
    if (!config.generator.is_dynamic()) {
        throw std::invalid_argument("generator must be a dynamic spec with transition CPTs");
    }
    if (config.alphabet.size() != phone_cardinality(config.generator)) {
        throw std::invalid_argument("phone alphabet size does not match the generator");
    }
    const auto au_names = hidden_au_names(config.generator);
    config.noise.check(au_names.size(), config.alphabet.size());

    Corpus corpus;
    corpus.fps = config.fps;
    corpus.au_names = au_names;
    corpus.alphabet = config.alphabet;
    corpus.rng_id = std::string(Rng::algorithm_id);

    std::vector<NetworkSpec> subject_specs;
    subject_specs.reserve(static_cast<std::size_t>(config.subjects));
    for (int s = 0; s < config.subjects; ++s) {
        if (config.subject_jitter > 0.0) {
            Rng rng(derive_seed(config.seed, {0xA11CEULL, static_cast<std::uint64_t>(s)}));
            subject_specs.push_back(jitter_spec(config.generator, config.subject_jitter, rng));
        } else {
            subject_specs.push_back(config.generator);
        }
    }
    const SamplerPlan plan = make_plan(config.generator);

    const int total = config.subjects * config.sequences_per_subject;
    std::vector<FrameSequence> sequences(static_cast<std::size_t>(total));
    parallel_for(total, jobs, [&](int g) {
        const int subject = g / config.sequences_per_subject;
        const int index = g % config.sequences_per_subject;
        Rng sequence_rng(derive_seed(config.seed, {0x5E9ULL, static_cast<std::uint64_t>(subject),
                                                   static_cast<std::uint64_t>(index)}));
        FrameSequence sequence = sample_sequence(subject_specs[static_cast<std::size_t>(subject)],
                                                 plan, config, sequence_rng);
        sequence.subject = "S" + zero_pad(subject, 2);
        sequence.word = "w" + zero_pad(index, 3);
        sequences[static_cast<std::size_t>(g)] = std::move(sequence);
    });
    corpus.sequences = std::move(sequences);
    return corpus;
}

CorpusStats empirical_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.au_names = corpus.au_names;
    stats.au_active.assign(corpus.au_names.size(), 0);
    stats.phone_labels = corpus.alphabet.labels();
    stats.phone_occupancy.assign(static_cast<std::size_t>(corpus.alphabet.size()), 0);
    stats.sequence_count = static_cast<long long>(corpus.sequences.size());
    for (const auto& sequence : corpus.sequences) {
        auto& subject_au = stats.per_subject_au[sequence.subject];
        if (subject_au.empty()) subject_au.assign(corpus.au_names.size(), 0);
        for (const auto& frame : sequence.frames) {
            ++stats.total_frames;
            ++stats.per_subject_frames[sequence.subject];
            ++stats.phone_occupancy[static_cast<std::size_t>(frame.phone_truth)];
            for (std::size_t a = 0; a < frame.au_truth.size(); ++a) {
                if (frame.au_truth[a] == 1) {
                    ++stats.au_active[a];
                    ++subject_au[a];
                }
            }
        }
    }
    return stats;
}

std::string stats_to_csv(const CorpusStats& stats) {
    std::string out;
    for (const auto& name : stats.au_names) {
        out += name;
        out += ',';
    }
    out += "Total Frames\n";
    for (const auto count : stats.au_active) {
        out += std::to_string(count);
        out += ',';
    }
    out += std::to_string(stats.total_frames);
    out += '\n';
    return out;
}

std::string stats_to_json(const CorpusStats& stats) {
    ordered_json doc;
    doc["total_frames"] = stats.total_frames;
    doc["sequences"] = stats.sequence_count;
    ordered_json au;
    for (std::size_t a = 0; a < stats.au_names.size(); ++a) au[stats.au_names[a]] = stats.au_active[a];
    doc["au_active_frames"] = std::move(au);
    ordered_json phones;
    for (std::size_t p = 0; p < stats.phone_labels.size(); ++p) {
        phones[stats.phone_labels[p]] = stats.phone_occupancy[p];
    }
    doc["phone_occupancy"] = std::move(phones);
    ordered_json subjects;
    for (const auto& [subject, counts] : stats.per_subject_au) {
        ordered_json entry;
        entry["frames"] = stats.per_subject_frames.at(subject);
        ordered_json per_au;
        for (std::size_t a = 0; a < stats.au_names.size(); ++a) per_au[stats.au_names[a]] = counts[a];
        entry["au_active_frames"] = std::move(per_au);
        subjects[subject] = std::move(entry);
    }
    doc["subjects"] = std::move(subjects);
    return doc.dump(2) + "\n";
}

} // namespace aufuse
