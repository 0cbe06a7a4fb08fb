#include "aufuse/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace aufuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

} // namespace

DbnEngine::DbnEngine(const NetworkSpec& spec, const EngineOptions& options)
    : spec_(spec), options_(options) {
    const auto violations = validate(spec_);
    if (!violations.empty()) {
        throw std::invalid_argument("invalid network spec: " + to_string(violations.front()));
    }
    build_state_space();
    build_initial_distribution();
    if (spec_.is_dynamic()) build_transition_families();

    for (const auto& v : spec_.variables) {
        if (!is_measurement(v.role)) continue;
        const auto hidden = spec_.hidden_parent_of(v.name);
        MeasNode node;
        node.hidden_slot = hidden_slot(*hidden);
        node.card = v.cardinality;
        node.initial = spec_.initial_cpt(v.name);
        node.transition = spec_.is_dynamic() ? spec_.transition_cpt(v.name) : nullptr;
        measurements_.emplace(v.name, node);
    }
}

void DbnEngine::build_state_space() {
    for (std::size_t i = 0; i < spec_.variables.size(); ++i) {
        if (!is_hidden(spec_.variables[i].role)) continue;
        hidden_index_.push_back(static_cast<int>(i));
        hidden_names_.push_back(spec_.variables[i].name);
        cards_.push_back(spec_.variables[i].cardinality);
    }
    if (hidden_names_.empty()) throw std::invalid_argument("spec has no hidden variables");
    strides_.assign(cards_.size(), 1);
    for (std::size_t i = cards_.size(); i-- > 0;) {
        if (i + 1 < cards_.size()) {
            strides_[i] = strides_[i + 1] * static_cast<std::size_t>(cards_[i + 1]);
        }
    }
    state_count_ = strides_[0] * static_cast<std::size_t>(cards_[0]);
}

int DbnEngine::hidden_slot(std::string_view name) const {
    for (std::size_t i = 0; i < hidden_names_.size(); ++i) {
        if (hidden_names_[i] == name) return static_cast<int>(i);
    }
    return -1;
}

void DbnEngine::build_initial_distribution() {
    initial_.assign(state_count_, 1.0);
    for (std::size_t h = 0; h < hidden_names_.size(); ++h) {
        const Cpt* cpt = spec_.initial_cpt(hidden_names_[h]);
        const FamilyShape shape = spec_.family_shape(*cpt);
        std::vector<int> parent_slots;
        for (const auto& parent : cpt->parents) parent_slots.push_back(hidden_slot(parent.name));
        std::vector<int> parent_values(parent_slots.size());
        const auto k = static_cast<std::size_t>(shape.child_card);
        for (std::size_t s = 0; s < state_count_; ++s) {
            for (std::size_t p = 0; p < parent_slots.size(); ++p) {
                parent_values[p] = digit(s, parent_slots[p]);
            }
            const std::size_t row = shape.config_index(parent_values);
            initial_[s] *= cpt->table[row * k + static_cast<std::size_t>(digit(s, static_cast<int>(h)))];
        }
    }
}

void DbnEngine::build_transition_families() {
    for (std::size_t h = 0; h < hidden_names_.size(); ++h) {
        const Cpt* cpt = spec_.transition_cpt(hidden_names_[h]);
        const FamilyShape shape = spec_.family_shape(*cpt);
        const auto k = static_cast<std::size_t>(shape.child_card);

        // config = sum_i value_i * stride_i splits into lag-0 terms (read
        // from the current state) and lag-1 terms (read from the previous
        // state); the child digit folds into the lag-0 part.
        std::vector<std::size_t> parent_strides(cpt->parents.size(), 1);
        for (std::size_t i = cpt->parents.size(); i-- > 0;) {
            if (i + 1 < cpt->parents.size()) {
                parent_strides[i] = parent_strides[i + 1] *
                                    static_cast<std::size_t>(shape.parent_cards[i + 1]);
            }
        }
        TransitionFamily family;
        family.cpt = cpt;
        family.cur_part.assign(state_count_, 0);
        family.prev_part.assign(state_count_, 0);
        for (std::size_t s = 0; s < state_count_; ++s) {
            std::size_t cur = 0;
            std::size_t prev = 0;
            for (std::size_t p = 0; p < cpt->parents.size(); ++p) {
                const int slot = hidden_slot(cpt->parents[p].name);
                const auto value = static_cast<std::size_t>(digit(s, slot));
                if (cpt->parents[p].lag == 0) {
                    cur += value * parent_strides[p];
                } else {
                    prev += value * parent_strides[p];
                }
            }
            family.cur_part[s] = cur * k + static_cast<std::size_t>(digit(s, static_cast<int>(h)));
            family.prev_part[s] = prev * k;
        }
        families_.push_back(std::move(family));
    }

    if (state_count_ <= options_.transition_cache_cap) {
        transition_cache_.assign(state_count_ * state_count_, 0.0);
        for (std::size_t prev = 0; prev < state_count_; ++prev) {
            double* row = transition_cache_.data() + prev * state_count_;
            for (std::size_t cur = 0; cur < state_count_; ++cur) {
                double p = 1.0;
                for (const auto& family : families_) {
                    p *= family.cpt->table[family.cur_part[cur] + family.prev_part[prev]];
                }
                row[cur] = p;
            }
        }
    }
}

double DbnEngine::transition_prob(std::size_t prev, std::size_t cur) const {
    if (!transition_cache_.empty()) return transition_cache_[prev * state_count_ + cur];
    double p = 1.0;
    for (const auto& family : families_) {
        p *= family.cpt->table[family.cur_part[cur] + family.prev_part[prev]];
    }
    return p;
}

std::vector<double> DbnEngine::evidence_factor(const EvidenceFrame& frame, bool first_slice) const {
    std::vector<double> factor(state_count_, 1.0);
    for (const auto& [name, value] : frame.observations) {
        const auto it = measurements_.find(name);
        if (it == measurements_.end()) {
            if (spec_.find_variable(name)) {
                throw std::invalid_argument("evidence must reference measurement variables: " + name);
            }
            throw std::invalid_argument("evidence references unknown variable: " + name);
        }
        const MeasNode& node = it->second;
        if (value < 0 || value >= node.card) {
            throw std::out_of_range("evidence state out of range for " + name);
        }
        const Cpt* cpt = first_slice || !node.transition ? node.initial : node.transition;
        const auto k = static_cast<std::size_t>(node.card);
        for (std::size_t s = 0; s < state_count_; ++s) {
            const auto parent_value = static_cast<std::size_t>(digit(s, node.hidden_slot));
            factor[s] *= cpt->table[parent_value * k + static_cast<std::size_t>(value)];
        }
    }
    return factor;
}

void DbnEngine::propagate(const std::vector<double>& alpha, std::vector<double>& out) const {
    out.assign(state_count_, 0.0);
    if (!spec_.is_dynamic()) {
        // Static spec: frames are independent; the "transition" is just the
        // initial distribution again.
        out = initial_;
        return;
    }
    if (!transition_cache_.empty()) {
        for (std::size_t prev = 0; prev < state_count_; ++prev) {
            const double weight = alpha[prev];
            if (weight == 0.0) continue;
            const double* row = transition_cache_.data() + prev * state_count_;
            for (std::size_t cur = 0; cur < state_count_; ++cur) out[cur] += weight * row[cur];
        }
        return;
    }
    for (std::size_t prev = 0; prev < state_count_; ++prev) {
        const double weight = alpha[prev];
        if (weight == 0.0) continue;
        for (std::size_t cur = 0; cur < state_count_; ++cur) {
            out[cur] += weight * transition_prob(prev, cur);
        }
    }
}

BeliefFrame DbnEngine::make_frame(const std::vector<double>& dist, double log_evidence) const {
    BeliefFrame frame;
    frame.joint_log_evidence = log_evidence;
    for (std::size_t h = 0; h < hidden_names_.size(); ++h) {
        std::vector<double> marginal(static_cast<std::size_t>(cards_[h]), 0.0);
        for (std::size_t s = 0; s < state_count_; ++s) {
            marginal[static_cast<std::size_t>(digit(s, static_cast<int>(h)))] += dist[s];
        }
        frame.marginals.emplace(hidden_names_[h], std::move(marginal));
    }
    if (options_.keep_joint) frame.joint = dist;
    return frame;
}

namespace {

// Normalizes in place; returns the pre-normalization mass. A zero mass
// (impossible evidence) leaves a uniform distribution behind.
double normalize(std::vector<double>& dist) {
    const double mass = std::accumulate(dist.begin(), dist.end(), 0.0);
    if (mass > 0.0) {
        for (auto& v : dist) v /= mass;
    } else {
        std::fill(dist.begin(), dist.end(), 1.0 / static_cast<double>(dist.size()));
    }
    return mass;
}

} // namespace

BeliefSequence DbnEngine::filter(const std::vector<EvidenceFrame>& evidence) const {
    if (evidence.empty()) throw std::invalid_argument("evidence must be nonempty");
    BeliefSequence out;
    out.source = BeliefSource::Filtered;
    out.hidden_names = hidden_names_;
    out.hidden_cards = cards_;
    out.keeps_joint = options_.keep_joint;
    out.frames.reserve(evidence.size());

    std::vector<double> alpha(state_count_);
    std::vector<double> scratch;
    double log_z = 0.0;
    for (std::size_t t = 0; t < evidence.size(); ++t) {
        if (t == 0) {
            alpha = initial_;
        } else {
            propagate(alpha, scratch);
            alpha.swap(scratch);
        }
        const auto factor = evidence_factor(evidence[t], t == 0);
        for (std::size_t s = 0; s < state_count_; ++s) alpha[s] *= factor[s];
        const double mass = normalize(alpha);
        log_z = mass > 0.0 ? log_z + std::log(mass) : kNegInf;
        out.frames.push_back(make_frame(alpha, log_z));
    }
    return out;
}

BeliefSequence DbnEngine::smooth(const std::vector<EvidenceFrame>& evidence) const {
    if (evidence.empty()) throw std::invalid_argument("evidence must be nonempty");
    const std::size_t horizon = evidence.size();

    // Forward pass, keeping the scaled alphas and evidence factors.
    std::vector<std::vector<double>> alphas(horizon);
    std::vector<std::vector<double>> factors(horizon);
    std::vector<double> log_zs(horizon);
    std::vector<double> masses(horizon);
    std::vector<double> alpha(state_count_);
    std::vector<double> scratch;
    double log_z = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        if (t == 0) {
            alpha = initial_;
        } else {
            propagate(alpha, scratch);
            alpha.swap(scratch);
        }
        factors[t] = evidence_factor(evidence[t], t == 0);
        for (std::size_t s = 0; s < state_count_; ++s) alpha[s] *= factors[t][s];
        masses[t] = normalize(alpha);
        log_z = masses[t] > 0.0 ? log_z + std::log(masses[t]) : kNegInf;
        log_zs[t] = log_z;
        alphas[t] = alpha;
    }

    BeliefSequence out;
    out.source = BeliefSource::Smoothed;
    out.hidden_names = hidden_names_;
    out.hidden_cards = cards_;
    out.keeps_joint = options_.keep_joint;
    out.frames.resize(horizon);

    std::vector<double> beta(state_count_, 1.0);
    std::vector<double> next_beta(state_count_);
    for (std::size_t t = horizon; t-- > 0;) {
        std::vector<double> smoothed(state_count_);
        for (std::size_t s = 0; s < state_count_; ++s) smoothed[s] = alphas[t][s] * beta[s];
        normalize(smoothed);
        out.frames[t] = make_frame(smoothed, log_zs[t]);
        if (t == 0) break;
        if (spec_.is_dynamic()) {
            std::vector<double> weighted(state_count_);
            for (std::size_t s = 0; s < state_count_; ++s) weighted[s] = factors[t][s] * beta[s];
            next_beta.assign(state_count_, 0.0);
            if (!transition_cache_.empty()) {
                for (std::size_t prev = 0; prev < state_count_; ++prev) {
                    const double* row = transition_cache_.data() + prev * state_count_;
                    double sum = 0.0;
                    for (std::size_t cur = 0; cur < state_count_; ++cur) sum += row[cur] * weighted[cur];
                    next_beta[prev] = sum;
                }
            } else {
                for (std::size_t prev = 0; prev < state_count_; ++prev) {
                    double sum = 0.0;
                    for (std::size_t cur = 0; cur < state_count_; ++cur) {
                        sum += transition_prob(prev, cur) * weighted[cur];
                    }
                    next_beta[prev] = sum;
                }
            }
            if (masses[t] > 0.0) {
                for (auto& v : next_beta) v /= masses[t];
            }
            beta.swap(next_beta);
        } else {
            // Static spec: frames are independent; beta stays flat.
            std::fill(beta.begin(), beta.end(), 1.0);
        }
    }
    return out;
}

double DbnEngine::log_evidence(const std::vector<EvidenceFrame>& evidence) const {
    const auto beliefs = filter(evidence);
    return beliefs.frames.back().joint_log_evidence;
}

BeliefSequence filter(const NetworkSpec& spec, const std::vector<EvidenceFrame>& evidence,
                      const EngineOptions& options) {
    return DbnEngine(spec, options).filter(evidence);
}

BeliefSequence smooth(const NetworkSpec& spec, const std::vector<EvidenceFrame>& evidence,
                      const EngineOptions& options) {
    return DbnEngine(spec, options).smooth(evidence);
}

double log_evidence(const NetworkSpec& spec, const std::vector<EvidenceFrame>& evidence) {
    return DbnEngine(spec).log_evidence(evidence);
}

std::vector<DecodedFrame> decode(const BeliefSequence& beliefs, const DecodePolicy& policy,
                                 const NetworkSpec& spec) {
    if (!(policy.threshold > 0.0 && policy.threshold < 1.0)) {
        throw std::invalid_argument("decode threshold must lie strictly inside (0, 1)");
    }
    if (policy.mode == DecodeMode::FilteredMarginal && beliefs.source != BeliefSource::Filtered) {
        throw std::invalid_argument("filtered-marginal decode needs filtered beliefs");
    }
    if (policy.mode == DecodeMode::SmoothedMarginal && beliefs.source != BeliefSource::Smoothed) {
        throw std::invalid_argument("smoothed-marginal decode needs smoothed beliefs");
    }
    if (policy.mode == DecodeMode::JointMap && !beliefs.keeps_joint) {
        throw std::invalid_argument("joint-map decode needs beliefs with the joint kept");
    }

    std::vector<DecodedFrame> out;
    out.reserve(beliefs.frames.size());
    for (const auto& frame : beliefs.frames) {
        DecodedFrame decoded;
        if (policy.mode == DecodeMode::JointMap) {
            std::size_t best = 0;
            for (std::size_t s = 1; s < frame.joint.size(); ++s) {
                if (frame.joint[s] > frame.joint[best]) best = s;
            }
            std::size_t remainder = best;
            for (std::size_t h = beliefs.hidden_names.size(); h-- > 0;) {
                const auto card = static_cast<std::size_t>(beliefs.hidden_cards[h]);
                const int value = static_cast<int>(remainder % card);
                remainder /= card;
                const Variable& var = spec.require_variable(beliefs.hidden_names[h]);
                if (var.role == VarRole::HiddenAu) {
                    decoded.au[var.name] = value;
                } else {
                    decoded.phone = value;
                }
            }
        } else {
            for (const auto& name : beliefs.hidden_names) {
                const Variable& var = spec.require_variable(name);
                const auto& marginal = frame.marginals.at(name);
                if (var.role == VarRole::HiddenAu) {
                    decoded.au[name] = marginal[1] > policy.threshold ? 1 : 0;
                } else {
                    int best = 0;
                    for (std::size_t k = 1; k < marginal.size(); ++k) {
                        if (marginal[k] > marginal[static_cast<std::size_t>(best)]) {
                            best = static_cast<int>(k);
                        }
                    }
                    decoded.phone = best;
                }
            }
        }
        out.push_back(std::move(decoded));
    }
    return out;
}

std::vector<EvidenceFrame> build_evidence(const NetworkSpec& spec, const Corpus& corpus,
                                          const FrameSequence& sequence) {
    // Resolve spec measurement nodes against corpus channels once.
    std::vector<std::pair<std::string, int>> au_channels;  // measurement node, corpus AU column
    std::string phone_channel;
    for (const auto& var : spec.variables) {
        if (var.role == VarRole::MeasurementAu) {
            const auto hidden = spec.hidden_parent_of(var.name);
            if (!hidden) continue;
            for (std::size_t i = 0; i < corpus.au_names.size(); ++i) {
                if (corpus.au_names[i] == *hidden) {
                    au_channels.emplace_back(var.name, static_cast<int>(i));
                    break;
                }
            }
        } else if (var.role == VarRole::MeasurementPhone) {
            phone_channel = var.name;
        }
    }

    std::vector<EvidenceFrame> out;
    out.reserve(sequence.frames.size());
    for (const auto& frame : sequence.frames) {
        EvidenceFrame evidence;
        for (const auto& [node, column] : au_channels) {
            const int value = frame.au_meas[static_cast<std::size_t>(column)];
            if (value != Frame::kMissing) evidence.observations.emplace_back(node, value);
        }
        if (!phone_channel.empty() && frame.phone_meas != Frame::kMissing) {
            evidence.observations.emplace_back(phone_channel, frame.phone_meas);
        }
        out.push_back(std::move(evidence));
    }
    return out;
}

void append_beliefs_jsonl(std::string& out, const BeliefSequence& beliefs,
                          const std::vector<DecodedFrame>& decoded, const std::string& subject,
                          const std::string& word, int sequence_index) {
    using nlohmann::ordered_json;
    for (std::size_t t = 0; t < beliefs.frames.size(); ++t) {
        ordered_json record;
        record["sequence"] = sequence_index;
        record["subject"] = subject;
        record["word"] = word;
        record["frame"] = t;
        record["log_evidence"] = beliefs.frames[t].joint_log_evidence;
        ordered_json marginals;
        for (const auto& [name, marginal] : beliefs.frames[t].marginals) {
            marginals[name] = marginal;
        }
        record["marginals"] = std::move(marginals);
        ordered_json labels;
        for (const auto& [name, value] : decoded[t].au) labels[name] = value;
        if (decoded[t].phone) {
            for (const auto& name : beliefs.hidden_names) {
                if (!decoded[t].au.contains(name)) labels[name] = *decoded[t].phone;
            }
        }
        record["decoded"] = std::move(labels);
        out += record.dump();
        out += '\n';
    }
}

} // namespace aufuse
