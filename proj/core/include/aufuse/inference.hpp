#ifndef AUFUSE_INFERENCE_HPP
#define AUFUSE_INFERENCE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aufuse/corpus.hpp"
#include "aufuse/graph.hpp"

namespace aufuse {

/// Observations for one frame: (measurement variable, state) pairs. A
/// variable absent from the list is missing and contributes no likelihood
/// term.
struct EvidenceFrame {
    std::vector<std::pair<std::string, int>> observations;
};

/// Posterior marginals of every hidden variable at one frame, plus the
/// running log probability of the evidence seen so far. joint holds the
/// full posterior over the enumerated hidden state space when the engine
/// was asked to keep it.
struct BeliefFrame {
    std::map<std::string, std::vector<double>> marginals;
    double joint_log_evidence = 0.0;
    std::vector<double> joint;
};

enum class BeliefSource { Filtered, Smoothed };

struct BeliefSequence {
    BeliefSource source = BeliefSource::Filtered;
    std::vector<std::string> hidden_names;  // declaration order; last varies fastest in joint
    std::vector<int> hidden_cards;
    std::vector<BeliefFrame> frames;
    bool keeps_joint = false;
};

enum class DecodeMode { FilteredMarginal, SmoothedMarginal, JointMap };

/// Marginal-threshold decode; joint-map instead takes the argmax over
/// the enumerated joint posterior.
struct DecodePolicy {
    DecodeMode mode = DecodeMode::FilteredMarginal;
    double threshold = 0.5;  // strictly inside (0, 1)
};

struct DecodedFrame {
    std::map<std::string, int> au;  // hidden AU name -> {0,1}
    std::optional<int> phone;
};

struct EngineOptions {
    std::size_t transition_cache_cap = 4096;  // dense operator cached up to this state count
    bool keep_joint = false;
};

/// Exact filtering and smoothing over the two-slice DBN by enumerating the
/// joint hidden state space; transition probabilities are evaluated from
/// the factorized CPTs (dense-cached when the space is small). A static
/// spec is handled as per-frame independent inference. Construction
/// validates the spec and rejects invalid ones.
class DbnEngine {
  public:
    explicit DbnEngine(const NetworkSpec& spec, const EngineOptions& options = {});

    /// BeliefFrame t = exact posterior given evidence frames 1..t.
    BeliefSequence filter(const std::vector<EvidenceFrame>& evidence) const;

    /// BeliefFrame t = exact posterior given all evidence frames 1..T.
    /// joint_log_evidence fields still report the filtered (1..t) prefix.
    BeliefSequence smooth(const std::vector<EvidenceFrame>& evidence) const;

    /// log P(all observations); -infinity when the evidence is impossible.
    double log_evidence(const std::vector<EvidenceFrame>& evidence) const;

    std::size_t state_count() const { return state_count_; }
    const NetworkSpec& spec() const { return spec_; }

  private:
    struct MeasNode {
        int hidden_slot;
        int card;
        const Cpt* initial;
        const Cpt* transition;  // null for static specs
    };
    struct TransitionFamily {
        const Cpt* cpt;
        std::vector<std::size_t> cur_part;   // per current state: lag-0 config * K + child digit
        std::vector<std::size_t> prev_part;  // per previous state: lag-1 config * K
    };

    void build_state_space();
    void build_initial_distribution();
    void build_transition_families();
    int hidden_slot(std::string_view name) const;
    int digit(std::size_t state, int slot) const {
        return static_cast<int>(state / strides_[static_cast<std::size_t>(slot)] %
                                static_cast<std::size_t>(cards_[static_cast<std::size_t>(slot)]));
    }
    double transition_prob(std::size_t prev, std::size_t cur) const;
    std::vector<double> evidence_factor(const EvidenceFrame& frame, bool first_slice) const;
    void propagate(const std::vector<double>& alpha, std::vector<double>& out) const;
    BeliefFrame make_frame(const std::vector<double>& dist, double log_evidence) const;

    NetworkSpec spec_;
    EngineOptions options_;
    std::vector<int> hidden_index_;  // indices into spec_.variables
    std::vector<std::string> hidden_names_;
    std::vector<int> cards_;
    std::vector<std::size_t> strides_;
    std::size_t state_count_ = 1;
    std::vector<double> initial_;
    std::map<std::string, MeasNode, std::less<>> measurements_;
    std::vector<TransitionFamily> families_;
    std::vector<double> transition_cache_;  // [prev * state_count + cur] when cached
};

BeliefSequence filter(const NetworkSpec& spec, const std::vector<EvidenceFrame>& evidence,
                      const EngineOptions& options = {});
BeliefSequence smooth(const NetworkSpec& spec, const std::vector<EvidenceFrame>& evidence,
                      const EngineOptions& options = {});
double log_evidence(const NetworkSpec& spec, const std::vector<EvidenceFrame>& evidence);

/// Per-frame activation labels (threshold on the AU marginals, argmax for
/// the phone) or the joint-MAP configuration. Checks that the beliefs'
/// provenance matches the policy mode.
std::vector<DecodedFrame> decode(const BeliefSequence& beliefs, const DecodePolicy& policy,
                                 const NetworkSpec& spec);

/// Maps a corpus sequence onto evidence frames for the spec's measurement
/// nodes; missing measurements are simply absent.
std::vector<EvidenceFrame> build_evidence(const NetworkSpec& spec, const Corpus& corpus,
                                          const FrameSequence& sequence);

/// Appends one JSON-lines record per frame: per-variable marginals, the
/// decoded labels, and the running log evidence.
void append_beliefs_jsonl(std::string& out, const BeliefSequence& beliefs,
                          const std::vector<DecodedFrame>& decoded, const std::string& subject,
                          const std::string& word, int sequence_index);

} // namespace aufuse

#endif // AUFUSE_INFERENCE_HPP
