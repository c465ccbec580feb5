// Grammar-constrained beam search over actions. A pluggable base scorer
// supplies log-probabilities over the legal next actions; piece matches add
// λ·score boosts, and each step's distribution is renormalized before the
// hypothesis scores accumulate.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "treegen/pieces.hpp"
#include "treegen/retrieval.hpp"
#include "treegen/transducer.hpp"

namespace treegen {

// Log-probabilities over grammar-legal next actions. Implementations must put
// mass only on the given legal set and return a proper distribution
// (|Σ exp(logp) − 1| < 1e-9). Must be safe for concurrent read-only use.
class BaseScorer {
public:
    virtual ~BaseScorer() = default;

    // One log-probability per entry of `legal`, in order. `state` carries the
    // partial tree, the frontier, and the query sentence.
    virtual std::vector<double> score_actions(const DerivationState& state,
                                              const std::vector<Action>& legal) const = 0;

    // Sorted unique tokens available to GenTokenVocab, and the reference set
    // for copy eligibility.
    virtual const std::vector<std::string>& lexicon() const = 0;
};

// Uniform over the legal set; the lexicon is the terminal tokens of the
// training examples.
class UniformScorer : public BaseScorer {
public:
    explicit UniformScorer(std::vector<std::string> lexicon) : lexicon_(std::move(lexicon)) {}

    std::vector<double> score_actions(const DerivationState& state,
                                      const std::vector<Action>& legal) const override;
    const std::vector<std::string>& lexicon() const override { return lexicon_; }

private:
    std::vector<std::string> lexicon_;
};

// Count-based scorer: add-α smoothed counts of the action conditioned on the
// frontier type and up to k ancestor action fingerprints, backing off to the
// longest context with any counts. Copy actions share the copy count mass
// uniformly over input positions whose token appears in the lexicon.
class CountScorer : public BaseScorer {
public:
    CountScorer(const Grammar& g, const std::vector<TrainingExample>& training, int k = 2,
                double alpha = 0.1);

    std::vector<double> score_actions(const DerivationState& state,
                                      const std::vector<Action>& legal) const override;
    const std::vector<std::string>& lexicon() const override { return lexicon_; }

    int context_k() const { return k_; }

private:
    int k_;
    double alpha_;
    std::vector<std::string> lexicon_;
    std::set<std::string> lexicon_set_;
    // context string (frontier + j ancestor fingerprints, j fixed per map
    // entry by construction) -> outcome key -> count
    std::map<std::string, std::map<std::string, int>> counts_;
};

// Terminal tokens observed in the training trees, sorted unique; the shared
// lexicon definition for both scorers.
std::vector<std::string> training_lexicon(const std::vector<TrainingExample>& training);

// Scorer factory: "uniform" or "count". Throws InvalidArgument for other
// names.
std::unique_ptr<BaseScorer> make_scorer(const std::string& name, const Grammar& g,
                                        const std::vector<TrainingExample>& training);

enum class BoostAgg { sum, max };

struct StepAudit {
    int step;                   // decode step index
    size_t hyp;                 // hypothesis index within the step
    std::vector<Action> legal;  // candidate actions, encoding order
    std::vector<double> base;   // scorer log-probabilities
    std::vector<double> renormalized;  // boosted + renormalized log-probabilities
};

struct DecodeConfig {
    int beam = 15;
    double lambda = 3.0;
    int n_max = 4;
    int max_steps = 300;
    BoostAgg agg = BoostAgg::sum;
    // Test/inspection hook invoked once per (step, hypothesis) expansion.
    std::function<void(const StepAudit&)> audit;
};

struct DecodedTree {
    ActionTree tree;
    double score;          // accumulated renormalized log-probability (ranking key)
    double base_logp;      // accumulated raw base log-probability
    int matched_pieces;    // piece-key matches along the chosen action sequence
};

// Boost for taking `action` at a frontier of type `frontier`, with `ancestors`
// the (frontier, action) chain from the root down to the frontier's parent.
// For k = 1..n_max the last k−1 ancestors plus the action form a candidate
// piece; matched table scores aggregate by `agg` and scale by λ. Exactly 0.0
// when λ = 0, the table is empty, or nothing matches. `matched` (optional)
// receives the number of matching keys.
double boost_for(const Action& action, NodeTypeId frontier,
                 const std::vector<PieceElem>& ancestors, const std::vector<std::string>& q,
                 const PieceTable& table, double lambda, BoostAgg agg, int* matched = nullptr);

// All grammar-legal next actions in canonical encoding order: ApplyRule by
// ascending rule id for composite frontiers; vocabulary tokens (lexicon
// order), then Copy by ascending position, then End for terminal frontiers.
// Throws StateError when the derivation is complete.
std::vector<Action> legal_actions(const DerivationState& state, const BaseScorer& scorer);

// Beam search. Returns up to `beam` complete trees ranked by accumulated
// renormalized score (ties: earlier generation order first). Throws
// DecodeTimeout when no hypothesis completes within max_steps.
std::vector<DecodedTree> decode(const Grammar& g, const BaseScorer& scorer,
                                const std::vector<std::string>& q, const PieceTable& table,
                                const DecodeConfig& config = {});

}  // namespace treegen
