#include <algorithm>
#include <cmath>

#include "treegen/decoder.hpp"
#include "treegen/errors.hpp"

namespace treegen {

namespace {

// Position-independent outcome key for counting.
std::string outcome_key(const Action& a) {
    switch (a.kind) {
        case ActionKind::apply_rule: return "R" + std::to_string(a.rule_id);
        case ActionKind::gen_vocab: return "V:" + a.token;
        case ActionKind::gen_copy: return "C";
        case ActionKind::gen_end: return "E";
    }
    return {};
}

// Coarse ancestor fingerprint: rule identity matters, token identity does not.
std::string fingerprint(const Action& a) {
    switch (a.kind) {
        case ActionKind::apply_rule: return "R" + std::to_string(a.rule_id);
        case ActionKind::gen_vocab:
        case ActionKind::gen_copy: return "T";
        case ActionKind::gen_end: return "E";
    }
    return {};
}

// Context string of the frontier type plus the last `j` fingerprints of the
// ancestor chain (chain is root→parent order).
std::string context_key(NodeTypeId frontier, const std::vector<std::string>& prints, int j) {
    std::string key = std::to_string(frontier);
    size_t start = prints.size() - static_cast<size_t>(j);
    for (size_t i = start; i < prints.size(); ++i) key += "/" + prints[i];
    return key;
}

}  // namespace

CountScorer::CountScorer(const Grammar&, const std::vector<TrainingExample>& training, int k,
                         double alpha)
    : k_(k), alpha_(alpha), lexicon_(training_lexicon(training)) {
    if (k < 0) throw InvalidArgument("context length must be >= 0");
    if (alpha <= 0.0) throw InvalidArgument("smoothing must be positive");
    lexicon_set_.insert(lexicon_.begin(), lexicon_.end());

    for (const TrainingExample& ex : training) {
        for (const ActionNode& node : ex.tree) {
            // Fingerprints of the ancestors, nearest last.
            std::vector<std::string> prints;
            for (int t = node.parent; t >= 0 && static_cast<int>(prints.size()) < k_;
                 t = ex.tree[static_cast<size_t>(t)].parent)
                prints.push_back(fingerprint(ex.tree[static_cast<size_t>(t)].action));
            std::reverse(prints.begin(), prints.end());

            std::string outcome = outcome_key(node.action);
            for (int j = 0; j <= static_cast<int>(prints.size()); ++j)
                ++counts_[context_key(node.frontier_type, prints, j)][outcome];
        }
    }
}

std::vector<double> CountScorer::score_actions(const DerivationState& state,
                                               const std::vector<Action>& legal) const {
    if (legal.empty()) throw InvalidArgument("cannot score an empty legal set");

    std::vector<std::string> prints;
    const ActionTree& tree = state.tree();
    for (int t = state.frontier().parent; t >= 0 && static_cast<int>(prints.size()) < k_;
         t = tree[static_cast<size_t>(t)].parent)
        prints.push_back(fingerprint(tree[static_cast<size_t>(t)].action));
    std::reverse(prints.begin(), prints.end());

    // Back off to the longest context with any counts.
    const std::map<std::string, int>* table = nullptr;
    for (int j = static_cast<int>(prints.size()); j >= 0 && !table; --j) {
        auto it = counts_.find(context_key(state.frontier().type, prints, j));
        if (it != counts_.end()) table = &it->second;
    }

    auto count_of = [&](const std::string& key) -> int {
        if (!table) return 0;
        auto it = table->find(key);
        return it == table->end() ? 0 : it->second;
    };

    // Copy mass splits over the input positions whose token is in the lexicon.
    const std::vector<std::string>& q = state.query();
    int eligible = 0;
    for (const Action& a : legal)
        if (a.kind == ActionKind::gen_copy &&
            lexicon_set_.count(q.at(static_cast<size_t>(a.src_pos))))
            ++eligible;

    std::vector<double> weights(legal.size());
    double total = 0.0;
    for (size_t i = 0; i < legal.size(); ++i) {
        const Action& a = legal[i];
        double w = alpha_;
        if (a.kind == ActionKind::gen_copy) {
            if (eligible > 0 && lexicon_set_.count(q.at(static_cast<size_t>(a.src_pos))))
                w += static_cast<double>(count_of("C")) / eligible;
        } else {
            w += static_cast<double>(count_of(outcome_key(a)));
        }
        weights[i] = w;
        total += w;
    }

    std::vector<double> logp(legal.size());
    for (size_t i = 0; i < legal.size(); ++i) logp[i] = std::log(weights[i] / total);
    return logp;
}

}  // namespace treegen
