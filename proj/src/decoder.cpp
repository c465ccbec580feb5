#include "treegen/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "treegen/errors.hpp"
#include "treegen/util.hpp"

namespace treegen {

namespace {

double log_sum_exp(const std::vector<double>& xs) {
    double hi = *std::max_element(xs.begin(), xs.end());
    double sum = 0.0;
    for (double x : xs) sum += std::exp(x - hi);
    return hi + std::log(sum);
}

// (frontier, action) chain from the root down to the frontier's parent,
// truncated to the last `limit` entries.
std::vector<PieceElem> ancestor_chain(const DerivationState& state, int limit) {
    std::vector<PieceElem> chain;
    const ActionTree& tree = state.tree();
    for (int t = state.frontier().parent; t >= 0 && static_cast<int>(chain.size()) < limit;
         t = tree[static_cast<size_t>(t)].parent)
        chain.push_back({tree[static_cast<size_t>(t)].frontier_type,
                         tree[static_cast<size_t>(t)].action});
    std::reverse(chain.begin(), chain.end());
    return chain;
}

// Whether applying `a` leaves no open frontier (the action closes the last
// slot without pushing new ones).
bool would_complete(const DerivationState& state, const Action& a) {
    if (state.open_frontiers() != 1) return false;
    if (a.kind == ActionKind::gen_end) return true;
    if (a.kind == ActionKind::apply_rule)
        return state.grammar().rule(a.rule_id).fields.empty();
    return false;  // vocab/copy keep the terminal open until End
}

}  // namespace

std::vector<double> UniformScorer::score_actions(const DerivationState&,
                                                 const std::vector<Action>& legal) const {
    if (legal.empty()) throw InvalidArgument("cannot score an empty legal set");
    return std::vector<double>(legal.size(), -std::log(static_cast<double>(legal.size())));
}

std::vector<std::string> training_lexicon(const std::vector<TrainingExample>& training) {
    std::set<std::string> seen;
    for (const TrainingExample& ex : training)
        for (const ActionNode& node : ex.tree)
            if (node.action.kind == ActionKind::gen_vocab)
                seen.insert(node.action.token);
            else if (node.action.kind == ActionKind::gen_copy)
                seen.insert(ex.nl.at(static_cast<size_t>(node.action.src_pos)));
    return {seen.begin(), seen.end()};
}

std::unique_ptr<BaseScorer> make_scorer(const std::string& name, const Grammar& g,
                                        const std::vector<TrainingExample>& training) {
    if (name == "uniform") return std::make_unique<UniformScorer>(training_lexicon(training));
    if (name == "count") return std::make_unique<CountScorer>(g, training);
    throw InvalidArgument("unknown scorer '" + name + "' (expected uniform or count)");
}

// ---------------------------------------------------------------------------
// Boosts and beam search

double boost_for(const Action& action, NodeTypeId frontier,
                 const std::vector<PieceElem>& ancestors, const std::vector<std::string>& q,
                 const PieceTable& table, double lambda, BoostAgg agg, int* matched) {
    if (matched) *matched = 0;
    if (lambda == 0.0 || table.entries.empty()) return 0.0;
    if (!table.normalized) throw StateError("piece table must be normalized before boosting");

    int hits = 0;
    double total = 0.0;
    Piece candidate;
    candidate.elems.push_back({frontier, action});
    for (int k = 1; k <= table.n_max; ++k) {
        if (k > 1) {
            int idx = static_cast<int>(ancestors.size()) - (k - 1);
            if (idx < 0) break;  // chain too short for longer pieces
            candidate.elems.insert(candidate.elems.begin(), ancestors[static_cast<size_t>(idx)]);
        }
        auto it = table.entries.find(candidate.key(q));
        if (it == table.entries.end()) continue;
        ++hits;
        total = agg == BoostAgg::sum ? total + it->second.score
                                     : std::max(total, it->second.score);
    }
    if (matched) *matched = hits;
    if (hits == 0) return 0.0;
    return lambda * total;
}

std::vector<Action> legal_actions(const DerivationState& state, const BaseScorer& scorer) {
    const DerivationState::Frontier& f = state.frontier();  // throws when complete
    std::vector<Action> out;
    if (state.grammar().is_composite(f.type)) {
        for (int rule : state.grammar().rules_for(f.type)) {
            Action a = Action::apply(rule);
            if (state.legal(a)) out.push_back(a);
        }
        return out;
    }
    for (const std::string& tok : scorer.lexicon()) {
        Action a = Action::vocab(tok);
        if (state.legal(a)) out.push_back(a);
    }
    for (size_t i = 0; i < state.query().size(); ++i) {
        Action a = Action::copy(static_cast<int>(i));
        if (state.legal(a)) out.push_back(a);
    }
    if (Action e = Action::end(); state.legal(e)) out.push_back(e);
    return out;
}

namespace {

struct Hyp {
    DerivationState state;
    double score = 0.0;      // accumulated renormalized log-probability
    double base_logp = 0.0;  // accumulated raw base log-probability
    int matched_pieces = 0;
};

std::string partial_summary(const std::vector<Hyp>& beam, const Grammar& g) {
    std::ostringstream out;
    size_t shown = std::min<size_t>(beam.size(), 3);
    for (size_t i = 0; i < shown; ++i) {
        const Hyp& h = beam[i];
        if (i) out << "; ";
        out << "score=" << h.score << " steps=" << h.state.step_count() << " frontier="
            << g.type(h.state.frontier().type).name;
    }
    return out.str();
}

}  // namespace

std::vector<DecodedTree> decode(const Grammar& g, const BaseScorer& scorer,
                                const std::vector<std::string>& q, const PieceTable& table,
                                const DecodeConfig& config) {
    if (config.beam < 1) throw InvalidArgument("beam must be >= 1");
    if (config.max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
    if (!table.entries.empty() && !table.normalized)
        throw StateError("piece table must be normalized before decoding");

    auto shared_q = std::make_shared<const std::vector<std::string>>(q);
    std::vector<Hyp> beam;
    beam.push_back({DerivationState(g, shared_q), 0.0, 0.0, 0});
    std::vector<DecodedTree> completed;

    struct Candidate {
        size_t hyp;
        Action action;
        double score;
        double base_logp;
        int matched_pieces;
        bool completes;
    };

    for (int step = 0; step < config.max_steps && !beam.empty(); ++step) {
        // Early stop: completions only outrank incomplete hypotheses, whose
        // scores can never rise (each step adds a log-probability ≤ 0).
        if (static_cast<int>(completed.size()) >= config.beam) {
            double best_open = beam.front().score;
            for (const Hyp& h : beam) best_open = std::max(best_open, h.score);
            if (completed[static_cast<size_t>(config.beam) - 1].score >= best_open) break;
        }

        std::vector<Candidate> candidates;
        for (size_t hi = 0; hi < beam.size(); ++hi) {
            const Hyp& h = beam[hi];
            std::vector<Action> legal = legal_actions(h.state, scorer);
            if (legal.empty()) continue;  // dead end (e.g. no vocab and nothing to copy)
            std::vector<double> base = scorer.score_actions(h.state, legal);
            std::vector<PieceElem> chain =
                ancestor_chain(h.state, std::max(config.n_max, table.n_max) - 1);

            std::vector<double> adjusted(legal.size());
            std::vector<int> matched(legal.size());
            for (size_t i = 0; i < legal.size(); ++i)
                adjusted[i] = base[i] + boost_for(legal[i], h.state.frontier().type, chain, q,
                                                  table, config.lambda, config.agg, &matched[i]);
            double lse = log_sum_exp(adjusted);
            for (double& a : adjusted) a -= lse;

            if (config.audit)
                config.audit(StepAudit{step, hi, legal, base, adjusted});

            for (size_t i = 0; i < legal.size(); ++i)
                candidates.push_back({hi, legal[i], h.score + adjusted[i],
                                      h.base_logp + base[i], h.matched_pieces + matched[i],
                                      would_complete(h.state, legal[i])});
        }

        // Rank by score; stable sort keeps (hypothesis, encoding) order on ties.
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

        std::vector<Hyp> next;
        for (const Candidate& c : candidates) {
            if (!c.completes && static_cast<int>(next.size()) >= config.beam) continue;
            Hyp h = beam[c.hyp];
            h.state.apply(c.action);
            h.score = c.score;
            h.base_logp = c.base_logp;
            h.matched_pieces = c.matched_pieces;
            if (c.completes)
                completed.push_back({h.state.tree(), h.score, h.base_logp, h.matched_pieces});
            else
                next.push_back(std::move(h));
        }
        beam = std::move(next);

        std::stable_sort(completed.begin(), completed.end(),
                         [](const DecodedTree& a, const DecodedTree& b) { return a.score > b.score; });
        if (static_cast<int>(completed.size()) > config.beam)
            completed.resize(static_cast<size_t>(config.beam));
    }

    if (completed.empty())
        throw DecodeTimeout("no hypothesis completed within " +
                                std::to_string(config.max_steps) + " steps",
                            partial_summary(beam, g));
    return completed;
}

}  // namespace treegen
