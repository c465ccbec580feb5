#include "treegen/pieces.hpp"

#include <algorithm>

#include "treegen/align.hpp"
#include "treegen/errors.hpp"

namespace treegen {

namespace {

std::string elem_component(const PieceElem& e, const std::vector<std::string>& src) {
    std::string c = std::to_string(e.frontier);
    switch (e.action.kind) {
        case ActionKind::apply_rule:
            c += "|R" + std::to_string(e.action.rule_id);
            break;
        case ActionKind::gen_vocab:
            c += "|V|" + e.action.token;
            break;
        case ActionKind::gen_copy:
            c += "|C|" + action_token(e.action, src);
            break;
        case ActionKind::gen_end:
            c += "|E";
            break;
    }
    return c;
}

}  // namespace

std::string Piece::key(const std::vector<std::string>& src) const {
    std::string out;
    for (const PieceElem& e : elems) {
        std::string c = elem_component(e, src);
        out += std::to_string(c.size());
        out += ':';
        out += c;
    }
    return out;
}

std::string Piece::display(const Grammar& g, const std::vector<std::string>& src) const {
    std::string out;
    for (size_t i = 0; i < elems.size(); ++i) {
        if (i) out += " ; ";
        const PieceElem& e = elems[i];
        out += g.type(e.frontier).name;
        out += "→";
        switch (e.action.kind) {
            case ActionKind::apply_rule:
                out += g.rule(e.action.rule_id).name;
                break;
            case ActionKind::gen_vocab:
                out += "'" + e.action.token + "'";
                break;
            case ActionKind::gen_copy:
                out += "copy('" + action_token(e.action, src) + "')";
                break;
            case ActionKind::gen_end:
                out += "<end>";
                break;
        }
    }
    return out;
}

std::vector<Piece> extract_pieces(const ActionTree& tree, int n_max) {
    if (n_max < 1) throw InvalidArgument("piece extraction needs n_max >= 1");
    std::vector<Piece> out;
    std::vector<PieceElem> chain;  // ancestors of v, oldest first, capped at n_max
    for (size_t v = 0; v < tree.size(); ++v) {
        chain.clear();
        for (int cur = static_cast<int>(v);
             cur >= 0 && static_cast<int>(chain.size()) < n_max;
             cur = tree[static_cast<size_t>(cur)].parent)
            chain.push_back(PieceElem{tree[static_cast<size_t>(cur)].frontier_type,
                                      tree[static_cast<size_t>(cur)].action});
        std::reverse(chain.begin(), chain.end());
        for (size_t k = 1; k <= chain.size(); ++k) {
            Piece p;
            p.elems.assign(chain.end() - static_cast<long>(k), chain.end());
            out.push_back(std::move(p));
        }
    }
    return out;
}

PieceTable collect_scored_pieces(
    const Grammar& g, const std::vector<std::string>& q,
    const std::vector<std::pair<std::vector<Piece>, double>>& contributions, int n_max) {
    PieceTable table;
    table.n_max = n_max;
    for (const auto& [pieces, sim] : contributions) {
        if (sim <= 0.0) continue;  // contributes nothing that survives pruning
        for (const Piece& piece : pieces) {
            std::string key = piece.key(q);
            auto [it, inserted] = table.entries.try_emplace(
                std::move(key),
                PieceTable::Entry{sim, static_cast<int>(piece.elems.size()),
                                  piece.display(g, q)});
            if (!inserted && sim > it->second.score) it->second.score = sim;
        }
    }
    return table;
}

double compute_norm_constant(const RetrievalIndex& index) {
    const auto& ex = index.examples;
    if (ex.size() < 2)
        throw StateError("normalization constant needs at least two training examples");
    double sum = 0.0;
    for (size_t i = 0; i < ex.size(); ++i) {
        double best = 0.0;
        for (size_t j = 0; j < ex.size(); ++j) {
            if (j == i) continue;
            best = std::max(best, similarity(ex[i].nl, ex[j].nl));
        }
        sum += best;
    }
    return sum / static_cast<double>(ex.size());
}

PieceTable normalize(PieceTable table, double norm_constant) {
    if (table.normalized) throw StateError("piece table is already normalized");
    for (auto it = table.entries.begin(); it != table.entries.end();) {
        it->second.score -= norm_constant;
        if (it->second.score <= 0.0)
            it = table.entries.erase(it);
        else
            ++it;
    }
    table.normalized = true;
    return table;
}

PieceTable build_piece_table(const RetrievalIndex& index, const std::vector<std::string>& q,
                             const std::vector<Neighbor>& neighbors, int n_max) {
    std::vector<std::pair<std::vector<Piece>, double>> contributions;
    if (!q.empty()) {
        for (const Neighbor& nb : neighbors) {
            if (nb.similarity <= 0.0) continue;
            const TrainingExample& ex = index.examples.at(static_cast<size_t>(nb.index));
            std::vector<Piece> pieces = extract_pieces(ex.tree, n_max);
            Alignment alignment = align_sentences(q, ex.nl);
            contributions.emplace_back(rewrite_copies(pieces, alignment, q, ex.nl),
                                       nb.similarity);
        }
    }
    PieceTable table = collect_scored_pieces(index.grammar, q, contributions, n_max);
    return normalize(std::move(table), index.norm_constant);
}

}  // namespace treegen
