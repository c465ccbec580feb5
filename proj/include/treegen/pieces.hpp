// Vertical action n-grams ("pieces"): extraction from action trees, scoring
// by neighbor similarity, and score normalization.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "treegen/retrieval.hpp"
#include "treegen/transducer.hpp"

namespace treegen {

struct PieceElem {
    NodeTypeId frontier;  // type the action expanded / emitted into
    Action action;

    bool operator==(const PieceElem&) const = default;
};

// A downward parent→child chain of 1..n_max actions.
struct Piece {
    std::vector<PieceElem> elems;

    // Canonical byte encoding, injective over (frontier, action) sequences.
    // Copy actions encode the token they copy, resolved against `src` (the
    // sentence their positions index), so pieces compare across sentences.
    std::string key(const std::vector<std::string>& src) const;

    // Human-readable form, e.g. "expr→List ; List.elts→List.elts.end".
    std::string display(const Grammar& g, const std::vector<std::string>& src) const;

    bool operator==(const Piece&) const = default;
};

// All downward chains of length 1..n_max ending at each node; a node at depth
// d contributes min(d+1, n_max) pieces.
std::vector<Piece> extract_pieces(const ActionTree& tree, int n_max);

struct PieceTable {
    struct Entry {
        double score;
        int length;
        std::string display;
    };
    std::map<std::string, Entry> entries;  // key -> entry, ordered for stable output
    int n_max = 0;
    bool normalized = false;

    bool empty() const { return entries.empty(); }
};

// Scores each distinct piece key by the maximum similarity among contributing
// neighbors. Each contribution pairs the pieces of one neighbor (already
// rewritten into input coordinates, see rewrite_copies) with that neighbor's
// similarity. `q` resolves copy tokens in keys.
PieceTable collect_scored_pieces(
    const Grammar& g, const std::vector<std::string>& q,
    const std::vector<std::pair<std::vector<Piece>, double>>& contributions, int n_max);

// Mean over training examples of the top-1 leave-one-out similarity. Needs at
// least two examples.
double compute_norm_constant(const RetrievalIndex& index);

// Subtracts the constant from every score and prunes entries ≤ 0. Normalizing
// twice is a state error.
PieceTable normalize(PieceTable table, double norm_constant);

// Full per-query pipeline: retrieve neighbors' trees, extract pieces, align
// each neighbor sentence to q and rewrite copies, collect max-scored pieces,
// then normalize with the index's constant.
PieceTable build_piece_table(const RetrievalIndex& index, const std::vector<std::string>& q,
                             const std::vector<Neighbor>& neighbors, int n_max);

}  // namespace treegen
