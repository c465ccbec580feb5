// One-to-one sentence alignment from the edit-distance backtrace, and the
// rewrite of Copy actions from retrieved-sentence positions to input
// positions.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "treegen/pieces.hpp"

namespace treegen {

struct Alignment {
    enum class Kind { match, substitution };
    struct Pair {
        int input_pos;      // position in q
        int retrieved_pos;  // position in qm
        Kind kind;

        bool operator==(const Pair&) const = default;
    };
    std::vector<Pair> pairs;  // strictly increasing in both coordinates
};

// Reads the alignment off the minimal edit script between q and qm. Diagonal
// steps become match/substitution pairs; insertions and deletions leave
// positions unaligned. Tie-break: diagonal first, then consuming a retrieved
// token, then consuming an input token.
Alignment align_sentences(const std::vector<std::string>& q,
                          const std::vector<std::string>& qm);

struct CopyRewrite {
    std::map<int, int> remap;  // retrieved_pos -> input_pos
    std::set<int> dead;        // unaligned retrieved positions
};

CopyRewrite make_copy_rewrite(const Alignment& alignment, int qm_len);

// Rewrites every Copy(j) to Copy(remap[j]); pieces containing a copy of an
// unaligned position are dropped. Copy positions outside qm are corrupt.
std::vector<Piece> rewrite_copies(const std::vector<Piece>& pieces, const Alignment& alignment,
                                  const std::vector<std::string>& q,
                                  const std::vector<std::string>& qm);

}  // namespace treegen
