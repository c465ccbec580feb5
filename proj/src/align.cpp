#include "treegen/align.hpp"

#include <algorithm>

#include "treegen/errors.hpp"
#include "treegen/retrieval.hpp"

namespace treegen {

Alignment align_sentences(const std::vector<std::string>& q,
                          const std::vector<std::string>& qm) {
    if (q.empty() || qm.empty())
        throw InvalidArgument("alignment requires two non-empty sentences");
    const size_t n = q.size(), m = qm.size();

    // Full DP table; corpora sentences are short. dist[i][j] = edit distance
    // between q[0..i) and qm[0..j).
    std::vector<std::vector<int>> dist(n + 1, std::vector<int>(m + 1, 0));
    for (size_t i = 0; i <= n; ++i) dist[i][0] = static_cast<int>(i);
    for (size_t j = 0; j <= m; ++j) dist[0][j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i)
        for (size_t j = 1; j <= m; ++j)
            dist[i][j] = std::min({dist[i - 1][j - 1] + (q[i - 1] == qm[j - 1] ? 0 : 1),
                                   dist[i][j - 1] + 1, dist[i - 1][j] + 1});

    // Backtrace from the corner, preferring diagonal, then consuming a
    // retrieved token (unaligned qm position), then consuming an input token.
    Alignment out;
    size_t i = n, j = m;
    while (i > 0 && j > 0) {
        int here = dist[i][j];
        bool eq = q[i - 1] == qm[j - 1];
        if (here == dist[i - 1][j - 1] + (eq ? 0 : 1)) {
            out.pairs.push_back(Alignment::Pair{static_cast<int>(i - 1), static_cast<int>(j - 1),
                                                eq ? Alignment::Kind::match
                                                   : Alignment::Kind::substitution});
            --i, --j;
        } else if (here == dist[i][j - 1] + 1) {
            --j;
        } else {
            --i;
        }
    }
    std::reverse(out.pairs.begin(), out.pairs.end());
    return out;
}

CopyRewrite make_copy_rewrite(const Alignment& alignment, int qm_len) {
    CopyRewrite rw;
    for (const auto& p : alignment.pairs) rw.remap[p.retrieved_pos] = p.input_pos;
    for (int j = 0; j < qm_len; ++j)
        if (!rw.remap.count(j)) rw.dead.insert(j);
    return rw;
}

std::vector<Piece> rewrite_copies(const std::vector<Piece>& pieces, const Alignment& alignment,
                                  const std::vector<std::string>& q,
                                  const std::vector<std::string>& qm) {
    (void)q;
    CopyRewrite rw = make_copy_rewrite(alignment, static_cast<int>(qm.size()));
    std::vector<Piece> out;
    out.reserve(pieces.size());
    for (const Piece& piece : pieces) {
        Piece rewritten = piece;
        bool alive = true;
        for (PieceElem& e : rewritten.elems) {
            if (e.action.kind != ActionKind::gen_copy) continue;
            int j = e.action.src_pos;
            if (j < 0 || j >= static_cast<int>(qm.size()))
                throw StructuralError("piece copies position " + std::to_string(j) +
                                      " outside the retrieved sentence of length " +
                                      std::to_string(qm.size()));
            auto it = rw.remap.find(j);
            if (it == rw.remap.end()) {
                alive = false;  // unaligned copy invalidates the whole piece
                break;
            }
            e.action.src_pos = it->second;
        }
        if (alive) out.push_back(std::move(rewritten));
    }
    return out;
}

}  // namespace treegen
