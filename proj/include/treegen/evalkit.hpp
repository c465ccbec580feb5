// Evaluation: token-level exact match, corpus BLEU-4 over code tokens, and
// paired bootstrap significance.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace treegen {

// True iff the token sequences are identical.
bool exact_match(const std::vector<std::string>& pred, const std::vector<std::string>& gold);

// Corpus-level BLEU-4 in [0, 100]: uniform 1/4 weights, brevity penalty, and
// add-one smoothing on the order ≥ 2 precisions. Counts aggregate over the
// whole corpus before the geometric mean. Throws on length mismatch or empty
// golds.
double corpus_bleu(const std::vector<std::vector<std::string>>& preds,
                   const std::vector<std::vector<std::string>>& golds);

// BLEU of the single-pair corpus {(pred, gold)}.
double sentence_bleu(const std::vector<std::string>& pred, const std::vector<std::string>& gold);

// Paired bootstrap: resamples example indices with replacement and reports
// the fraction of resamples where mean(a) − mean(b) ≤ 0, i.e. the chance the
// apparent advantage of a over b disappears. Fixed seed ⇒ reproducible.
double bootstrap_test(const std::vector<double>& a, const std::vector<double>& b,
                      int n_resamples = 10000, uint64_t seed = 17);

struct EvalReport {
    struct PerExample {
        std::string id;
        bool match;
        double sentence_bleu;
    };
    double exact_match = 0.0;  // fraction in [0, 1]
    double bleu = 0.0;         // corpus BLEU, not averaged sentence BLEU
    std::vector<PerExample> per_example;
};

EvalReport evaluate(const std::vector<std::string>& ids,
                    const std::vector<std::vector<std::string>>& preds,
                    const std::vector<std::vector<std::string>>& golds);

nlohmann::ordered_json report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);

}  // namespace treegen
