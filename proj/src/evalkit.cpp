#include "treegen/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "treegen/errors.hpp"

namespace treegen {

namespace {

// Tokens never contain spaces, so a space-joined n-gram is a unique key for
// fixed n.
std::map<std::string, int> ngram_counts(const std::vector<std::string>& toks, size_t n) {
    std::map<std::string, int> counts;
    if (toks.size() < n) return counts;
    for (size_t i = 0; i + n <= toks.size(); ++i) {
        std::string key = toks[i];
        for (size_t j = 1; j < n; ++j) key += " " + toks[i + j];
        ++counts[key];
    }
    return counts;
}

}  // namespace

bool exact_match(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    return pred == gold;
}

double corpus_bleu(const std::vector<std::vector<std::string>>& preds,
                   const std::vector<std::vector<std::string>>& golds) {
    if (preds.size() != golds.size())
        throw InvalidArgument("prediction and reference counts differ");
    if (golds.empty()) throw InvalidArgument("cannot score an empty corpus");

    long match[5] = {0}, total[5] = {0};
    long hyp_len = 0, ref_len = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
        hyp_len += static_cast<long>(preds[i].size());
        ref_len += static_cast<long>(golds[i].size());
        for (size_t n = 1; n <= 4; ++n) {
            auto pc = ngram_counts(preds[i], n);
            auto gc = ngram_counts(golds[i], n);
            for (const auto& [gram, count] : pc) {
                auto it = gc.find(gram);
                if (it != gc.end()) match[n] += std::min(count, it->second);
            }
            if (preds[i].size() + 1 > n)
                total[n] += static_cast<long>(preds[i].size() + 1 - n);
        }
    }

    if (total[1] == 0 || match[1] == 0 || hyp_len == 0) return 0.0;
    double log_sum = std::log(static_cast<double>(match[1]) / static_cast<double>(total[1]));
    for (int n = 2; n <= 4; ++n)
        log_sum += std::log(static_cast<double>(match[n] + 1) / static_cast<double>(total[n] + 1));

    double bp = hyp_len >= ref_len
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
    return 100.0 * bp * std::exp(log_sum / 4.0);
}

double sentence_bleu(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    return corpus_bleu({pred}, {gold});
}

double bootstrap_test(const std::vector<double>& a, const std::vector<double>& b,
                      int n_resamples, uint64_t seed) {
    if (a.size() != b.size()) throw InvalidArgument("paired score lists differ in length");
    if (a.size() < 2) throw InvalidArgument("need at least two paired scores");
    if (n_resamples < 1) throw InvalidArgument("need at least one resample");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, a.size() - 1);
    int hits = 0;
    for (int r = 0; r < n_resamples; ++r) {
        double diff = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            size_t idx = pick(rng);
            diff += a[idx] - b[idx];
        }
        if (diff <= 0.0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n_resamples);
}

EvalReport evaluate(const std::vector<std::string>& ids,
                    const std::vector<std::vector<std::string>>& preds,
                    const std::vector<std::vector<std::string>>& golds) {
    if (ids.size() != preds.size() || preds.size() != golds.size())
        throw InvalidArgument("ids, predictions, and references must align");

    EvalReport report;
    report.bleu = corpus_bleu(preds, golds);
    int matches = 0;
    for (size_t i = 0; i < ids.size(); ++i) {
        bool m = exact_match(preds[i], golds[i]);
        matches += m;
        report.per_example.push_back({ids[i], m, sentence_bleu(preds[i], golds[i])});
    }
    report.exact_match = static_cast<double>(matches) / static_cast<double>(ids.size());
    return report;
}

nlohmann::ordered_json report_json(const EvalReport& report) {
    nlohmann::ordered_json out;
    out["exact_match"] = report.exact_match;
    out["bleu"] = report.bleu;
    out["examples"] = nlohmann::ordered_json::array();
    for (const auto& ex : report.per_example)
        out["examples"].push_back({{"id", ex.id},
                                   {"match", ex.match},
                                   {"sentence_bleu", ex.sentence_bleu}});
    return out;
}

std::string report_table(const EvalReport& report) {
    std::ostringstream out;
    out << "exact match: " << report.exact_match * 100.0 << "%\n";
    out << "corpus BLEU: " << report.bleu << "\n";
    out << "id\tmatch\tsentence BLEU\n";
    for (const auto& ex : report.per_example)
        out << ex.id << "\t" << (ex.match ? "yes" : "no") << "\t" << ex.sentence_bleu << "\n";
    return out.str();
}

}  // namespace treegen
