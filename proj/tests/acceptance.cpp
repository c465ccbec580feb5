// Acceptance gate: one pass/fail line per shipped guarantee, covering the
// whole pipeline from similarity arithmetic to end-to-end retrieval benefit.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "testutil.hpp"
#include "treegen/align.hpp"
#include "treegen/config.hpp"
#include "treegen/decoder.hpp"
#include "treegen/evalkit.hpp"
#include "treegen/pieces.hpp"
#include "treegen/retrieval.hpp"
#include "treegen/transducer.hpp"

using namespace treegen;
using testutil::toks;

namespace {

Grammar& mini() {
    static Grammar g =
        Grammar::load_file(std::string(TREEGEN_DATA_DIR) + "/python_mini.grammar");
    return g;
}

TrainingExample make_example(const std::string& id, const std::string& nl,
                             const std::string& code) {
    TrainingExample ex;
    ex.id = id;
    ex.nl = toks(nl);
    ex.code_tokens = toks(code);
    ex.tree = ast_to_actions(mini(), parse_code(mini(), ex.code_tokens), ex.nl);
    return ex;
}

std::vector<std::string> decode_code(const DecodedTree& d,
                                     const std::vector<std::string>& q) {
    return ast_to_code(mini(), actions_to_ast(mini(), d.tree, q));
}

bool bits_equal(double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

// ---- criterion 1: similarity arithmetic ------------------------------------

bool similarity_exactness() {
    double s = similarity(toks("params is an empty list"), toks("lst is an empty list"));
    if (std::fabs(s - 0.8) > 1e-12) return false;
    if (similarity(toks("a b c d e"), toks("a b c d e")) != 1.0) return false;
    return similarity(toks("a b c"), toks("x y z")) == 0.0;
}

// ---- criterion 2: transduction roundtrips ----------------------------------

bool transduction_roundtrip() {
    testutil::AstGen gen(mini(), 4242);
    for (int i = 0; i < 1000; ++i) {
        Ast ast = gen();
        std::vector<std::string> nl = testutil::random_sentence(gen.rng(), 3, 9);
        ActionTree tree = ast_to_actions(mini(), ast, nl);
        if (actions_to_ast(mini(), tree, nl) != ast) return false;
        if (parse_code(mini(), ast_to_code(mini(), ast)) != ast) return false;
    }
    return true;
}

// ---- criterion 3: piece extraction counts ----------------------------------

// Independent count: for every node, walk up to n_max-1 ancestors; each
// prefix of that upward walk is one distinct downward chain ending there.
int brute_force_piece_count(const ActionTree& tree, int n_max) {
    int total = 0;
    for (size_t i = 0; i < tree.size(); ++i) {
        int steps = 0;
        int node = static_cast<int>(i);
        while (node != -1 && steps < n_max) {
            ++steps;
            node = tree[node].parent;
        }
        total += steps;
    }
    return total;
}

bool piece_count_oracle() {
    testutil::AstGen gen(mini(), 555);
    for (int i = 0; i < 200; ++i) {
        Ast ast = gen();
        std::vector<std::string> nl = testutil::random_sentence(gen.rng(), 3, 7);
        ActionTree tree = ast_to_actions(mini(), ast, nl);
        for (int n_max = 1; n_max <= 4; ++n_max) {
            auto pieces = extract_pieces(tree, n_max);
            if (static_cast<int>(pieces.size()) != brute_force_piece_count(tree, n_max))
                return false;
        }
    }
    return true;
}

// ---- criterion 4: alignment-driven copy rewrite ----------------------------

bool alignment_rewrite_oracle() {
    // Substitution scenario: the retrieved assignment's copied name must be
    // re-pointed at input position 0 ("params").
    std::vector<std::string> q = toks("params is an empty list");
    std::vector<std::string> qm = toks("lst is an empty list");
    TrainingExample neighbor = make_example("n1", "lst is an empty list", "lst = [ ]");
    std::vector<Piece> pieces = extract_pieces(neighbor.tree, 3);
    std::vector<Piece> rewritten = rewrite_copies(pieces, align_sentences(q, qm), q, qm);
    if (rewritten.size() != pieces.size()) return false;  // everything aligns

    bool saw_trigram_with_copy = false;
    for (const Piece& p : rewritten) {
        for (const PieceElem& e : p.elems) {
            if (e.action.kind != ActionKind::gen_copy) continue;
            if (e.action.src_pos != 0) return false;
            if (p.key(q).find("params") == std::string::npos) return false;
            if (p.elems.size() == 3) saw_trigram_with_copy = true;
        }
        if (p.key(q).find("lst") != std::string::npos) return false;
    }
    if (!saw_trigram_with_copy) return false;

    // Insertion scenario: qm position 1 has no counterpart in q, so every
    // piece touching the copy of that position must be dropped.
    std::vector<std::string> q2 = toks("a b");
    std::vector<std::string> qm2 = toks("a x b");
    TrainingExample n2 = make_example("n2", "a x b", "a = x");
    std::vector<Piece> pieces2 = extract_pieces(n2.tree, 3);
    std::vector<Piece> kept = rewrite_copies(pieces2, align_sentences(q2, qm2), q2, qm2);

    std::vector<Piece> expected;
    for (const Piece& p : pieces2) {
        bool dead = false;
        for (const PieceElem& e : p.elems)
            dead |= e.action.kind == ActionKind::gen_copy && e.action.src_pos == 1;
        if (!dead) expected.push_back(p);
    }
    if (expected.size() == pieces2.size()) return false;  // scenario must trigger
    if (kept.size() != expected.size()) return false;
    for (size_t i = 0; i < kept.size(); ++i) {
        // Surviving copies are rewritten; compare structure modulo positions
        // by checking the resolved keys.
        if (kept[i].key(q2) != expected[i].key(qm2)) {
            // keys resolve tokens against the sentence the positions index;
            // aligned tokens are equal here, so the keys must agree.
            return false;
        }
    }
    return true;
}

// ---- shared corpus for criteria 5-7 ----------------------------------------

struct NlCode {
    const char* nl;
    const char* code;
};

// Trees keep exactly one statement constructor and no two same-typed sibling
// subtrees with different constructors or tokens, so with a uniform scorer
// the retrieved example's own pieces dominate every decoding step.
const NlCode kDup[] = {
    {"set alpha to zero", "alpha = 0"},
    {"set beta to one", "beta = 1"},
    {"set gamma to two", "gamma = 2"},
    {"make delta an empty list", "delta = [ ]"},
    {"make epsilon an empty list", "epsilon = [ ]"},
    {"do nothing at all", "pass"},
    {"call foo with bar", "foo ( bar )"},
    {"call baz with qux", "baz ( qux )"},
    {"call torch with wood and coal", "torch ( wood , coal )"},
    {"call mix with salt and pepper", "mix ( salt , pepper )"},
    {"if ready then branch nowhere", "if ready : else : end"},
    {"if done then branch nowhere", "if done : else : end"},
    {"return the counter value", "return counter"},
    {"return the total value", "return total"},
    {"give back nothing", "return"},
    {"assign word hello to msg", "msg = ' hello '"},
    {"assign word bye to note", "note = ' bye '"},
    {"define crunch taking spam and eggs", "def crunch ( spam , eggs ) : end"},
    {"define nop taking nothing", "def nop ( ) : end"},
    {"declare class widget from base", "class widget ( base ) : end"},
    {"declare class gizmo from core", "class gizmo ( core ) : end"},
    {"evaluate plain name handle", "handle"},
    {"evaluate plain name cursor", "cursor"},
    {"wrap stone in a list named box", "box = [ stone ]"},
    {"pair ham with jam into duo", "duo = [ ham , jam ]"},
    {"increase tick by itself", "tick = ( tick + tick )"},
    {"test flag under condition", "if flag : else : end"},
    {"call ping with no arguments", "ping ( )"},
    {"set omega to nine", "omega = 9"},
    {"make sigma an empty list", "sigma = [ ]"},
};

std::vector<TrainingExample> dup_training() {
    std::vector<TrainingExample> out;
    int n = 0;
    for (const NlCode& p : kDup) {
        char id[8];
        std::snprintf(id, sizeof id, "e%02d", ++n);
        out.push_back(make_example(id, p.nl, p.code));
    }
    return out;
}

// ---- criteria 5 and 6: boost neutrality, renormalization -------------------

struct NeutralityResult {
    bool neutral = true;
    double worst_mass_error = 0.0;
};

NeutralityResult run_neutrality(const RetrievalIndex& index, const BaseScorer& scorer) {
    NeutralityResult result;
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> pick(0, 1);

    auto same = [](const std::vector<DecodedTree>& a, const std::vector<DecodedTree>& b) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i) {
            if (a[i].tree != b[i].tree) return false;
            if (!bits_equal(a[i].score, b[i].score)) return false;
            if (!bits_equal(a[i].base_logp, b[i].base_logp)) return false;
        }
        return true;
    };

    for (int i = 0; i < 100; ++i) {
        // Queries mix training vocabulary with fresh words so some retrieve
        // well and some retrieve nothing.
        std::vector<std::string> q;
        if (pick(rng)) {
            const TrainingExample& ex =
                index.examples[rng() % index.examples.size()];
            q = ex.nl;
            if (pick(rng)) q.push_back(testutil::random_word(rng, {}));
        } else {
            q = testutil::random_sentence(rng, 3, 8);
        }

        PieceTable table = build_piece_table(index, q, retrieve(index, q, 3), 4);
        PieceTable empty_table;

        DecodeConfig audit_cfg;  // defaults: beam 15, lambda 3
        audit_cfg.audit = [&](const StepAudit& a) {
            double mass = 0.0;
            for (double lp : a.renormalized) mass += std::exp(lp);
            result.worst_mass_error =
                std::max(result.worst_mass_error, std::fabs(mass - 1.0));
        };
        std::vector<DecodedTree> boosted = decode(mini(), scorer, q, table, audit_cfg);
        (void)boosted;

        DecodeConfig zero_cfg;
        zero_cfg.lambda = 0.0;
        zero_cfg.audit = audit_cfg.audit;
        std::vector<DecodedTree> with_table = decode(mini(), scorer, q, table, zero_cfg);
        std::vector<DecodedTree> no_table = decode(mini(), scorer, q, empty_table, zero_cfg);

        DecodeConfig lambda_cfg;  // lambda 3 but nothing to match
        std::vector<DecodedTree> empty_boost =
            decode(mini(), scorer, q, empty_table, lambda_cfg);

        if (!same(with_table, no_table) || !same(with_table, empty_boost))
            result.neutral = false;
    }
    return result;
}

// ---- criterion 7: duplicate-query reproduction ------------------------------

bool duplicate_query_oracle(const RetrievalIndex& index,
                            const std::vector<TrainingExample>& training) {
    UniformScorer scorer(training_lexicon(training));
    DecodeConfig cfg;
    cfg.beam = 1;
    cfg.lambda = 10.0;
    cfg.n_max = 4;

    for (const TrainingExample& ex : training) {
        PieceTable table = build_piece_table(index, ex.nl, retrieve(index, ex.nl, 1), 4);
        std::vector<DecodedTree> out = decode(mini(), scorer, ex.nl, table, cfg);
        if (out.empty() || decode_code(out[0], ex.nl) != ex.code_tokens) return false;
    }
    return true;
}

// ---- criterion 8: retrieval benefit -----------------------------------------

bool retrieval_benefit() {
    std::vector<TrainingExample> training;
    char id[8], nl[40], code[32];
    for (int i = 1; i <= 10; ++i) {
        std::snprintf(id, sizeof id, "L%02d", i);
        std::snprintf(nl, sizeof nl, "make w%02d empty list", i);
        std::snprintf(code, sizeof code, "w%02d = [ ]", i);
        training.push_back(make_example(id, nl, code));
    }
    for (int i = 1; i <= 10; ++i) {
        std::snprintf(id, sizeof id, "Z%02d", i);
        std::snprintf(nl, sizeof nl, "make v%02d zero", i);
        std::snprintf(code, sizeof code, "v%02d = 0", i);
        training.push_back(make_example(id, nl, code));
    }
    // Distractors with disjoint vocabulary keep retrieval honest without
    // touching the assignment templates.
    static const char* kNoise[] = {
        "qz kj vx wb", "pf ng rh sm", "tl dc yq zn", "mh bw xk jp",
        "vr sq nf td", "gy lz cp hk", "wn jm qd xb", "kc vt zr lf",
        "sp hq my wj", "bx nk gd rv", "zc tm lq py", "jf wd hv xn",
        "rq km zb sg", "ny xp cf tw", "dh vj lk mq", "qb sz wf gn",
        "xm rc jt hd", "lw pk nv yz", "cq gj bm xs", "tf zh dw rk",
    };
    for (int i = 1; i <= 20; ++i) {
        std::snprintf(id, sizeof id, "N%02d", i);
        std::snprintf(code, sizeof code, "f%02d ( )", i);
        training.push_back(make_example(id, kNoise[i - 1], code));
    }

    RetrievalIndex index = build_index(mini(), training);
    // Both templates assign into a single name; counts alone cannot pick
    // between their values (10 list examples vs 10 zero examples).
    CountScorer scorer(mini(), training, 2);

    static const char* kFresh[] = {
        "apple", "bread", "chili", "dough", "grape", "lemon", "mango",
        "olive", "peach", "plums", "berry", "caper", "dates", "elder",
        "guava", "honey", "kiwis", "limes", "melon", "nutty",
    };
    int base_ok = 0, boosted_ok = 0;
    for (int i = 0; i < 20; ++i) {
        bool list_form = i % 2 == 0;
        std::string fresh = kFresh[i];
        std::vector<std::string> q =
            toks(list_form ? "make " + fresh + " empty list" : "make " + fresh + " zero");
        std::vector<std::string> gold =
            toks(list_form ? fresh + " = [ ]" : fresh + " = 0");

        DecodeConfig cfg;  // shipped defaults: beam 15, lambda 3, n_max 4
        PieceTable empty_table;
        std::vector<DecodedTree> base_out = decode(mini(), scorer, q, empty_table, cfg);
        if (!base_out.empty() && decode_code(base_out[0], q) == gold) ++base_ok;

        PieceTable table = build_piece_table(index, q, retrieve(index, q, 3), 4);
        std::vector<DecodedTree> out = decode(mini(), scorer, q, table, cfg);
        if (!out.empty() && decode_code(out[0], q) == gold) ++boosted_ok;
    }
    return base_ok <= 10 && boosted_ok == 20;
}

// ---- criterion 9: metric fidelity -------------------------------------------

bool metric_fidelity() {
    // Three-sentence corpus with an externally recomputed reference value.
    std::vector<std::vector<std::string>> preds = {
        toks("x = [ ]"),
        toks("return foo ( a , b )"),
        toks("if x : y = 0 else : end"),
    };
    std::vector<std::vector<std::string>> golds = {
        toks("x = [ 1 ]"),
        toks("return foo ( a , b )"),
        toks("if x : y = 1 else : pass end"),
    };
    if (std::fabs(corpus_bleu(preds, golds) - 66.2478395064226) > 1e-6) return false;
    if (corpus_bleu(golds, golds) != 100.0) return false;

    std::vector<double> a(30, 1.0), b(30, 0.0);
    double p = bootstrap_test(a, b, 10000, 17);
    if (p >= 0.01) return false;
    return bits_equal(p, bootstrap_test(a, b, 10000, 17));
}

// ---- criterion 10: shipped defaults -----------------------------------------

bool hyperparameter_defaults() {
    Config hs = default_config("hs");
    Config django = default_config("django");
    return hs.n_max == 4 && hs.lambda == 3.0 && hs.m == 3 && django.m == 10 &&
           django.n_max == 4 && django.lambda == 3.0;
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](int num, const char* what, bool ok) {
        std::printf("[%s] %2d. %s\n", ok ? "PASS" : "FAIL", num, what);
        if (!ok) ++failed;
    };

    report(1, "similarity arithmetic is exact", similarity_exactness());
    report(2, "1000 random ASTs roundtrip through actions and code", transduction_roundtrip());
    report(3, "piece extraction matches brute-force chain enumeration", piece_count_oracle());
    report(4, "copy actions follow the alignment; unaligned copies kill pieces",
           alignment_rewrite_oracle());

    std::vector<TrainingExample> training = dup_training();
    RetrievalIndex index = build_index(mini(), training);
    CountScorer count_scorer(mini(), training, 2);
    NeutralityResult nr = run_neutrality(index, count_scorer);
    report(5, "lambda=0 or an empty table reproduces base decoding bitwise", nr.neutral);
    report(6, "every decoding step renormalizes to a proper distribution",
           nr.worst_mass_error <= 1e-9);
    report(7, "30/30 training queries reproduce their stored trees",
           duplicate_query_oracle(index, training));
    report(8, "piece boosts resolve a branch the count scorer cannot", retrieval_benefit());
    report(9, "BLEU matches the reference value; bootstrap is sound and seeded",
           metric_fidelity());
    report(10, "shipped defaults: n_max=4, lambda=3, M=3 (hs) / M=10 (django)",
           hyperparameter_defaults());

    if (failed) std::printf("%d criterion(s) failed\n", failed);
    return failed == 0 ? 0 : 1;
}
