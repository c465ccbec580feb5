// Token-level edit-distance similarity and exhaustive top-M retrieval over
// the stored training examples.
#pragma once

#include <string>
#include <vector>

#include "treegen/grammar.hpp"
#include "treegen/transducer.hpp"

namespace treegen {

struct TrainingExample {
    std::string id;
    std::vector<std::string> nl;           // the stored description, q_m
    std::vector<std::string> code_tokens;  // unparsed surface form
    ActionTree tree;

    bool operator==(const TrainingExample&) const = default;
};

struct RetrievalIndex {
    static constexpr int format_version = 1;

    explicit RetrievalIndex(Grammar g) : grammar(std::move(g)) {}

    Grammar grammar;
    std::vector<TrainingExample> examples;
    double norm_constant = 0.0;  // mean leave-one-out top-1 similarity
    bool lowercase = false;
};

struct Neighbor {
    int index;          // position in RetrievalIndex::examples
    double similarity;  // sim(q, example.nl)

    bool operator==(const Neighbor&) const = default;
};

// Word-level Levenshtein distance with unit costs.
int edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b);

// 1 - d(q,qm)/max(|q|,|qm|), in [0,1]. Both sentences empty is undefined.
double similarity(const std::vector<std::string>& q, const std::vector<std::string>& qm);

// Up to M stored examples most similar to q, sorted by similarity descending,
// ties by ascending example id. Empty index gives an empty list; M < 1 is an
// invalid argument.
std::vector<Neighbor> retrieve(const RetrievalIndex& index, const std::vector<std::string>& q,
                               int m);

// Builds the index: validates examples (unique non-empty ids, non-empty nl,
// trees replayable under the grammar), applies lowercasing if requested, and
// computes the normalization constant (0 when fewer than two examples).
RetrievalIndex build_index(const Grammar& grammar, std::vector<TrainingExample> examples,
                           bool lowercase = false);

// JSON container with {format_version, grammar_hash, norm_constant,
// example_count, ...}. Loading verifies the version and that the grammar
// hash matches `grammar`. Writing is byte-deterministic.
void save_index(const RetrievalIndex& index, const std::string& path);
RetrievalIndex load_index(const std::string& path, const Grammar& grammar);

}  // namespace treegen
