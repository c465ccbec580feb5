// JSON Lines corpus records and (de)serialization of actions.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "treegen/retrieval.hpp"
#include "treegen/transducer.hpp"

namespace treegen {

// One corpus line: {"id": ..., "nl": [...], "code": "..."} or
// {"id": ..., "nl": [...], "actions": [...]}. Exactly one of code/actions.
struct CorpusRecord {
    std::string id;
    std::vector<std::string> nl;
    std::optional<std::string> code;
    std::optional<std::vector<Action>> actions;
};

nlohmann::ordered_json action_to_json(const Action& a);
Action action_from_json(const nlohmann::json& j);

// Reads a JSONL file; malformed lines raise a data error naming the line.
std::vector<CorpusRecord> load_corpus(const std::string& path);

// Turns a record into a training example under the grammar: code is parsed
// and transduced (copies resolved against nl); pre-serialized actions are
// replayed and the code regenerated from the tree.
TrainingExample example_from_record(const Grammar& grammar, const CorpusRecord& record,
                                    bool lowercase);

// Per-split statistics for corpus validation.
struct CorpusStats {
    int count = 0;
    double avg_nl_tokens = 0.0;
    double avg_tree_nodes = 0.0;
};
CorpusStats corpus_stats(const Grammar& grammar, const std::vector<CorpusRecord>& records,
                         bool lowercase);

}  // namespace treegen
