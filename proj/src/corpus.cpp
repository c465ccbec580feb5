#include "treegen/corpus.hpp"

#include <fstream>

#include "treegen/errors.hpp"
#include "treegen/util.hpp"

namespace treegen {

nlohmann::ordered_json action_to_json(const Action& a) {
    switch (a.kind) {
        case ActionKind::apply_rule:
            return {{"t", "rule"}, {"id", a.rule_id}};
        case ActionKind::gen_vocab:
            return {{"t", "vocab"}, {"tok", a.token}};
        case ActionKind::gen_copy:
            return {{"t", "copy"}, {"pos", a.src_pos}};
        case ActionKind::gen_end:
            return {{"t", "end"}};
    }
    throw InvalidArgument("unknown action kind");
}

Action action_from_json(const nlohmann::json& j) {
    const std::string t = j.at("t").get<std::string>();
    if (t == "rule") return Action::apply(j.at("id").get<int>());
    if (t == "vocab") return Action::vocab(j.at("tok").get<std::string>());
    if (t == "copy") return Action::copy(j.at("pos").get<int>());
    if (t == "end") return Action::end();
    throw DataError("unknown action tag '" + t + "'");
}

std::vector<CorpusRecord> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);
    std::vector<CorpusRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
        }
        try {
            CorpusRecord rec;
            rec.id = j.at("id").get<std::string>();
            rec.nl = j.at("nl").get<std::vector<std::string>>();
            bool has_code = j.contains("code");
            bool has_actions = j.contains("actions");
            if (has_code == has_actions)
                throw DataError("record needs exactly one of 'code' or 'actions'");
            if (has_code) {
                rec.code = j.at("code").get<std::string>();
            } else {
                std::vector<Action> actions;
                for (const auto& a : j.at("actions")) actions.push_back(action_from_json(a));
                rec.actions = std::move(actions);
            }
            out.push_back(std::move(rec));
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

TrainingExample example_from_record(const Grammar& grammar, const CorpusRecord& record,
                                    bool lowercase) {
    TrainingExample ex;
    ex.id = record.id;
    ex.nl = record.nl;
    if (lowercase)
        for (auto& tok : ex.nl) tok = lowercased(tok);
    try {
        if (record.code) {
            std::vector<std::string> code = split_tokens(*record.code);
            Ast ast = parse_code(grammar, code);
            ex.tree = ast_to_actions(grammar, ast, ex.nl);
            ex.code_tokens = std::move(code);
        } else {
            std::vector<Action> actions = *record.actions;
            ex.tree = replay_actions(grammar, actions, ex.nl);
            ex.code_tokens = ast_to_code(grammar, actions_to_ast(grammar, ex.tree, ex.nl));
        }
    } catch (const Error& e) {
        throw DataError("example '" + record.id + "': " + e.what());
    }
    return ex;
}

CorpusStats corpus_stats(const Grammar& grammar, const std::vector<CorpusRecord>& records,
                         bool lowercase) {
    CorpusStats stats;
    double nl_sum = 0.0, node_sum = 0.0;
    for (const auto& rec : records) {
        TrainingExample ex = example_from_record(grammar, rec, lowercase);
        nl_sum += static_cast<double>(ex.nl.size());
        node_sum += static_cast<double>(ex.tree.size());
        ++stats.count;
    }
    if (stats.count > 0) {
        stats.avg_nl_tokens = nl_sum / stats.count;
        stats.avg_tree_nodes = node_sum / stats.count;
    }
    return stats;
}

}  // namespace treegen
