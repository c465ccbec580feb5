#include "treegen/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "treegen/corpus.hpp"
#include "treegen/errors.hpp"
#include "treegen/pieces.hpp"
#include "treegen/util.hpp"

namespace treegen {

int edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    std::iota(prev.begin(), prev.end(), 0);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (size_t j = 1; j <= m; ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double similarity(const std::vector<std::string>& q, const std::vector<std::string>& qm) {
    size_t longest = std::max(q.size(), qm.size());
    if (longest == 0)
        throw InvalidArgument("similarity of two empty sentences is undefined");
    return 1.0 - static_cast<double>(edit_distance(q, qm)) / static_cast<double>(longest);
}

std::vector<Neighbor> retrieve(const RetrievalIndex& index, const std::vector<std::string>& q,
                               int m) {
    if (m < 1) throw InvalidArgument("retrieval needs M >= 1, got " + std::to_string(m));
    std::vector<Neighbor> all;
    all.reserve(index.examples.size());
    for (size_t i = 0; i < index.examples.size(); ++i)
        all.push_back(Neighbor{static_cast<int>(i), similarity(q, index.examples[i].nl)});
    std::stable_sort(all.begin(), all.end(), [&](const Neighbor& a, const Neighbor& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return index.examples[static_cast<size_t>(a.index)].id <
               index.examples[static_cast<size_t>(b.index)].id;
    });
    if (static_cast<int>(all.size()) > m) all.resize(static_cast<size_t>(m));
    return all;
}

RetrievalIndex build_index(const Grammar& grammar, std::vector<TrainingExample> examples,
                           bool lowercase) {
    std::set<std::string> ids;
    for (auto& ex : examples) {
        if (ex.id.empty()) throw DataError("training example with empty id");
        if (!ids.insert(ex.id).second)
            throw DataError("duplicate training example id '" + ex.id + "'");
        if (ex.nl.empty()) throw DataError("example '" + ex.id + "' has an empty description");
        if (lowercase)
            for (auto& tok : ex.nl) tok = lowercased(tok);
    }
    RetrievalIndex index(grammar);
    index.examples = std::move(examples);
    index.lowercase = lowercase;
    index.norm_constant =
        index.examples.size() >= 2 ? compute_norm_constant(index) : 0.0;
    return index;
}

void save_index(const RetrievalIndex& index, const std::string& path) {
    nlohmann::ordered_json j;
    j["format_version"] = RetrievalIndex::format_version;
    j["grammar_hash"] = to_hex(index.grammar.hash());
    j["norm_constant"] = index.norm_constant;
    j["example_count"] = index.examples.size();
    j["lowercase"] = index.lowercase;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& ex : index.examples) {
        nlohmann::ordered_json e;
        e["id"] = ex.id;
        e["nl"] = ex.nl;
        e["code_tokens"] = ex.code_tokens;
        auto actions = nlohmann::ordered_json::array();
        for (const auto& node : ex.tree) actions.push_back(action_to_json(node.action));
        e["actions"] = std::move(actions);
        arr.push_back(std::move(e));
    }
    j["examples"] = std::move(arr);

    std::ofstream out(path);
    if (!out) throw DataError("cannot write index file: " + path);
    out << j.dump(2) << "\n";
}

RetrievalIndex load_index(const std::string& path, const Grammar& grammar) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open index file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("index file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.contains("format_version") ||
        j["format_version"].get<int>() != RetrievalIndex::format_version)
        throw DataError("index file " + path + " has an unsupported format version");
    if (j.value("grammar_hash", std::string{}) != to_hex(grammar.hash()))
        throw DataError("index file " + path + " was built against a different grammar");

    RetrievalIndex index(grammar);
    index.norm_constant = j.at("norm_constant").get<double>();
    index.lowercase = j.value("lowercase", false);
    for (const auto& e : j.at("examples")) {
        TrainingExample ex;
        ex.id = e.at("id").get<std::string>();
        ex.nl = e.at("nl").get<std::vector<std::string>>();
        ex.code_tokens = e.at("code_tokens").get<std::vector<std::string>>();
        std::vector<Action> actions;
        for (const auto& a : e.at("actions")) actions.push_back(action_from_json(a));
        ex.tree = replay_actions(grammar, actions, ex.nl);
        index.examples.push_back(std::move(ex));
    }
    if (index.examples.size() != j.at("example_count").get<size_t>())
        throw DataError("index file " + path + " example count mismatch");
    return index;
}

}  // namespace treegen
