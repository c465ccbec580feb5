#include "treegen/commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "treegen/corpus.hpp"
#include "treegen/decoder.hpp"
#include "treegen/errors.hpp"
#include "treegen/evalkit.hpp"
#include "treegen/pieces.hpp"
#include "treegen/retrieval.hpp"
#include "treegen/transducer.hpp"
#include "treegen/util.hpp"

namespace treegen {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return to_hex(fnv1a(buf.str()));
}

// Run manifest: enough to reproduce a run and check its inputs/outputs.
void write_manifest(const std::string& path, const std::string& command, const Config& config,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const std::vector<std::pair<std::string, std::string>>& outputs) {
    if (path.empty()) return;
    ordered_json j;
    j["artifact"] = {{"name", kArtifactName}, {"version", kArtifactVersion}};
    j["command"] = command;
    j["config"] = config_json(config);
    j["inputs"] = ordered_json::object();
    for (const auto& [name, file] : inputs) j["inputs"][name] = file_hash(file);
    j["outputs"] = ordered_json::object();
    for (const auto& [name, file] : outputs) j["outputs"][name] = file_hash(file);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest " + path);
    out << j.dump(2) << "\n";
}

std::string manifest_path(const std::string& explicit_path, const std::string& out_path) {
    if (!explicit_path.empty()) return explicit_path;
    if (!out_path.empty()) return out_path + ".manifest.json";
    return {};
}

Grammar load_grammar(const Config& config) {
    if (config.grammar_path.empty()) throw InvalidArgument("a grammar file is required");
    return Grammar::load_file(config.grammar_path);
}

std::vector<TrainingExample> examples_from_file(const Grammar& g, const std::string& path,
                                                bool lowercase) {
    std::vector<TrainingExample> examples;
    for (const CorpusRecord& record : load_corpus(path))
        examples.push_back(example_from_record(g, record, lowercase));
    return examples;
}

struct QueryRecord {
    std::string id;
    std::vector<std::string> nl;
};

std::vector<QueryRecord> load_queries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open query file " + path);
    std::vector<QueryRecord> queries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
        }
        QueryRecord q;
        try {
            q.id = j.at("id").get<std::string>();
            const json& nl = j.at("nl");
            if (nl.is_string())
                q.nl = split_tokens(nl.get<std::string>());
            else
                q.nl = nl.get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

struct PredRecord {
    std::string id;
    std::vector<std::string> code;  // empty for failed examples
};

std::vector<PredRecord> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open predictions file " + path);
    std::vector<PredRecord> preds;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
        }
        PredRecord p;
        try {
            p.id = j.at("id").get<std::string>();
            if (j.contains("code_tokens"))
                p.code = j.at("code_tokens").get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        preds.push_back(std::move(p));
    }
    return preds;
}

BoostAgg agg_from_name(const std::string& name) {
    if (name == "sum") return BoostAgg::sum;
    if (name == "max") return BoostAgg::max;
    throw InvalidArgument("unknown aggregation '" + name + "' (expected sum or max)");
}

}  // namespace

int run_command(const std::function<int()>& body) {
    try {
        return body();
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_build_index(const Config& config, const BuildIndexArgs& args) {
    Grammar g = load_grammar(config);
    std::vector<TrainingExample> examples = examples_from_file(g, args.train, config.lowercase);
    RetrievalIndex index = build_index(g, examples, config.lowercase);
    if (config.norm_constant) index.norm_constant = *config.norm_constant;
    save_index(index, args.out);

    std::cout << "indexed " << index.examples.size() << " examples from " << args.train
              << " (norm constant " << index.norm_constant << ") -> " << args.out << "\n";
    write_manifest(manifest_path(args.manifest, args.out), "build-index", config,
                   {{"grammar", config.grammar_path}, {"train", args.train}},
                   {{"index", args.out}});
    return 0;
}

int cmd_generate(const Config& config, const GenerateArgs& args) {
    Grammar g = load_grammar(config);

    std::vector<TrainingExample> examples;
    RetrievalIndex index(g);
    bool retrieval = false;
    if (!args.index.empty()) {
        index = load_index(args.index, g);
        if (config.norm_constant) index.norm_constant = *config.norm_constant;
        examples = index.examples;
        retrieval = !args.no_retrieval && config.m >= 1;
    } else if (!args.train.empty()) {
        examples = examples_from_file(g, args.train, config.lowercase);
    } else {
        throw InvalidArgument("generate needs --index or --train for the scorer");
    }

    std::unique_ptr<BaseScorer> scorer = make_scorer(config.scorer, g, examples);
    std::vector<QueryRecord> queries = load_queries(args.queries);

    DecodeConfig dc;
    dc.beam = config.beam;
    dc.lambda = config.lambda;
    dc.n_max = config.n_max;
    dc.max_steps = config.max_steps;
    dc.agg = agg_from_name(config.agg);

    std::vector<std::string> lines(queries.size());
    std::atomic<int> failures{0};
    std::atomic<size_t> cursor{0};

    auto worker = [&]() {
        for (size_t i = cursor.fetch_add(1); i < queries.size(); i = cursor.fetch_add(1)) {
            std::vector<std::string> q = queries[i].nl;
            if (config.lowercase)
                for (std::string& tok : q) tok = lowercased(tok);

            ordered_json line;
            line["id"] = queries[i].id;
            try {
                PieceTable table;
                if (retrieval)
                    table = build_piece_table(index, q, retrieve(index, q, config.m),
                                              config.n_max);
                std::vector<DecodedTree> out = decode(g, *scorer, q, table, dc);
                const DecodedTree& best = out.front();
                line["code_tokens"] = ast_to_code(g, actions_to_ast(g, best.tree, q));
                line["action_count"] = best.tree.size();
                line["matched_piece_count"] = best.matched_pieces;
                line["base_logprob"] = best.base_logp;
            } catch (const DecodeTimeout& e) {
                line["error"] = std::string("decode timeout: ") + e.what();
                failures.fetch_add(1);
            }
            lines[i] = line.dump();
        }
    };

    int jobs = std::max(1, config.jobs);
    if (jobs == 1 || queries.size() < 2) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min<int>(jobs, static_cast<int>(queries.size())); ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::ofstream out(args.out);
    if (!out) throw DataError("cannot write " + args.out);
    for (const std::string& line : lines) out << line << "\n";
    out.close();

    std::cout << "decoded " << queries.size() - static_cast<size_t>(failures.load())
              << "/" << queries.size() << " queries -> " << args.out << "\n";

    std::vector<std::pair<std::string, std::string>> inputs = {
        {"grammar", config.grammar_path}, {"queries", args.queries}};
    if (!args.index.empty()) inputs.push_back({"index", args.index});
    if (!args.train.empty()) inputs.push_back({"train", args.train});
    write_manifest(manifest_path(args.manifest, args.out), "generate", config, inputs,
                   {{"predictions", args.out}});

    return failures.load() > args.fail_threshold ? 3 : 0;
}

int cmd_eval(const Config& config, const EvalArgs& args) {
    Grammar g = load_grammar(config);

    std::map<std::string, std::vector<std::string>> gold;
    for (const CorpusRecord& record : load_corpus(args.gold)) {
        TrainingExample ex = example_from_record(g, record, config.lowercase);
        if (!gold.emplace(ex.id, ex.code_tokens).second)
            throw DataError("duplicate id '" + ex.id + "' in " + args.gold);
    }

    auto align = [&](const std::string& path) {
        std::vector<std::string> ids;
        std::vector<std::vector<std::string>> preds, golds;
        for (const PredRecord& p : load_predictions(path)) {
            auto it = gold.find(p.id);
            if (it == gold.end())
                throw DataError("prediction id '" + p.id + "' not in " + args.gold);
            ids.push_back(p.id);
            preds.push_back(p.code);
            golds.push_back(it->second);
        }
        return std::tuple(ids, preds, golds);
    };

    auto [ids, preds, golds] = align(args.preds);
    if (ids.empty()) throw DataError("no predictions in " + args.preds);
    EvalReport report = evaluate(ids, preds, golds);
    ordered_json out_json = report_json(report);

    if (!args.baseline.empty()) {
        auto [bids, bpreds, bgolds] = align(args.baseline);
        if (bids != ids)
            throw DataError("baseline predictions cover different ids than " + args.preds);
        EvalReport base = evaluate(bids, bpreds, bgolds);

        std::vector<double> sys_match, base_match, sys_bleu, base_bleu;
        for (size_t i = 0; i < ids.size(); ++i) {
            sys_match.push_back(report.per_example[i].match ? 1.0 : 0.0);
            base_match.push_back(base.per_example[i].match ? 1.0 : 0.0);
            sys_bleu.push_back(report.per_example[i].sentence_bleu);
            base_bleu.push_back(base.per_example[i].sentence_bleu);
        }
        out_json["baseline"] = {{"exact_match", base.exact_match}, {"bleu", base.bleu}};
        out_json["p_exact_match"] =
            bootstrap_test(sys_match, base_match, args.bootstrap_n, config.seed);
        out_json["p_sentence_bleu"] =
            bootstrap_test(sys_bleu, base_bleu, args.bootstrap_n, config.seed);
    }

    std::cout << report_table(report);
    if (out_json.contains("p_exact_match"))
        std::cout << "vs baseline: p(exact match) = " << out_json["p_exact_match"]
                  << ", p(sentence BLEU) = " << out_json["p_sentence_bleu"] << "\n";

    if (!args.out.empty()) {
        std::ofstream out(args.out);
        if (!out) throw DataError("cannot write " + args.out);
        out << out_json.dump(2) << "\n";
    }

    std::vector<std::pair<std::string, std::string>> inputs = {
        {"grammar", config.grammar_path}, {"predictions", args.preds}, {"gold", args.gold}};
    if (!args.baseline.empty()) inputs.push_back({"baseline", args.baseline});
    std::vector<std::pair<std::string, std::string>> outputs;
    if (!args.out.empty()) outputs.push_back({"report", args.out});
    write_manifest(manifest_path(args.manifest, args.out), "eval", config, inputs, outputs);
    return 0;
}

int cmd_inspect_pieces(const Config& config, const InspectPiecesArgs& args) {
    Grammar g = load_grammar(config);
    RetrievalIndex index = load_index(args.index, g);
    if (config.norm_constant) index.norm_constant = *config.norm_constant;

    std::vector<std::string> q = split_tokens(args.query);
    if (config.lowercase)
        for (std::string& tok : q) tok = lowercased(tok);

    std::vector<Neighbor> neighbors = retrieve(index, q, config.m);
    for (const Neighbor& nb : neighbors)
        std::cout << "# neighbor " << index.examples[static_cast<size_t>(nb.index)].id
                  << " sim=" << nb.similarity << "\n";

    PieceTable table = build_piece_table(index, q, neighbors, config.n_max);
    std::vector<const PieceTable::Entry*> rows;
    for (const auto& [key, entry] : table.entries) rows.push_back(&entry);
    std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
        if (a->score != b->score) return a->score > b->score;
        return a->display < b->display;
    });

    int shown = 0;
    for (const auto* row : rows) {
        if (args.limit > 0 && shown >= args.limit) break;
        std::cout << row->score << "\t" << row->length << "\t" << row->display << "\n";
        ++shown;
    }
    return 0;
}

int cmd_validate_corpus(const Config& config, const ValidateCorpusArgs& args) {
    Grammar g = load_grammar(config);
    if (args.corpora.empty()) throw InvalidArgument("no corpus files given");

    ordered_json report = ordered_json::array();
    for (const std::string& path : args.corpora) {
        std::vector<CorpusRecord> records = load_corpus(path);
        CorpusStats stats = corpus_stats(g, records, config.lowercase);
        std::cout << path << ": " << stats.count << " examples, avg NL tokens "
                  << stats.avg_nl_tokens << ", avg tree nodes " << stats.avg_tree_nodes << "\n";
        report.push_back({{"path", path},
                          {"count", stats.count},
                          {"avg_nl_tokens", stats.avg_nl_tokens},
                          {"avg_tree_nodes", stats.avg_tree_nodes}});
    }

    if (!args.out.empty()) {
        std::ofstream out(args.out);
        if (!out) throw DataError("cannot write " + args.out);
        out << report.dump(2) << "\n";
    }
    return 0;
}

}  // namespace treegen
