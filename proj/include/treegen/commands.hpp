// Implementations behind the CLI subcommands. Each returns a process exit
// code: 0 success, 1 usage error, 2 data error, 3 decode failures above the
// threshold.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "treegen/config.hpp"

namespace treegen {

struct BuildIndexArgs {
    std::string train;     // training corpus (JSONL)
    std::string out;       // index file to write
    std::string manifest;  // run manifest path; default <out>.manifest.json
};

struct GenerateArgs {
    std::string index;    // retrieval index; optional when train is given
    std::string train;    // corpus for scorer training without retrieval
    std::string queries;  // JSONL {"id", "nl"}
    std::string out;
    bool no_retrieval = false;
    int fail_threshold = 0;  // decode failures tolerated before exit code 3
    std::string manifest;
};

struct EvalArgs {
    std::string preds;     // predictions JSONL from generate
    std::string gold;      // reference corpus (JSONL)
    std::string baseline;  // optional second predictions file for bootstrap
    std::string out;       // optional JSON report path
    int bootstrap_n = 10000;
    std::string manifest;
};

struct InspectPiecesArgs {
    std::string index;
    std::string query;  // space-separated NL tokens
    int limit = 0;      // 0 = print everything
};

struct ValidateCorpusArgs {
    std::vector<std::string> corpora;
    std::string out;  // optional JSON report path
};

int cmd_build_index(const Config& config, const BuildIndexArgs& args);
int cmd_generate(const Config& config, const GenerateArgs& args);
int cmd_eval(const Config& config, const EvalArgs& args);
int cmd_inspect_pieces(const Config& config, const InspectPiecesArgs& args);
int cmd_validate_corpus(const Config& config, const ValidateCorpusArgs& args);

// Maps exceptions from a command body onto the exit-code contract, printing
// the message to stderr.
int run_command(const std::function<int()>& body);

}  // namespace treegen
