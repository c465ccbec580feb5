// treegen: retrieval-guided code generation over ASDL-style grammars.
//
// Subcommands: build-index, generate, eval, inspect-pieces, validate-corpus.
// Shared knobs mirror Config and can also come from a --config JSON file or
// TREEGEN_* environment variables (CLI flag > env var > config file > default).
#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "treegen/commands.hpp"
#include "treegen/config.hpp"

namespace {

using treegen::Config;

// Staging area for shared options so we can tell "explicitly set" (CLI or env
// var) apart from "left at default" and layer values over a config file.
struct ConfigOpts {
    std::string grammar, config_file, style, agg, scorer;
    int m = 0, n_max = 0, beam = 0, max_steps = 0, jobs = 0;
    double lambda = 0.0, norm_constant = 0.0;
    bool lowercase = false;
    std::uint64_t seed = 0;

    CLI::Option *grammar_o = nullptr, *config_o = nullptr, *style_o = nullptr,
                *m_o = nullptr, *n_max_o = nullptr, *lambda_o = nullptr,
                *beam_o = nullptr, *max_steps_o = nullptr, *agg_o = nullptr,
                *scorer_o = nullptr, *lowercase_o = nullptr,
                *norm_o = nullptr, *seed_o = nullptr, *jobs_o = nullptr;
};

void add_config_options(CLI::App* cmd, ConfigOpts& o) {
    o.grammar_o = cmd->add_option("-g,--grammar", o.grammar, "Grammar file")
                      ->envname("TREEGEN_GRAMMAR");
    o.config_o = cmd->add_option("-c,--config", o.config_file,
                                 "JSON config file (flags override it)")
                     ->envname("TREEGEN_CONFIG");
    o.style_o = cmd->add_option("--style", o.style,
                                "Dataset style, hs or django; sets default M")
                    ->envname("TREEGEN_STYLE");
    o.m_o = cmd->add_option("-m,--m", o.m, "Retrieved neighbors M")
                ->envname("TREEGEN_M");
    o.n_max_o = cmd->add_option("--n-max", o.n_max, "Max piece length")
                    ->envname("TREEGEN_N_MAX");
    o.lambda_o = cmd->add_option("--lambda", o.lambda, "Piece boost weight")
                     ->envname("TREEGEN_LAMBDA");
    o.beam_o = cmd->add_option("--beam", o.beam, "Beam width")
                   ->envname("TREEGEN_BEAM");
    o.max_steps_o = cmd->add_option("--max-steps", o.max_steps,
                                    "Decoding step limit per query")
                        ->envname("TREEGEN_MAX_STEPS");
    o.agg_o = cmd->add_option("--agg", o.agg, "Boost aggregation, sum or max")
                  ->envname("TREEGEN_AGG");
    o.scorer_o = cmd->add_option("--scorer", o.scorer,
                                 "Base scorer, count or uniform")
                     ->envname("TREEGEN_SCORER");
    o.lowercase_o = cmd->add_flag("--lowercase", o.lowercase,
                                  "Lowercase NL tokens")
                        ->envname("TREEGEN_LOWERCASE");
    o.norm_o = cmd->add_option("--norm-constant", o.norm_constant,
                               "Override the index's score normalizer")
                   ->envname("TREEGEN_NORM_CONSTANT");
    o.seed_o = cmd->add_option("--seed", o.seed, "Bootstrap RNG seed")
                   ->envname("TREEGEN_SEED");
    o.jobs_o = cmd->add_option("-j,--jobs", o.jobs, "Worker threads")
                   ->envname("TREEGEN_JOBS");
}

Config assemble_config(const ConfigOpts& o) {
    Config cfg;
    if (o.config_o->count() > 0) cfg = treegen::load_config_file(o.config_file);
    if (o.style_o->count() > 0) {
        Config styled = treegen::default_config(o.style);
        cfg.style = styled.style;
        cfg.m = styled.m;
    }
    if (o.grammar_o->count() > 0) cfg.grammar_path = o.grammar;
    if (o.m_o->count() > 0) cfg.m = o.m;
    if (o.n_max_o->count() > 0) cfg.n_max = o.n_max;
    if (o.lambda_o->count() > 0) cfg.lambda = o.lambda;
    if (o.beam_o->count() > 0) cfg.beam = o.beam;
    if (o.max_steps_o->count() > 0) cfg.max_steps = o.max_steps;
    if (o.agg_o->count() > 0) cfg.agg = o.agg;
    if (o.scorer_o->count() > 0) cfg.scorer = o.scorer;
    if (o.lowercase_o->count() > 0) cfg.lowercase = o.lowercase;
    if (o.norm_o->count() > 0) cfg.norm_constant = o.norm_constant;
    if (o.seed_o->count() > 0) cfg.seed = o.seed;
    if (o.jobs_o->count() > 0) cfg.jobs = o.jobs;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retrieval-guided syntactic code generation"};
    app.set_version_flag("--version", std::string(treegen::kArtifactName) +
                                          " " + treegen::kArtifactVersion);
    app.require_subcommand(1);
    int rc = 0;

    auto* build = app.add_subcommand("build-index",
                                     "Build a retrieval index from a corpus");
    ConfigOpts build_opts;
    add_config_options(build, build_opts);
    treegen::BuildIndexArgs build_args;
    build->add_option("--train", build_args.train, "Training corpus (JSONL)")
        ->required();
    build->add_option("--out", build_args.out, "Index file to write")
        ->required();
    build->add_option("--manifest", build_args.manifest, "Run manifest path");
    build->callback([&] {
        rc = treegen::run_command([&] {
            return treegen::cmd_build_index(assemble_config(build_opts),
                                            build_args);
        });
    });

    auto* gen = app.add_subcommand("generate",
                                   "Decode code for NL queries");
    ConfigOpts gen_opts;
    add_config_options(gen, gen_opts);
    treegen::GenerateArgs gen_args;
    gen->add_option("--index", gen_args.index, "Retrieval index file");
    gen->add_option("--train", gen_args.train,
                    "Train scorer straight from a corpus (no retrieval)");
    gen->add_option("--queries", gen_args.queries, "Query file (JSONL)")
        ->required();
    gen->add_option("--out", gen_args.out, "Predictions file to write")
        ->required();
    gen->add_flag("--no-retrieval", gen_args.no_retrieval,
                  "Decode with the base scorer only");
    gen->add_option("--fail-threshold", gen_args.fail_threshold,
                    "Decode failures tolerated before exit code 3");
    gen->add_option("--manifest", gen_args.manifest, "Run manifest path");
    gen->callback([&] {
        rc = treegen::run_command([&] {
            return treegen::cmd_generate(assemble_config(gen_opts), gen_args);
        });
    });

    auto* eval = app.add_subcommand("eval",
                                    "Score predictions against references");
    ConfigOpts eval_opts;
    add_config_options(eval, eval_opts);
    treegen::EvalArgs eval_args;
    eval->add_option("--preds", eval_args.preds, "Predictions file (JSONL)")
        ->required();
    eval->add_option("--gold", eval_args.gold, "Reference corpus (JSONL)")
        ->required();
    eval->add_option("--baseline", eval_args.baseline,
                     "Second predictions file for a paired bootstrap test");
    eval->add_option("--out", eval_args.out, "JSON report path");
    eval->add_option("--bootstrap-n", eval_args.bootstrap_n,
                     "Bootstrap resamples");
    eval->add_option("--manifest", eval_args.manifest, "Run manifest path");
    eval->callback([&] {
        rc = treegen::run_command([&] {
            return treegen::cmd_eval(assemble_config(eval_opts), eval_args);
        });
    });

    auto* inspect = app.add_subcommand(
        "inspect-pieces", "Show the scored pieces a query retrieves");
    ConfigOpts inspect_opts;
    add_config_options(inspect, inspect_opts);
    treegen::InspectPiecesArgs inspect_args;
    inspect->add_option("--index", inspect_args.index, "Retrieval index file")
        ->required();
    inspect->add_option("--query", inspect_args.query,
                        "NL query, space-separated tokens")
        ->required();
    inspect->add_option("--limit", inspect_args.limit,
                        "Print at most this many pieces (0 = all)");
    inspect->callback([&] {
        rc = treegen::run_command([&] {
            return treegen::cmd_inspect_pieces(assemble_config(inspect_opts),
                                               inspect_args);
        });
    });

    auto* validate = app.add_subcommand("validate-corpus",
                                        "Check corpora and report stats");
    ConfigOpts validate_opts;
    add_config_options(validate, validate_opts);
    treegen::ValidateCorpusArgs validate_args;
    validate->add_option("corpora", validate_args.corpora, "Corpus files")
        ->required();
    validate->add_option("--out", validate_args.out, "JSON report path");
    validate->callback([&] {
        rc = treegen::run_command([&] {
            return treegen::cmd_validate_corpus(assemble_config(validate_opts),
                                                validate_args);
        });
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return rc;
}
