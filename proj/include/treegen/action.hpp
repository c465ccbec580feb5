// Actions: the primitive steps that build a derivation tree.
#pragma once

#include <string>

#include "treegen/grammar.hpp"

namespace treegen {

enum class ActionKind { apply_rule, gen_vocab, gen_copy, gen_end };

// One derivation step. apply_rule expands a composite frontier with a
// production; the gen_* kinds emit terminal tokens (from the vocabulary, as a
// copy of input position src_pos, or the end-of-value marker).
struct Action {
    ActionKind kind;
    int rule_id = -1;       // apply_rule
    std::string token;      // gen_vocab
    int src_pos = -1;       // gen_copy

    static Action apply(int rule_id) { return {ActionKind::apply_rule, rule_id, {}, -1}; }
    static Action vocab(std::string token) {
        return {ActionKind::gen_vocab, -1, std::move(token), -1};
    }
    static Action copy(int src_pos) { return {ActionKind::gen_copy, -1, {}, src_pos}; }
    static Action end() { return {ActionKind::gen_end, -1, {}, -1}; }

    bool operator==(const Action&) const = default;
};

// Token an action emits, given the source sentence it may copy from.
std::string action_token(const Action& a, const std::vector<std::string>& src);

// Human-readable form, e.g. "ApplyRule(Assign)" or "Copy[3]".
std::string action_str(const Action& a, const Grammar& g);

}  // namespace treegen
