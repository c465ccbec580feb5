// Conversions between surface code, ASTs, and action sequences, plus the
// incremental derivation state used during decoding.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "treegen/action.hpp"
#include "treegen/grammar.hpp"

namespace treegen {

// Abstract syntax tree. Composite nodes carry a rule id and one child list per
// field (single fields hold exactly one child, optional zero or one, sequences
// any number). Terminal nodes carry the emitted tokens in `value`.
struct Ast {
    NodeTypeId type = -1;
    int rule_id = -1;
    std::vector<std::vector<Ast>> children;  // per field of rule(rule_id)
    std::vector<std::string> value;          // terminal token(s)

    bool operator==(const Ast&) const = default;
};

// One node of the action tree; index in the vector == generation timestep.
struct ActionNode {
    Action action;
    int parent = -1;
    std::vector<int> children;
    NodeTypeId frontier_type = -1;  // type this action expanded / emitted into

    bool operator==(const ActionNode&) const = default;
};

using ActionTree = std::vector<ActionNode>;

// Incremental derivation of an action tree under a grammar, tracking the
// frontier stack so each step's legal actions are known. Copy actions resolve
// against the query sentence `q`.
class DerivationState {
public:
    DerivationState(const Grammar& grammar, std::shared_ptr<const std::vector<std::string>> q);

    // Frontier slot the next action must fill.
    struct Frontier {
        NodeTypeId type;
        int parent;              // timestep of parent action node, -1 at root
        bool mid_terminal;       // a terminal value is open; End becomes legal
        int emitted;             // tokens emitted into the open terminal so far
    };

    const Frontier& frontier() const;
    bool complete() const { return stack_.empty(); }
    size_t open_frontiers() const { return stack_.size(); }
    int step_count() const { return static_cast<int>(tree_.size()); }
    const ActionTree& tree() const { return tree_; }
    const Grammar& grammar() const { return *grammar_; }
    const std::vector<std::string>& query() const { return *q_; }

    // Validates the action against the current frontier and advances. Throws
    // DerivationError (with the timestep) on an illegal action.
    void apply(const Action& a);

    // True iff apply(a) would succeed.
    bool legal(const Action& a) const;

private:
    const Grammar* grammar_;
    std::shared_ptr<const std::vector<std::string>> q_;
    ActionTree tree_;
    std::vector<Frontier> stack_;
};

// AST -> preorder action tree. Terminal values become token emissions closed
// by End; optional/sequence fields are lowered through their synthetic rules.
// A token equal to some nl[i] is emitted as Copy of the smallest such i,
// otherwise as a vocabulary token.
ActionTree ast_to_actions(const Grammar& g, const Ast& ast,
                          const std::vector<std::string>& nl);

// Action tree -> AST. `q` resolves Copy actions. Throws StructuralError if the
// sequence is incomplete or ill-formed.
Ast actions_to_ast(const Grammar& g, const ActionTree& tree,
                   const std::vector<std::string>& q);

// Replay a flat action list through a DerivationState, reconstructing parents
// and frontier types. Throws DerivationError on illegal steps.
ActionTree replay_actions(const Grammar& g, const std::vector<Action>& actions,
                          const std::vector<std::string>& q);

// AST -> surface token string via the grammar templates. Throws StructuralError
// if a needed rule has no template.
std::vector<std::string> ast_to_code(const Grammar& g, const Ast& ast);

// Surface tokens -> AST by template-directed recursive descent with
// backtracking. Alternatives are tried in rule-id order; on failure the error
// reports the furthest position reached. The whole input must be consumed.
Ast parse_code(const Grammar& g, const std::vector<std::string>& tokens);

}  // namespace treegen
