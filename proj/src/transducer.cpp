#include "treegen/transducer.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

#include "treegen/errors.hpp"
#include "treegen/util.hpp"

namespace treegen {

std::string action_token(const Action& a, const std::vector<std::string>& src) {
    switch (a.kind) {
        case ActionKind::gen_vocab:
            return a.token;
        case ActionKind::gen_copy:
            if (a.src_pos < 0 || a.src_pos >= static_cast<int>(src.size()))
                throw InvalidArgument("copy position " + std::to_string(a.src_pos) +
                                      " outside input of length " + std::to_string(src.size()));
            return src[static_cast<size_t>(a.src_pos)];
        default:
            throw InvalidArgument("action emits no token");
    }
}

std::string action_str(const Action& a, const Grammar& g) {
    switch (a.kind) {
        case ActionKind::apply_rule:
            return "ApplyRule(" + g.rule(a.rule_id).name + ")";
        case ActionKind::gen_vocab:
            return "Vocab('" + a.token + "')";
        case ActionKind::gen_copy:
            return "Copy[" + std::to_string(a.src_pos) + "]";
        case ActionKind::gen_end:
            return "End";
    }
    return "?";
}

DerivationState::DerivationState(const Grammar& grammar,
                                 std::shared_ptr<const std::vector<std::string>> q)
    : grammar_(&grammar), q_(std::move(q)) {
    if (!q_) throw InvalidArgument("derivation requires a query sentence (may be empty)");
    stack_.push_back(Frontier{grammar.root(), -1, false, 0});
}

const DerivationState::Frontier& DerivationState::frontier() const {
    if (stack_.empty()) throw StateError("derivation is complete; no frontier");
    return stack_.back();
}

namespace {

// Returns an error message, or empty if the action is legal at frontier f.
std::string check_action(const Grammar& g, const std::vector<std::string>& q,
                         const DerivationState::Frontier& f, const Action& a) {
    const NodeType& ft = g.type(f.type);
    if (ft.kind == TypeKind::terminal) {
        switch (a.kind) {
            case ActionKind::apply_rule:
                return "ApplyRule at terminal frontier '" + ft.name + "'";
            case ActionKind::gen_end:
                if (!f.mid_terminal)
                    return "End before any token of terminal '" + ft.name + "'";
                return {};
            case ActionKind::gen_vocab:
            case ActionKind::gen_copy: {
                std::string tok;
                if (a.kind == ActionKind::gen_vocab) {
                    if (a.token.empty()) return "empty vocabulary token";
                    tok = a.token;
                } else {
                    if (a.src_pos < 0 || a.src_pos >= static_cast<int>(q.size()))
                        return "copy position " + std::to_string(a.src_pos) +
                               " outside input of length " + std::to_string(q.size());
                    tok = q[static_cast<size_t>(a.src_pos)];
                }
                if (ft.terminal_class == TerminalClass::int_token) {
                    if (f.mid_terminal)
                        return "int terminal '" + ft.name + "' takes a single token";
                    if (!lexes_as_int(tok))
                        return "token '" + tok + "' is not an integer literal";
                }
                return {};
            }
        }
        return "unknown action kind";
    }

    if (a.kind != ActionKind::apply_rule)
        return "composite frontier '" + ft.name + "' requires ApplyRule";
    if (a.rule_id < 0 || a.rule_id >= static_cast<int>(g.rules().size()))
        return "rule id " + std::to_string(a.rule_id) + " out of range";
    if (g.rule(a.rule_id).head != f.type)
        return "rule '" + g.rule(a.rule_id).name + "' does not produce '" + ft.name + "'";
    return {};
}

}  // namespace

bool DerivationState::legal(const Action& a) const {
    if (stack_.empty()) return false;
    return check_action(*grammar_, *q_, stack_.back(), a).empty();
}

void DerivationState::apply(const Action& a) {
    int t = step_count();
    if (stack_.empty())
        throw DerivationError("derivation already complete", t);
    Frontier& f = stack_.back();
    std::string err = check_action(*grammar_, *q_, f, a);
    if (!err.empty()) throw DerivationError(err, t);

    ActionNode node;
    node.action = a;
    node.frontier_type = f.type;
    node.parent = f.parent;
    tree_.push_back(std::move(node));
    if (f.parent >= 0) tree_[static_cast<size_t>(f.parent)].children.push_back(t);

    switch (a.kind) {
        case ActionKind::apply_rule: {
            const ProductionRule& rule = grammar_->rule(a.rule_id);
            stack_.pop_back();
            for (auto it = rule.fields.rbegin(); it != rule.fields.rend(); ++it)
                stack_.push_back(Frontier{it->frontier, t, false, 0});
            break;
        }
        case ActionKind::gen_end:
            stack_.pop_back();
            break;
        case ActionKind::gen_vocab:
        case ActionKind::gen_copy:
            // Later tokens and the closing End chain off this token's node.
            f.mid_terminal = true;
            f.parent = t;
            ++f.emitted;
            break;
    }
}

namespace {

void plan_ast(const Grammar& g, const Ast& ast, const std::vector<std::string>& nl,
              std::vector<Action>& out) {
    const NodeType& t = g.type(ast.type);
    if (t.kind == TypeKind::terminal) {
        if (ast.value.empty())
            throw StructuralError("terminal node of type '" + t.name + "' has no value");
        for (const std::string& tok : ast.value) {
            auto it = std::find(nl.begin(), nl.end(), tok);
            if (it != nl.end())
                out.push_back(Action::copy(static_cast<int>(it - nl.begin())));
            else
                out.push_back(Action::vocab(tok));
        }
        out.push_back(Action::end());
        return;
    }

    if (ast.rule_id < 0 || ast.rule_id >= static_cast<int>(g.rules().size()) ||
        g.rule(ast.rule_id).head != ast.type)
        throw StructuralError("node of type '" + t.name + "' carries no valid rule");
    const ProductionRule& rule = g.rule(ast.rule_id);
    if (ast.children.size() != rule.fields.size())
        throw StructuralError("node '" + rule.name + "' has " +
                              std::to_string(ast.children.size()) + " child lists, expected " +
                              std::to_string(rule.fields.size()));
    out.push_back(Action::apply(rule.id));
    for (size_t fi = 0; fi < rule.fields.size(); ++fi) {
        const FieldDef& field = rule.fields[fi];
        const auto& kids = ast.children[fi];
        switch (field.card) {
            case Cardinality::single: {
                if (kids.size() != 1)
                    throw StructuralError("field '" + field.name + "' of '" + rule.name +
                                          "' needs exactly one child");
                plan_ast(g, kids[0], nl, out);
                break;
            }
            case Cardinality::optional: {
                if (kids.size() > 1)
                    throw StructuralError("optional field '" + field.name + "' of '" + rule.name +
                                          "' has more than one child");
                const auto& opts = g.rules_for(field.frontier);
                if (kids.empty()) {
                    out.push_back(Action::apply(opts[1]));  // .none
                } else {
                    out.push_back(Action::apply(opts[0]));  // .some
                    plan_ast(g, kids[0], nl, out);
                }
                break;
            }
            case Cardinality::sequence: {
                const auto& seqs = g.rules_for(field.frontier);
                for (const Ast& kid : kids) {
                    out.push_back(Action::apply(seqs[0]));  // .more
                    plan_ast(g, kid, nl, out);
                }
                out.push_back(Action::apply(seqs[1]));  // .end
                break;
            }
        }
    }
}

}  // namespace

ActionTree ast_to_actions(const Grammar& g, const Ast& ast,
                          const std::vector<std::string>& nl) {
    if (ast.type != g.root())
        throw StructuralError("AST root has type '" + g.type(ast.type).name +
                              "', grammar root is '" + g.type(g.root()).name + "'");
    std::vector<Action> plan;
    plan_ast(g, ast, nl, plan);
    return replay_actions(g, plan, nl);
}

ActionTree replay_actions(const Grammar& g, const std::vector<Action>& actions,
                          const std::vector<std::string>& q) {
    DerivationState state(g, std::make_shared<const std::vector<std::string>>(q));
    for (const Action& a : actions) state.apply(a);
    if (!state.complete())
        throw DerivationError("action sequence leaves open frontiers", state.step_count());
    return state.tree();
}

namespace {

// Rebuilds the AST by consuming the action tree in timestep order.
struct TreeReader {
    const Grammar& g;
    const ActionTree& tree;
    const std::vector<std::string>& q;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg, size_t t) const {
        throw DerivationError(msg, static_cast<int>(t));
    }

    const ActionNode& next(const char* what) {
        if (pos >= tree.size())
            fail(std::string("action sequence ended while expecting ") + what, tree.size());
        return tree[pos++];
    }

    Ast read_node(NodeTypeId want) {
        const NodeType& t = g.type(want);
        if (t.kind == TypeKind::terminal) return read_terminal(want);

        const ActionNode& n = next("a production");
        if (n.action.kind != ActionKind::apply_rule)
            fail("expected ApplyRule for type '" + t.name + "'", pos - 1);
        const ProductionRule& rule = g.rule(n.action.rule_id);
        if (rule.head != want)
            fail("rule '" + rule.name + "' cannot expand type '" + t.name + "'", pos - 1);

        Ast ast;
        ast.type = want;
        ast.rule_id = rule.id;
        ast.children.resize(rule.fields.size());
        for (size_t fi = 0; fi < rule.fields.size(); ++fi) {
            const FieldDef& field = rule.fields[fi];
            switch (field.card) {
                case Cardinality::single:
                    ast.children[fi].push_back(read_node(field.type));
                    break;
                case Cardinality::optional: {
                    const auto& opts = g.rules_for(field.frontier);
                    if (read_synthetic(field.frontier) == opts[0])  // .some
                        ast.children[fi].push_back(read_node(field.type));
                    break;
                }
                case Cardinality::sequence: {
                    const auto& seqs = g.rules_for(field.frontier);
                    while (read_synthetic(field.frontier) == seqs[0])  // .more
                        ast.children[fi].push_back(read_node(field.type));
                    break;
                }
            }
        }
        return ast;
    }

    int read_synthetic(NodeTypeId frontier) {
        const ActionNode& n = next("a list/option step");
        if (n.action.kind != ActionKind::apply_rule ||
            g.rule(n.action.rule_id).head != frontier)
            fail("expected expansion of '" + g.type(frontier).name + "'", pos - 1);
        return n.action.rule_id;
    }

    Ast read_terminal(NodeTypeId want) {
        Ast ast;
        ast.type = want;
        for (;;) {
            const ActionNode& n = next("a terminal token or End");
            if (n.action.kind == ActionKind::gen_end) {
                if (ast.value.empty())
                    fail("terminal '" + g.type(want).name + "' closed without tokens", pos - 1);
                return ast;
            }
            if (n.action.kind == ActionKind::apply_rule)
                fail("ApplyRule inside terminal '" + g.type(want).name + "'", pos - 1);
            if (n.action.kind == ActionKind::gen_copy &&
                (n.action.src_pos < 0 || n.action.src_pos >= static_cast<int>(q.size())))
                fail("copy position " + std::to_string(n.action.src_pos) +
                         " outside input of length " + std::to_string(q.size()),
                     pos - 1);
            ast.value.push_back(action_token(n.action, q));
        }
    }
};

}  // namespace

Ast actions_to_ast(const Grammar& g, const ActionTree& tree,
                   const std::vector<std::string>& q) {
    TreeReader reader{g, tree, q};
    Ast ast = reader.read_node(g.root());
    if (reader.pos != tree.size())
        reader.fail("trailing actions after the derivation completed", reader.pos);
    return ast;
}

namespace {

void unparse(const Grammar& g, const Ast& ast, std::vector<std::string>& out) {
    const NodeType& t = g.type(ast.type);
    if (t.kind == TypeKind::terminal) {
        out.insert(out.end(), ast.value.begin(), ast.value.end());
        return;
    }
    const ProductionRule& rule = g.rule(ast.rule_id);
    const auto* tmpl = g.template_for(rule.id);
    if (!tmpl)
        throw StructuralError("rule '" + rule.name + "' has no surface template");
    for (const TemplateItem& item : *tmpl) {
        if (item.is_literal) {
            out.push_back(item.literal);
            continue;
        }
        const auto& kids = ast.children[static_cast<size_t>(item.field_index)];
        for (size_t i = 0; i < kids.size(); ++i) {
            if (i && item.separator) out.push_back(*item.separator);
            unparse(g, kids[i], out);
        }
    }
}

// Template-directed recursive descent in continuation-passing style, so
// backtracking crosses rule boundaries. Alternatives run in rule-id order;
// sequences prefer more elements; the furthest failure position is kept for
// error reporting.
struct CodeParser {
    const Grammar& g;
    const std::vector<std::string>& toks;
    std::unordered_set<std::string> reserved;  // template literals + separators
    size_t furthest = 0;
    std::string furthest_msg;

    using Cont = const std::function<bool(size_t)>&;

    explicit CodeParser(const Grammar& grammar, const std::vector<std::string>& tokens)
        : g(grammar), toks(tokens) {
        for (const auto& rule : g.rules()) {
            const auto* tmpl = g.template_for(rule.id);
            if (!tmpl) continue;
            for (const auto& item : *tmpl) {
                if (item.is_literal) reserved.insert(item.literal);
                if (item.separator) reserved.insert(*item.separator);
            }
        }
    }

    void fail_at(size_t pos, const std::string& msg) {
        if (pos >= furthest) {
            furthest = pos;
            furthest_msg = msg;
        }
    }

    bool parse_type(NodeTypeId type, size_t pos, const std::string* stop,
                    std::vector<Ast>& out, Cont k) {
        const NodeType& t = g.type(type);
        if (t.kind == TypeKind::terminal) return parse_terminal(type, pos, stop, out, k);
        for (int rid : g.rules_for(type))
            if (parse_rule(rid, pos, out, k)) return true;
        return false;
    }

    bool parse_terminal(NodeTypeId type, size_t pos, const std::string* stop,
                        std::vector<Ast>& out, Cont k) {
        const NodeType& t = g.type(type);
        if (pos >= toks.size()) {
            fail_at(pos, "input ended while reading a '" + t.name + "' value");
            return false;
        }
        if (t.terminal_class == TerminalClass::int_token) {
            if (!lexes_as_int(toks[pos])) {
                fail_at(pos, "expected integer literal for '" + t.name + "'");
                return false;
            }
            return yield_value(type, pos, pos + 1, out, k);
        }
        if (stop) {
            // Multi-token value running up to the delimiting literal. Tokens
            // that are themselves template literals cannot appear inside, so
            // there is exactly one candidate span.
            size_t end = pos;
            while (end < toks.size() && toks[end] != *stop && !reserved.count(toks[end])) ++end;
            if (end == pos || end == toks.size() || toks[end] != *stop) {
                fail_at(pos, "expected '" + t.name + "' value before '" + *stop + "'");
                return false;
            }
            return yield_value(type, pos, end, out, k);
        }
        if (reserved.count(toks[pos])) {
            fail_at(pos, "'" + toks[pos] + "' cannot be a '" + t.name + "' value");
            return false;
        }
        return yield_value(type, pos, pos + 1, out, k);
    }

    bool yield_value(NodeTypeId type, size_t from, size_t to, std::vector<Ast>& out, Cont k) {
        Ast ast;
        ast.type = type;
        ast.value.assign(toks.begin() + static_cast<long>(from),
                         toks.begin() + static_cast<long>(to));
        out.push_back(std::move(ast));
        if (k(to)) return true;
        out.pop_back();
        return false;
    }

    bool parse_rule(int rule_id, size_t pos, std::vector<Ast>& out, Cont k) {
        const ProductionRule& rule = g.rule(rule_id);
        const auto* tmpl = g.template_for(rule_id);
        if (!tmpl) return false;
        Ast ast;
        ast.type = rule.head;
        ast.rule_id = rule_id;
        ast.children.resize(rule.fields.size());
        return parse_items(*tmpl, 0, pos, ast, [&](size_t end) {
            out.push_back(ast);
            if (k(end)) return true;
            out.pop_back();
            return false;
        });
    }

    bool parse_items(const std::vector<TemplateItem>& tmpl, size_t idx, size_t pos, Ast& ast,
                     Cont k) {
        if (idx == tmpl.size()) return k(pos);
        const TemplateItem& item = tmpl[idx];
        if (item.is_literal) {
            if (pos >= toks.size() || toks[pos] != item.literal) {
                fail_at(pos, "expected '" + item.literal + "'");
                return false;
            }
            return parse_items(tmpl, idx + 1, pos + 1, ast, k);
        }

        const ProductionRule& rule = g.rule(ast.rule_id);
        const FieldDef& field = rule.fields[static_cast<size_t>(item.field_index)];
        auto& slot = ast.children[static_cast<size_t>(item.field_index)];
        // Only single-valued fields may span multiple tokens up to the next
        // literal; sequence elements always take exactly one token.
        const std::string* stop =
            (field.card != Cardinality::sequence) ? following_literal(tmpl, idx) : nullptr;
        auto next = [&](size_t end) { return parse_items(tmpl, idx + 1, end, ast, k); };

        switch (field.card) {
            case Cardinality::single:
                return parse_type(field.type, pos, stop, slot, next);
            case Cardinality::optional:
                if (parse_type(field.type, pos, stop, slot, next)) return true;
                return parse_items(tmpl, idx + 1, pos, ast, k);
            case Cardinality::sequence:
                return parse_seq(tmpl, idx, pos, ast, slot, field, k);
        }
        return false;
    }

    bool parse_seq(const std::vector<TemplateItem>& tmpl, size_t idx, size_t pos, Ast& ast,
                   std::vector<Ast>& slot, const FieldDef& field, Cont k) {
        const auto& sep = tmpl[idx].separator;
        size_t here = pos;
        if (!slot.empty() && sep) {
            if (here >= toks.size() || toks[here] != *sep)
                return parse_items(tmpl, idx + 1, pos, ast, k);
            ++here;
        }
        if (parse_type(field.type, here, nullptr, slot, [&](size_t end) {
                return parse_seq(tmpl, idx, end, ast, slot, field, k);
            }))
            return true;
        return parse_items(tmpl, idx + 1, pos, ast, k);
    }

    const std::string* following_literal(const std::vector<TemplateItem>& tmpl, size_t idx) {
        if (idx + 1 < tmpl.size() && tmpl[idx + 1].is_literal) return &tmpl[idx + 1].literal;
        return nullptr;
    }
};

}  // namespace

std::vector<std::string> ast_to_code(const Grammar& g, const Ast& ast) {
    std::vector<std::string> out;
    unparse(g, ast, out);
    return out;
}

Ast parse_code(const Grammar& g, const std::vector<std::string>& tokens) {
    CodeParser parser(g, tokens);
    std::vector<Ast> result;
    bool ok = parser.parse_type(g.root(), 0, nullptr, result, [&](size_t end) {
        if (end == tokens.size()) return true;
        parser.fail_at(end, "unexpected trailing tokens");
        return false;
    });
    if (ok) return std::move(result.front());
    std::string msg = parser.furthest_msg.empty() ? "no derivation" : parser.furthest_msg;
    throw CodeParseError(msg, static_cast<int>(parser.furthest));
}

}  // namespace treegen
