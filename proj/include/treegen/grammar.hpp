// grammar.hpp -- ASDL-style abstract syntax grammar loaded from a text file.
//
// A grammar declares composite node types as alternatives of constructors
// with typed fields, plus string/int terminal types. Optional and sequence
// fields are lowered to synthetic two-rule types at load time so that
// ApplyRule stays the only structural action: a sequence field expands
// through a cons/end chain, an optional field through a some/none choice.
#ifndef TREEGEN_GRAMMAR_HPP
#define TREEGEN_GRAMMAR_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace treegen {

using NodeTypeId = int;

enum class TypeKind { composite, terminal };
enum class TerminalClass { string_token, int_token };
enum class Cardinality { single, optional, sequence };

struct NodeType {
    std::string name;
    TypeKind kind = TypeKind::composite;
    TerminalClass terminal_class = TerminalClass::string_token;  // terminal only
    bool synthetic = false;  // generated for an optional/sequence field

    bool operator==(const NodeType&) const = default;
};

struct FieldDef {
    std::string name;
    NodeTypeId type = -1;        // declared element type
    Cardinality card = Cardinality::single;
    NodeTypeId frontier = -1;    // type pushed when expanding: == type for
                                 // single fields, synthetic type otherwise

    bool operator==(const FieldDef&) const = default;
};

struct ProductionRule {
    int id = -1;
    std::string name;            // constructor name; synthetic rules use dotted names
    NodeTypeId head = -1;
    std::vector<FieldDef> fields;
    bool synthetic = false;

    bool operator==(const ProductionRule&) const = default;
};

// One element of an unparse template: either a literal token or a field
// reference with an optional separator (sequence fields only).
struct TemplateItem {
    bool is_literal = false;
    std::string literal;
    int field_index = -1;
    std::optional<std::string> separator;

    bool operator==(const TemplateItem&) const = default;
};

class Grammar {
public:
    // Parses grammar text. Throws GrammarError with line/column on bad input.
    // Unreachable types are reported through warnings(), not as errors.
    static Grammar load(std::string_view source);
    static Grammar load_file(const std::string& path);

    // Canonical text form of the declared grammar (synthetic machinery is
    // regenerated on load). load(serialize()) is structurally identical.
    std::string serialize() const;
    uint64_t hash() const;  // FNV-1a of serialize()

    NodeTypeId root() const { return root_; }
    const std::vector<NodeType>& types() const { return types_; }
    const NodeType& type(NodeTypeId id) const { return types_.at(static_cast<size_t>(id)); }
    std::optional<NodeTypeId> find_type(std::string_view name) const;
    NodeTypeId type_id(std::string_view name) const;  // throws GrammarError

    bool is_composite(NodeTypeId id) const { return type(id).kind == TypeKind::composite; }
    bool is_terminal(NodeTypeId id) const { return type(id).kind == TypeKind::terminal; }

    // All rules, declared first then synthetic, ids dense 0..R-1.
    const std::vector<ProductionRule>& rules() const { return rules_; }
    const ProductionRule& rule(int id) const { return rules_.at(static_cast<size_t>(id)); }
    std::optional<int> find_rule(std::string_view name) const;
    int declared_rule_count() const { return declared_rule_count_; }

    // Rule ids with the given head, ascending. Throws InvalidArgument for
    // terminal types.
    const std::vector<int>& rules_for(NodeTypeId head) const;

    // Unparse template for a rule, or nullptr when the file declared none.
    const std::vector<TemplateItem>* template_for(int rule_id) const;

    const std::vector<std::string>& warnings() const { return warnings_; }

    bool operator==(const Grammar& other) const;

private:
    Grammar() = default;

    std::vector<NodeType> types_;
    std::vector<ProductionRule> rules_;
    std::vector<std::vector<int>> rules_by_head_;       // indexed by NodeTypeId
    std::vector<std::vector<TemplateItem>> templates_;  // indexed by rule id
    std::vector<bool> has_template_;
    NodeTypeId root_ = -1;
    int declared_rule_count_ = 0;
    std::vector<std::string> warnings_;

    friend class GrammarParser;
};

}  // namespace treegen

#endif
