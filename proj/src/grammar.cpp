#include "treegen/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "treegen/errors.hpp"
#include "treegen/util.hpp"

namespace treegen {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Raw declarations as read from the file, resolved in a second pass.
struct RawField {
    std::string type_name;
    Cardinality card;
    std::string field_name;
    int line, col;
};
struct RawCtor {
    std::string name;
    std::vector<RawField> fields;
    int line, col;
};
struct RawTypeDecl {
    std::string name;
    std::vector<RawCtor> ctors;
    int line;
};
struct RawTerminalDecl {
    std::string name;
    TerminalClass cls;
    int line;
};
struct RawTemplate {
    std::string ctor;
    // (is_literal, text, separator_or_nullopt)
    std::vector<std::tuple<bool, std::string, std::optional<std::string>>> items;
    int line;
};

class LineScanner {
public:
    LineScanner(std::string_view text, int line) : text_(text), line_(line) {}

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    bool eof() {
        skip_ws();
        return pos_ >= text_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c, const char* what) {
        if (!accept(c))
            throw GrammarError(std::string("expected '") + c + "' " + what, line_, col());
    }
    std::string ident(const char* what) {
        skip_ws();
        if (pos_ >= text_.size() || !is_ident_start(text_[pos_]))
            throw GrammarError(std::string("expected ") + what, line_, col());
        size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }
    std::string quoted() {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != '"')
            throw GrammarError("expected quoted literal", line_, col());
        ++pos_;
        size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '"') ++pos_;
        if (pos_ >= text_.size())
            throw GrammarError("unterminated quoted literal", line_, col());
        std::string out(text_.substr(start, pos_ - start));
        ++pos_;
        if (out.empty())
            throw GrammarError("empty quoted literal", line_, col());
        return out;
    }
    int col() { return static_cast<int>(pos_) + 1; }
    int line() const { return line_; }

private:
    std::string_view text_;
    size_t pos_ = 0;
    int line_;
};

}  // namespace

class GrammarParser {
public:
    Grammar parse(std::string_view source) {
        read_lines(source);
        Grammar g;
        build_types(g);
        build_rules(g);
        attach_templates(g);
        validate(g);
        return g;
    }

private:
    std::vector<RawTypeDecl> type_decls_;
    std::vector<RawTerminalDecl> terminal_decls_;
    std::vector<RawTemplate> templates_;
    std::vector<std::pair<std::string, int>> decl_order_;  // (name, kind: 0 type, 1 terminal)

    void read_lines(std::string_view source) {
        std::istringstream in{std::string(source)};
        std::string line;
        int lineno = 0;
        int open_decl = -1;  // index into type_decls_ accepting '|' continuations
        while (std::getline(in, line)) {
            ++lineno;
            std::string_view sv = line;
            size_t first = sv.find_first_not_of(" \t\r");
            if (first == std::string_view::npos) continue;
            if (sv[first] == '#') continue;
            while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ' || sv.back() == '\t'))
                sv.remove_suffix(1);

            if (sv[first] == '|') {
                if (open_decl < 0)
                    throw GrammarError("continuation line without a type declaration", lineno, 1);
                LineScanner sc(sv.substr(first + 1), lineno);
                parse_ctor_list(sc, type_decls_[static_cast<size_t>(open_decl)]);
                continue;
            }

            LineScanner sc(sv, lineno);
            std::string head = sc.ident("type, 'terminal', or constructor name");
            if (head == "terminal") {
                parse_terminal(sc);
                open_decl = -1;
            } else if (sc.peek() == '=') {
                sc.expect('=', "after type name");
                type_decls_.push_back(RawTypeDecl{head, {}, lineno});
                open_decl = static_cast<int>(type_decls_.size()) - 1;
                decl_order_.emplace_back(head, 0);
                if (!sc.eof()) parse_ctor_list(sc, type_decls_.back());
            } else if (sc.peek() == '-') {
                sc.expect('-', "in '->'");
                sc.expect('>', "in '->'");
                parse_template(sc, head, lineno);
                open_decl = -1;
            } else {
                throw GrammarError("expected '=', '->', or 'terminal' declaration", lineno, sc.col());
            }
        }
    }

    void parse_terminal(LineScanner& sc) {
        std::string name = sc.ident("terminal type name");
        sc.expect(':', "after terminal name");
        std::string cls = sc.ident("terminal class ('string' or 'int')");
        TerminalClass tc;
        if (cls == "string") tc = TerminalClass::string_token;
        else if (cls == "int") tc = TerminalClass::int_token;
        else throw GrammarError("unknown terminal class '" + cls + "'", sc.line(), sc.col());
        if (!sc.eof())
            throw GrammarError("trailing text after terminal declaration", sc.line(), sc.col());
        terminal_decls_.push_back(RawTerminalDecl{name, tc, sc.line()});
        decl_order_.emplace_back(name, 1);
    }

    void parse_ctor_list(LineScanner& sc, RawTypeDecl& decl) {
        for (;;) {
            std::string name = sc.ident("constructor name");
            RawCtor ctor{name, {}, sc.line(), sc.col()};
            sc.expect('(', "after constructor name");
            if (!sc.accept(')')) {
                for (;;) {
                    RawField f;
                    f.type_name = sc.ident("field type");
                    f.card = Cardinality::single;
                    if (sc.accept('*')) f.card = Cardinality::sequence;
                    else if (sc.accept('?')) f.card = Cardinality::optional;
                    f.field_name = sc.ident("field name");
                    f.line = sc.line();
                    f.col = sc.col();
                    ctor.fields.push_back(std::move(f));
                    if (sc.accept(')')) break;
                    sc.expect(',', "between fields");
                }
            }
            decl.ctors.push_back(std::move(ctor));
            if (sc.eof()) break;
            sc.expect('|', "between constructors");
        }
    }

    void parse_template(LineScanner& sc, const std::string& ctor, int lineno) {
        RawTemplate t;
        t.ctor = ctor;
        t.line = lineno;
        while (!sc.eof()) {
            if (sc.peek() == '"') {
                t.items.emplace_back(true, sc.quoted(), std::nullopt);
            } else if (sc.accept('$')) {
                std::string field = sc.ident("field name after '$'");
                std::optional<std::string> sep;
                if (sc.accept('{')) {
                    sep = sc.quoted();
                    sc.expect('}', "after separator");
                }
                t.items.emplace_back(false, field, sep);
            } else {
                throw GrammarError("expected quoted literal or $field in template", lineno, sc.col());
            }
        }
        templates_.push_back(std::move(t));
    }

    void build_types(Grammar& g) {
        std::map<std::string, NodeTypeId, std::less<>> by_name;
        std::map<std::string, TerminalClass> terminal_cls;
        for (const auto& td : terminal_decls_) terminal_cls[td.name] = td.cls;

        for (const auto& [name, kind] : decl_order_) {
            if (by_name.count(name))
                throw GrammarError("duplicate type name '" + name + "'");
            NodeType t;
            t.name = name;
            if (kind == 1) {
                t.kind = TypeKind::terminal;
                t.terminal_class = terminal_cls.at(name);
            } else {
                t.kind = TypeKind::composite;
            }
            by_name[name] = static_cast<NodeTypeId>(g.types_.size());
            g.types_.push_back(std::move(t));
        }
        if (g.types_.empty())
            throw GrammarError("grammar declares no types");
        g.root_ = 0;
        if (g.types_[0].kind != TypeKind::composite)
            throw GrammarError("root type '" + g.types_[0].name + "' must be composite (first declaration)");
    }

    void build_rules(Grammar& g) {
        std::set<std::string> ctor_names;
        // Declared rules in file order.
        for (const auto& decl : type_decls_) {
            NodeTypeId head = *g.find_type(decl.name);
            for (const auto& ctor : decl.ctors) {
                if (!ctor_names.insert(ctor.name).second)
                    throw GrammarError("duplicate constructor name '" + ctor.name + "'", ctor.line);
                ProductionRule r;
                r.id = static_cast<int>(g.rules_.size());
                r.name = ctor.name;
                r.head = head;
                for (const auto& rf : ctor.fields) {
                    auto ft = g.find_type(rf.type_name);
                    if (!ft)
                        throw GrammarError("undefined type '" + rf.type_name + "' in constructor '" +
                                               ctor.name + "'",
                                           rf.line);
                    r.fields.push_back(FieldDef{rf.field_name, *ft, rf.card, *ft});
                }
                g.rules_.push_back(std::move(r));
            }
        }
        g.declared_rule_count_ = static_cast<int>(g.rules_.size());

        // Synthetic types and rules for optional/sequence fields, generated in
        // (rule, field) order so ids are deterministic.
        int declared = g.declared_rule_count_;
        for (int rid = 0; rid < declared; ++rid) {
            auto& rule = g.rules_[static_cast<size_t>(rid)];
            for (auto& f : rule.fields) {
                if (f.card == Cardinality::single) continue;
                std::string base = rule.name + "." + f.name;
                NodeType st;
                st.name = base;
                st.kind = TypeKind::composite;
                st.synthetic = true;
                NodeTypeId sid = static_cast<NodeTypeId>(g.types_.size());
                g.types_.push_back(std::move(st));
                f.frontier = sid;

                if (f.card == Cardinality::sequence) {
                    ProductionRule more;
                    more.id = static_cast<int>(g.rules_.size());
                    more.name = base + ".more";
                    more.head = sid;
                    more.synthetic = true;
                    more.fields.push_back(FieldDef{"elem", f.type, Cardinality::single, f.type});
                    more.fields.push_back(FieldDef{"rest", sid, Cardinality::single, sid});
                    g.rules_.push_back(std::move(more));

                    ProductionRule end;
                    end.id = static_cast<int>(g.rules_.size());
                    end.name = base + ".end";
                    end.head = sid;
                    end.synthetic = true;
                    g.rules_.push_back(std::move(end));
                } else {
                    ProductionRule some;
                    some.id = static_cast<int>(g.rules_.size());
                    some.name = base + ".some";
                    some.head = sid;
                    some.synthetic = true;
                    some.fields.push_back(FieldDef{"value", f.type, Cardinality::single, f.type});
                    g.rules_.push_back(std::move(some));

                    ProductionRule none;
                    none.id = static_cast<int>(g.rules_.size());
                    none.name = base + ".none";
                    none.head = sid;
                    none.synthetic = true;
                    g.rules_.push_back(std::move(none));
                }
            }
        }

        g.rules_by_head_.assign(g.types_.size(), {});
        for (const auto& r : g.rules_)
            g.rules_by_head_[static_cast<size_t>(r.head)].push_back(r.id);
    }

    void attach_templates(Grammar& g) {
        g.templates_.assign(g.rules_.size(), {});
        g.has_template_.assign(g.rules_.size(), false);
        for (const auto& t : templates_) {
            auto rid = g.find_rule(t.ctor);
            if (!rid)
                throw GrammarError("template for unknown constructor '" + t.ctor + "'", t.line);
            const auto& rule = g.rule(*rid);
            if (g.has_template_[static_cast<size_t>(*rid)])
                throw GrammarError("duplicate template for '" + t.ctor + "'", t.line);
            std::vector<TemplateItem> items;
            std::vector<bool> seen(rule.fields.size(), false);
            for (const auto& [is_lit, text, sep] : t.items) {
                TemplateItem item;
                if (is_lit) {
                    item.is_literal = true;
                    item.literal = text;
                } else {
                    int fi = -1;
                    for (size_t i = 0; i < rule.fields.size(); ++i)
                        if (rule.fields[i].name == text) fi = static_cast<int>(i);
                    if (fi < 0)
                        throw GrammarError("template for '" + t.ctor + "' references unknown field '" +
                                               text + "'",
                                           t.line);
                    if (seen[static_cast<size_t>(fi)])
                        throw GrammarError("template for '" + t.ctor + "' repeats field '" + text + "'",
                                           t.line);
                    seen[static_cast<size_t>(fi)] = true;
                    if (sep && rule.fields[static_cast<size_t>(fi)].card != Cardinality::sequence)
                        throw GrammarError("separator given for non-sequence field '" + text + "'",
                                           t.line);
                    item.field_index = fi;
                    item.separator = sep;
                }
                items.push_back(std::move(item));
            }
            for (size_t i = 0; i < rule.fields.size(); ++i)
                if (!seen[i])
                    throw GrammarError("template for '" + t.ctor + "' omits field '" +
                                           rule.fields[i].name + "'",
                                       t.line);
            g.templates_[static_cast<size_t>(*rid)] = std::move(items);
            g.has_template_[static_cast<size_t>(*rid)] = true;
        }
    }

    void validate(Grammar& g) {
        for (size_t tid = 0; tid < g.types_.size(); ++tid) {
            const auto& t = g.types_[tid];
            if (t.kind == TypeKind::composite &&
                g.rules_by_head_[tid].empty())
                throw GrammarError("composite type '" + t.name + "' has no production rules");
        }
        // Reachability from the root; unreachable types are warnings.
        std::vector<bool> reached(g.types_.size(), false);
        std::vector<NodeTypeId> work{g.root_};
        reached[static_cast<size_t>(g.root_)] = true;
        while (!work.empty()) {
            NodeTypeId cur = work.back();
            work.pop_back();
            if (g.types_[static_cast<size_t>(cur)].kind != TypeKind::composite) continue;
            for (int rid : g.rules_by_head_[static_cast<size_t>(cur)]) {
                for (const auto& f : g.rule(rid).fields) {
                    for (NodeTypeId next : {f.type, f.frontier}) {
                        if (!reached[static_cast<size_t>(next)]) {
                            reached[static_cast<size_t>(next)] = true;
                            work.push_back(next);
                        }
                    }
                }
            }
        }
        for (size_t tid = 0; tid < g.types_.size(); ++tid)
            if (!reached[tid])
                g.warnings_.push_back("type '" + g.types_[tid].name + "' is unreachable from the root");
    }
};

Grammar Grammar::load(std::string_view source) {
    return GrammarParser().parse(source);
}

Grammar Grammar::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open grammar file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load(ss.str());
}

std::optional<NodeTypeId> Grammar::find_type(std::string_view name) const {
    for (size_t i = 0; i < types_.size(); ++i)
        if (types_[i].name == name) return static_cast<NodeTypeId>(i);
    return std::nullopt;
}

NodeTypeId Grammar::type_id(std::string_view name) const {
    auto id = find_type(name);
    if (!id) throw GrammarError("unknown type '" + std::string(name) + "'");
    return *id;
}

std::optional<int> Grammar::find_rule(std::string_view name) const {
    for (const auto& r : rules_)
        if (r.name == name) return r.id;
    return std::nullopt;
}

const std::vector<int>& Grammar::rules_for(NodeTypeId head) const {
    if (!is_composite(head))
        throw InvalidArgument("rules_for called on terminal type '" + type(head).name + "'");
    return rules_by_head_.at(static_cast<size_t>(head));
}

const std::vector<TemplateItem>* Grammar::template_for(int rule_id) const {
    if (!has_template_.at(static_cast<size_t>(rule_id))) return nullptr;
    return &templates_[static_cast<size_t>(rule_id)];
}

std::string Grammar::serialize() const {
    std::ostringstream out;
    // Declarations in original order: composite types with their constructors,
    // terminals inline where declared.
    for (size_t tid = 0; tid < types_.size(); ++tid) {
        const auto& t = types_[tid];
        if (t.synthetic) continue;
        if (t.kind == TypeKind::terminal) {
            out << "terminal " << t.name << " : "
                << (t.terminal_class == TerminalClass::int_token ? "int" : "string") << "\n";
            continue;
        }
        out << t.name << " = ";
        bool first = true;
        for (int rid : rules_by_head_[tid]) {
            const auto& r = rule(rid);
            if (r.synthetic) continue;
            if (!first) out << " | ";
            first = false;
            out << r.name << "(";
            for (size_t fi = 0; fi < r.fields.size(); ++fi) {
                if (fi) out << ", ";
                const auto& f = r.fields[fi];
                out << type(f.type).name;
                if (f.card == Cardinality::sequence) out << "*";
                else if (f.card == Cardinality::optional) out << "?";
                out << " " << f.name;
            }
            out << ")";
        }
        out << "\n";
    }
    for (const auto& r : rules_) {
        if (r.synthetic || !has_template_[static_cast<size_t>(r.id)]) continue;
        out << r.name << " ->";
        for (const auto& item : templates_[static_cast<size_t>(r.id)]) {
            if (item.is_literal) {
                out << " \"" << item.literal << "\"";
            } else {
                out << " $" << r.fields[static_cast<size_t>(item.field_index)].name;
                if (item.separator) out << "{\"" << *item.separator << "\"}";
            }
        }
        out << "\n";
    }
    return out.str();
}

uint64_t Grammar::hash() const { return fnv1a(serialize()); }

bool Grammar::operator==(const Grammar& other) const {
    return types_ == other.types_ && rules_ == other.rules_ && root_ == other.root_ &&
           templates_ == other.templates_ && has_template_ == other.has_template_;
}

}  // namespace treegen
