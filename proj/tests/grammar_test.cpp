#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "treegen/errors.hpp"
#include "treegen/grammar.hpp"

using namespace treegen;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Independent count of declarations straight off the grammar text, used as an
// oracle against the parser. Works because every constructor carries exactly
// one '(' on a declaration line and quoted literals only appear on template
// lines (which contain "->").
struct TextCounts {
    int declared_rules = 0;
    int declared_types = 0;   // composite + terminal
    int repeated_fields = 0;  // '*' or '?' occurrences -> one synthetic type, two rules each
};

TextCounts scan_counts(const std::string& text) {
    TextCounts c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        if (line.find("->") != std::string::npos) continue;  // template line
        bool continuation = line[first] == '|';
        if (line.compare(first, 9, "terminal ") == 0) {
            ++c.declared_types;
            continue;
        }
        if (!continuation) {
            if (line.find('=') == std::string::npos) continue;
            ++c.declared_types;
        }
        for (char ch : line) {
            if (ch == '(') ++c.declared_rules;
            if (ch == '*' || ch == '?') ++c.repeated_fields;
        }
    }
    return c;
}

const char* kToy = R"(root = Pair(item first, item? second) | Wrap(item* items)
item = Leaf(word value)
terminal word : string
Pair -> "<" $first $second ">"
Wrap -> "[" $items{","} "]"
Leaf -> $value
)";

}  // namespace

TEST_CASE("python-mini grammar matches text-scan oracle") {
    std::string path = std::string(TREEGEN_DATA_DIR) + "/python_mini.grammar";
    std::string text = read_file(path);
    TextCounts oracle = scan_counts(text);
    REQUIRE(oracle.declared_rules > 0);

    Grammar g = Grammar::load(text);
    CHECK(g.declared_rule_count() == oracle.declared_rules);
    int declared_types = 0;
    for (const auto& t : g.types())
        if (!t.synthetic) ++declared_types;
    CHECK(declared_types == oracle.declared_types);
    CHECK(static_cast<int>(g.types().size()) == oracle.declared_types + oracle.repeated_fields);
    CHECK(static_cast<int>(g.rules().size()) ==
          oracle.declared_rules + 2 * oracle.repeated_fields);
    CHECK(g.type(g.root()).name == "stmt");
    CHECK(g.warnings().empty());
}

TEST_CASE("declared rule ids follow file order") {
    Grammar g = Grammar::load(kToy);
    CHECK(g.rule(0).name == "Pair");
    CHECK(g.rule(1).name == "Wrap");
    CHECK(g.rule(2).name == "Leaf");
    CHECK(g.declared_rule_count() == 3);
    for (int i = 0; i < static_cast<int>(g.rules().size()); ++i)
        CHECK(g.rule(i).id == i);
}

TEST_CASE("synthetic rules lower optional and sequence fields") {
    Grammar g = Grammar::load(kToy);

    const auto& pair = g.rule(*g.find_rule("Pair"));
    REQUIRE(pair.fields.size() == 2);
    CHECK(pair.fields[0].card == Cardinality::single);
    CHECK(pair.fields[0].frontier == pair.fields[0].type);
    CHECK(pair.fields[1].card == Cardinality::optional);
    CHECK(pair.fields[1].frontier != pair.fields[1].type);

    NodeTypeId opt = pair.fields[1].frontier;
    CHECK(g.type(opt).name == "Pair.second");
    CHECK(g.type(opt).synthetic);
    const auto& opt_rules = g.rules_for(opt);
    REQUIRE(opt_rules.size() == 2);
    CHECK(g.rule(opt_rules[0]).name == "Pair.second.some");
    CHECK(g.rule(opt_rules[1]).name == "Pair.second.none");
    REQUIRE(g.rule(opt_rules[0]).fields.size() == 1);
    CHECK(g.rule(opt_rules[0]).fields[0].type == pair.fields[1].type);
    CHECK(g.rule(opt_rules[1]).fields.empty());

    const auto& wrap = g.rule(*g.find_rule("Wrap"));
    NodeTypeId seq = wrap.fields[0].frontier;
    CHECK(g.type(seq).name == "Wrap.items");
    const auto& seq_rules = g.rules_for(seq);
    REQUIRE(seq_rules.size() == 2);
    const auto& more = g.rule(seq_rules[0]);
    CHECK(more.name == "Wrap.items.more");
    REQUIRE(more.fields.size() == 2);
    CHECK(more.fields[0].type == wrap.fields[0].type);
    CHECK(more.fields[1].type == seq);
    CHECK(g.rule(seq_rules[1]).name == "Wrap.items.end");

    // Synthetic rule ids continue past the declared block.
    for (int rid : {opt_rules[0], opt_rules[1], seq_rules[0], seq_rules[1]})
        CHECK(rid >= g.declared_rule_count());
}

TEST_CASE("serialize then load reproduces the grammar") {
    for (const std::string& text :
         {std::string(kToy),
          read_file(std::string(TREEGEN_DATA_DIR) + "/python_mini.grammar")}) {
        Grammar g = Grammar::load(text);
        Grammar g2 = Grammar::load(g.serialize());
        CHECK(g == g2);
        CHECK(g.hash() == g2.hash());
        CHECK(g.serialize() == g2.serialize());
    }
}

TEST_CASE("hash distinguishes different grammars") {
    Grammar a = Grammar::load("root = A(word w)\nterminal word : string\nA -> $w\n");
    Grammar b = Grammar::load("root = B(word w)\nterminal word : string\nB -> $w\n");
    CHECK(a.hash() != b.hash());
    CHECK_FALSE(a == b);
}

TEST_CASE("templates resolve field indices and separators") {
    Grammar g = Grammar::load(kToy);
    const auto* t = g.template_for(*g.find_rule("Wrap"));
    REQUIRE(t != nullptr);
    REQUIRE(t->size() == 3);
    CHECK((*t)[0].is_literal);
    CHECK((*t)[0].literal == "[");
    CHECK_FALSE((*t)[1].is_literal);
    CHECK((*t)[1].field_index == 0);
    REQUIRE((*t)[1].separator.has_value());
    CHECK(*(*t)[1].separator == ",");
    CHECK((*t)[2].literal == "]");

    Grammar plain = Grammar::load("root = A(word w)\nterminal word : string\n");
    CHECK(plain.template_for(0) == nullptr);
}

TEST_CASE("load rejects malformed grammars") {
    CHECK_THROWS_AS(Grammar::load(""), GrammarError);
    CHECK_THROWS_AS(Grammar::load("terminal word : string\n"), GrammarError);  // terminal root
    CHECK_THROWS_WITH_AS(
        Grammar::load("root = A(word w)\nroot = B(word w)\nterminal word : string\n"),
        doctest::Contains("duplicate type name 'root'"), GrammarError);
    CHECK_THROWS_WITH_AS(Grammar::load("root = A(missing w)\n"),
                         doctest::Contains("undefined type 'missing'"), GrammarError);
    CHECK_THROWS_WITH_AS(Grammar::load("root = A() | A()\n"),
                         doctest::Contains("duplicate constructor name 'A'"), GrammarError);
    CHECK_THROWS_AS(Grammar::load("root = A()\nB -> \"x\"\n"), GrammarError);
    CHECK_THROWS_AS(Grammar::load("root = A()\nA -> $nope\n"), GrammarError);
    CHECK_THROWS_AS(Grammar::load("root = A(word w)\nterminal word : string\nA -> \"x\"\n"),
                    GrammarError);  // template omits field w
    CHECK_THROWS_AS(Grammar::load("root = A(word w)\nterminal word : string\nA -> $w $w\n"),
                    GrammarError);  // field repeated
    CHECK_THROWS_AS(Grammar::load("terminal word : float\nroot = A(word w)\n"), GrammarError);
    CHECK_THROWS_AS(Grammar::load("root = A(\n"), GrammarError);
    CHECK_THROWS_AS(Grammar::load("| B()\n"), GrammarError);
    CHECK_THROWS_AS(Grammar::load("root = A(word? w)\nterminal word : string\nA -> $w{\",\"}\n"),
                    GrammarError);  // separator on non-sequence field
}

TEST_CASE("parse errors carry line and column") {
    try {
        Grammar::load("root = A(word w)\nterminal word\n");
        FAIL("expected GrammarError");
    } catch (const GrammarError& e) {
        std::string msg = e.what();
        CHECK(msg.find("line 2:") != std::string::npos);
        CHECK(e.line() == 2);
        CHECK(e.col() > 0);
    }
}

TEST_CASE("unreachable types produce warnings") {
    Grammar g = Grammar::load(
        "root = A(word w)\n"
        "orphan = B(word w)\n"
        "terminal word : string\n");
    REQUIRE(g.warnings().size() == 1);
    CHECK(g.warnings()[0].find("orphan") != std::string::npos);
}

TEST_CASE("rules_for rejects terminal types") {
    Grammar g = Grammar::load(kToy);
    CHECK_THROWS_AS(g.rules_for(g.type_id("word")), InvalidArgument);
}

TEST_CASE("comments and blank lines are ignored") {
    Grammar g = Grammar::load(
        "# leading comment\n"
        "\n"
        "root = A(word w)\n"
        "# between\n"
        "terminal word : string\n"
        "\n");
    CHECK(g.declared_rule_count() == 1);
}
