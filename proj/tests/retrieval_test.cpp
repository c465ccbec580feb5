#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "testutil.hpp"
#include "treegen/errors.hpp"
#include "treegen/retrieval.hpp"
#include "treegen/transducer.hpp"

using namespace treegen;
using testutil::toks;

namespace {

Grammar& mini() {
    static Grammar g = Grammar::load_file(std::string(TREEGEN_DATA_DIR) + "/python_mini.grammar");
    return g;
}

TrainingExample make_example(const std::string& id, const std::string& nl,
                             const std::string& code) {
    TrainingExample ex;
    ex.id = id;
    ex.nl = toks(nl);
    ex.code_tokens = toks(code);
    ex.tree = ast_to_actions(mini(), parse_code(mini(), ex.code_tokens), ex.nl);
    return ex;
}

// Test-local Levenshtein written differently from the library (full matrix,
// no row swapping) to serve as an independent oracle.
int lev_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
    for (size_t i = 0; i <= a.size(); ++i)
        for (size_t j = 0; j <= b.size(); ++j) {
            if (i == 0) d[i][j] = static_cast<int>(j);
            else if (j == 0) d[i][j] = static_cast<int>(i);
            else
                d[i][j] = std::min(std::min(d[i - 1][j], d[i][j - 1]) + 1,
                                   d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1));
        }
    return d[a.size()][b.size()];
}

std::string temp_path(const char* name) {
    return std::string("/tmp/treegen_test_") + name + "_" + std::to_string(::getpid());
}

}  // namespace

TEST_CASE("edit distance matches the stated examples") {
    CHECK(edit_distance(toks("a b c"), toks("a b c")) == 0);
    CHECK(edit_distance({}, toks("x y")) == 2);
    CHECK(edit_distance(toks("params is an empty list"), toks("lst is an empty list")) == 1);
    CHECK(edit_distance({}, {}) == 0);
}

TEST_CASE("similarity follows 1 - d/max and its boundary cases") {
    CHECK(similarity(toks("a b c d e"), toks("a b c d e")) == 1.0);
    CHECK(similarity(toks("params is an empty list"), toks("lst is an empty list")) ==
          doctest::Approx(0.8).epsilon(1e-12));
    CHECK(similarity(toks("a b c"), toks("x y z")) == 0.0);
    CHECK_THROWS_AS(similarity({}, {}), InvalidArgument);
    CHECK(similarity({}, toks("a b")) == 0.0);
}

TEST_CASE("similarity and edit distance properties on random pairs") {
    std::mt19937 rng(7);
    std::vector<std::vector<std::string>> sents;
    for (int i = 0; i < 30; ++i) {
        // Small vocabulary so overlaps are common.
        std::uniform_int_distribution<int> len(1, 9), word(0, 5);
        std::vector<std::string> s;
        int n = len(rng);
        for (int k = 0; k < n; ++k) s.push_back(std::string(1, static_cast<char>('a' + word(rng))));
        sents.push_back(std::move(s));
    }
    for (const auto& a : sents)
        for (const auto& b : sents) {
            int d = edit_distance(a, b);
            CHECK(d == lev_oracle(a, b));
            CHECK(d == edit_distance(b, a));
            CHECK((d == 0) == (a == b));
            double s = similarity(a, b);
            CHECK(s == similarity(b, a));
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
    // Triangle inequality on sampled triples.
    std::uniform_int_distribution<size_t> pick(0, sents.size() - 1);
    for (int t = 0; t < 200; ++t) {
        const auto &a = sents[pick(rng)], &b = sents[pick(rng)], &c = sents[pick(rng)];
        CHECK(edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c));
    }
}

TEST_CASE("retrieval returns the exact match first") {
    std::vector<TrainingExample> exs;
    exs.push_back(make_example("e1", "make x an empty list", "x = [ ]"));
    exs.push_back(make_example("e2", "return the sum", "return ( a + b )"));
    exs.push_back(make_example("e3", "do nothing at all", "pass"));
    RetrievalIndex index = build_index(mini(), exs);

    auto top = retrieve(index, toks("return the sum"), 1);
    REQUIRE(top.size() == 1);
    CHECK(index.examples[static_cast<size_t>(top[0].index)].id == "e2");
    CHECK(top[0].similarity == 1.0);

    auto all = retrieve(index, toks("return the sum"), 99);
    CHECK(all.size() == 3);  // M larger than the corpus truncates to everything
    CHECK(std::is_sorted(all.begin(), all.end(),
                         [](auto& a, auto& b) { return a.similarity > b.similarity; }));
}

TEST_CASE("retrieval agrees with a brute-force sort on 50 synthetic examples") {
    std::mt19937 rng(13);
    std::vector<TrainingExample> exs;
    std::uniform_int_distribution<int> len(1, 8), word(0, 4);
    for (int i = 0; i < 50; ++i) {
        std::vector<std::string> nl;
        int n = len(rng);
        for (int k = 0; k < n; ++k) nl.push_back(std::string(1, static_cast<char>('a' + word(rng))));
        TrainingExample ex;
        char id[8];
        std::snprintf(id, sizeof id, "id%02d", i);
        ex.id = id;
        ex.nl = nl;
        ex.code_tokens = toks("pass");
        ex.tree = ast_to_actions(mini(), parse_code(mini(), ex.code_tokens), ex.nl);
        exs.push_back(std::move(ex));
    }
    RetrievalIndex index = build_index(mini(), exs);

    std::vector<std::string> q = toks("a b c a");
    for (int m : {1, 3, 10, 50}) {
        auto got = retrieve(index, q, m);

        // Oracle: exhaustive scoring, full sort by (similarity desc, id asc).
        std::vector<std::pair<double, std::string>> scored;
        for (const auto& ex : index.examples) scored.push_back({similarity(q, ex.nl), ex.id});
        std::sort(scored.begin(), scored.end(), [](auto& a, auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });

        REQUIRE(got.size() == std::min<size_t>(static_cast<size_t>(m), scored.size()));
        for (size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].similarity == scored[i].first);
            CHECK(index.examples[static_cast<size_t>(got[i].index)].id == scored[i].second);
        }
    }
}

TEST_CASE("retrieval breaks similarity ties by ascending id") {
    std::vector<TrainingExample> exs;
    // Same sentence under shuffled ids: every similarity ties.
    for (const char* id : {"zz", "aa", "mm"})
        exs.push_back(make_example(id, "same words here", "pass"));
    RetrievalIndex index = build_index(mini(), exs);
    auto got = retrieve(index, toks("same words here"), 3);
    REQUIRE(got.size() == 3);
    CHECK(index.examples[static_cast<size_t>(got[0].index)].id == "aa");
    CHECK(index.examples[static_cast<size_t>(got[1].index)].id == "mm");
    CHECK(index.examples[static_cast<size_t>(got[2].index)].id == "zz");
}

TEST_CASE("retrieve validates arguments") {
    RetrievalIndex index = build_index(mini(), {});
    CHECK(retrieve(index, toks("q"), 5).empty());
    CHECK_THROWS_AS(retrieve(index, toks("q"), 0), InvalidArgument);
}

TEST_CASE("build_index validates examples and applies lowercasing") {
    CHECK_THROWS_AS(
        build_index(mini(), {make_example("a", "x y", "pass"), make_example("a", "y z", "pass")}),
        DataError);

    TrainingExample no_nl = make_example("b", "tmp", "pass");
    no_nl.nl.clear();
    CHECK_THROWS_AS(build_index(mini(), {no_nl}), DataError);

    TrainingExample cased = make_example("c", "Make X Empty", "pass");
    RetrievalIndex lc = build_index(mini(), {cased, make_example("d", "other words", "pass")},
                                    /*lowercase=*/true);
    CHECK(lc.examples[0].nl == toks("make x empty"));
    CHECK(lc.lowercase);
}

TEST_CASE("norm constant equals an independent leave-one-out computation") {
    std::mt19937 rng(99);
    std::vector<TrainingExample> exs;
    std::uniform_int_distribution<int> len(2, 7), word(0, 3);
    for (int i = 0; i < 20; ++i) {
        std::vector<std::string> nl;
        int n = len(rng);
        for (int k = 0; k < n; ++k) nl.push_back(std::string(1, static_cast<char>('a' + word(rng))));
        TrainingExample ex;
        ex.id = "n" + std::to_string(i);
        ex.nl = nl;
        ex.code_tokens = toks("pass");
        ex.tree = ast_to_actions(mini(), parse_code(mini(), ex.code_tokens), ex.nl);
        exs.push_back(std::move(ex));
    }
    RetrievalIndex index = build_index(mini(), exs);

    // Oracle: direct leave-one-out mean over the raw sentences using the
    // test-local distance.
    double sum = 0.0;
    for (size_t i = 0; i < exs.size(); ++i) {
        double best = 0.0;
        for (size_t j = 0; j < exs.size(); ++j) {
            if (i == j) continue;
            double longest = static_cast<double>(std::max(exs[i].nl.size(), exs[j].nl.size()));
            best = std::max(best, 1.0 - lev_oracle(exs[i].nl, exs[j].nl) / longest);
        }
        sum += best;
    }
    double expected = sum / static_cast<double>(exs.size());
    CHECK(index.norm_constant == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("index files roundtrip and reject mismatches") {
    std::vector<TrainingExample> exs;
    for (int i = 0; i < 10; ++i)
        exs.push_back(make_example("r" + std::to_string(i),
                                   "query number word" + std::to_string(i),
                                   i % 2 ? "x = [ ]" : "return foo ( a , b )"));
    RetrievalIndex index = build_index(mini(), exs);

    std::string path = temp_path("index");
    save_index(index, path);
    RetrievalIndex loaded = load_index(path, mini());
    CHECK(loaded.examples == index.examples);
    CHECK(loaded.norm_constant == index.norm_constant);
    CHECK(loaded.lowercase == index.lowercase);

    // Deterministic bytes on re-save.
    std::string path2 = temp_path("index2");
    save_index(loaded, path2);
    std::ifstream f1(path), f2(path2);
    std::stringstream b1, b2;
    b1 << f1.rdbuf();
    b2 << f2.rdbuf();
    CHECK(b1.str() == b2.str());

    // Wrong grammar.
    Grammar other = Grammar::load("root = A(word w)\nterminal word : string\nA -> $w\n");
    CHECK_THROWS_AS(load_index(path, other), DataError);

    // Corrupted header.
    {
        std::ofstream out(path);
        out << "{\"format_version\": 99}\n";
    }
    CHECK_THROWS_AS(load_index(path, mini()), DataError);
    {
        std::ofstream out(path);
        out << "not json\n";
    }
    CHECK_THROWS_AS(load_index(path, mini()), DataError);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}
