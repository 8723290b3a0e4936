#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "racedist/dp_oracle.hpp"
#include "racedist/errors.hpp"
#include "support.hpp"

using namespace racedist;

namespace {

PackedSequence seq(const char* s) { return PackedSequence::from_text(s); }

// Cheapest edit script by plain recursion over suffixes, memoized.
std::int64_t brute_nw(const std::string& q, const std::string& r, const GapPenalties& gp) {
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> memo;
    std::function<std::int64_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::int64_t {
        if (i == q.size() && j == r.size()) return 0;
        auto key = std::make_pair(i, j);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        if (i < q.size() && j < r.size()) best = std::min(best, (q[i] == r[j] ? gp.match : gp.mismatch) + go(i + 1, j + 1));
        if (i < q.size()) best = std::min(best, gp.del + go(i + 1, j));
        if (j < r.size()) best = std::min(best, gp.insert + go(i, j + 1));
        return memo[key] = best;
    };
    return go(0, 0);
}

// Semi-global: the best global score of q against every reference prefix.
std::int64_t brute_sw(const std::string& q, const std::string& r, const GapPenalties& gp) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::size_t j = 0; j <= r.size(); ++j) {
        best = std::min(best, j == 0 ? static_cast<std::int64_t>(q.size()) * gp.del : brute_nw(q, r.substr(0, j), gp));
    }
    return best;
}

std::size_t lcs(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    return t[a.size()][b.size()];
}

} // namespace

TEST_CASE("frozen distances") {
    struct Case {
        const char* q;
        const char* r;
        GapPenalties gp;
        std::int64_t nw, sw;
        std::size_t column;
    };
    const Case cases[] = {
        {"AGCACACA", "ACACAACT", {0, 2, 1, 1}, 4, 2, 6},
        {"GATTACA", "GCATGCT", {0, 2, 1, 1}, 6, 4, 3},
        {"GATTACA", "GCATGCT", {0, 1, 1, 1}, 4, 4, 3},
        {"ACGTACGT", "TTACGTAA", {0, 3, 2, 1}, 9, 5, 6},
        {"AAAA", "AA", {0, 2, 1, 1}, 2, 2, 2},
        {"CCCC", "GGGGGG", {-1, 1, 2, 2}, 8, 4, 4},
    };
    for (const Case& c : cases) {
        CAPTURE(c.q);
        CAPTURE(c.r);
        CHECK(nw_distance(seq(c.q), seq(c.r), c.gp) == c.nw);
        const SwResult sw = sw_distance(seq(c.q), seq(c.r), c.gp);
        CHECK(sw.score == c.sw);
        CHECK(sw.end_column == c.column);
    }
}

TEST_CASE("identical strings score zero") {
    CHECK(nw_distance(seq("ACGTTGCA"), seq("ACGTTGCA"), {}) == 0);
    CHECK(sw_distance(seq("ACGTTGCA"), seq("ACGTTGCA"), {}).score == 0);
}

TEST_CASE("empty input is rejected") {
    CHECK_THROWS_AS(nw_distance(PackedSequence{}, seq("A"), {}), InvalidArgument);
    CHECK_THROWS_AS(full_matrix(seq("A"), PackedSequence{}, {}), InvalidArgument);
}

TEST_CASE("matches the brute-force recursion") {
    Rng rng(101);
    for (int t = 0; t < 300; ++t) {
        const std::string q = testgen::random_bases(rng, testgen::between(rng, 1, 9));
        const std::string r = testgen::random_bases(rng, testgen::between(rng, 1, 9));
        const GapPenalties gp = testgen::random_penalties(rng, -2);
        CAPTURE(q);
        CAPTURE(r);
        CHECK(nw_distance(seq(q.c_str()), seq(r.c_str()), gp) == brute_nw(q, r, gp));
        CHECK(sw_distance(seq(q.c_str()), seq(r.c_str()), gp).score == brute_sw(q, r, gp));
    }
}

TEST_CASE("indel-only distance is the LCS distance") {
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        const std::string q = testgen::random_bases(rng, testgen::between(rng, 1, 40));
        const std::string r = testgen::random_bases(rng, testgen::between(rng, 1, 40));
        const auto expected = static_cast<std::int64_t>(q.size() + r.size() - 2 * lcs(q, r));
        CHECK(nw_distance(seq(q.c_str()), seq(r.c_str()), {0, 2, 1, 1}) == expected);
    }
}

TEST_CASE("swapping sequences swaps insert and delete") {
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        const PackedSequence q = testgen::random_packed(rng, testgen::between(rng, 1, 30));
        const PackedSequence r = testgen::random_packed(rng, testgen::between(rng, 1, 30));
        const GapPenalties gp = testgen::random_penalties(rng);
        const GapPenalties swapped{gp.match, gp.mismatch, gp.del, gp.insert};
        CHECK(nw_distance(q, r, gp) == nw_distance(r, q, swapped));
    }
}

TEST_CASE("sw never exceeds nw and the matrix agrees with the rolling rows") {
    Rng rng(9);
    for (int t = 0; t < 200; ++t) {
        const PackedSequence q = testgen::random_packed(rng, testgen::between(rng, 1, 30));
        const PackedSequence r = testgen::random_packed(rng, testgen::between(rng, 1, 30));
        const GapPenalties gp = testgen::random_penalties(rng, -1);
        const ScoreMatrix m = full_matrix(q, r, gp);
        const SwResult sw = sw_distance(q, r, gp);
        CHECK(sw.score <= nw_distance(q, r, gp));
        CHECK(m.at(q.size(), r.size()) == nw_distance(q, r, gp));
        CHECK(m.at(q.size(), sw.end_column) == sw.score);
        for (std::size_t j = 0; j < sw.end_column; ++j) {
            CHECK(m.at(q.size(), j) > sw.score);
        }
    }
}

TEST_CASE("lv caps at max_e") {
    const PackedSequence q = seq("AGCACACA"), r = seq("ACACAACT");
    CHECK(lv_evaluate(q, r, {}, 4).distance == 4);
    CHECK_FALSE(lv_evaluate(q, r, {}, 4).capped);
    CHECK(lv_evaluate(q, r, {}, 3).distance == 3);
    CHECK(lv_evaluate(q, r, {}, 3).capped);
    CHECK(lv_distance(q, r, {}, 10) == 4);
    CHECK_THROWS_AS(lv_evaluate(q, r, {}, -1), InvalidArgument);
}

TEST_CASE("lv equals min(nw, cap) on random pairs") {
    Rng rng(10);
    for (int t = 0; t < 500; ++t) {
        const std::string base = testgen::random_bases(rng, testgen::between(rng, 4, 50));
        const std::string other = testgen::mutate(rng, base, rng.below(8));
        const GapPenalties gp = testgen::random_penalties(rng);
        const std::int64_t cap = static_cast<std::int64_t>(rng.below(15));
        const std::int64_t nw = nw_distance(seq(base.c_str()), seq(other.c_str()), gp);
        const LvResult lv = lv_evaluate(seq(base.c_str()), seq(other.c_str()), gp, cap);
        CHECK(lv.distance == std::min(nw, cap));
        CHECK(lv.capped == (nw > cap));
    }
}

TEST_CASE("backtrack on the worked example") {
    const ScoreMatrix m = full_matrix(seq("AGCACACA"), seq("ACACAACT"), {});
    const AlignmentPath sw = backtrack(m, Mode::Sw);
    CHECK(sw.score == 2);
    CHECK(sw.reference_end == 6);
    CHECK(sw.cigar() == "1=1D4=1D1=");
    const AlignmentPath nw = backtrack(m, Mode::Nw);
    CHECK(nw.score == 4);
    CHECK(nw.reference_end == 8);
}

TEST_CASE("backtracked paths replay to their score") {
    Rng rng(12);
    for (int t = 0; t < 300; ++t) {
        const PackedSequence q = testgen::random_packed(rng, testgen::between(rng, 1, 25));
        const PackedSequence r = testgen::random_packed(rng, testgen::between(rng, 1, 25));
        const GapPenalties gp = testgen::random_penalties(rng, -2);
        const ScoreMatrix m = full_matrix(q, r, gp);
        for (Mode mode : {Mode::Sw, Mode::Nw}) {
            const AlignmentPath p = backtrack(m, mode);
            CHECK(replay_path(p, q, r, gp) == p.score);
            CHECK(p.query_end == q.size());
        }
    }
}

TEST_CASE("replay rejects a corrupted path") {
    const PackedSequence q = seq("ACGT"), r = seq("ACGT");
    AlignmentPath p = backtrack(full_matrix(q, r, {}), Mode::Nw);
    p.ops[1].kind = EditKind::Mismatch;
    CHECK_THROWS_AS(replay_path(p, q, r, {}), InvalidArgument);
}

TEST_CASE("matrix csv") {
    std::ostringstream out;
    write_matrix_csv(out, full_matrix(seq("AC"), seq("A"), {}));
    CHECK(out.str() == ",-,A\n-,0,1\nA,1,0\nC,2,1\n");
}

TEST_CASE("mode names") {
    CHECK(parse_mode("lv") == Mode::Lv);
    CHECK(to_string(Mode::Sw) == "sw");
    CHECK_THROWS_AS(parse_mode("xx"), ParseError);
}
