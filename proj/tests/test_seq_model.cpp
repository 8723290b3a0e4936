#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "racedist/errors.hpp"
#include "racedist/penalties.hpp"
#include "racedist/sequence.hpp"
#include "support.hpp"

using namespace racedist;

TEST_CASE("packing puts base 0 in the low bits") {
    const PackedSequence s = PackedSequence::from_text("ACGT");
    CHECK(s.size() == 4);
    REQUIRE(s.words().size() == 1);
    CHECK(s.words()[0] == 0b11100100u);
    CHECK(s[2] == Base::G);
    CHECK(s.to_string() == "ACGT");
}

TEST_CASE("lower case is accepted") {
    CHECK(PackedSequence::from_text("acgt") == PackedSequence::from_text("ACGT"));
}

TEST_CASE("ambiguous bases are rejected with their position") {
    try {
        PackedSequence::from_text("ACNT");
        FAIL("expected AmbiguousBase");
    } catch (const AmbiguousBase& e) {
        CHECK(e.position == 2);
        CHECK(e.base == 'N');
    }
    CHECK_THROWS_AS(PackedSequence::from_text(""), InvalidArgument);
}

TEST_CASE("from_codes range check") {
    const std::vector<std::uint8_t> ok{0, 1, 2, 3}, bad{0, 4};
    CHECK(PackedSequence::from_codes(ok).to_string() == "ACGT");
    CHECK_THROWS_AS(PackedSequence::from_codes(bad), InvalidArgument);
}

TEST_CASE("round trip across word boundaries") {
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        const std::string s = testgen::random_bases(rng, testgen::between(rng, 1, 200));
        const PackedSequence p = PackedSequence::from_text(s);
        CHECK(p.to_string() == s);
        CHECK(p.words().size() == (s.size() + 31) / 32);
        const std::size_t pos = rng.below(s.size());
        const std::size_t len = testgen::between(rng, 1, s.size() - pos);
        CHECK(p.subseq(pos, len).to_string() == s.substr(pos, len));
        CHECK(PackedSequence::from_codes(p.codes()) == p);
    }
}

TEST_CASE("subseq bounds") {
    const PackedSequence p = PackedSequence::from_text("ACGTACGT");
    CHECK_THROWS_AS(p.subseq(4, 5), InvalidArgument);
    CHECK_THROWS_AS(p.subseq(0, 0), InvalidArgument);
}

TEST_CASE("fasta parsing") {
    std::istringstream in(">chr1 first\r\nACGT\r\nacgt\n>chr2\nNNAC\n\n>empty\n");
    const auto recs = read_fasta(in);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].name == "chr1");
    CHECK(recs[0].sequence == "ACGTacgt");
    CHECK(recs[1].sequence == "NNAC");
    CHECK(recs[2].sequence.empty());

    std::istringstream bad("ACGT\n>x\nAC\n");
    CHECK_THROWS_AS(read_fasta(bad), ParseError);
}

TEST_CASE("fastq parsing and writing") {
    std::istringstream in("@r1\nACGT\n+\nIIII\n@r2 extra\nGG\n+r2\n!!");
    const auto recs = read_fastq(in);
    REQUIRE(recs.size() == 2);
    CHECK(recs[1].name == "r2");
    CHECK(recs[1].sequence == "GG");

    std::ostringstream out;
    write_fastq(out, recs[0]);
    CHECK(out.str() == "@r1\nACGT\n+\nIIII\n");

    std::istringstream truncated("@r1\nACGT\n+\n");
    CHECK_THROWS_AS(read_fastq(truncated), ParseError);
    std::istringstream mismatched("@r1\nACGT\n+\nII\n");
    CHECK_THROWS_AS(read_fastq(mismatched), ParseError);
}

TEST_CASE("strip_ambiguous") {
    const CleanedSequence c = strip_ambiguous("acNNgtRY");
    CHECK(c.sequence == "ACGT");
    CHECK(c.removed == 4);
}

TEST_CASE("penalty parsing") {
    const GapPenalties gp = parse_penalties("0,2,1,1");
    CHECK(gp == GapPenalties{0, 2, 1, 1});
    CHECK(to_string(gp) == "0,2,1,1");
    CHECK(parse_penalties("-1,3,2,2") == GapPenalties{-1, 3, 2, 2});
    CHECK_THROWS_AS(parse_penalties("0,2,1"), ParseError);
    CHECK_THROWS_AS(parse_penalties("0,2,x,1"), ParseError);
    CHECK_THROWS_AS(parse_penalties("0,2,1,1,1"), ParseError);
}

TEST_CASE("penalty encoding") {
    CHECK(encode_penalties({0, 2, 1, 1}, {}) == DelayPenalties{0, 2, 1, 1});
    CHECK(encode_penalties({-1, 3, 2, 2}, {}) == DelayPenalties{0, 4, 3, 3});
    CHECK(encode_penalties({0, 2, 1, 1}, {std::int64_t{1}, 3}) == DelayPenalties{3, 9, 6, 6});
    CHECK_THROWS_AS(encode_penalties({2, 1, 3, 3}, {}), MatchNotMinimum);
    CHECK_THROWS_AS(encode_penalties({0, 2, 1, 1}, {std::nullopt, 0}), InvalidArgument);
    try {
        encode_penalties({-2, 0, 1, 1}, {std::int64_t{1}, 1});
        FAIL("expected NegativeDelay");
    } catch (const NegativeDelay& e) {
        CHECK(e.name == "match");
    }
}

TEST_CASE("encoding is affine for random penalties") {
    Rng rng(5);
    for (int t = 0; t < 500; ++t) {
        const GapPenalties gp = testgen::random_penalties(rng, -3);
        const std::int64_t k = -gp.match + static_cast<std::int64_t>(rng.below(3));
        const std::int64_t m = 1 + static_cast<std::int64_t>(rng.below(4));
        const DelayPenalties d = encode_penalties(gp, {k, m});
        CHECK(d.match == m * (gp.match + k));
        CHECK(d.mismatch == m * (gp.mismatch + k));
        CHECK(d.insert == m * (gp.insert + k));
        CHECK(d.del == m * (gp.del + k));
        CHECK(d.match <= std::min({d.mismatch, d.insert, d.del}));
    }
}
