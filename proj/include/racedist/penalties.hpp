#ifndef racedist_penalties_hpp
#define racedist_penalties_hpp

#include <cstdint>
#include <optional>
#include <string>

namespace racedist {

/*
 * User-facing gap penalties. Smaller is better: an alignment's score is the
 * sum of the penalties along its path and the engines minimise it.
 */
struct GapPenalties {
    std::int64_t match = 0;
    std::int64_t mismatch = 2;
    std::int64_t insert = 1;
    std::int64_t del = 1;

    // match <= min(mismatch, insert, delete)
    bool match_is_minimum() const;

    // Every penalty shifted by k.
    GapPenalties shifted(std::int64_t k) const;

    bool operator==(const GapPenalties&) const = default;
};

// Parses "match,mismatch,insert,delete". Throws ParseError.
GapPenalties parse_penalties(const std::string& text);

std::string to_string(const GapPenalties& gp);

/*
 * Integer affine delay encoding E(x) = scale * (x + shift). When shift is not
 * given it defaults to -match so the encoded match delay is zero.
 */
struct EncodingParams {
    std::optional<std::int64_t> shift;
    std::int64_t scale = 1;

    std::int64_t shift_for(const GapPenalties& gp) const { return shift.value_or(-gp.match); }
};

// Clock-cycle delays of the lattice's match, mismatch, insert and delete blocks.
struct DelayPenalties {
    std::uint32_t match = 0;
    std::uint32_t mismatch = 0;
    std::uint32_t insert = 0;
    std::uint32_t del = 0;

    bool operator==(const DelayPenalties&) const = default;
};

// Throws MatchNotMinimum, NegativeDelay(name) or InvalidArgument (scale < 1).
DelayPenalties encode_penalties(const GapPenalties& gp, const EncodingParams& params);

} // namespace racedist

#endif
