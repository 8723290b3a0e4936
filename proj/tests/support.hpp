#ifndef racedist_tests_support_hpp
#define racedist_tests_support_hpp

#include <string>
#include <vector>

#include "racedist/aligner.hpp"
#include "racedist/penalties.hpp"
#include "racedist/sequence.hpp"

namespace testgen {

using racedist::Rng;

inline std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + rng.below(hi - lo + 1);
}

inline std::string random_bases(Rng& rng, std::size_t n) {
    std::string s(n, 'A');
    for (auto& c : s) {
        c = "ACGT"[rng.below(4)];
    }
    return s;
}

inline racedist::PackedSequence random_packed(Rng& rng, std::size_t n) {
    return racedist::PackedSequence::from_text(random_bases(rng, n));
}

// Copy of `s` with `edits` random substitutions, insertions or deletions.
inline std::string mutate(Rng& rng, std::string s, std::size_t edits) {
    for (std::size_t e = 0; e < edits; ++e) {
        const std::size_t kind = rng.below(3);
        if (kind == 0 && !s.empty()) {
            std::size_t p = rng.below(s.size());
            s[p] = "ACGT"[(std::string("ACGT").find(s[p]) + 1 + rng.below(3)) % 4];
        } else if (kind == 1) {
            s.insert(s.begin() + static_cast<std::ptrdiff_t>(rng.below(s.size() + 1)), "ACGT"[rng.below(4)]);
        } else if (s.size() > 1) {
            s.erase(s.begin() + static_cast<std::ptrdiff_t>(rng.below(s.size())));
        }
    }
    return s;
}

// Penalties with match the minimum, all in [lo, lo + 6].
inline racedist::GapPenalties random_penalties(Rng& rng, std::int64_t lo = 0) {
    racedist::GapPenalties gp;
    gp.match = lo + static_cast<std::int64_t>(rng.below(2));
    gp.mismatch = gp.match + static_cast<std::int64_t>(rng.below(5));
    gp.insert = gp.match + static_cast<std::int64_t>(rng.below(5));
    gp.del = gp.match + static_cast<std::int64_t>(rng.below(5));
    return gp;
}

} // namespace testgen

#endif
