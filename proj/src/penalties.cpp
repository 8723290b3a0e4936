#include "racedist/penalties.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <vector>

#include "racedist/errors.hpp"

namespace racedist {

bool GapPenalties::match_is_minimum() const {
    return match <= std::min({mismatch, insert, del});
}

GapPenalties GapPenalties::shifted(std::int64_t k) const {
    return {match + k, mismatch + k, insert + k, del + k};
}

GapPenalties parse_penalties(const std::string& text) {
    std::vector<std::int64_t> values;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        std::size_t used = 0;
        try {
            values.push_back(std::stoll(field, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != field.size()) {
            throw ParseError("penalties must be four integers 'match,mismatch,insert,delete', got '" + text + "'");
        }
    }
    if (values.size() != 4) {
        throw ParseError("penalties must be four integers 'match,mismatch,insert,delete', got '" + text + "'");
    }
    return {values[0], values[1], values[2], values[3]};
}

std::string to_string(const GapPenalties& gp) {
    return std::to_string(gp.match) + "," + std::to_string(gp.mismatch) + "," +
           std::to_string(gp.insert) + "," + std::to_string(gp.del);
}

DelayPenalties encode_penalties(const GapPenalties& gp, const EncodingParams& params) {
    if (params.scale < 1) {
        throw InvalidArgument("encoding scale must be >= 1");
    }
    if (!gp.match_is_minimum()) {
        throw MatchNotMinimum();
    }
    const std::int64_t k = params.shift_for(gp);
    auto encode = [&](std::int64_t delta, const char* name) -> std::uint32_t {
        const std::int64_t value = params.scale * (delta + k);
        if (value < 0) {
            throw NegativeDelay(name);
        }
        if (value > std::numeric_limits<std::uint32_t>::max()) {
            throw InvalidArgument(std::string("encoded ") + name + " penalty overflows 32 bits");
        }
        return static_cast<std::uint32_t>(value);
    };
    return {encode(gp.match, "match"), encode(gp.mismatch, "mismatch"),
            encode(gp.insert, "insert"), encode(gp.del, "delete")};
}

} // namespace racedist
