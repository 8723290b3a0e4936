#include "racedist/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <tuple>

#include "json.hpp"

#include "racedist/errors.hpp"

namespace racedist {

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

std::size_t abs_diff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

// Indels any path through delay element (i,j) needs to reach (lq,lr).
std::size_t indels_through(std::size_t i, std::size_t j, std::size_t lq, std::size_t lr) {
    const auto d1 = static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j);
    const auto d2 = static_cast<std::int64_t>(lq) - static_cast<std::int64_t>(lr) - d1;
    return static_cast<std::size_t>(std::llabs(d1) + std::llabs(d2));
}

std::size_t tile_index(std::size_t pos, std::uint32_t tile_len) {
    return pos == 0 ? 0 : (pos - 1) / tile_len;
}

std::size_t tiles_along(std::size_t len, std::uint32_t tile_len) {
    return (len + tile_len - 1) / tile_len;
}

} // namespace

void LatticeConfig::validate() const {
    if (tile_len == 0) {
        throw InvalidArgument("tile_len must be >= 1");
    }
    if (mode == Mode::Lv && !timeout_cycles) {
        throw InvalidArgument("mode lv requires timeout_cycles");
    }
    if (mode != Mode::Lv && timeout_cycles) {
        throw InvalidArgument("timeout_cycles is only valid with mode lv (mode is " + to_string(mode) + ")");
    }
    if (mode != Mode::Lv && band_max_edits) {
        throw InvalidArgument("band_max_edits is only valid with mode lv (mode is " + to_string(mode) + ")");
    }
}

std::optional<std::uint32_t> band_for_cap(const DelayPenalties& delays, std::uint64_t timeout_cycles) {
    const std::uint64_t cheapest = std::min(delays.insert, delays.del);
    if (cheapest == 0) {
        return std::nullopt;
    }
    const std::uint64_t edits = timeout_cycles / cheapest;
    return static_cast<std::uint32_t>(std::min<std::uint64_t>(edits, std::numeric_limits<std::uint32_t>::max()));
}

LatticeConfig make_lattice_config(const GapPenalties& gp, const EncodingParams& enc, Mode mode,
                                  std::uint32_t tile_len, std::optional<std::int64_t> lv_cap) {
    LatticeConfig cfg;
    cfg.delays = encode_penalties(gp, enc);
    cfg.tile_len = tile_len;
    cfg.mode = mode;
    if (mode == Mode::Lv) {
        if (!lv_cap || *lv_cap < 0) {
            throw InvalidArgument("mode lv requires a non-negative cap");
        }
        cfg.timeout_cycles = static_cast<std::uint64_t>(enc.scale * *lv_cap);
        cfg.band_max_edits = band_for_cap(cfg.delays, *cfg.timeout_cycles);
    }
    cfg.validate();
    return cfg;
}

std::size_t TileMask::inactive_count() const {
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), std::uint8_t{0}));
}

double TileMask::reduction_fraction() const {
    return active.empty() ? 0.0 : static_cast<double>(inactive_count()) / static_cast<double>(active.size());
}

TileMask eliminate_tiles(std::size_t query_len, std::size_t reference_len, std::uint32_t tile_len,
                         std::uint32_t max_edits) {
    if (tile_len == 0 || query_len == 0 || reference_len == 0) {
        throw InvalidArgument("eliminate_tiles needs positive sizes");
    }
    TileMask mask;
    mask.tile_rows = tiles_along(query_len, tile_len);
    mask.tile_cols = tiles_along(reference_len, tile_len);
    mask.active.assign(mask.tile_rows * mask.tile_cols, 0);
    for (std::size_t i = 1; i <= query_len; ++i) {
        for (std::size_t j = 1; j <= reference_len; ++j) {
            if (indels_through(i, j, query_len, reference_len) <= max_edits) {
                mask.active[tile_index(i, tile_len) * mask.tile_cols + tile_index(j, tile_len)] = 1;
            }
        }
    }
    return mask;
}

Lattice::Lattice(const PackedSequence& query, const PackedSequence& reference, const LatticeConfig& cfg)
    : query_(query), reference_(reference), qcodes_(query.codes()), rcodes_(reference.codes()), cfg_(cfg) {
    if (query_.empty() || reference_.empty()) {
        throw InvalidArgument("lattice sequences must be non-empty");
    }
    cfg_.validate();
    const std::uint32_t t = effective_tile_len();
    if (cfg_.band_max_edits) {
        if (abs_diff(query_.size(), reference_.size()) > *cfg_.band_max_edits) {
            throw BandTooNarrow("band of " + std::to_string(*cfg_.band_max_edits) +
                                " edits cannot bridge a length difference of " +
                                std::to_string(abs_diff(query_.size(), reference_.size())));
        }
        tiles_ = eliminate_tiles(query_.size(), reference_.size(), t, *cfg_.band_max_edits);
        mask_.assign(node_count(), 0);
        for (std::size_t i = 0; i < rows(); ++i) {
            for (std::size_t j = 0; j < cols(); ++j) {
                if (tiles_.is_active(tile_index(i, t), tile_index(j, t))) {
                    mask_[i * cols() + j] = 1;
                    ++active_nodes_;
                }
            }
        }
    } else {
        tiles_.tile_rows = tiles_along(query_.size(), t);
        tiles_.tile_cols = tiles_along(reference_.size(), t);
        tiles_.active.assign(tiles_.tile_rows * tiles_.tile_cols, 1);
        active_nodes_ = node_count();
    }
    arrival_.assign(node_count(), kNever);
}

std::size_t Lattice::edge_count() const {
    std::size_t edges = 0;
    for (std::size_t i = 0; i < rows(); ++i) {
        for (std::size_t j = 0; j < cols(); ++j) {
            if (!active(i, j)) {
                continue;
            }
            edges += (i > 0 && active(i - 1, j)) + (j > 0 && active(i, j - 1)) +
                     (i > 0 && j > 0 && active(i - 1, j - 1));
        }
    }
    return edges;
}

std::uint32_t Lattice::effective_tile_len() const {
    const auto longest = static_cast<std::uint32_t>(std::max(query_.size(), reference_.size()));
    return std::min(cfg_.tile_len, longest);
}

bool Lattice::row_boundary_after(std::size_t r) const {
    return r >= 1 && r % cfg_.tile_len == 0;
}

bool Lattice::col_boundary_after(std::size_t c) const {
    return c >= 1 && c % cfg_.tile_len == 0;
}

std::size_t Lattice::boundary_rows() const {
    return query_.size() == 0 ? 0 : (query_.size() - 1) / cfg_.tile_len;
}

std::size_t Lattice::boundary_cols() const {
    return reference_.size() == 0 ? 0 : (reference_.size() - 1) / cfg_.tile_len;
}

std::uint64_t Lattice::crossing_offset(std::size_t i, std::size_t j) const {
    return (i == 0 ? 0 : (i - 1) / cfg_.tile_len) + (j == 0 ? 0 : (j - 1) / cfg_.tile_len);
}

std::uint64_t Lattice::vertical_delay(std::size_t i, std::size_t) const {
    return cfg_.delays.del + (row_boundary_after(i - 1) ? 1 : 0);
}

std::uint64_t Lattice::horizontal_delay(std::size_t, std::size_t j) const {
    return cfg_.delays.insert + (col_boundary_after(j - 1) ? 1 : 0);
}

std::uint64_t Lattice::diagonal_delay(std::size_t i, std::size_t j) const {
    const std::uint64_t base = qcodes_[i - 1] == rcodes_[j - 1] ? cfg_.delays.match : cfg_.delays.mismatch;
    return base + (row_boundary_after(i - 1) ? 1 : 0) + (col_boundary_after(j - 1) ? 1 : 0);
}

std::optional<std::uint64_t> Lattice::arrival(std::size_t i, std::size_t j) const {
    const std::uint64_t a = arrival_[i * cols() + j];
    if (a == kNever) {
        return std::nullopt;
    }
    return a;
}

Lattice build_lattice(const PackedSequence& q, const PackedSequence& r, const LatticeConfig& cfg) {
    return Lattice(q, r, cfg);
}

/*
 * Dial-style bucket simulation: one bucket per cycle (ring of max-delay + 3
 * slots). Zero-delay edges push into the bucket being drained, so a cycle
 * ends only after its combinational closure has settled.
 */
DelayResult simulate(Lattice& lat, const LatticeConfig& cfg, bool drain) {
    cfg.validate();
    const LatticeConfig& built = lat.cfg_;
    if (cfg.delays != built.delays || cfg.tile_len != built.tile_len || cfg.band_max_edits != built.band_max_edits) {
        throw InvalidArgument("simulate: config does not match the lattice it was built with");
    }
    if (cfg.band_max_edits && cfg.mode != Mode::Lv) {
        throw InvalidArgument("simulate: banded lattice requires mode lv");
    }

    const std::size_t rows = lat.rows();
    const std::size_t cols = lat.cols();
    const std::size_t lq = rows - 1;
    const std::size_t lr = cols - 1;
    const std::uint64_t latency = lat.crossing_offset(lq, lr);
    const std::uint64_t col_latency = lat.crossing_offset(0, lr);
    const std::size_t endpoint = lq * cols + lr;

    std::fill(lat.arrival_.begin(), lat.arrival_.end(), kNever);
    std::vector<std::uint8_t> fired(rows * cols, 0);

    const DelayPenalties& d = cfg.delays;
    const std::size_t ring_size = std::max({d.match, d.mismatch, d.insert, d.del}) + 3;
    std::vector<std::vector<std::uint32_t>> ring(ring_size);
    std::size_t pending = 0;

    auto relax = [&](std::size_t node, std::uint64_t t) {
        if (t < lat.arrival_[node]) {
            lat.arrival_[node] = t;
            ring[t % ring_size].push_back(static_cast<std::uint32_t>(node));
            ++pending;
        }
    };

    DelayResult res;
    res.query_len = lq;
    res.reference_len = lr;
    res.active_nodes = lat.active_node_count();
    res.output_column = lr;
    res.has_trace = cfg.record_trace;

    std::uint64_t tap_best = kNever;
    std::size_t tap_column = 0;
    std::optional<std::uint64_t> output;
    const std::uint64_t lv_limit = cfg.mode == Mode::Lv ? *cfg.timeout_cycles + latency : kNever;

    relax(0, 0);
    for (std::uint64_t cycle = 0; pending > 0; ++cycle) {
        auto& bucket = ring[cycle % ring_size];
        while (!bucket.empty()) {
            const std::size_t node = bucket.back();
            bucket.pop_back();
            --pending;
            if (fired[node] || lat.arrival_[node] != cycle) {
                continue;
            }
            fired[node] = 1;
            const std::size_t i = node / cols;
            const std::size_t j = node % cols;
            if (!output) {
                ++res.triggered_count;
                if (cfg.record_trace) {
                    res.trace.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), cycle});
                }
            }
            if (i == lq && cfg.mode == Mode::Sw && !output) {
                // deskew: every tap reaches the output OR with the latency of column l_R
                const std::uint64_t tap = cycle + (col_latency - lat.crossing_offset(0, j));
                if (tap < tap_best || (tap == tap_best && j < tap_column)) {
                    tap_best = tap;
                    tap_column = j;
                }
            }
            if (i < lq && lat.active(i + 1, j)) {
                relax(node + cols, cycle + lat.vertical_delay(i + 1, j));
            }
            if (j < lr && lat.active(i, j + 1)) {
                relax(node + 1, cycle + lat.horizontal_delay(i, j + 1));
            }
            if (i < lq && j < lr && lat.active(i + 1, j + 1)) {
                relax(node + cols + 1, cycle + lat.diagonal_delay(i + 1, j + 1));
            }
        }

        if (!output) {
            if (cfg.mode == Mode::Sw) {
                if (tap_best <= cycle) {
                    output = tap_best;
                    res.output_column = tap_column;
                }
            } else if (fired[endpoint]) {
                output = cycle;
            } else if (cycle >= lv_limit) {
                output = lv_limit;
                res.timed_out = true;
            }
        }
        if (output && !drain) {
            break;
        }
    }

    if (!output) {
        // every reachable node fired without reaching the output; only a band can cause this
        if (cfg.mode != Mode::Lv) {
            throw InvalidArgument("simulate: output node unreachable");
        }
        output = lv_limit;
        res.timed_out = true;
    }
    res.output_cycles = *output;

    if (drain) {
        // with drain the counters above kept running past the output cycle
        res.triggered_count = 0;
        res.trace.clear();
        for (std::size_t n = 0; n < rows * cols; ++n) {
            if (lat.arrival_[n] <= res.output_cycles) {
                ++res.triggered_count;
                if (cfg.record_trace) {
                    res.trace.push_back({static_cast<std::uint32_t>(n / cols), static_cast<std::uint32_t>(n % cols),
                                         lat.arrival_[n]});
                }
            }
        }
    }
    std::sort(res.trace.begin(), res.trace.end(), [](const TraceEntry& a, const TraceEntry& b) {
        return std::tie(a.cycle, a.i, a.j) < std::tie(b.cycle, b.i, b.j);
    });
    return res;
}

std::int64_t decode(const DelayResult& res, const LatticeConfig& cfg) {
    const std::uint32_t t = cfg.tile_len;
    const std::uint64_t latency = (res.query_len == 0 ? 0 : (res.query_len - 1) / t) +
                                  (res.reference_len == 0 ? 0 : (res.reference_len - 1) / t);
    return static_cast<std::int64_t>(res.output_cycles - latency);
}

unsigned counter_width(const DelayPenalties& delays, std::size_t query_len, std::size_t reference_len) {
    // gap delays of the edges consuming the shorter and the longer sequence
    std::uint64_t short_len = query_len, long_len = reference_len;
    std::uint64_t short_gap = delays.del, long_gap = delays.insert;
    if (long_len < short_len) {
        std::swap(short_len, long_len);
        std::swap(short_gap, long_gap);
    }
    const std::uint64_t all_gaps = short_gap * short_len + long_gap * long_len;
    const std::uint64_t diagonal = std::uint64_t{delays.mismatch} * short_len + long_gap * (long_len - short_len);
    const std::uint64_t bound = std::min(all_gaps, diagonal);
    if (bound == 0) {
        throw ZeroBound();
    }
    unsigned bits = 0;
    while (bits < 64 && (std::uint64_t{1} << bits) < bound) {
        ++bits;
    }
    return bits;
}

std::string emit_trace_json(const DelayResult& res, const LatticeConfig& cfg) {
    using nlohmann::ordered_json;
    const auto longest = static_cast<std::uint32_t>(std::max(res.query_len, res.reference_len));
    ordered_json doc;
    doc["dims"] = {{"query_len", res.query_len},
                   {"reference_len", res.reference_len},
                   {"nodes", (res.query_len + 1) * (res.reference_len + 1)},
                   {"active_nodes", res.active_nodes}};
    doc["tile_len"] = std::min(cfg.tile_len, longest);
    doc["mode"] = to_string(cfg.mode);
    doc["delays"] = {{"match", cfg.delays.match},
                     {"mismatch", cfg.delays.mismatch},
                     {"insert", cfg.delays.insert},
                     {"delete", cfg.delays.del}};
    doc["output_cycles"] = res.output_cycles;
    doc["output_column"] = res.output_column;
    doc["triggered_count"] = res.triggered_count;
    doc["timed_out"] = res.timed_out;
    if (res.has_trace) {
        ordered_json entries = ordered_json::array();
        for (const TraceEntry& e : res.trace) {
            entries.push_back({{"i", e.i}, {"j", e.j}, {"cycle", e.cycle}});
        }
        doc["triggered"] = std::move(entries);
    }
    return doc.dump(2) + "\n";
}

std::string emit_trace_csv(const DelayResult& res) {
    std::string out = "i,j,cycle\n";
    for (const TraceEntry& e : res.trace) {
        out += std::to_string(e.i) + "," + std::to_string(e.j) + "," + std::to_string(e.cycle) + "\n";
    }
    return out;
}

} // namespace racedist
