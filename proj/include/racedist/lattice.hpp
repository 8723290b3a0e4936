#ifndef racedist_lattice_hpp
#define racedist_lattice_hpp

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "racedist/dp_oracle.hpp"
#include "racedist/penalties.hpp"
#include "racedist/sequence.hpp"

namespace racedist {

// tile_len value meaning "one tile covers the whole lattice"
inline constexpr std::uint32_t kSingleTile = std::numeric_limits<std::uint32_t>::max();

struct LatticeConfig {
    DelayPenalties delays;
    std::uint32_t tile_len = kSingleTile;
    Mode mode = Mode::Nw;
    // Lv only. Measured after the lattice's flip-flop latency, i.e. in the
    // same units as decode() keys.
    std::optional<std::uint64_t> timeout_cycles;
    // Lv only. Tiles that no path with at most this many indels can touch are removed.
    std::optional<std::uint32_t> band_max_edits;
    bool record_trace = false;

    // Throws InvalidArgument naming the conflicting fields.
    void validate() const;
};

// Largest indel count a path can afford within `timeout_cycles`; nullopt when
// indels are free and no band can be derived.
std::optional<std::uint32_t> band_for_cap(const DelayPenalties& delays, std::uint64_t timeout_cycles);

// Encodes the penalties and fills timeout/band for Lv from a cap expressed in
// shifted-penalty units (timeout = scale * cap).
LatticeConfig make_lattice_config(const GapPenalties& gp, const EncodingParams& enc, Mode mode,
                                  std::uint32_t tile_len = kSingleTile,
                                  std::optional<std::int64_t> lv_cap = std::nullopt);

/*
 * Tile activity after band elimination. Tiles are indexed over delay elements
 * 1..l; the border row/column 0 belongs to tile 0.
 */
struct TileMask {
    std::size_t tile_rows = 0;
    std::size_t tile_cols = 0;
    std::vector<std::uint8_t> active;  // row-major tile_rows x tile_cols

    bool is_active(std::size_t a, std::size_t b) const { return active[a * tile_cols + b] != 0; }
    std::size_t total() const { return active.size(); }
    std::size_t inactive_count() const;
    double reduction_fraction() const;
};

TileMask eliminate_tiles(std::size_t query_len, std::size_t reference_len, std::uint32_t tile_len,
                         std::uint32_t max_edits);

struct TraceEntry {
    std::uint32_t i;
    std::uint32_t j;
    std::uint64_t cycle;

    bool operator==(const TraceEntry&) const = default;
};

struct DelayResult {
    std::size_t query_len = 0;
    std::size_t reference_len = 0;
    std::uint64_t output_cycles = 0;   // raw, includes flip-flop latency
    std::size_t output_column = 0;     // Sw tap; l_R for Nw/Lv
    std::uint64_t triggered_count = 0; // active nodes with arrival <= output_cycles
    std::uint64_t active_nodes = 0;
    bool timed_out = false;
    bool has_trace = false;
    std::vector<TraceEntry> trace;     // sorted by (cycle, i, j)
};

/*
 * Functional model of the delay-element lattice for one (query, reference)
 * pair. Node (i,j), 0 <= i <= l_Q, 0 <= j <= l_R, fires at the earliest
 * arrival over its three inputs; match edges with zero delay settle within
 * the same cycle. Crossing a tile boundary costs one extra cycle per
 * boundary (two at a diagonal corner).
 *
 * Holds the arrival buffer of the last simulation, so one lattice runs one
 * simulation at a time.
 */
class Lattice {
public:
    Lattice(const PackedSequence& query, const PackedSequence& reference, const LatticeConfig& cfg);

    const LatticeConfig& config() const { return cfg_; }
    std::size_t query_len() const { return query_.size(); }
    std::size_t reference_len() const { return reference_.size(); }
    std::size_t rows() const { return query_.size() + 1; }
    std::size_t cols() const { return reference_.size() + 1; }

    std::size_t node_count() const { return rows() * cols(); }
    std::size_t edge_count() const;
    std::size_t active_node_count() const { return active_nodes_; }
    bool active(std::size_t i, std::size_t j) const { return mask_.empty() || mask_[i * cols() + j] != 0; }

    std::uint32_t effective_tile_len() const;
    const TileMask& tiles() const { return tiles_; }
    // Flip-flop stages between node rows bT and bT+1 (b >= 1), likewise for columns.
    std::size_t boundary_rows() const;
    std::size_t boundary_cols() const;
    // Boundaries any monotone path from the source to (i,j) crosses.
    std::uint64_t crossing_offset(std::size_t i, std::size_t j) const;

    // Delays of the edges entering (i,j).
    std::uint64_t vertical_delay(std::size_t i, std::size_t j) const;
    std::uint64_t horizontal_delay(std::size_t i, std::size_t j) const;
    std::uint64_t diagonal_delay(std::size_t i, std::size_t j) const;

    // Arrival from the most recent simulation; nullopt if the node did not fire
    // before the simulation stopped.
    std::optional<std::uint64_t> arrival(std::size_t i, std::size_t j) const;

private:
    friend DelayResult simulate(Lattice&, const LatticeConfig&, bool);

    bool row_boundary_after(std::size_t r) const;
    bool col_boundary_after(std::size_t c) const;

    PackedSequence query_;
    PackedSequence reference_;
    std::vector<std::uint8_t> qcodes_;
    std::vector<std::uint8_t> rcodes_;
    LatticeConfig cfg_;
    TileMask tiles_;
    std::vector<std::uint8_t> mask_;  // empty: every node active
    std::size_t active_nodes_ = 0;
    std::vector<std::uint64_t> arrival_;
};

// Throws InvalidArgument on an invalid config and BandTooNarrow when the band
// leaves no path to the global endpoint.
Lattice build_lattice(const PackedSequence& q, const PackedSequence& r, const LatticeConfig& cfg);

// Runs the wavefront until the mode's output is known (and the whole cycle
// in which it appears has settled). With `drain`, keeps going until every
// reachable node has fired; outputs and counts are unaffected. `cfg` must
// match the lattice's structural fields (delays, tile_len, band); mode,
// timeout and trace flag are taken from `cfg`.
DelayResult simulate(Lattice& lat, const LatticeConfig& cfg, bool drain = false);

// Ordering key: raw cycles minus the constant flip-flop latency of the output,
// i.e. scale * (distance under the shifted penalties). Not un-shifted or
// divided by the scale.
std::int64_t decode(const DelayResult& res, const LatticeConfig& cfg);

// Output counter width from the lattice dimensions and delays; the mismatch
// delay plays the role of the per-base diagonal delay. Throws ZeroBound when
// the bound is zero.
unsigned counter_width(const DelayPenalties& delays, std::size_t query_len, std::size_t reference_len);

// Trace document: JSON object {dims, tile_len, mode, delays, output_cycles,
// output_column, triggered_count, timed_out, triggered:[{i,j,cycle}...]}.
// "triggered" is omitted when the run did not record a trace.
std::string emit_trace_json(const DelayResult& res, const LatticeConfig& cfg);
// Same entries as CSV rows "i,j,cycle" under a header line.
std::string emit_trace_csv(const DelayResult& res);

} // namespace racedist

#endif
