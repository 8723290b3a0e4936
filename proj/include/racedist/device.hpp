#ifndef racedist_device_hpp
#define racedist_device_hpp

#include <array>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "racedist/lattice.hpp"
#include "racedist/sequence.hpp"

namespace racedist {

inline constexpr unsigned kLineBits = 1024;
inline constexpr unsigned kLineWords = kLineBits / 64;
inline constexpr unsigned kResultBits = 32;
inline constexpr unsigned kResultsPerLine = kLineBits / kResultBits;

// One 1024-bit transfer line as 16 little-endian 64-bit words.
using Line = std::array<std::uint64_t, kLineWords>;

struct JobGeometry {
    std::uint16_t bases_per_side = 64;

    static constexpr unsigned bits_per_base = 2;
    unsigned job_bits() const { return 2 * bits_per_base * bases_per_side; }
    unsigned jobs_per_line() const { return kLineBits / job_bits(); }

    // 1 <= bases_per_side <= 256, so that a job fits in one line.
    void validate() const;
};

// How sequences shorter than bases_per_side are handled. Longer ones are
// always rejected.
enum class PadPolicy { PadWithA, Strict };

struct JobLengths {
    std::uint16_t query = 0;
    std::uint16_t reference = 0;

    bool operator==(const JobLengths&) const = default;
};

struct JobBatch {
    JobGeometry geometry;
    std::size_t job_count = 0;
    std::vector<JobLengths> lengths;  // true lengths before padding
    std::vector<Line> payload;
    std::vector<Line> results;        // empty until a runner fills it

    bool results_filled() const { return !results.empty() || job_count == 0; }
    std::size_t payload_lines() const;
    std::size_t result_lines() const;
};

using JobPair = std::pair<PackedSequence, PackedSequence>;

// Query bases in job bits [0, 2L), reference in [2L, 4L); job s of a line
// starts at bit s * job_bits. Unused slots stay zero.
JobBatch pack_jobs(const std::vector<JobPair>& pairs, const JobGeometry& geom = {},
                   PadPolicy pad = PadPolicy::PadWithA);

// Recovers the packed pairs at their true lengths.
std::vector<JobPair> unpack_jobs(const JobBatch& batch);

// Throws Incomplete when no runner has filled the result buffer.
std::vector<std::uint32_t> unpack_results(const JobBatch& batch);

struct LatticeUsage {
    std::size_t jobs = 0;
    std::uint64_t busy = 0;
    std::uint64_t stall = 0;  // waiting for a line that had not arrived yet
    std::uint64_t total = 0;  // cycle at which the lattice went idle for good
};

struct StallStats {
    std::vector<LatticeUsage> lattices;
    std::uint64_t busy = 0;
    std::uint64_t stall = 0;
    std::uint64_t makespan = 0;
    double stall_fraction = 0.0;  // stall / (busy + stall)
};

struct BatchRun {
    std::vector<std::uint32_t> results;  // raw output cycles, job order
    StallStats stats;
};

/*
 * Line l arrives at cycle l * fetch_latency. Job n goes to lattice n mod
 * n_lattices and starts once both the lattice is free and its line has
 * arrived; it then keeps the lattice busy for its output cycles. Fills the
 * batch's result buffer.
 */
BatchRun run_batch(JobBatch& batch, const LatticeConfig& cfg, unsigned n_lattices, std::uint64_t fetch_latency);

// Binary batch file: 32-byte header, length table, payload lines, result lines.
void write_batch_file(std::ostream& out, const JobBatch& batch);
JobBatch read_batch_file(std::istream& in);

} // namespace racedist

#endif
