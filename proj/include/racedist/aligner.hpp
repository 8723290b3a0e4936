#ifndef racedist_aligner_hpp
#define racedist_aligner_hpp

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "racedist/dp_oracle.hpp"
#include "racedist/lattice.hpp"
#include "racedist/penalties.hpp"
#include "racedist/sequence.hpp"

namespace racedist {

/*
 * Deterministic generator. The integer and real mappings are spelled out
 * here rather than taken from <random> distributions so that a given seed
 * yields the same stream with every standard library.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // uniform in [0, n), n > 0
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }
    // uniform in [0, 1)
    double real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

struct Contig {
    std::string name;
    std::size_t offset = 0;
    std::size_t length = 0;
};

// All contigs concatenated into one packed sequence plus an offset table.
struct Reference {
    PackedSequence sequence;
    std::vector<Contig> contigs;
    std::size_t removed_bases = 0;  // ambiguity codes stripped at load

    std::size_t size() const { return sequence.size(); }
    // Contig containing global position `pos`.
    const Contig& contig_at(std::size_t pos) const;
};

// Throws ParseError / InvalidArgument when no bases remain.
Reference reference_from_fasta(const std::vector<FastaRecord>& records);
Reference reference_from_sequence(PackedSequence sequence, std::string name = "ref");
PackedSequence random_sequence(std::size_t length, Rng& rng);

/*
 * k-mer hash index over every seed that lies inside one contig. Loci are kept
 * in one flat array; the hash table maps a 2-bit packed key to its run.
 */
class ReferenceIndex {
public:
    ReferenceIndex(Reference reference, unsigned seed_len);

    unsigned seed_len() const { return seed_len_; }
    const Reference& reference() const { return reference_; }
    std::size_t key_count() const { return table_.size(); }

    // Sorted ascending; empty when the key does not occur.
    std::span<const std::uint32_t> lookup(std::uint64_t key) const;

    static std::uint64_t seed_key(const PackedSequence& seq, std::size_t pos, unsigned seed_len);

private:
    Reference reference_;
    unsigned seed_len_;
    std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> table_;
    std::vector<std::uint32_t> loci_;
};

// seed_len must be in [4, 31]; throws InvalidArgument, or ReferenceTooShort
// when the reference is shorter than one seed.
ReferenceIndex build_index(const Reference& reference, unsigned seed_len);
ReferenceIndex build_index(const PackedSequence& reference, unsigned seed_len);

struct Candidate {
    std::size_t locus = 0;
    std::size_t window_len = 0;  // window is reference[locus, locus + window_len)
    std::uint32_t hits = 0;

    bool operator==(const Candidate&) const = default;
};

struct CandidateSet {
    std::string read_id;
    std::vector<Candidate> candidates;  // sorted by locus
    std::size_t seed_lookups = 0;
};

// Seeds at every seed_len-th offset plus the final one. Hits are shifted back
// to the read's start, counted per locus, truncated to `max_candidates` by
// (hits desc, locus asc) and returned in locus order. An empty set means no
// seed hit (status NoCandidates).
CandidateSet candidate_locations(const PackedSequence& read, const ReferenceIndex& idx, std::size_t max_candidates,
                                 std::size_t slack, std::string read_id = {});

enum class Engine { Oracle, Lattice };
std::string to_string(Engine engine);
Engine parse_engine(const std::string& text);

struct AlignerConfig {
    Engine engine = Engine::Lattice;
    Mode mode = Mode::Sw;
    GapPenalties gp;
    EncodingParams enc;
    std::int64_t lv_cap = 8;  // Lv: in shifted-penalty units
    std::uint32_t tile_len = kSingleTile;
    std::size_t max_candidates = 32;

    // Right-hand slack added to Sw windows; Nw and Lv windows are read length.
    std::size_t window_slack() const;
};

enum class AlignStatus { Aligned, NoCandidates, Filtered };
std::string to_string(AlignStatus status);

struct Alignment {
    std::string read_id;
    AlignStatus status = AlignStatus::Filtered;
    std::size_t locus = 0;
    std::int64_t key = 0;       // engine units (decode key or oracle distance)
    bool timed_out = false;     // Lv: every candidate hit the cap
    std::int64_t distance = 0;  // backtracked path score under the user penalties
    AlignmentPath path;

    // per-read counters folded into RunStats
    std::size_t seed_lookups = 0;
    std::size_t candidates = 0;
    std::uint64_t cells_effective = 0;
    std::uint64_t cells_updated = 0;
};

// Reads with ambiguous bases or shorter than one seed come back Filtered.
Alignment align_read(std::string_view read_id, std::string_view read_text, const ReferenceIndex& idx,
                     const AlignerConfig& cfg);

struct RunStats {
    std::size_t reads_total = 0;
    std::size_t reads_aligned = 0;
    std::size_t reads_no_candidates = 0;
    std::size_t reads_filtered = 0;
    std::size_t candidate_lookups = 0;     // seeds looked up
    std::size_t distance_evaluations = 0;  // candidate windows scored
    std::size_t configs_computed = 0;      // backtracks
    std::uint64_t cells_effective = 0;     // lattice nodes of every evaluated window
    std::uint64_t cells_updated = 0;       // nodes that fired before the output
};

struct AlignRun {
    std::vector<Alignment> alignments;  // input order
    RunStats stats;
};

// Independent per-read tasks on `threads` workers; output does not depend on
// the thread count.
AlignRun align_all(const std::vector<FastqRecord>& reads, const ReferenceIndex& idx, const AlignerConfig& cfg,
                   unsigned threads = 1);

struct SimulatedRead {
    std::string id;
    std::size_t origin = 0;
    std::string sequence;
    std::vector<std::size_t> mutations;  // read positions
    std::vector<std::size_t> errors;     // read positions

    bool operator==(const SimulatedRead&) const = default;
};

struct SimulatedReadSet {
    std::uint64_t seed = 0;
    std::vector<SimulatedRead> reads;

    std::vector<FastqRecord> to_fastq() const;
};

// Uniform origins that stay within one contig, substitution mutations at
// `mutation_rate`, then substitution sequencing errors at `error_rate`.
SimulatedReadSet simulate_reads(const Reference& reference, std::size_t n, std::size_t read_len,
                                double mutation_rate, double error_rate, std::uint64_t rng_seed);

void write_truth_tsv(std::ostream& out, const SimulatedReadSet& set);
// Reads a file written by write_truth_tsv (sequences are not stored there).
SimulatedReadSet read_truth_tsv(std::istream& in);

struct AccuracyReport {
    std::size_t total = 0;
    std::size_t aligned = 0;
    std::size_t correct = 0;
    std::size_t no_candidates = 0;
    std::size_t filtered = 0;
    double accuracy = 0.0;  // correct / aligned
};

// Alignments and truth are matched by position and must carry the same ids.
AccuracyReport evaluate(const std::vector<Alignment>& alignments, const SimulatedReadSet& truth, std::size_t slack);

// "read_id status locus key cigar", tab separated, '*' for missing fields.
void write_alignments_tsv(std::ostream& out, const std::vector<Alignment>& alignments);
std::string stats_json(const RunStats& stats, const AccuracyReport* accuracy = nullptr);

} // namespace racedist

#endif
