#include "racedist/aligner.hpp"

#include <algorithm>
#include <atomic>
#include <istream>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "racedist/errors.hpp"

namespace racedist {

const Contig& Reference::contig_at(std::size_t pos) const {
    auto it = std::upper_bound(contigs.begin(), contigs.end(), pos,
                               [](std::size_t p, const Contig& c) { return p < c.offset; });
    if (it == contigs.begin() || pos >= size()) {
        throw InvalidArgument("position " + std::to_string(pos) + " is outside the reference");
    }
    return *std::prev(it);
}

Reference reference_from_fasta(const std::vector<FastaRecord>& records) {
    Reference ref;
    std::string all;
    for (const FastaRecord& rec : records) {
        CleanedSequence clean = strip_ambiguous(rec.sequence);
        ref.removed_bases += clean.removed;
        if (clean.sequence.empty()) {
            continue;
        }
        ref.contigs.push_back({rec.name, all.size(), clean.sequence.size()});
        all += clean.sequence;
    }
    if (all.empty()) {
        throw InvalidArgument("reference contains no A/C/G/T bases");
    }
    ref.sequence = PackedSequence::from_text(all);
    return ref;
}

Reference reference_from_sequence(PackedSequence sequence, std::string name) {
    Reference ref;
    ref.contigs.push_back({std::move(name), 0, sequence.size()});
    ref.sequence = std::move(sequence);
    return ref;
}

PackedSequence random_sequence(std::size_t length, Rng& rng) {
    std::vector<std::uint8_t> codes(length);
    for (auto& c : codes) {
        c = static_cast<std::uint8_t>(rng.below(4));
    }
    return PackedSequence::from_codes(codes);
}

std::uint64_t ReferenceIndex::seed_key(const PackedSequence& seq, std::size_t pos, unsigned seed_len) {
    std::uint64_t key = 0;
    for (unsigned k = 0; k < seed_len; ++k) {
        key |= static_cast<std::uint64_t>(seq.code(pos + k)) << (2 * k);
    }
    return key;
}

ReferenceIndex::ReferenceIndex(Reference reference, unsigned seed_len)
    : reference_(std::move(reference)), seed_len_(seed_len) {
    if (seed_len < 4 || seed_len > 31) {
        throw InvalidArgument("seed length must be in [4, 31], got " + std::to_string(seed_len));
    }
    if (reference_.size() < seed_len) {
        throw ReferenceTooShort("reference of " + std::to_string(reference_.size()) +
                                " bases is shorter than one seed of " + std::to_string(seed_len));
    }
    if (reference_.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("reference exceeds 2^32 bases");
    }

    std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;
    entries.reserve(reference_.size());
    const std::uint64_t top_shift = 2 * (seed_len - 1);
    for (const Contig& contig : reference_.contigs) {
        if (contig.length < seed_len) {
            continue;
        }
        std::uint64_t key = seed_key(reference_.sequence, contig.offset, seed_len);
        const std::size_t last = contig.offset + contig.length - seed_len;
        for (std::size_t pos = contig.offset;; ++pos) {
            entries.emplace_back(key, static_cast<std::uint32_t>(pos));
            if (pos == last) {
                break;
            }
            key = (key >> 2) | (static_cast<std::uint64_t>(reference_.sequence.code(pos + seed_len)) << top_shift);
        }
    }
    std::sort(entries.begin(), entries.end());

    loci_.reserve(entries.size());
    table_.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size();) {
        std::size_t end = i;
        while (end < entries.size() && entries[end].first == entries[i].first) {
            loci_.push_back(entries[end].second);
            ++end;
        }
        table_.emplace(entries[i].first, std::make_pair(static_cast<std::uint32_t>(i),
                                                        static_cast<std::uint32_t>(end - i)));
        i = end;
    }
}

std::span<const std::uint32_t> ReferenceIndex::lookup(std::uint64_t key) const {
    auto it = table_.find(key);
    if (it == table_.end()) {
        return {};
    }
    return std::span<const std::uint32_t>(loci_).subspan(it->second.first, it->second.second);
}

ReferenceIndex build_index(const Reference& reference, unsigned seed_len) {
    return ReferenceIndex(reference, seed_len);
}

ReferenceIndex build_index(const PackedSequence& reference, unsigned seed_len) {
    return ReferenceIndex(reference_from_sequence(reference), seed_len);
}

CandidateSet candidate_locations(const PackedSequence& read, const ReferenceIndex& idx, std::size_t max_candidates,
                                 std::size_t slack, std::string read_id) {
    const unsigned s = idx.seed_len();
    if (read.size() < s) {
        throw InvalidArgument("read is shorter than the seed length");
    }
    CandidateSet out;
    out.read_id = std::move(read_id);

    std::vector<std::size_t> offsets;
    for (std::size_t off = 0; off + s <= read.size(); off += s) {
        offsets.push_back(off);
    }
    if (offsets.back() != read.size() - s) {
        offsets.push_back(read.size() - s);
    }

    const Reference& ref = idx.reference();
    std::vector<std::size_t> loci;
    for (std::size_t off : offsets) {
        ++out.seed_lookups;
        for (std::uint32_t pos : idx.lookup(ReferenceIndex::seed_key(read, off, s))) {
            if (pos < off) {
                continue;
            }
            const std::size_t locus = pos - off;
            if (ref.contig_at(pos).offset > locus) {
                continue;
            }
            loci.push_back(locus);
        }
    }
    std::sort(loci.begin(), loci.end());

    std::vector<Candidate>& cands = out.candidates;
    for (std::size_t i = 0; i < loci.size();) {
        std::size_t end = i;
        while (end < loci.size() && loci[end] == loci[i]) {
            ++end;
        }
        const Contig& contig = ref.contig_at(loci[i]);
        const std::size_t room = contig.offset + contig.length - loci[i];
        cands.push_back({loci[i], std::min(read.size() + slack, room), static_cast<std::uint32_t>(end - i)});
        i = end;
    }
    if (cands.size() > max_candidates) {
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Candidate& a, const Candidate& b) { return a.hits > b.hits; });
        cands.resize(max_candidates);
        std::sort(cands.begin(), cands.end(),
                  [](const Candidate& a, const Candidate& b) { return a.locus < b.locus; });
    }
    return out;
}

std::string to_string(Engine engine) {
    return engine == Engine::Oracle ? "oracle" : "lattice";
}

Engine parse_engine(const std::string& text) {
    if (text == "oracle") return Engine::Oracle;
    if (text == "lattice") return Engine::Lattice;
    throw ParseError("unknown engine '" + text + "' (expected oracle or lattice)");
}

std::size_t AlignerConfig::window_slack() const {
    if (mode != Mode::Sw) {
        return 0;
    }
    return static_cast<std::size_t>(std::max<std::int64_t>(8, lv_cap));
}

std::string to_string(AlignStatus status) {
    switch (status) {
        case AlignStatus::Aligned: return "aligned";
        case AlignStatus::NoCandidates: return "no_candidates";
        case AlignStatus::Filtered: return "filtered";
    }
    return "?";
}

namespace {

struct Score {
    bool timed_out = false;
    std::int64_t key = 0;
};

} // namespace

Alignment align_read(std::string_view read_id, std::string_view read_text, const ReferenceIndex& idx,
                     const AlignerConfig& cfg) {
    Alignment aln;
    aln.read_id = std::string(read_id);

    PackedSequence read;
    try {
        read = PackedSequence::from_text(read_text);
    } catch (const AmbiguousBase&) {
        return aln;
    } catch (const InvalidArgument&) {
        return aln;
    }
    if (read.size() < idx.seed_len()) {
        return aln;
    }

    const CandidateSet set = candidate_locations(read, idx, cfg.max_candidates, cfg.window_slack(), aln.read_id);
    aln.seed_lookups = set.seed_lookups;
    if (set.candidates.empty()) {
        aln.status = AlignStatus::NoCandidates;
        return aln;
    }

    std::optional<LatticeConfig> lattice_cfg;
    if (cfg.engine == Engine::Lattice) {
        lattice_cfg = make_lattice_config(cfg.gp, cfg.enc, cfg.mode, cfg.tile_len,
                                          cfg.mode == Mode::Lv ? std::optional<std::int64_t>(cfg.lv_cap) : std::nullopt);
    }

    const Reference& ref = idx.reference();
    std::optional<std::size_t> best;
    Score best_score;
    for (std::size_t c = 0; c < set.candidates.size(); ++c) {
        const Candidate& cand = set.candidates[c];
        const PackedSequence window = ref.sequence.subseq(cand.locus, cand.window_len);
        const std::uint64_t cells = (read.size() + 1) * (window.size() + 1);
        Score score;
        if (cfg.engine == Engine::Oracle) {
            switch (cfg.mode) {
                case Mode::Sw: score.key = sw_distance(read, window, cfg.gp).score; break;
                case Mode::Nw: score.key = nw_distance(read, window, cfg.gp); break;
                case Mode::Lv: {
                    const LvResult lv = lv_evaluate(read, window, cfg.gp.shifted(cfg.enc.shift_for(cfg.gp)), cfg.lv_cap);
                    score = {lv.capped, lv.distance};
                    break;
                }
            }
            aln.cells_effective += cells;
            aln.cells_updated += cells;
        } else {
            try {
                Lattice lat(read, window, *lattice_cfg);
                const DelayResult res = simulate(lat, *lattice_cfg);
                score = {res.timed_out, decode(res, *lattice_cfg)};
                aln.cells_effective += lat.active_node_count();
                aln.cells_updated += res.triggered_count;
            } catch (const BandTooNarrow&) {
                // a window clipped by the contig end can fall outside the band
                score = {true, static_cast<std::int64_t>(*lattice_cfg->timeout_cycles)};
            }
        }
        ++aln.candidates;
        if (!best || std::tie(score.timed_out, score.key) < std::tie(best_score.timed_out, best_score.key)) {
            best = c;
            best_score = score;
        }
    }

    const Candidate& win = set.candidates[*best];
    const ScoreMatrix matrix = full_matrix(read, ref.sequence.subseq(win.locus, win.window_len), cfg.gp);
    aln.path = backtrack(matrix, cfg.mode == Mode::Sw ? Mode::Sw : Mode::Nw);
    aln.distance = aln.path.score;
    aln.status = AlignStatus::Aligned;
    aln.locus = win.locus;
    aln.key = best_score.key;
    aln.timed_out = best_score.timed_out;
    return aln;
}

AlignRun align_all(const std::vector<FastqRecord>& reads, const ReferenceIndex& idx, const AlignerConfig& cfg,
                   unsigned threads) {
    AlignRun run;
    run.alignments.resize(reads.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(reads.size(), 1))));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < reads.size(); i = next++) {
            try {
                run.alignments[i] = align_read(reads[i].name, reads[i].sequence, idx, cfg);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    RunStats& st = run.stats;
    st.reads_total = reads.size();
    for (const Alignment& a : run.alignments) {
        switch (a.status) {
            case AlignStatus::Aligned: ++st.reads_aligned; ++st.configs_computed; break;
            case AlignStatus::NoCandidates: ++st.reads_no_candidates; break;
            case AlignStatus::Filtered: ++st.reads_filtered; break;
        }
        st.candidate_lookups += a.seed_lookups;
        st.distance_evaluations += a.candidates;
        st.cells_effective += a.cells_effective;
        st.cells_updated += a.cells_updated;
    }
    return run;
}

std::vector<FastqRecord> SimulatedReadSet::to_fastq() const {
    std::vector<FastqRecord> out;
    out.reserve(reads.size());
    for (const SimulatedRead& r : reads) {
        out.push_back({r.id, r.sequence, std::string(r.sequence.size(), 'I')});
    }
    return out;
}

SimulatedReadSet simulate_reads(const Reference& reference, std::size_t n, std::size_t read_len,
                                double mutation_rate, double error_rate, std::uint64_t rng_seed) {
    if (read_len == 0) {
        throw InvalidArgument("read length must be positive");
    }
    if (!(mutation_rate >= 0.0 && mutation_rate < 1.0) || !(error_rate >= 0.0 && error_rate < 1.0)) {
        throw InvalidArgument("rates must lie in [0, 1)");
    }
    std::vector<std::pair<const Contig*, std::size_t>> spans;  // contig, number of start positions
    std::size_t total_starts = 0;
    for (const Contig& c : reference.contigs) {
        if (c.length >= read_len) {
            spans.emplace_back(&c, c.length - read_len + 1);
            total_starts += c.length - read_len + 1;
        }
    }
    if (total_starts == 0) {
        throw InvalidArgument("read length exceeds every contig");
    }

    Rng rng(rng_seed);
    SimulatedReadSet set;
    set.seed = rng_seed;
    set.reads.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t pick = rng.below(total_starts);
        std::size_t origin = 0;
        for (const auto& [contig, starts] : spans) {
            if (pick < starts) {
                origin = contig->offset + pick;
                break;
            }
            pick -= starts;
        }

        SimulatedRead read;
        read.id = "read_" + std::to_string(r);
        read.origin = origin;
        std::vector<std::uint8_t> codes(read_len);
        for (std::size_t k = 0; k < read_len; ++k) {
            codes[k] = reference.sequence.code(origin + k);
        }
        auto substitute = [&](double rate, std::vector<std::size_t>& log) {
            for (std::size_t k = 0; k < read_len; ++k) {
                if (rng.real() < rate) {
                    codes[k] = static_cast<std::uint8_t>((codes[k] + 1 + rng.below(3)) % 4);
                    log.push_back(k);
                }
            }
        };
        substitute(mutation_rate, read.mutations);
        substitute(error_rate, read.errors);
        read.sequence.resize(read_len);
        for (std::size_t k = 0; k < read_len; ++k) {
            read.sequence[k] = "ACGT"[codes[k]];
        }
        set.reads.push_back(std::move(read));
    }
    return set;
}

namespace {

std::string join_positions(const std::vector<std::size_t>& v) {
    if (v.empty()) {
        return "-";
    }
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + std::to_string(v[i]);
    }
    return out;
}

std::vector<std::size_t> split_positions(const std::string& text) {
    std::vector<std::size_t> out;
    if (text == "-") {
        return out;
    }
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        out.push_back(std::stoull(field));
    }
    return out;
}

} // namespace

void write_truth_tsv(std::ostream& out, const SimulatedReadSet& set) {
    out << "# seed=" << set.seed << '\n';
    out << "#read_id\torigin\tmutations\terrors\n";
    for (const SimulatedRead& r : set.reads) {
        out << r.id << '\t' << r.origin << '\t' << join_positions(r.mutations) << '\t' << join_positions(r.errors)
            << '\n';
    }
}

SimulatedReadSet read_truth_tsv(std::istream& in) {
    SimulatedReadSet set;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line.rfind("# seed=", 0) == 0) {
            set.seed = std::stoull(line.substr(7));
            continue;
        }
        if (line.front() == '#') {
            continue;
        }
        std::stringstream ss(line);
        SimulatedRead r;
        std::string origin, mutations, errors;
        if (!std::getline(ss, r.id, '\t') || !std::getline(ss, origin, '\t') || !std::getline(ss, mutations, '\t') ||
            !std::getline(ss, errors, '\t')) {
            throw ParseError("truth line has fewer than four columns: " + line);
        }
        try {
            r.origin = std::stoull(origin);
            r.mutations = split_positions(mutations);
            r.errors = split_positions(errors);
        } catch (const std::exception&) {
            throw ParseError("malformed truth line: " + line);
        }
        set.reads.push_back(std::move(r));
    }
    return set;
}

AccuracyReport evaluate(const std::vector<Alignment>& alignments, const SimulatedReadSet& truth, std::size_t slack) {
    if (alignments.size() != truth.reads.size()) {
        throw InvalidArgument("alignment and truth counts differ");
    }
    AccuracyReport rep;
    rep.total = alignments.size();
    for (std::size_t i = 0; i < alignments.size(); ++i) {
        const Alignment& a = alignments[i];
        if (a.read_id != truth.reads[i].id) {
            throw InvalidArgument("read id mismatch at record " + std::to_string(i) + ": " + a.read_id + " vs " +
                                  truth.reads[i].id);
        }
        switch (a.status) {
            case AlignStatus::NoCandidates: ++rep.no_candidates; continue;
            case AlignStatus::Filtered: ++rep.filtered; continue;
            case AlignStatus::Aligned: break;
        }
        ++rep.aligned;
        const std::size_t origin = truth.reads[i].origin;
        const std::size_t diff = a.locus > origin ? a.locus - origin : origin - a.locus;
        if (diff <= slack) {
            ++rep.correct;
        }
    }
    rep.accuracy = rep.aligned == 0 ? 0.0 : static_cast<double>(rep.correct) / static_cast<double>(rep.aligned);
    return rep;
}

void write_alignments_tsv(std::ostream& out, const std::vector<Alignment>& alignments) {
    out << "#read_id\tstatus\tlocus\tkey\tcigar\n";
    for (const Alignment& a : alignments) {
        out << a.read_id << '\t' << to_string(a.status) << '\t';
        if (a.status == AlignStatus::Aligned) {
            out << a.locus << '\t' << a.key << (a.timed_out ? "+" : "") << '\t' << a.path.cigar() << '\n';
        } else {
            out << "*\t*\t*\n";
        }
    }
}

std::string stats_json(const RunStats& stats, const AccuracyReport* accuracy) {
    nlohmann::ordered_json doc;
    doc["reads_total"] = stats.reads_total;
    doc["reads_aligned"] = stats.reads_aligned;
    doc["reads_no_candidates"] = stats.reads_no_candidates;
    doc["reads_filtered"] = stats.reads_filtered;
    doc["candidate_lookups"] = stats.candidate_lookups;
    doc["distance_evaluations"] = stats.distance_evaluations;
    doc["configs_computed"] = stats.configs_computed;
    doc["cells_effective"] = stats.cells_effective;
    doc["cells_updated"] = stats.cells_updated;
    if (accuracy) {
        doc["accuracy"] = {{"total", accuracy->total},
                           {"aligned", accuracy->aligned},
                           {"correct", accuracy->correct},
                           {"no_candidates", accuracy->no_candidates},
                           {"filtered", accuracy->filtered},
                           {"accuracy", accuracy->accuracy}};
    }
    return doc.dump(2) + "\n";
}

} // namespace racedist
