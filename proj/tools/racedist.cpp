// racedist: command-line front end for the delay-lattice alignment model.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "racedist/aligner.hpp"
#include "racedist/device.hpp"
#include "racedist/dp_oracle.hpp"
#include "racedist/errors.hpp"
#include "racedist/lattice.hpp"
#include "racedist/penalties.hpp"
#include "racedist/sequence.hpp"

using namespace racedist;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Thrown for flag combinations CLI11 cannot express; exits with the usage code.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EngineFlags {
    std::string penalties = "0,2,1,1";
    std::optional<std::int64_t> shift;
    std::int64_t scale = 1;
    std::string mode = "nw";
    std::optional<std::int64_t> lv_cap;
    std::optional<std::uint32_t> tile_len;

    void add_to(CLI::App* cmd, const std::string& default_mode) {
        mode = default_mode;
        cmd->add_option("-p,--penalties", penalties, "match,mismatch,insert,delete")->capture_default_str();
        cmd->add_option("--shift", shift, "encoding shift k (default -match)");
        cmd->add_option("--scale", scale, "encoding scale m")->capture_default_str();
        cmd->add_option("-m,--mode", mode, "sw, nw or lv")->capture_default_str();
        cmd->add_option("--lv-cap", lv_cap, "lv: maximum distance in shifted-penalty units");
        cmd->add_option("-t,--tile-len", tile_len, "tile side in delay elements (default: one tile)");
    }

    Mode parsed_mode() const { return parse_mode(mode); }
    GapPenalties gp() const { return parse_penalties(penalties); }
    EncodingParams enc() const { return {shift, scale}; }
    std::uint32_t tiles() const { return tile_len.value_or(kSingleTile); }

    void check() const {
        const Mode m = parsed_mode();
        if (lv_cap && m != Mode::Lv) {
            throw UsageError("--lv-cap requires --mode lv (got --mode " + mode + ")");
        }
        if (m == Mode::Lv && !lv_cap) {
            throw UsageError("--mode lv requires --lv-cap");
        }
        if (tile_len && *tile_len == 0) {
            throw UsageError("--tile-len must be >= 1");
        }
    }

    LatticeConfig lattice(bool trace = false) const {
        LatticeConfig cfg = make_lattice_config(gp(), enc(), parsed_mode(), tiles(), lv_cap);
        cfg.record_trace = trace;
        return cfg;
    }
};

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    return in;
}

void write_file(const std::string& path, const std::string& content, bool binary = false) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    out << content;
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
}

unsigned thread_count(std::optional<unsigned> flag) {
    if (const char* env = std::getenv("RACEDIST_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) {
                return static_cast<unsigned>(n);
            }
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("RACEDIST_THREADS must be a positive integer, got '") + env + "'");
    }
    if (flag) {
        return std::max(1u, *flag);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

Reference load_reference(const std::string& path) {
    std::ifstream in = open_in(path);
    return reference_from_fasta(read_fasta(in));
}

std::vector<FastqRecord> load_reads(const std::string& path) {
    std::ifstream in = open_in(path);
    return read_fastq(in);
}

// --- distance -------------------------------------------------------------

int cmd_distance(const EngineFlags& f, const std::string& qt, const std::string& rt) {
    f.check();
    const PackedSequence q = encode_sequence(qt);
    const PackedSequence r = encode_sequence(rt);
    const GapPenalties gp = f.gp();
    const LatticeConfig cfg = f.lattice();
    const Mode mode = cfg.mode;

    std::cout << "mode\t" << to_string(mode) << '\n';
    switch (mode) {
        case Mode::Sw: {
            const SwResult sw = sw_distance(q, r, gp);
            std::cout << "oracle\t" << sw.score << '\n' << "oracle_column\t" << sw.end_column << '\n';
            break;
        }
        case Mode::Nw: std::cout << "oracle\t" << nw_distance(q, r, gp) << '\n'; break;
        case Mode::Lv: {
            const LvResult lv = lv_evaluate(q, r, gp.shifted(f.enc().shift_for(gp)), *f.lv_cap);
            std::cout << "oracle\t" << lv.distance << (lv.capped ? " (capped)" : "") << '\n';
            break;
        }
    }
    try {
        Lattice lat = build_lattice(q, r, cfg);
        const DelayResult res = simulate(lat, cfg);
        std::cout << "cycles\t" << res.output_cycles << '\n'
                  << "key\t" << decode(res, cfg) << '\n'
                  << "column\t" << res.output_column << '\n'
                  << "triggered\t" << res.triggered_count << '\n'
                  << "nodes\t" << lat.node_count() << '\n';
        if (mode == Mode::Lv) {
            std::cout << "timed_out\t" << (res.timed_out ? "yes" : "no") << '\n';
        }
    } catch (const BandTooNarrow& e) {
        std::cout << "cycles\t*\nkey\t*\ntimed_out\tyes (" << e.what() << ")\n";
    }
    return 0;
}

// --- trace ----------------------------------------------------------------

int cmd_trace(const EngineFlags& f, const std::string& qt, const std::string& rt, const std::string& format,
              const std::string& out) {
    f.check();
    const LatticeConfig cfg = f.lattice(true);
    Lattice lat = build_lattice(encode_sequence(qt), encode_sequence(rt), cfg);
    const DelayResult res = simulate(lat, cfg);
    write_file(out, format == "csv" ? emit_trace_csv(res) : emit_trace_json(res, cfg));
    return 0;
}

// --- align ----------------------------------------------------------------

struct AlignFlags {
    std::string reference, reads, out, stats, truth, engine = "lattice";
    unsigned seed_len = 20;
    std::size_t max_candidates = 32;
    std::size_t slack = 0;
    std::optional<unsigned> threads;
};

int cmd_align(EngineFlags f, const AlignFlags& a) {
    f.check();
    AlignerConfig cfg;
    cfg.engine = parse_engine(a.engine);
    cfg.mode = f.parsed_mode();
    cfg.gp = f.gp();
    cfg.enc = f.enc();
    if (f.lv_cap) {
        cfg.lv_cap = *f.lv_cap;
    }
    cfg.tile_len = f.tiles();
    cfg.max_candidates = a.max_candidates;
    if (cfg.engine == Engine::Lattice) {
        f.lattice();  // reject bad encodings before touching any file
    }
    const unsigned threads = thread_count(a.threads);

    const ReferenceIndex idx = build_index(load_reference(a.reference), a.seed_len);
    const std::vector<FastqRecord> reads = load_reads(a.reads);
    std::optional<SimulatedReadSet> truth;
    if (!a.truth.empty()) {
        std::ifstream in = open_in(a.truth);
        truth = read_truth_tsv(in);
    }

    const AlignRun run = align_all(reads, idx, cfg, threads);
    std::optional<AccuracyReport> acc;
    if (truth) {
        acc = evaluate(run.alignments, *truth, a.slack);
    }

    std::ostringstream tsv;
    write_alignments_tsv(tsv, run.alignments);
    const std::string stats = stats_json(run.stats, acc ? &*acc : nullptr);
    write_file(a.out, tsv.str());
    if (!a.stats.empty()) {
        write_file(a.stats, stats);
    } else {
        std::cerr << stats;
    }
    return 0;
}

// --- simreads -------------------------------------------------------------

struct SimFlags {
    std::string reference, ref_out, out, truth;
    std::size_t random_reference = 0;
    std::size_t count = 1000;
    std::size_t length = 128;
    double mutation = 0.005;
    double error = 0.001;
    std::uint64_t seed = 1;
};

int cmd_simreads(const SimFlags& s) {
    if (s.reference.empty() == (s.random_reference == 0)) {
        throw UsageError("give exactly one of --reference and --random-reference");
    }
    if (s.out.empty() || s.truth.empty()) {
        throw UsageError("--out and --truth are required");
    }
    Reference ref;
    if (s.random_reference > 0) {
        if (s.ref_out.empty()) {
            throw UsageError("--random-reference requires --ref-out");
        }
        Rng rng(s.seed ^ 0x5eedf00dULL);
        ref = reference_from_sequence(random_sequence(s.random_reference, rng));
    } else {
        ref = load_reference(s.reference);
    }
    const SimulatedReadSet set = simulate_reads(ref, s.count, s.length, s.mutation, s.error, s.seed);

    if (s.random_reference > 0) {
        std::ostringstream fa;
        const std::string text = ref.sequence.to_string();
        fa << '>' << ref.contigs.front().name << '\n';
        for (std::size_t p = 0; p < text.size(); p += 80) {
            fa << text.substr(p, 80) << '\n';
        }
        write_file(s.ref_out, fa.str());
    }
    std::ostringstream fq, truth;
    for (const FastqRecord& rec : set.to_fastq()) {
        write_fastq(fq, rec);
    }
    write_truth_tsv(truth, set);
    write_file(s.out, fq.str());
    write_file(s.truth, truth.str());
    return 0;
}

// --- bench ----------------------------------------------------------------

struct BenchFlags {
    std::string pairs, reference, reads;
    std::vector<std::string> inline_pair;
    unsigned seed_len = 20;
    std::optional<unsigned> threads;
};

std::vector<std::pair<std::string, std::string>> read_pairs(const std::string& path) {
    std::ifstream in = open_in(path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream ss(line);
        std::string q, r;
        if (!(ss >> q >> r)) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected two sequences");
        }
        out.emplace_back(q, r);
    }
    return out;
}

int cmd_bench(const EngineFlags& f, const BenchFlags& b) {
    f.check();
    std::uint64_t effective = 0, updated = 0, cycles = 0, runs = 0;
    if (!b.reads.empty() || !b.reference.empty()) {
        if (b.reads.empty() || b.reference.empty()) {
            throw UsageError("--reads and --reference go together");
        }
        AlignerConfig cfg;
        cfg.mode = f.parsed_mode();
        cfg.gp = f.gp();
        cfg.enc = f.enc();
        cfg.lv_cap = f.lv_cap.value_or(cfg.lv_cap);
        cfg.tile_len = f.tiles();
        const ReferenceIndex idx = build_index(load_reference(b.reference), b.seed_len);
        const AlignRun run = align_all(load_reads(b.reads), idx, cfg, thread_count(b.threads));
        effective = run.stats.cells_effective;
        updated = run.stats.cells_updated;
        runs = run.stats.distance_evaluations;
    } else {
        std::vector<std::pair<std::string, std::string>> pairs;
        if (!b.pairs.empty()) {
            pairs = read_pairs(b.pairs);
        }
        if (b.inline_pair.size() == 2) {
            pairs.emplace_back(b.inline_pair[0], b.inline_pair[1]);
        } else if (!b.inline_pair.empty()) {
            throw UsageError("give a query and a reference, or --pairs");
        }
        if (pairs.empty()) {
            throw UsageError("nothing to benchmark: give Q R, --pairs or --reads/--reference");
        }
        const LatticeConfig cfg = f.lattice();
        for (const auto& [qt, rt] : pairs) {
            Lattice lat = build_lattice(encode_sequence(qt), encode_sequence(rt), cfg);
            const DelayResult res = simulate(lat, cfg);
            effective += lat.active_node_count();
            updated += res.triggered_count;
            cycles += res.output_cycles;
            ++runs;
        }
    }
    std::cout << "lattice_runs\t" << runs << '\n'
              << "effective_cells\t" << effective << '\n'
              << "updated_cells\t" << updated << '\n'
              << "updated_ratio\t" << (effective ? static_cast<double>(updated) / static_cast<double>(effective) : 0.0)
              << '\n';
    if (cycles > 0) {
        std::cout << "cycles\t" << cycles << '\n'
                  << "effective_per_cycle\t" << static_cast<double>(effective) / static_cast<double>(cycles) << '\n'
                  << "updated_per_cycle\t" << static_cast<double>(updated) / static_cast<double>(cycles) << '\n';
    }
    return 0;
}

// --- batch ----------------------------------------------------------------

struct BatchFlags {
    std::string pairs, in, out;
    std::uint16_t bases_per_side = 64;
    bool strict = false;
    unsigned lattices = 1;
    std::uint64_t fetch_latency = 0;
};

int cmd_batch_pack(const BatchFlags& bf) {
    std::vector<JobPair> jobs;
    for (const auto& [q, r] : read_pairs(bf.pairs)) {
        jobs.emplace_back(encode_sequence(q), encode_sequence(r));
    }
    JobGeometry geom;
    geom.bases_per_side = bf.bases_per_side;
    const JobBatch batch = pack_jobs(jobs, geom, bf.strict ? PadPolicy::Strict : PadPolicy::PadWithA);
    std::ostringstream bin(std::ios::binary);
    write_batch_file(bin, batch);
    write_file(bf.out, bin.str(), true);
    std::cerr << batch.job_count << " jobs in " << batch.payload.size() << " lines\n";
    return 0;
}

int cmd_batch_run(const EngineFlags& f, const BatchFlags& bf) {
    f.check();
    const LatticeConfig cfg = f.lattice();
    std::ifstream in = open_in(bf.in, true);
    JobBatch batch = read_batch_file(in);
    const BatchRun run = run_batch(batch, cfg, bf.lattices, bf.fetch_latency);
    if (!bf.out.empty()) {
        std::ostringstream bin(std::ios::binary);
        write_batch_file(bin, batch);
        write_file(bf.out, bin.str(), true);
    }
    nlohmann::ordered_json doc;
    doc["jobs"] = batch.job_count;
    doc["results"] = run.results;
    doc["busy"] = run.stats.busy;
    doc["stall"] = run.stats.stall;
    doc["makespan"] = run.stats.makespan;
    doc["stall_fraction"] = run.stats.stall_fraction;
    for (const LatticeUsage& u : run.stats.lattices) {
        doc["lattices"].push_back({{"jobs", u.jobs}, {"busy", u.busy}, {"stall", u.stall}, {"total", u.total}});
    }
    std::cout << doc.dump(2) << '\n';
    return 0;
}

int cmd_batch_show(const BatchFlags& bf) {
    std::ifstream in = open_in(bf.in, true);
    const JobBatch batch = read_batch_file(in);
    const std::vector<JobPair> jobs = unpack_jobs(batch);
    std::optional<std::vector<std::uint32_t>> results;
    if (batch.results_filled()) {
        results = unpack_results(batch);
    }
    std::cout << "#job\tquery\treference\tresult\n";
    for (std::size_t n = 0; n < jobs.size(); ++n) {
        std::cout << n << '\t' << jobs[n].first.to_string() << '\t' << jobs[n].second.to_string() << '\t'
                  << (results ? std::to_string((*results)[n]) : "*") << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-lattice sequence alignment model"};
    app.require_subcommand(1);

    EngineFlags dist_f, trace_f, align_f, bench_f, run_f;
    std::string q, r;

    auto* distance = app.add_subcommand("distance", "score one pair with the oracle and the lattice");
    dist_f.add_to(distance, "nw");
    distance->add_option("query", q, "query sequence")->required();
    distance->add_option("reference", r, "reference sequence")->required();

    std::string trace_format = "json", trace_out;
    auto* trace = app.add_subcommand("trace", "dump the wavefront (node, cycle) of one pair");
    trace_f.add_to(trace, "nw");
    trace->add_option("query", q, "query sequence")->required();
    trace->add_option("reference", r, "reference sequence")->required();
    trace->add_option("--format", trace_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    trace->add_option("-o,--out", trace_out, "output file (default stdout)");

    AlignFlags af;
    auto* align = app.add_subcommand("align", "align FASTQ reads against a FASTA reference");
    align_f.add_to(align, "sw");
    align->add_option("--reference", af.reference, "FASTA reference")->required();
    align->add_option("--reads", af.reads, "FASTQ reads")->required();
    align->add_option("-o,--out", af.out, "alignment TSV (default stdout)");
    align->add_option("--stats", af.stats, "stats JSON (default stderr)");
    align->add_option("--truth", af.truth, "truth TSV from simreads; adds accuracy to the stats");
    align->add_option("--slack", af.slack, "locus tolerance for accuracy")->capture_default_str();
    align->add_option("--engine", af.engine, "oracle or lattice")
        ->check(CLI::IsMember({"oracle", "lattice"}))
        ->capture_default_str();
    align->add_option("--seed-len", af.seed_len, "seed length (4..31)")->capture_default_str();
    align->add_option("--max-candidates", af.max_candidates, "candidate windows per read")->capture_default_str();
    align->add_option("--threads", af.threads, "worker threads (RACEDIST_THREADS overrides)");

    SimFlags sf;
    auto* simreads = app.add_subcommand("simreads", "simulate reads with known origins");
    simreads->add_option("--reference", sf.reference, "FASTA reference to sample from");
    simreads->add_option("--random-reference", sf.random_reference, "generate a random reference of this length");
    simreads->add_option("--ref-out", sf.ref_out, "where to write the random reference (FASTA)");
    simreads->add_option("-n,--count", sf.count, "number of reads")->capture_default_str();
    simreads->add_option("-l,--length", sf.length, "read length")->capture_default_str();
    simreads->add_option("--mutation-rate", sf.mutation, "per-base substitution rate")->capture_default_str();
    simreads->add_option("--error-rate", sf.error, "per-base sequencing error rate")->capture_default_str();
    simreads->add_option("--seed", sf.seed, "rng seed")->capture_default_str();
    simreads->add_option("-o,--out", sf.out, "FASTQ output");
    simreads->add_option("--truth", sf.truth, "truth TSV output");

    BenchFlags bf;
    auto* bench = app.add_subcommand("bench", "effective vs updated cell accounting");
    bench_f.add_to(bench, "sw");
    bench->add_option("pair", bf.inline_pair, "query and reference")->expected(0, 2);
    bench->add_option("--pairs", bf.pairs, "file of whitespace-separated query/reference pairs");
    bench->add_option("--reference", bf.reference, "FASTA reference (with --reads)");
    bench->add_option("--reads", bf.reads, "FASTQ reads aligned with the lattice engine");
    bench->add_option("--seed-len", bf.seed_len, "seed length for --reads")->capture_default_str();
    bench->add_option("--threads", bf.threads, "worker threads (RACEDIST_THREADS overrides)");

    BatchFlags tf;
    auto* batch = app.add_subcommand("batch", "device batch files");
    batch->require_subcommand(1);
    auto* pack = batch->add_subcommand("pack", "pack query/reference pairs into a batch file");
    pack->add_option("--pairs", tf.pairs, "file of whitespace-separated query/reference pairs")->required();
    pack->add_option("-o,--out", tf.out, "batch file")->required();
    pack->add_option("--bases-per-side", tf.bases_per_side, "job geometry")->capture_default_str();
    pack->add_flag("--strict", tf.strict, "reject sequences shorter than the geometry instead of padding");
    auto* run = batch->add_subcommand("run", "run a batch file through simulated lattices");
    run_f.add_to(run, "nw");
    run->add_option("--in", tf.in, "batch file")->required();
    run->add_option("-o,--out", tf.out, "write the batch back with results filled");
    run->add_option("--lattices", tf.lattices, "lattice instances")->capture_default_str();
    run->add_option("--fetch-latency", tf.fetch_latency, "cycles between line arrivals")->capture_default_str();
    auto* show = batch->add_subcommand("show", "list the jobs and results of a batch file");
    show->add_option("--in", tf.in, "batch file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*distance) return cmd_distance(dist_f, q, r);
        if (*trace) return cmd_trace(trace_f, q, r, trace_format, trace_out);
        if (*align) return cmd_align(align_f, af);
        if (*simreads) return cmd_simreads(sf);
        if (*bench) return cmd_bench(bench_f, bf);
        if (*pack) return cmd_batch_pack(tf);
        if (*run) return cmd_batch_run(run_f, tf);
        if (*show) return cmd_batch_show(tf);
    } catch (const UsageError& e) {
        std::cerr << "racedist: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "racedist: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
