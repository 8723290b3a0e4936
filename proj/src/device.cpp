#include "racedist/device.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "racedist/errors.hpp"

namespace racedist {

namespace {

constexpr char kMagic[8] = {'A', 'S', 'A', 'P', 'J', 'O', 'B', 'S'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 32;

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void set_bits(Line& line, std::size_t bit, std::uint64_t value, unsigned width) {
    line[bit / 64] |= value << (bit % 64);
    if (bit % 64 + width > 64) {
        line[bit / 64 + 1] |= value >> (64 - bit % 64);
    }
}

std::uint64_t get_bits(const Line& line, std::size_t bit, unsigned width) {
    std::uint64_t v = line[bit / 64] >> (bit % 64);
    if (bit % 64 + width > 64) {
        v |= line[bit / 64 + 1] << (64 - bit % 64);
    }
    return v & ((width == 64 ? 0 : (std::uint64_t{1} << width)) - 1);
}

template <typename T>
void put_le(std::string& buf, std::size_t at, T value) {
    for (std::size_t b = 0; b < sizeof(T); ++b) {
        buf[at + b] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * b)) & 0xff);
    }
}

template <typename T>
T get_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
        v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    }
    return static_cast<T>(v);
}

void write_lines(std::ostream& out, const std::vector<Line>& lines) {
    std::string buf(8, '\0');
    for (const Line& line : lines) {
        for (std::uint64_t w : line) {
            put_le(buf, 0, w);
            out.write(buf.data(), 8);
        }
    }
}

void read_exact(std::istream& in, unsigned char* dst, std::size_t n, const char* what) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw ParseError(std::string("batch file truncated in ") + what);
    }
}

std::vector<Line> read_lines(std::istream& in, std::size_t count, const char* what) {
    std::vector<Line> lines(count);
    unsigned char buf[kLineBits / 8];
    for (Line& line : lines) {
        read_exact(in, buf, sizeof buf, what);
        for (unsigned w = 0; w < kLineWords; ++w) {
            line[w] = get_le<std::uint64_t>(buf + 8 * w);
        }
    }
    return lines;
}

} // namespace

void JobGeometry::validate() const {
    if (bases_per_side == 0 || job_bits() > kLineBits) {
        throw InvalidArgument("bases_per_side must be in [1, 256], got " + std::to_string(bases_per_side));
    }
}

std::size_t JobBatch::payload_lines() const { return ceil_div(job_count, geometry.jobs_per_line()); }

std::size_t JobBatch::result_lines() const { return ceil_div(job_count, kResultsPerLine); }

JobBatch pack_jobs(const std::vector<JobPair>& pairs, const JobGeometry& geom, PadPolicy pad) {
    geom.validate();
    const std::size_t L = geom.bases_per_side;
    JobBatch batch;
    batch.geometry = geom;
    batch.job_count = pairs.size();
    batch.payload.assign(batch.payload_lines(), Line{});
    batch.lengths.reserve(pairs.size());

    const unsigned per_line = geom.jobs_per_line();
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        const auto& [q, r] = pairs[n];
        for (const PackedSequence* s : {&q, &r}) {
            if (s->size() > L || (pad == PadPolicy::Strict && s->size() != L)) {
                throw LengthMismatch("job " + std::to_string(n) + " has a side of " + std::to_string(s->size()) +
                                     " bases, geometry expects " + std::to_string(L));
            }
        }
        batch.lengths.push_back({static_cast<std::uint16_t>(q.size()), static_cast<std::uint16_t>(r.size())});
        Line& line = batch.payload[n / per_line];
        const std::size_t base_bit = (n % per_line) * geom.job_bits();
        for (std::size_t b = 0; b < q.size(); ++b) {
            set_bits(line, base_bit + 2 * b, q.code(b), 2);
        }
        for (std::size_t b = 0; b < r.size(); ++b) {
            set_bits(line, base_bit + 2 * L + 2 * b, r.code(b), 2);
        }
    }
    return batch;
}

std::vector<JobPair> unpack_jobs(const JobBatch& batch) {
    const std::size_t L = batch.geometry.bases_per_side;
    const unsigned per_line = batch.geometry.jobs_per_line();
    std::vector<JobPair> out;
    out.reserve(batch.job_count);
    std::vector<std::uint8_t> codes;
    for (std::size_t n = 0; n < batch.job_count; ++n) {
        const Line& line = batch.payload[n / per_line];
        const std::size_t base_bit = (n % per_line) * batch.geometry.job_bits();
        auto side = [&](std::size_t start, std::size_t len) {
            codes.resize(len);
            for (std::size_t b = 0; b < len; ++b) {
                codes[b] = static_cast<std::uint8_t>(get_bits(line, start + 2 * b, 2));
            }
            return PackedSequence::from_codes(codes);
        };
        out.emplace_back(side(base_bit, batch.lengths[n].query), side(base_bit + 2 * L, batch.lengths[n].reference));
    }
    return out;
}

std::vector<std::uint32_t> unpack_results(const JobBatch& batch) {
    if (!batch.results_filled()) {
        throw Incomplete("result buffer has not been filled");
    }
    std::vector<std::uint32_t> out(batch.job_count);
    for (std::size_t n = 0; n < batch.job_count; ++n) {
        out[n] = static_cast<std::uint32_t>(
            get_bits(batch.results[n / kResultsPerLine], (n % kResultsPerLine) * kResultBits, kResultBits));
    }
    return out;
}

BatchRun run_batch(JobBatch& batch, const LatticeConfig& cfg, unsigned n_lattices, std::uint64_t fetch_latency) {
    if (n_lattices == 0) {
        throw InvalidArgument("n_lattices must be >= 1");
    }
    cfg.validate();
    const std::vector<JobPair> jobs = unpack_jobs(batch);
    const unsigned per_line = batch.geometry.jobs_per_line();

    BatchRun run;
    run.results.resize(jobs.size());
    run.stats.lattices.assign(n_lattices, LatticeUsage{});
    std::vector<std::uint64_t> free_at(n_lattices, 0);
    for (std::size_t n = 0; n < jobs.size(); ++n) {
        Lattice lat = build_lattice(jobs[n].first, jobs[n].second, cfg);
        const std::uint64_t cycles = simulate(lat, cfg).output_cycles;
        if (cycles > std::numeric_limits<std::uint32_t>::max()) {
            throw InvalidArgument("job " + std::to_string(n) + " needs more than 32 result bits");
        }
        run.results[n] = static_cast<std::uint32_t>(cycles);

        LatticeUsage& use = run.stats.lattices[n % n_lattices];
        std::uint64_t& free = free_at[n % n_lattices];
        const std::uint64_t arrives = (n / per_line) * fetch_latency;
        const std::uint64_t start = std::max(free, arrives);
        use.stall += start - free;
        use.busy += cycles;
        ++use.jobs;
        free = start + cycles;
        use.total = free;
    }

    StallStats& st = run.stats;
    for (const LatticeUsage& use : st.lattices) {
        st.busy += use.busy;
        st.stall += use.stall;
        st.makespan = std::max(st.makespan, use.total);
    }
    st.stall_fraction = st.busy + st.stall == 0 ? 0.0
                                                 : static_cast<double>(st.stall) / static_cast<double>(st.busy + st.stall);

    batch.results.assign(batch.result_lines(), Line{});
    for (std::size_t n = 0; n < jobs.size(); ++n) {
        set_bits(batch.results[n / kResultsPerLine], (n % kResultsPerLine) * kResultBits, run.results[n], kResultBits);
    }
    return run;
}

void write_batch_file(std::ostream& out, const JobBatch& batch) {
    if (batch.job_count > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("too many jobs for one batch file");
    }
    const bool filled = !batch.results.empty();
    std::string header(kHeaderBytes, '\0');
    std::memcpy(header.data(), kMagic, sizeof kMagic);
    put_le<std::uint16_t>(header, 8, kVersion);
    put_le<std::uint16_t>(header, 10, batch.geometry.bases_per_side);
    put_le<std::uint16_t>(header, 12, static_cast<std::uint16_t>(batch.geometry.job_bits()));
    put_le<std::uint8_t>(header, 14, JobGeometry::bits_per_base);
    put_le<std::uint8_t>(header, 15, static_cast<std::uint8_t>(batch.geometry.jobs_per_line()));
    put_le<std::uint32_t>(header, 16, static_cast<std::uint32_t>(batch.job_count));
    put_le<std::uint32_t>(header, 20, static_cast<std::uint32_t>(batch.payload.size()));
    put_le<std::uint32_t>(header, 24, static_cast<std::uint32_t>(batch.results.size()));
    put_le<std::uint16_t>(header, 28, kResultBits);
    put_le<std::uint8_t>(header, 30, filled ? 1 : 0);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    std::string table(4 * batch.job_count, '\0');
    for (std::size_t n = 0; n < batch.job_count; ++n) {
        put_le<std::uint16_t>(table, 4 * n, batch.lengths[n].query);
        put_le<std::uint16_t>(table, 4 * n + 2, batch.lengths[n].reference);
    }
    out.write(table.data(), static_cast<std::streamsize>(table.size()));
    write_lines(out, batch.payload);
    write_lines(out, batch.results);
    if (!out) {
        throw Error("failed to write batch file");
    }
}

JobBatch read_batch_file(std::istream& in) {
    unsigned char h[kHeaderBytes];
    read_exact(in, h, sizeof h, "header");
    if (std::memcmp(h, kMagic, sizeof kMagic) != 0) {
        throw ParseError("not a batch file (bad magic)");
    }
    if (get_le<std::uint16_t>(h + 8) != kVersion) {
        throw ParseError("unsupported batch file version " + std::to_string(get_le<std::uint16_t>(h + 8)));
    }
    JobBatch batch;
    batch.geometry.bases_per_side = get_le<std::uint16_t>(h + 10);
    try {
        batch.geometry.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
    if (get_le<std::uint16_t>(h + 12) != batch.geometry.job_bits() || h[14] != JobGeometry::bits_per_base ||
        h[15] != batch.geometry.jobs_per_line() || get_le<std::uint16_t>(h + 28) != kResultBits) {
        throw ParseError("batch file geometry fields are inconsistent");
    }
    batch.job_count = get_le<std::uint32_t>(h + 16);
    const std::size_t payload_lines = get_le<std::uint32_t>(h + 20);
    const std::size_t result_lines = get_le<std::uint32_t>(h + 24);
    const bool filled = (h[30] & 1) != 0;
    if (payload_lines != batch.payload_lines() || result_lines != (filled ? batch.result_lines() : 0)) {
        throw ParseError("batch file line counts do not match the job count");
    }

    std::vector<unsigned char> table(4 * batch.job_count);
    read_exact(in, table.data(), table.size(), "length table");
    for (std::size_t n = 0; n < batch.job_count; ++n) {
        JobLengths len{get_le<std::uint16_t>(&table[4 * n]), get_le<std::uint16_t>(&table[4 * n + 2])};
        if (len.query == 0 || len.reference == 0 || len.query > batch.geometry.bases_per_side ||
            len.reference > batch.geometry.bases_per_side) {
            throw ParseError("job " + std::to_string(n) + " has an invalid length entry");
        }
        batch.lengths.push_back(len);
    }
    batch.payload = read_lines(in, payload_lines, "payload");
    batch.results = read_lines(in, result_lines, "results");
    return batch;
}

} // namespace racedist
