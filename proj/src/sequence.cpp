#include "racedist/sequence.hpp"

#include <istream>
#include <ostream>

#include "racedist/errors.hpp"

namespace racedist {

namespace {

int code_of(char c) {
    switch (c) {
        case 'A': case 'a': return 0;
        case 'C': case 'c': return 1;
        case 'G': case 'g': return 2;
        case 'T': case 't': return 3;
        default: return -1;
    }
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

} // namespace

char base_char(Base b) {
    static constexpr char letters[4] = {'A', 'C', 'G', 'T'};
    return letters[static_cast<std::uint8_t>(b) & 3u];
}

void PackedSequence::push_back(std::uint8_t code) {
    if ((length_ & 31) == 0) {
        words_.push_back(0);
    }
    words_.back() |= static_cast<std::uint64_t>(code) << ((length_ & 31) * 2);
    ++length_;
}

PackedSequence PackedSequence::from_text(std::string_view text) {
    if (text.empty()) {
        throw InvalidArgument("sequence must not be empty");
    }
    PackedSequence seq;
    seq.words_.reserve((text.size() + 31) / 32);
    for (std::size_t i = 0; i < text.size(); ++i) {
        int c = code_of(text[i]);
        if (c < 0) {
            throw AmbiguousBase(i, text[i]);
        }
        seq.push_back(static_cast<std::uint8_t>(c));
    }
    return seq;
}

PackedSequence PackedSequence::from_codes(std::span<const std::uint8_t> codes) {
    if (codes.empty()) {
        throw InvalidArgument("sequence must not be empty");
    }
    PackedSequence seq;
    seq.words_.reserve((codes.size() + 31) / 32);
    for (std::uint8_t c : codes) {
        if (c > 3) {
            throw InvalidArgument("base code out of range");
        }
        seq.push_back(c);
    }
    return seq;
}

PackedSequence PackedSequence::subseq(std::size_t pos, std::size_t len) const {
    if (len == 0 || pos > length_ || len > length_ - pos) {
        throw InvalidArgument("subsequence out of range");
    }
    PackedSequence out;
    out.words_.reserve((len + 31) / 32);
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(code(pos + i));
    }
    return out;
}

std::vector<std::uint8_t> PackedSequence::codes() const {
    std::vector<std::uint8_t> out(length_);
    for (std::size_t i = 0; i < length_; ++i) {
        out[i] = code(i);
    }
    return out;
}

std::string PackedSequence::to_string() const {
    std::string out(length_, 'A');
    for (std::size_t i = 0; i < length_; ++i) {
        out[i] = base_char((*this)[i]);
    }
    return out;
}

PackedSequence encode_sequence(std::string_view text) {
    return PackedSequence::from_text(text);
}

namespace {

// Record names stop at the first whitespace, as in most aligners.
std::string first_word(const std::string& header) {
    return header.substr(0, header.find_first_of(" \t"));
}

} // namespace

std::vector<FastaRecord> read_fasta(std::istream& in) {
    std::vector<FastaRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '>') {
            records.push_back({first_word(line.substr(1)), {}});
        } else if (records.empty()) {
            throw ParseError("FASTA sequence data before first header");
        } else {
            records.back().sequence += line;
        }
    }
    return records;
}

std::vector<FastqRecord> read_fastq(std::istream& in) {
    std::vector<FastqRecord> records;
    std::string header, seq, plus, qual;
    std::size_t record_no = 0;
    while (std::getline(in, header)) {
        strip_cr(header);
        if (header.empty()) {
            continue;
        }
        ++record_no;
        if (header.front() != '@') {
            throw ParseError("FASTQ record " + std::to_string(record_no) + ": header must start with '@'");
        }
        if (!std::getline(in, seq) || !std::getline(in, plus)) {
            throw ParseError("FASTQ record " + std::to_string(record_no) + " is truncated");
        }
        // a record whose quality line is the last line of a file without
        // trailing newline still parses; a missing quality line does not
        if (!std::getline(in, qual)) {
            throw ParseError("FASTQ record " + std::to_string(record_no) + " is missing its quality line");
        }
        strip_cr(seq);
        strip_cr(plus);
        strip_cr(qual);
        if (plus.empty() || plus.front() != '+') {
            throw ParseError("FASTQ record " + std::to_string(record_no) + ": separator must start with '+'");
        }
        if (qual.size() != seq.size()) {
            throw ParseError("FASTQ record " + std::to_string(record_no) + ": quality length differs from sequence");
        }
        records.push_back({first_word(header.substr(1)), seq, qual});
    }
    return records;
}

void write_fastq(std::ostream& out, const FastqRecord& record) {
    out << '@' << record.name << '\n' << record.sequence << "\n+\n" << record.quality << '\n';
}

CleanedSequence strip_ambiguous(std::string_view text) {
    CleanedSequence out;
    out.sequence.reserve(text.size());
    for (char c : text) {
        int code = code_of(c);
        if (code < 0) {
            ++out.removed;
        } else {
            out.sequence.push_back("ACGT"[code]);
        }
    }
    return out;
}

} // namespace racedist
