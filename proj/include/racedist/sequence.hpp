#ifndef racedist_sequence_hpp
#define racedist_sequence_hpp

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace racedist {

// 2-bit nucleotide codes. The numeric values are part of the device layout.
enum class Base : std::uint8_t { A = 0, C = 1, G = 2, T = 3 };

char base_char(Base b);

/*
 * Nucleotide string packed at 2 bits per base, 32 bases per 64-bit word,
 * base 0 in the least significant bits of word 0.
 */
class PackedSequence {
public:
    PackedSequence() = default;

    // Parses A/C/G/T (either case). Throws AmbiguousBase on anything else and
    // InvalidArgument on empty input.
    static PackedSequence from_text(std::string_view text);

    // Builds from codes 0..3. Throws InvalidArgument when empty or a code is out of range.
    static PackedSequence from_codes(std::span<const std::uint8_t> codes);

    std::size_t size() const { return length_; }
    bool empty() const { return length_ == 0; }

    std::uint8_t code(std::size_t pos) const {
        return static_cast<std::uint8_t>((words_[pos >> 5] >> ((pos & 31) * 2)) & 3u);
    }
    Base operator[](std::size_t pos) const { return static_cast<Base>(code(pos)); }

    std::span<const std::uint64_t> words() const { return words_; }

    // Codes of [pos, pos + len). Throws InvalidArgument if out of range or len == 0.
    PackedSequence subseq(std::size_t pos, std::size_t len) const;

    // Unpacked copy of all codes, convenient for inner loops.
    std::vector<std::uint8_t> codes() const;

    std::string to_string() const;

    bool operator==(const PackedSequence& other) const = default;

private:
    void push_back(std::uint8_t code);

    std::vector<std::uint64_t> words_;
    std::size_t length_ = 0;
};

// Free-function spelling of PackedSequence::from_text.
PackedSequence encode_sequence(std::string_view text);

struct FastaRecord {
    std::string name;
    std::string sequence;
};

struct FastqRecord {
    std::string name;
    std::string sequence;
    std::string quality;
};

// '>' headers, sequence lines concatenated. Tolerates CRLF and a missing
// trailing newline. Throws ParseError on sequence data before the first header.
std::vector<FastaRecord> read_fasta(std::istream& in);

// Four-line records. The quality line is kept but never interpreted.
std::vector<FastqRecord> read_fastq(std::istream& in);

void write_fastq(std::ostream& out, const FastqRecord& record);

// Removes every character outside ACGTacgt and upcases the rest. Reference
// regions with ambiguity codes are dropped this way before indexing.
struct CleanedSequence {
    std::string sequence;
    std::size_t removed = 0;
};
CleanedSequence strip_ambiguous(std::string_view text);

} // namespace racedist

#endif
