#ifndef racedist_dp_oracle_hpp
#define racedist_dp_oracle_hpp

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "racedist/penalties.hpp"
#include "racedist/sequence.hpp"

namespace racedist {

/*
 * The three output notions of the distance engines.
 *
 *   Sw  semi-global: the query is consumed completely, the reference only up
 *       to the best prefix. The result is the minimum of the last matrix row.
 *       This is NOT the similarity-maximising local Smith-Waterman; the name
 *       follows the hardware's output tap.
 *   Nw  global: bottom-right cell.
 *   Lv  global with a cap on the permissible distance.
 */
enum class Mode { Sw, Nw, Lv };

std::string to_string(Mode mode);
// Throws ParseError.
Mode parse_mode(const std::string& text);

/*
 * Exact edit-distance matrix. Rows are indexed by the query (0..l_Q), columns
 * by the reference (0..l_R). A vertical step consumes a query base (delete), a
 * horizontal step a reference base (insert):
 *
 *   S(i,j) = min{ S(i-1,j) + del, S(i,j-1) + insert, S(i-1,j-1) + match/mismatch(Q_i,R_j) }
 */
class ScoreMatrix {
public:
    ScoreMatrix(PackedSequence query, PackedSequence reference, GapPenalties gp);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::int64_t at(std::size_t i, std::size_t j) const { return cells_[i * cols_ + j]; }

    const PackedSequence& query() const { return query_; }
    const PackedSequence& reference() const { return reference_; }
    const GapPenalties& penalties() const { return gp_; }

private:
    PackedSequence query_;
    PackedSequence reference_;
    GapPenalties gp_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::int64_t> cells_;
};

ScoreMatrix full_matrix(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp);

std::int64_t nw_distance(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp);

struct SwResult {
    std::int64_t score;
    std::size_t end_column;  // smallest column attaining the minimum
};
SwResult sw_distance(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp);

struct LvResult {
    std::int64_t distance;  // min(nw, cap)
    bool capped;            // true distance exceeds the cap
};

// Banded NW. Cells whose indel lower bound already exceeds max_e are skipped
// when every penalty is non-negative. Throws InvalidArgument for max_e < 0.
LvResult lv_evaluate(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp, std::int64_t max_e);
std::int64_t lv_distance(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp, std::int64_t max_e);

enum class EditKind : std::uint8_t { Match, Mismatch, Insert, Delete };

struct EditOp {
    EditKind kind;
    std::size_t query_pos;      // position of the consumed query base (or next one for Insert)
    std::size_t reference_pos;  // position of the consumed reference base (or next one for Delete)
};

struct AlignmentPath {
    std::vector<EditOp> ops;  // in sequence order, from (0,0) outwards
    std::int64_t score = 0;
    std::size_t query_end = 0;
    std::size_t reference_end = 0;

    // Run-length form using '=', 'X', 'I', 'D', e.g. "5=1X2=".
    std::string cigar() const;
};

// Minimum-weight path from the mode's endpoint back to (0,0). Ties prefer the
// diagonal, then delete, then insert. Lv backtracks like Nw.
AlignmentPath backtrack(const ScoreMatrix& matrix, Mode mode);

// Sum of penalties along the path. Throws InvalidArgument when the path does
// not consume the sequences consistently.
std::int64_t replay_path(const AlignmentPath& path, const PackedSequence& q, const PackedSequence& r,
                         const GapPenalties& gp);

// Row-major CSV: header row is the reference bases, each row starts with its query base.
void write_matrix_csv(std::ostream& out, const ScoreMatrix& matrix);

} // namespace racedist

#endif
