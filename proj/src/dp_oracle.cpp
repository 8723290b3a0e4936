#include "racedist/dp_oracle.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "racedist/errors.hpp"

namespace racedist {

namespace {

constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::max() / 4;

void require_nonempty(const PackedSequence& q, const PackedSequence& r) {
    if (q.empty() || r.empty()) {
        throw InvalidArgument("sequences must be non-empty");
    }
}

// Fills `last` with the final row of S, keeping two rows only.
void last_row(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp,
              std::vector<std::int64_t>& last) {
    const auto qc = q.codes();
    const auto rc = r.codes();
    const std::size_t cols = rc.size() + 1;
    std::vector<std::int64_t> prev(cols), cur(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        prev[j] = static_cast<std::int64_t>(j) * gp.insert;
    }
    for (std::size_t i = 1; i <= qc.size(); ++i) {
        cur[0] = static_cast<std::int64_t>(i) * gp.del;
        for (std::size_t j = 1; j < cols; ++j) {
            const std::int64_t diag = prev[j - 1] + (qc[i - 1] == rc[j - 1] ? gp.match : gp.mismatch);
            cur[j] = std::min({diag, prev[j] + gp.del, cur[j - 1] + gp.insert});
        }
        std::swap(prev, cur);
    }
    last = std::move(prev);
}

} // namespace

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::Sw: return "sw";
        case Mode::Nw: return "nw";
        case Mode::Lv: return "lv";
    }
    return "?";
}

Mode parse_mode(const std::string& text) {
    if (text == "sw") return Mode::Sw;
    if (text == "nw") return Mode::Nw;
    if (text == "lv") return Mode::Lv;
    throw ParseError("unknown mode '" + text + "' (expected sw, nw or lv)");
}

ScoreMatrix::ScoreMatrix(PackedSequence query, PackedSequence reference, GapPenalties gp)
    : query_(std::move(query)), reference_(std::move(reference)), gp_(gp),
      rows_(query_.size() + 1), cols_(reference_.size() + 1), cells_(rows_ * cols_) {
    require_nonempty(query_, reference_);
    const auto qc = query_.codes();
    const auto rc = reference_.codes();
    for (std::size_t j = 0; j < cols_; ++j) {
        cells_[j] = static_cast<std::int64_t>(j) * gp_.insert;
    }
    for (std::size_t i = 1; i < rows_; ++i) {
        std::int64_t* row = &cells_[i * cols_];
        const std::int64_t* up = row - cols_;
        row[0] = static_cast<std::int64_t>(i) * gp_.del;
        for (std::size_t j = 1; j < cols_; ++j) {
            const std::int64_t diag = up[j - 1] + (qc[i - 1] == rc[j - 1] ? gp_.match : gp_.mismatch);
            row[j] = std::min({diag, up[j] + gp_.del, row[j - 1] + gp_.insert});
        }
    }
}

ScoreMatrix full_matrix(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp) {
    return ScoreMatrix(q, r, gp);
}

std::int64_t nw_distance(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp) {
    require_nonempty(q, r);
    std::vector<std::int64_t> last;
    last_row(q, r, gp, last);
    return last.back();
}

SwResult sw_distance(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp) {
    require_nonempty(q, r);
    std::vector<std::int64_t> last;
    last_row(q, r, gp, last);
    auto it = std::min_element(last.begin(), last.end());
    return {*it, static_cast<std::size_t>(it - last.begin())};
}

LvResult lv_evaluate(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp, std::int64_t max_e) {
    require_nonempty(q, r);
    if (max_e < 0) {
        throw InvalidArgument("max_e must be >= 0");
    }
    const bool banded = gp.match >= 0 && gp.mismatch >= 0 && gp.insert >= 0 && gp.del >= 0;
    const auto qc = q.codes();
    const auto rc = r.codes();
    const auto lq = static_cast<std::int64_t>(qc.size());
    const auto lr = static_cast<std::int64_t>(rc.size());

    // cheapest indels any path through (i,j) must pay
    auto lower_bound = [&](std::int64_t i, std::int64_t j) {
        auto gap_cost = [&](std::int64_t d) { return d > 0 ? d * gp.del : -d * gp.insert; };
        return gap_cost(i - j) + gap_cost((lq - i) - (lr - j));
    };
    auto in_band = [&](std::int64_t i, std::int64_t j) { return !banded || lower_bound(i, j) <= max_e; };

    std::vector<std::int64_t> prev(rc.size() + 1, kUnreached), cur(rc.size() + 1, kUnreached);
    prev[0] = 0;
    for (std::int64_t j = 1; j <= lr; ++j) {
        prev[j] = in_band(0, j) && prev[j - 1] < kUnreached ? prev[j - 1] + gp.insert : kUnreached;
    }
    for (std::int64_t i = 1; i <= lq; ++i) {
        cur[0] = in_band(i, 0) && prev[0] < kUnreached ? prev[0] + gp.del : kUnreached;
        for (std::int64_t j = 1; j <= lr; ++j) {
            if (!in_band(i, j)) {
                cur[j] = kUnreached;
                continue;
            }
            std::int64_t best = kUnreached;
            if (prev[j - 1] < kUnreached) {
                best = prev[j - 1] + (qc[i - 1] == rc[j - 1] ? gp.match : gp.mismatch);
            }
            if (prev[j] < kUnreached) {
                best = std::min(best, prev[j] + gp.del);
            }
            if (cur[j - 1] < kUnreached) {
                best = std::min(best, cur[j - 1] + gp.insert);
            }
            cur[j] = best;
        }
        std::swap(prev, cur);
    }
    const std::int64_t nw = prev[rc.size()];
    if (nw > max_e) {
        return {max_e, true};
    }
    return {nw, false};
}

std::int64_t lv_distance(const PackedSequence& q, const PackedSequence& r, const GapPenalties& gp, std::int64_t max_e) {
    return lv_evaluate(q, r, gp, max_e).distance;
}

std::string AlignmentPath::cigar() const {
    static constexpr char symbol[] = {'=', 'X', 'I', 'D'};
    std::string out;
    std::size_t i = 0;
    while (i < ops.size()) {
        std::size_t run = i;
        while (run < ops.size() && ops[run].kind == ops[i].kind) {
            ++run;
        }
        out += std::to_string(run - i);
        out += symbol[static_cast<int>(ops[i].kind)];
        i = run;
    }
    return out;
}

AlignmentPath backtrack(const ScoreMatrix& matrix, Mode mode) {
    const auto qc = matrix.query().codes();
    const auto rc = matrix.reference().codes();
    const GapPenalties& gp = matrix.penalties();

    std::size_t i = matrix.rows() - 1;
    std::size_t j = matrix.cols() - 1;
    if (mode == Mode::Sw) {
        std::int64_t best = matrix.at(i, 0);
        j = 0;
        for (std::size_t c = 1; c < matrix.cols(); ++c) {
            if (matrix.at(i, c) < best) {
                best = matrix.at(i, c);
                j = c;
            }
        }
    }

    AlignmentPath path;
    path.score = matrix.at(i, j);
    path.query_end = i;
    path.reference_end = j;
    while (i > 0 || j > 0) {
        const std::int64_t here = matrix.at(i, j);
        if (i > 0 && j > 0) {
            const bool same = qc[i - 1] == rc[j - 1];
            if (here == matrix.at(i - 1, j - 1) + (same ? gp.match : gp.mismatch)) {
                path.ops.push_back({same ? EditKind::Match : EditKind::Mismatch, i - 1, j - 1});
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && here == matrix.at(i - 1, j) + gp.del) {
            path.ops.push_back({EditKind::Delete, i - 1, j});
            --i;
        } else {
            path.ops.push_back({EditKind::Insert, i, j - 1});
            --j;
        }
    }
    std::reverse(path.ops.begin(), path.ops.end());
    return path;
}

std::int64_t replay_path(const AlignmentPath& path, const PackedSequence& q, const PackedSequence& r,
                         const GapPenalties& gp) {
    std::size_t i = 0, j = 0;
    std::int64_t total = 0;
    for (const EditOp& op : path.ops) {
        switch (op.kind) {
            case EditKind::Match:
            case EditKind::Mismatch: {
                if (op.query_pos != i || op.reference_pos != j || i >= q.size() || j >= r.size()) {
                    throw InvalidArgument("path does not replay on the sequences");
                }
                const bool same = q.code(i) == r.code(j);
                if (same != (op.kind == EditKind::Match)) {
                    throw InvalidArgument("path labels a mismatch as a match or vice versa");
                }
                total += same ? gp.match : gp.mismatch;
                ++i;
                ++j;
                break;
            }
            case EditKind::Delete:
                if (op.query_pos != i || i >= q.size()) {
                    throw InvalidArgument("path does not replay on the sequences");
                }
                total += gp.del;
                ++i;
                break;
            case EditKind::Insert:
                if (op.reference_pos != j || j >= r.size()) {
                    throw InvalidArgument("path does not replay on the sequences");
                }
                total += gp.insert;
                ++j;
                break;
        }
    }
    if (i != path.query_end || j != path.reference_end) {
        throw InvalidArgument("path end does not match its recorded endpoint");
    }
    return total;
}

void write_matrix_csv(std::ostream& out, const ScoreMatrix& matrix) {
    const std::string r = matrix.reference().to_string();
    const std::string q = matrix.query().to_string();
    out << ",-";
    for (char c : r) {
        out << ',' << c;
    }
    out << '\n';
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        out << (i == 0 ? '-' : q[i - 1]);
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            out << ',' << matrix.at(i, j);
        }
        out << '\n';
    }
}

} // namespace racedist
