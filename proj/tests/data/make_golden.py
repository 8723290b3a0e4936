#!/usr/bin/env python3
"""Writes golden_jobs.txt and golden_batch.bin.

Independent of the C++ packer: the byte layout below is built from the file
format description in README.md.
"""
import struct
from pathlib import Path

HERE = Path(__file__).resolve().parent
L = 64
LINE_BITS = 1024
JOB_BITS = 4 * L
JOBS_PER_LINE = LINE_BITS // JOB_BITS
CODE = {"A": 0, "C": 1, "G": 2, "T": 3}


def lcg(state):
    while True:
        state = (state * 6364136223846793005 + 1442695040888963407) % 2**64
        yield state >> 62


def make_jobs():
    gen = lcg(2024)
    jobs = []
    for k in range(4):
        q = "".join("ACGT"[next(gen)] for _ in range(L))
        r = list(q)
        for p in range(k, L, 9 + k):
            r[p] = "ACGT"[(CODE[r[p]] + 1 + next(gen) % 3) % 4]
        jobs.append((q, "".join(r)))
    return jobs


def pack(jobs):
    lines = [0] * ((len(jobs) + JOBS_PER_LINE - 1) // JOBS_PER_LINE)
    for n, (q, r) in enumerate(jobs):
        job = 0
        for b, c in enumerate(q):
            job |= CODE[c] << (2 * b)
        for b, c in enumerate(r):
            job |= CODE[c] << (2 * L + 2 * b)
        lines[n // JOBS_PER_LINE] |= job << ((n % JOBS_PER_LINE) * JOB_BITS)
    return lines


def main():
    jobs = make_jobs()
    lines = pack(jobs)
    header = b"ASAPJOBS" + struct.pack("<HHHBBIIIHBB", 1, L, JOB_BITS, 2, JOBS_PER_LINE,
                                       len(jobs), len(lines), 0, 32, 0, 0)
    assert len(header) == 32
    table = b"".join(struct.pack("<HH", len(q), len(r)) for q, r in jobs)
    payload = b"".join(line.to_bytes(LINE_BITS // 8, "little") for line in lines)
    (HERE / "golden_batch.bin").write_bytes(header + table + payload)
    (HERE / "golden_jobs.txt").write_text("".join(f"{q} {r}\n" for q, r in jobs))


if __name__ == "__main__":
    main()
