"""Small dense matrices whose entries are series (rank is at most a handful)."""

from itertools import permutations

from .coeffs import INF


def zeros_like(x, n, m):
    z = type(x).zero(x.ring)
    return [[z for _ in range(m)] for _ in range(n)]


def identity(cls, ring, n):
    z, o = cls.zero(ring), cls.one(ring)
    return [[o if i == j else z for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = A[i][0] * B[0][j]
            for t in range(1, k):
                acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(A, v):
    out = []
    for row in A:
        acc = row[0] * v[0]
        for a, x in zip(row[1:], v[1:]):
            acc = acc + a * x
        out.append(acc)
    return out


def mat_map(fn, A):
    return [[fn(a) for a in row] for row in A]


def transpose(A):
    return [list(col) for col in zip(*A)]


def kron(A, B):
    n, m = len(B), len(B[0])
    return [[A[i // n][j // m] * B[i % n][j % m] for j in range(len(A[0]) * m)]
            for i in range(len(A) * n)]


def _sign(perm):
    s, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        if length % 2 == 0:
            s = -s
    return s


def det(A):
    n = len(A)
    acc = None
    for perm in permutations(range(n)):
        term = A[0][perm[0]]
        for i in range(1, n):
            term = term * A[i][perm[i]]
        if _sign(perm) < 0:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def minor(A, i, j):
    return [row[:j] + row[j + 1:] for k, row in enumerate(A) if k != i]


def inverse(A, cap=None):
    """Adjugate over determinant; ``cap`` bounds the determinant inverse."""
    n = len(A)
    d = det(A)
    dinv = d.inverse(cap=cap if d.hi == INF else None)
    if n == 1:
        return [[dinv]]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            m = det(minor(A, j, i))
            row.append(m * dinv if (i + j) % 2 == 0 else -(m * dinv))
        out.append(row)
    return out


def agrees(A, B):
    return all(a.agrees(b) for ra, rb in zip(A, B) for a, b in zip(ra, rb))
