"""Nameblind matrices over word bases: constructors, checks and the commutant oracle.

Matrices act on the span of non-repeating m-letter words over an address set
A. A matrix is nameblind when it commutes with the permutation matrices of
all renamings of A. ``M_k`` below always denotes the adjacent transposition
matrix on one address fewer than the matrix being assembled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import AQCError, Sector
from .operators import GateOperator, Local
from .renaming import Renaming, adjacent_transposition

TOL = 1e-12
EXT = "_"


class PreconditionFailed(AQCError):
    pass


class DimensionMismatch(AQCError):
    pass


class ResourceLimit(AQCError):
    pass


class EmptyBlock(AQCError):
    pass


def indicator(subset: Iterable[int], A: Sequence[int]) -> int:
    """Little-endian binary indicator of ``subset`` within sorted ``A``."""
    pos = {a: k for k, a in enumerate(sorted(A))}
    return sum(1 << pos[a] for a in subset)


class WordBasis:
    """Non-repeating m-letter words over A in 'lex' or 'set-lex' order."""

    def __init__(self, m: int, A: Iterable[int], order: str = "lex"):
        self.A = tuple(sorted(A))
        self.m = int(m)
        self.order = order
        if not 0 <= self.m <= len(self.A):
            raise AQCError("word length exceeds the address count")
        if order == "lex":
            words = list(itertools.permutations(self.A, self.m))
        elif order == "set-lex":
            subsets = sorted(itertools.combinations(self.A, self.m), key=lambda s: indicator(s, self.A))
            words = [w for s in subsets for w in itertools.permutations(s)]
        else:
            raise AQCError(f"unknown order {order!r}")
        self.words: list[tuple[int, ...]] = words
        self.index = {w: i for i, w in enumerate(words)}

    @property
    def n(self) -> int:
        return len(self.A)

    def __len__(self) -> int:
        return len(self.words)

    def permutation(self, r: Renaming) -> np.ndarray:
        """Index array p with p[i] = index of r(words[i])."""
        return np.array([self.index[r.word(w)] for w in self.words], dtype=int)


def renaming_permutation_matrix(r: Renaming, basis: WordBasis) -> np.ndarray:
    p = basis.permutation(r)
    P = np.zeros((len(basis), len(basis)))
    P[p, np.arange(len(basis))] = 1.0
    return P


@lru_cache(maxsize=None)
def _transposition(n: int, k: int) -> np.ndarray:
    if not 1 <= k <= n - 1:
        from .renaming import OutOfRange
        raise OutOfRange(f"k={k} outside 1..{n - 1}")
    if n == 2:
        return np.array([[0.0, 1.0], [1.0, 0.0]])
    b = math.factorial(n - 1)
    R = np.zeros((n * b, n * b))
    eye = np.eye(b)
    for i in range(1, n + 1):
        sl = slice((i - 1) * b, i * b)
        if i < k:
            R[sl, sl] = _transposition(n - 1, k - 1)
        elif i > k + 1:
            R[sl, sl] = _transposition(n - 1, k)
    ks, ks1 = slice((k - 1) * b, k * b), slice(k * b, (k + 1) * b)
    R[ks, ks1] = eye
    R[ks1, ks] = eye
    R.setflags(write=False)
    return R


def transposition_matrix(n: int, k: int) -> np.ndarray:
    """R_k on the lex basis of n addresses, built block by block."""
    return _transposition(n, k).copy()


def _M(n: int, k: int) -> np.ndarray:
    return _transposition(n, k)


def _chain(n: int, ks: Iterable[int]) -> np.ndarray:
    out = np.eye(math.factorial(n))
    for k in ks:
        out = out @ _M(n, k)
    return out


# --------------------------------------------------------------------------
# checks

@dataclass
class NameblindCheck:
    max_defect: float
    renamings: int

    @property
    def ok(self) -> bool:
        return self.max_defect < TOL


def _renamings(A: Sequence[int], mode: str) -> list[Renaming]:
    A = sorted(A)
    if mode == "generators":
        return [adjacent_transposition(k, A) for k in range(1, len(A))]
    if mode == "full":
        if len(A) > 6:
            raise ResourceLimit("full-group checks are limited to 6 addresses")
        return [Renaming(dict(zip(A, p))) for p in itertools.permutations(A)]
    raise AQCError(f"unknown mode {mode!r}")


def is_nameblind(M, basis: WordBasis, mode: str = "generators") -> NameblindCheck:
    """max |[M, P_r]| over the checked renamings r."""
    M = np.asarray(M)
    if M.shape != (len(basis), len(basis)):
        raise DimensionMismatch(f"matrix {M.shape} vs basis of size {len(basis)}")
    worst = 0.0
    rens = _renamings(basis.A, mode)
    for r in rens:
        p = basis.permutation(r)
        # (P M P^T)[p_i, p_j] = M[i, j]
        conj = np.empty_like(M)
        conj[np.ix_(p, p)] = M
        worst = max(worst, float(np.max(np.abs(conj - M))) if M.size else 0.0)
    return NameblindCheck(worst, len(rens))


def commutes_with(M, n: int, ks: Iterable[int]) -> float:
    M = np.asarray(M)
    return max((float(np.max(np.abs(M @ _M(n, k) - _M(n, k) @ M))) for k in ks), default=0.0)


def is_partially_nameblind(M, n: int, p: int) -> float:
    """Defect of commuting with M_k for every k > p (class B^n_p)."""
    if np.asarray(M).shape != (math.factorial(n),) * 2:
        raise DimensionMismatch("matrix size is not n!")
    return commutes_with(M, n, range(max(p + 1, 1), n))


# --------------------------------------------------------------------------
# constructors

def _corner_block(n: int, p: int, i: int, j: int, D, B):
    """Block (i, j), i, j > p, of the D/B corner; M factors on n-1 addresses."""
    if i == j:
        return D
    if i < j:
        return _chain(n - 1, range(j - 2, p, -1)) @ B @ _chain(n - 1, range(p + 1, i))
    return _chain(n - 1, range(j - 1, p, -1)) @ B @ _chain(n - 1, range(p + 1, i - 1))


def _assemble(n: int, p: int, A, Bl, Bc, D, B) -> np.ndarray:
    b = math.factorial(n - 1)
    out = np.zeros((n * b, n * b), dtype=complex)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i <= p and j <= p:
                blk = A[i - 1][j - 1]
            elif i <= p:
                blk = _chain(n - 1, range(j - 2, p - 1, -1)) @ Bl[i - 1]
            elif j <= p:
                blk = Bc[j - 1] @ _chain(n - 1, range(p, i - 1))
            else:
                blk = _corner_block(n, p, i, j, D, B)
            out[(i - 1) * b:i * b, (j - 1) * b:j * b] = blk
    return out


def build_partially_nameblind(n: int, p: int, blocks: Mapping | np.ndarray, check: bool = True) -> np.ndarray:
    """Assemble an element of B^n_p.

    For p >= n-1 there is no constraint and ``blocks`` is the full matrix.
    Otherwise ``blocks`` maps 'A' (p x p nested list), 'Bl', 'Bc' (length p
    lists), 'D' and 'B' (omitted when p = n-1) to blocks on n-1 addresses.
    """
    if p >= n - 1:
        M = np.asarray(blocks["full"] if isinstance(blocks, Mapping) else blocks, dtype=complex)
        if M.shape != (math.factorial(n),) * 2:
            raise DimensionMismatch("matrix size is not n!")
        return M
    A, Bl, Bc = blocks.get("A", []), blocks.get("Bl", []), blocks.get("Bc", [])
    D, B = blocks["D"], blocks["B"]
    if check:
        size = math.factorial(n - 1)
        for blk in [D, B] + list(Bl) + list(Bc) + [x for row in A for x in row]:
            if np.asarray(blk).shape != (size, size):
                raise DimensionMismatch("every block acts on n-1 addresses")
        tests = [(D, p, "D"), (B, p + 1, "B")]
        tests += [(x, p, "Bl") for x in Bl] + [(x, p, "Bc") for x in Bc]
        tests += [(x, p - 1, "A") for row in A for x in row]
        for blk, q, name in tests:
            if is_partially_nameblind(blk, n - 1, q) > 1e-10:
                raise PreconditionFailed(f"block {name} is not in B^{n - 1}_{q}")
    return _assemble(n, p, A, Bl, Bc, D, B)


def build_nameblind(n: int, D, B, check: bool = True) -> np.ndarray:
    """n!×n! nameblind matrix from D (nameblind on n-1) and B (in B^{n-1}_1)."""
    if n < 2:
        raise AQCError("build_nameblind needs n >= 2")
    D, B = np.asarray(D, dtype=complex), np.asarray(B, dtype=complex)
    if check:
        if is_partially_nameblind(D, n - 1, 0) > 1e-10:
            raise PreconditionFailed("D is not nameblind")
        if is_partially_nameblind(B, n - 1, 1) > 1e-10:
            raise PreconditionFailed("B does not commute with M_2 … M_{n-2}")
    return _assemble(n, 0, [], [], [], D, B)


def build_pure_nameblind(n: int, seed_d, seed_b=None) -> np.ndarray:
    """Pure nameblind matrix.

    With ``seed_b`` given, D and B are pure nameblind matrices on n-1
    addresses; otherwise ``seed_d`` is a flat parameter vector of length
    2**(n-1) consumed recursively.
    """
    if seed_b is not None:
        return build_nameblind(n, seed_d, seed_b, check=False)
    params = np.asarray(seed_d, dtype=complex).reshape(-1)
    if len(params) != pure_parameter_count(n):
        raise AQCError(f"pure nameblind on {n} addresses takes {pure_parameter_count(n)} parameters")
    return _pure(n, params)


def _pure(n: int, params: np.ndarray) -> np.ndarray:
    if n == 1:
        return params.reshape(1, 1).astype(complex)
    half = len(params) // 2
    return _assemble(n, 0, [], [], [], _pure(n - 1, params[:half]), _pure(n - 1, params[half:]))


def pure_parameter_count(n: int) -> int:
    return 1 if n <= 1 else 2 ** (n - 1)


def partial_parameter_count(n: int, p: int) -> int:
    """Free complex parameters of the B^n_p recursion."""
    if p >= n - 1:
        return math.factorial(n) ** 2
    count = p * p * partial_parameter_count(n - 1, p - 1) if p > 0 else 0
    count += (2 * p + 1) * partial_parameter_count(n - 1, p)
    count += partial_parameter_count(n - 1, p + 1)
    return count


def nameblind_parameter_count(n: int) -> int:
    return partial_parameter_count(n, 0)


def partially_from_params(n: int, p: int, params: Sequence[complex]) -> np.ndarray:
    """Deterministic linear map from a parameter vector onto B^n_p."""
    it = iter(np.asarray(params, dtype=complex).reshape(-1))
    out = _partial_from_iter(n, p, it)
    if next(it, None) is not None:
        raise AQCError("too many parameters")
    return out


def _partial_from_iter(n: int, p: int, it) -> np.ndarray:
    if p >= n - 1:
        size = math.factorial(n)
        return np.array([next(it) for _ in range(size * size)], dtype=complex).reshape(size, size)
    A = [[_partial_from_iter(n - 1, p - 1, it) for _ in range(p)] for _ in range(p)]
    Bl = [_partial_from_iter(n - 1, p, it) for _ in range(p)]
    Bc = [_partial_from_iter(n - 1, p, it) for _ in range(p)]
    D = _partial_from_iter(n - 1, p, it)
    B = _partial_from_iter(n - 1, p + 1, it)
    return _assemble(n, p, A, Bl, Bc, D, B)


def random_complex(rng: np.random.Generator, size) -> np.ndarray:
    return rng.normal(size=size) + 1j * rng.normal(size=size)


def random_partially_nameblind(n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    return partially_from_params(n, p, random_complex(rng, partial_parameter_count(n, p)))


def random_nameblind(n: int, rng: np.random.Generator) -> np.ndarray:
    return random_partially_nameblind(n, 0, rng)


def random_pure_nameblind(n: int, rng: np.random.Generator) -> np.ndarray:
    return build_pure_nameblind(n, random_complex(rng, pure_parameter_count(n)))


def extend_mn_nameblind(D, m: int, A: Iterable[int]) -> np.ndarray:
    """One copy of D per m-subset of A, over the set-lex basis."""
    A = sorted(A)
    D = np.asarray(D, dtype=complex)
    if D.shape != (math.factorial(m),) * 2:
        raise DimensionMismatch("D must be m!×m!")
    if len(A) > 6:
        raise ResourceLimit("direct sums are limited to 6 addresses")
    count = math.comb(len(A), m)
    return np.kron(np.eye(count), D)


def u_pm(phi: float, theta: float, sign: int = 1) -> np.ndarray:
    s = 1 if sign >= 0 else -1
    c, sn = math.cos(theta), math.sin(theta)
    return np.exp(1j * phi) * np.array([[c, s * 1j * sn], [s * 1j * sn, c]])


# --------------------------------------------------------------------------
# commutant oracle

def _generator_perms(n: int) -> tuple[WordBasis, list[np.ndarray]]:
    basis = WordBasis(n, range(1, n + 1))
    return basis, [basis.permutation(adjacent_transposition(k, basis.A)) for k in range(1, n)]


def commutant_dimension(n: int) -> int:
    """Dimension of {X : X P_k = P_k X, k = 1..n-1}.

    Each constraint reads X[p(w), p(v)] = X[w, v]; the solution space is
    spanned by indicator matrices of the classes these equalities generate,
    so the dimension is the number of classes (union-find over index pairs).
    """
    if n > 5:
        raise ResourceLimit("commutant dimension is limited to n <= 5")
    if n <= 1:
        return 1
    basis, perms = _generator_perms(n)
    N = len(basis)
    parent = np.arange(N * N)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    idx = np.arange(N * N)
    rows, cols = idx // N, idx % N
    for p in perms:
        images = p[rows] * N + p[cols]
        for a, b in zip(idx.tolist(), images.tolist()):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    return len({find(x) for x in range(N * N)})


def commutant_basis(n: int) -> np.ndarray:
    """Orthonormal basis (rows are flattened matrices) of the commutant, by dense SVD."""
    if n > 4:
        raise ResourceLimit("dense commutant solve is limited to n <= 4")
    N = math.factorial(n)
    if n <= 1:
        return np.ones((1, 1))
    eye = np.eye(N)
    blocks = []
    for k in range(1, n):
        P = renaming_permutation_matrix(adjacent_transposition(k, range(1, n + 1)), WordBasis(n, range(1, n + 1)))
        # row-major vec: vec(XP) = (I ⊗ P^T) vec X,  vec(PX) = (P ⊗ I) vec X
        blocks.append(np.kron(eye, P.T) - np.kron(P, eye))
    C = np.vstack(blocks)
    _, s, vh = np.linalg.svd(C)
    rank = int(np.sum(s > 1e-9))
    return vh[rank:]


def commutant_dimension_dense(n: int) -> int:
    return len(commutant_basis(n))


def block_pattern_defect(X, n: int) -> float:
    """Max deviation of X from the (D, B) block pattern with B = X_{1,2}."""
    X = np.asarray(X)
    b = math.factorial(n - 1)

    def blk(i, j):
        return X[(i - 1) * b:i * b, (j - 1) * b:j * b]

    D, B = blk(1, 1), blk(1, 2)
    worst = 0.0
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            worst = max(worst, float(np.max(np.abs(blk(i, j) - _corner_block(n, 0, i, j, D, B)))))
    worst = max(worst, is_partially_nameblind(D, n - 1, 0), is_partially_nameblind(B, n - 1, 1))
    return worst


# --------------------------------------------------------------------------
# matrix text format

def dump_matrix(M, n: int, m: int, order: str = "lex") -> str:
    M = np.asarray(M, dtype=complex)
    lines = [f"aqc-matrix n={n} m={m} order={order} dim={len(M)}"]
    for row in M:
        lines.append(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def load_matrix(text: str) -> tuple[np.ndarray, WordBasis]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("aqc-matrix"):
        raise AQCError("missing aqc-matrix header")
    head = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
    n, m, dim = int(head["n"]), int(head["m"]), int(head["dim"])
    rows = []
    for ln in lines[1:]:
        vals = [float(x) for x in ln.split()]
        if len(vals) != 2 * dim:
            raise AQCError("row length does not match dim")
        rows.append([complex(vals[2 * k], vals[2 * k + 1]) for k in range(dim)])
    if len(rows) != dim:
        raise AQCError("row count does not match dim")
    basis = WordBasis(m, range(1, n + 1), head.get("order", "lex"))
    if len(basis) != dim:
        raise DimensionMismatch("dim does not match n, m")
    return np.array(rows, dtype=complex), basis


# --------------------------------------------------------------------------
# gate operator blocks

def template_of(local: Local, internal: set[int]) -> tuple[Local, tuple[int, ...]]:
    """Replace external addresses by EXT; return (template, external word in reading order)."""
    ext: list[int] = []
    slots = []
    for s in local:
        regs = []
        for ix, reg in enumerate(s):
            if ix in (0, 1, 3):
                word = []
                for a in reg:
                    if a in internal:
                        word.append(a)
                    else:
                        word.append(EXT)
                        ext.append(a)
                regs.append(tuple(word))
            else:
                regs.append(reg)
        slots.append(Sector(*regs))
    return tuple(slots), tuple(ext)


def fill_template(template: Local, word: Sequence[int]) -> Local:
    it = iter(word)
    out = []
    for s in template:
        regs = [tuple(next(it) if a == EXT else a for a in reg) if ix in (0, 1, 3) else reg
                for ix, reg in enumerate(s)]
        out.append(Sector(*regs))
    if next(it, None) is not None:
        raise AQCError("word longer than the template's external slots")
    return tuple(out)


def slot_count(template: Local) -> int:
    return sum(1 for ix in (0, 1, 3) for s in template for a in s[ix] if a == EXT)


def _amplitude_map(op: GateOperator, local: Local) -> dict[Local, complex]:
    out: dict[Local, complex] = {}
    for a, y in op.apply(local):
        out[y] = out.get(y, 0j) + a
    return out


def decompose_gate_operator(op: GateOperator, source: Local, target: Local, external: Iterable[int],
                            allow_empty: bool = False) -> np.ndarray:
    """Block <target(w')|S|source(w)> over lex words w, w' of the address set ``external``."""
    external = sorted(external)
    m = slot_count(source)
    if m != slot_count(target):
        raise DimensionMismatch("source and target templates have different slot counts")
    if m != len(external):
        raise DimensionMismatch("the external address set must fill every slot")
    basis = WordBasis(m, external)
    block = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, w in enumerate(basis.words):
        img = _amplitude_map(op, fill_template(source, w))
        for row, v in enumerate(basis.words):
            block[row, col] = img.get(fill_template(target, v), 0)
    if not allow_empty and not np.any(np.abs(block) > TOL):
        raise EmptyBlock("no amplitude connects the selected subspaces")
    return block


def extract_mn_block(op: GateOperator, source: Local, target: Local, external: Iterable[int]) -> np.ndarray:
    """The full (m, n) block over the set-lex basis of all m-words on ``external``."""
    m = slot_count(source)
    basis = WordBasis(m, external, "set-lex")
    block = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, w in enumerate(basis.words):
        img = _amplitude_map(op, fill_template(source, w))
        for row, v in enumerate(basis.words):
            block[row, col] = img.get(fill_template(target, v), 0)
    return block


def classify_block(block) -> str:
    block = np.asarray(block)
    if not np.any(np.abs(block) > TOL):
        return "zero"
    if block.shape[0] == block.shape[1] and np.allclose(block, np.eye(len(block)), atol=TOL):
        return "identity"
    return "general"


@dataclass
class BlockReport:
    source: Local
    target: Local
    m: int
    kind: str
    nameblind_defect: float
    equality_defect: float
    off_diagonal: float

    @property
    def ok(self) -> bool:
        return self.nameblind_defect < TOL and self.equality_defect < TOL and self.off_diagonal < TOL


def block_pairs(op: GateOperator, probes: Iterable[Local], internal: set[int]) -> list[tuple[Local, Local]]:
    """(source template, target template) pairs linked by op on the probes."""
    pairs: dict = {}
    for x in probes:
        src, _ = template_of(x, internal)
        for y, a in _amplitude_map(op, x).items():
            if abs(a) > TOL:
                tgt, _ = template_of(y, internal)
                pairs[(src, tgt)] = None
    return list(pairs)


def analyse_blocks(op: GateOperator, probes: Iterable[Local], internal: set[int],
                   external: Sequence[int]) -> list[BlockReport]:
    """Extract every block met on ``probes`` and check the (m, n) structure."""
    external = sorted(external)
    reports = []
    for src, tgt in block_pairs(op, probes, internal):
        m = slot_count(src)
        if m > len(external):
            continue
        full = extract_mn_block(op, src, tgt, external)
        d = math.factorial(m)
        count = math.comb(len(external), m)
        first = full[:d, :d]
        eq = 0.0
        mask = np.ones_like(full, dtype=bool)
        for k in range(count):
            sl = slice(k * d, (k + 1) * d)
            eq = max(eq, float(np.max(np.abs(full[sl, sl] - first))))
            mask[sl, sl] = False
        off = float(np.max(np.abs(full[mask]))) if mask.any() else 0.0
        nb = 0.0
        for sub in itertools.combinations(external, m):
            blk = decompose_gate_operator(op, src, tgt, sub, allow_empty=True)
            nb = max(nb, is_nameblind(blk, WordBasis(m, sub), "full").max_defect)
        nb = max(nb, is_nameblind(full, WordBasis(m, external, "set-lex"), "full").max_defect)
        reports.append(BlockReport(src, tgt, m, classify_block(first), nb, eq, off))
    return reports
