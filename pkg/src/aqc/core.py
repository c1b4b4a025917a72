"""Addresses, sector and circuit basis states, sparse superpositions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Mapping, NamedTuple

Address = int
AddressWord = tuple[int, ...]
DataWord = tuple[str, ...]

EPS: tuple = ()
ATOL = 1e-10
PRUNE = 1e-12


class AQCError(Exception):
    """Base class for model errors."""


class RepeatedLetter(AQCError):
    pass


class DuplicateAddress(AQCError):
    def __init__(self, address: int):
        super().__init__(f"address {address} occurs more than once")
        self.address = address


class UnknownAddress(AQCError):
    def __init__(self, address: int):
        super().__init__(f"address {address} is not in the address set")
        self.address = address


class DataError(AQCError):
    """Data symbol outside the alphabet or word longer than the capacity."""


class SkeletonError(AQCError):
    pass


def make_address_word(letters: Iterable[int]) -> AddressWord:
    word = tuple(int(a) for a in letters)
    if len(set(word)) != len(word):
        raise RepeatedLetter(f"repeated letter in {word}")
    return word


class Sector(NamedTuple):
    """One sector basis state. Every register is a tuple; () is epsilon."""

    target: AddressWord = EPS
    in_addr: AddressWord = EPS
    in_data: DataWord = EPS
    out_addr: AddressWord = EPS
    out_data: DataWord = EPS

    def addresses(self) -> tuple[int, ...]:
        return self.target + self.in_addr + self.out_addr

    def is_vacuum(self) -> bool:
        return not any(self)

    def flip(self) -> "Sector":
        return Sector(self.target, self.out_addr, self.out_data, self.in_addr, self.in_data)


VACUUM = Sector()
REGISTERS = ("T", "WI", "QI", "WO", "QO")
ADDRESS_REGISTERS = ("T", "WI", "WO")
DATA_REGISTERS = ("QI", "QO")


def sector(T=None, WI=(), QI=(), WO=(), QO=()) -> Sector:
    """Convenience constructor; T may be None, an int or a 0/1-tuple."""
    if T is None:
        target = EPS
    elif isinstance(T, int):
        target = (T,)
    else:
        target = tuple(T)
    if len(target) > 1:
        raise AQCError("target holds at most one address")
    s = Sector(target, make_address_word(WI), tuple(QI), make_address_word(WO), tuple(QO))
    if len(set(s.addresses())) != len(s.addresses()):
        raise RepeatedLetter(f"address repeated inside sector {s}")
    return s


Configuration = tuple[Sector, ...]


@dataclass(frozen=True)
class Skeleton:
    addresses: tuple[int, ...]
    gates: tuple[tuple[int, ...], ...]
    data_alphabet: tuple[str, ...]
    max_data_len: int
    operators: Mapping[tuple[int, ...], object] = field(compare=False)

    def __post_init__(self):
        addrs = tuple(sorted(int(a) for a in self.addresses))
        if len(set(addrs)) != len(addrs):
            raise SkeletonError("repeated address in address set")
        gates = tuple(sorted(tuple(sorted(g)) for g in self.gates))
        seen: list[int] = [a for g in gates for a in g]
        if any(len(g) == 0 for g in gates):
            raise SkeletonError("empty gate")
        if sorted(seen) != list(addrs):
            raise SkeletonError("gates must partition the address set")
        ops = {tuple(sorted(g)): op for g, op in self.operators.items()}
        if set(ops) != set(gates):
            raise SkeletonError("every gate needs exactly one operator")
        object.__setattr__(self, "addresses", addrs)
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "data_alphabet", tuple(sorted(set(self.data_alphabet))))
        object.__setattr__(self, "operators", ops)

    def index(self, address: int) -> int:
        return self._positions()[address]

    def _positions(self) -> dict[int, int]:
        pos = self.__dict__.get("_pos")
        if pos is None:
            pos = {a: i for i, a in enumerate(self.addresses)}
            object.__setattr__(self, "_pos", pos)
        return pos

    def gate_of(self, address: int) -> tuple[int, ...]:
        for g in self.gates:
            if address in g:
                return g
        raise UnknownAddress(address)

    def vacuum(self) -> Configuration:
        return (VACUUM,) * len(self.addresses)


def validate_configuration(config: Configuration, addresses: tuple[int, ...],
                           skeleton: Skeleton | None = None) -> None:
    """Raise on any violation of the sector and global uniqueness rules."""
    if len(config) != len(addresses):
        raise AQCError("configuration does not cover the address set")
    universe = set(addresses)
    seen: set[int] = set()
    for s in config:
        if len(s.target) > 1:
            raise AQCError("target holds at most one address")
        for a in s.addresses():
            if a not in universe:
                raise UnknownAddress(a)
            if a in seen:
                raise DuplicateAddress(a)
            seen.add(a)
        if skeleton is not None:
            for word in (s.in_data, s.out_data):
                if len(word) > skeleton.max_data_len:
                    raise DataError(f"data word {word} exceeds capacity {skeleton.max_data_len}")
                for q in word:
                    if q not in skeleton.data_alphabet:
                        raise DataError(f"symbol {q!r} not in the data alphabet")


def make_circuit_state(skeleton: Skeleton, assignment: Mapping[int, Sector]) -> Configuration:
    """Sectors missing from ``assignment`` are vacuum."""
    for a in assignment:
        if a not in skeleton._positions():
            raise UnknownAddress(a)
    config = tuple(assignment.get(a, VACUUM) for a in skeleton.addresses)
    validate_configuration(config, skeleton.addresses, skeleton)
    return config


def address_multiset(config: Configuration) -> tuple[int, ...]:
    return tuple(sorted(a for s in config for a in s.addresses()))


class SparseState:
    """Finite superposition of configurations over a fixed address tuple.

    Treated as immutable; every constructor prunes amplitudes below PRUNE.
    """

    __slots__ = ("addresses", "terms")

    def __init__(self, addresses: Iterable[int], terms: Mapping[Configuration, complex] | Iterable = ()):
        self.addresses = tuple(addresses)
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Configuration, complex] = {}
        for c, amp in items:
            acc[c] = acc.get(c, 0j) + complex(amp)
        self.terms = {c: acc[c] for c in sorted(acc) if abs(acc[c]) >= PRUNE}

    @classmethod
    def basis(cls, addresses, config: Configuration) -> "SparseState":
        return cls(addresses, {config: 1.0})

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def normalized(self) -> "SparseState":
        n = self.norm()
        if n == 0:
            raise AQCError("cannot normalize the zero state")
        return SparseState(self.addresses, {c: a / n for c, a in self.terms.items()})

    def scaled(self, factor: complex) -> "SparseState":
        return SparseState(self.addresses, {c: a * factor for c, a in self.terms.items()})

    def validate(self, skeleton: Skeleton | None = None) -> "SparseState":
        for c in self.terms:
            validate_configuration(c, self.addresses, skeleton)
        return self

    def distance(self, other: "SparseState") -> float:
        keys = set(self.terms) | set(other.terms)
        return math.sqrt(sum(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) ** 2 for k in keys))

    def __eq__(self, other) -> bool:
        return (isinstance(other, SparseState) and self.addresses == other.addresses
                and set(self.terms) == set(other.terms) and self.distance(other) < ATOL)

    def __repr__(self) -> str:
        return f"SparseState({len(self.terms)} terms over {self.addresses})"


def inner_product(a: SparseState, b: SparseState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    small, large = (a.terms, b.terms) if len(a.terms) <= len(b.terms) else (b.terms, a.terms)
    total = 0j
    for c in small:
        if c in large:
            total += a.terms[c].conjugate() * b.terms[c]
    return total


def tensor_configurations(parts: Iterable[tuple[tuple[int, ...], Configuration]],
                          addresses: tuple[int, ...]) -> Configuration:
    """Merge per-part configurations into one over ``addresses``."""
    by_addr: dict[int, Sector] = {}
    for addrs, conf in parts:
        by_addr.update(zip(addrs, conf))
    return tuple(by_addr.get(a, VACUUM) for a in addresses)


def count_address_configs(n: int) -> int:
    """Ways to spread n distinct addresses over (target, input word, output word)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return (2 * n + 1) * math.factorial(n)


def enumerate_address_configs(addresses: Iterable[int]) -> list[tuple[AddressWord, AddressWord, AddressWord]]:
    """Brute force: every (target, in_addr, out_addr) using each address exactly once."""
    addrs = tuple(addresses)
    n = len(addrs)
    out = []
    for perm in permutations(addrs):
        for t in (0, 1):
            if t > n:
                continue
            rest = perm[t:]
            for cut in range(len(rest) + 1):
                out.append((perm[:t], rest[:cut], rest[cut:]))
    return sorted(set(out))


def address_shapes(n: int) -> list[tuple[int, int, int]]:
    """Shapes (|target|, |in word|, |out word|) using n addresses; renaming-invariant cases."""
    return [(t, i, n - t - i) for t in (0, 1) for i in range(n - t + 1) if n - t - i >= 0]
