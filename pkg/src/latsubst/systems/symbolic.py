"""Equal-length letter substitutions as one-dimensional MFSs on Z with Q = (q)."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError, SeedNotFound, UnequalLengths
from ..lattice import Inflation
from ..mfs import AffineMap, Mfs, TypedPatch
from .bundle import SystemBundle

DEFAULT_SEED_POWER = 12


@dataclass(frozen=True)
class SymbolicSubstitution:
    alphabet: tuple[str, ...]
    rules: tuple[str, ...]          # rules[j] is the image word of alphabet[j]

    def __post_init__(self):
        lengths = [len(w) for w in self.rules]
        if len(lengths) != len(self.alphabet):
            raise ValueError("one rule per letter required")
        if len(set(lengths)) > 1:
            raise UnequalLengths(lengths)
        if lengths and lengths[0] < 2:
            raise ValueError("rule words need length q >= 2")
        stray = set("".join(self.rules)) - set(self.alphabet)
        if stray:
            raise ValueError(f"letters {sorted(stray)} have no rule")

    @property
    def q(self) -> int:
        return len(self.rules[0])

    def image(self, word: str, times: int = 1) -> str:
        table = dict(zip(self.alphabet, self.rules))
        for _ in range(times):
            word = "".join(table[c] for c in word)
        return word

    def __str__(self):
        return ",".join(f"{a}:{w}" for a, w in zip(self.alphabet, self.rules))


_RULE = re.compile(r"^\s*(\w)\s*[:=]\s*(\w+)\s*$")


def parse_rules(text: str) -> SymbolicSubstitution:
    """'a:ab,b:ba' (or 'a=ab b=ba') -> SymbolicSubstitution; letters are single characters."""
    alphabet, rules = [], []
    for part in filter(None, re.split(r"[,;\s]+(?=\w\s*[:=])", text.strip())):
        match = _RULE.match(part)
        if not match:
            raise ParseError(f"cannot parse rule {part!r}")
        letter, word = match.groups()
        if letter in alphabet:
            raise ParseError(f"letter {letter!r} has two rules")
        alphabet.append(letter)
        rules.append(word)
    if not alphabet:
        raise ParseError("no rules given")
    return SymbolicSubstitution(tuple(alphabet), tuple(rules))


def symbolic_mfs(s: SymbolicSubstitution) -> Mfs:
    """Position l of the image of letter j gives x -> qx + l in row (letter at l), column j."""
    index = {a: k for k, a in enumerate(s.alphabet)}
    triples = [(index[c], j, AffineMap(1, (pos,)))
               for j, word in enumerate(s.rules) for pos, c in enumerate(word)]
    return Mfs.from_triples(Inflation(((s.q,),)), len(s.alphabet), triples, s.alphabet)


def legal_pairs(s: SymbolicSubstitution) -> set[str]:
    """Two-letter subwords of the words sigma^k(a), closed under sigma."""
    pairs = {w[i:i + 2] for w in s.rules for i in range(len(w) - 1)}
    frontier = set(pairs)
    while frontier:
        new = set()
        for p in frontier:
            w = s.image(p)
            new |= {w[i:i + 2] for i in range(len(w) - 1)}
        frontier = new - pairs
        pairs |= new
    return pairs


def pair_seed(s: SymbolicSubstitution, max_power: int = DEFAULT_SEED_POWER) -> tuple[str, str, int]:
    """Smallest M and legal pair b.a with sigma^M(a) starting in a and sigma^M(b) ending in b.

    Pairs of two distinct letters are tried first: a seed a.a repeats one block on
    both sides of the origin, which makes finite windows look more periodic than they are.
    """
    legal = sorted(legal_pairs(s), key=lambda p: (p[0] == p[1], p))
    for power in range(1, max_power + 1):
        for pair in legal:
            left, right = pair
            if s.image(right, power)[0] == right and s.image(left, power)[-1] == left:
                return left, right, power
    raise SeedNotFound(max_power)


def from_symbolic(s: SymbolicSubstitution, name: str | None = None,
                  max_seed_power: int = DEFAULT_SEED_POWER) -> SystemBundle:
    phi = symbolic_mfs(s)
    left, right, power = pair_seed(s, max_seed_power)
    index = {a: k for k, a in enumerate(s.alphabet)}
    seed = TypedPatch.from_dict(phi.inflation, {(-1,): index[left], (0,): index[right]})
    return SystemBundle(name or f"symbolic:{s}", phi, seed, power,
                        notes=f"seed {left}.{right} fixed by sigma^{power}")
