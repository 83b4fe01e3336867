"""Generator alphabets and Lyndon words.

Words are tuples of generator indices (0-based).  A Lyndon word is strictly
smaller than every proper rotation of itself; Lyndon words with their
standard bracketings form the basis of the free Lie algebra used throughout
the package.
"""

from __future__ import annotations

from functools import lru_cache


class WordError(ValueError):
    pass


class GeneratorSet:
    """An ordered alphabet y_1 < y_2 < ... < y_n of distinct generator names."""

    __slots__ = ("names", "n", "_index")

    def __init__(self, names):
        if isinstance(names, int):
            names = tuple(f"y{i + 1}" for i in range(names))
        names = tuple(names)
        if len(names) < 2:
            raise WordError("need at least two generators")
        if len(set(names)) != len(names):
            raise WordError("generator names must be distinct")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "n", len(names))
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(names)})

    def __setattr__(self, name, value):
        raise AttributeError("GeneratorSet is immutable")

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise WordError(f"unknown generator {name!r}") from None

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return isinstance(other, GeneratorSet) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"GeneratorSet({', '.join(self.names)})"


def is_lyndon(word):
    """True iff ``word`` is strictly smaller than all its proper rotations."""
    n = len(word)
    if n == 0:
        return False
    for i in range(1, n):
        if word[i:] + word[:i] <= word:
            return False
    return True


@lru_cache(maxsize=None)
def lyndon_words(n, d):
    """All Lyndon words of degree exactly ``d`` over ``n`` letters, in lex order.

    Duval's generation over words of length up to d, filtered to length d.
    """
    if d < 1:
        raise WordError(f"degree {d} out of range")
    out = []
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if m == d:
            out.append(tuple(w))
        while len(w) < d:
            w.append(w[len(w) - m])
        while w and w[-1] == n - 1:
            w.pop()
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def standard_factorization(word):
    """The standard factorization (u, v) of a Lyndon word of length >= 2.

    v is the longest proper suffix of ``word`` that is itself Lyndon; then u
    is Lyndon as well and u < v.
    """
    if len(word) < 2:
        raise WordError("length-1 words have no factorization")
    for i in range(1, len(word)):
        if is_lyndon(word[i:]):
            return word[:i], word[i:]
    raise WordError(f"{word} is not a Lyndon word")


class LyndonWord:
    """A Lyndon word together with its standard factorization."""

    __slots__ = ("letters", "degree")

    def __init__(self, letters):
        letters = tuple(letters)
        if not is_lyndon(letters):
            raise WordError(f"{letters} is not a Lyndon word")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "degree", len(letters))

    def __setattr__(self, name, value):
        raise AttributeError("LyndonWord is immutable")

    @property
    def standard_factorization(self):
        if self.degree == 1:
            return None
        u, v = standard_factorization(self.letters)
        return LyndonWord(u), LyndonWord(v)

    def __eq__(self, other):
        return isinstance(other, LyndonWord) and self.letters == other.letters

    def __lt__(self, other):
        return (self.degree, self.letters) < (other.degree, other.letters)

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return f"LyndonWord{self.letters}"
