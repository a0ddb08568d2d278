"""
==============================================================================
Words Module
==============================================================================

Words (multi-indices) over the alphabet {1..d} and their shuffle product.

A word indexes one coordinate of a signature: the word (i_1, ..., i_m)
addresses the iterated integral over coordinates i_1, ..., i_m. The empty
word addresses the constant term.

Canonical Order:
---------------
Within a level, words are ordered lexicographically. The flat position of a
word of length m is sum_k (i_k - 1) * d^(m-1-k), which matches C-order
flattening of an m-fold tensor of shape (d, ..., d).

==============================================================================
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np

from nlica.core.exceptions import invalid_word, validation_error


@dataclass(frozen=True, order=True)
class Word:
    """
    Immutable word over the alphabet {1..d}.

    Attributes:
        letters: Tuple of positive integer letters (empty for the empty word)

    Example:
        >>> w = Word((1, 2))
        >>> w.key
        '1.2'
        >>> len(w)
        2
    """

    letters: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        letters = tuple(int(letter) for letter in self.letters)
        if any(letter < 1 for letter in letters):
            raise invalid_word(letters)
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __add__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __repr__(self) -> str:
        return f"Word({self.key or 'ε'})"

    @property
    def key(self) -> str:
        """Letters joined by dots; the empty string for the empty word."""
        return ".".join(str(letter) for letter in self.letters)

    @property
    def is_empty(self) -> bool:
        return not self.letters

    @classmethod
    def from_key(cls, key: str) -> "Word":
        """
        Parse a dotted key back into a word.

        Args:
            key: Dotted letters, e.g. "1.2.2"; "" for the empty word

        Raises:
            AppException: INVALID_WORD if a letter is not a positive integer
        """
        key = key.strip()
        if not key:
            return cls(())
        try:
            return cls(tuple(int(part) for part in key.split(".")))
        except ValueError:
            raise invalid_word(key.split("."))

    def check_alphabet(self, d: int) -> None:
        """Raise INVALID_WORD if any letter exceeds d."""
        if any(letter > d for letter in self.letters):
            raise invalid_word(self.letters, d)

    def index(self, d: int) -> int:
        """Flat position of this word inside its level block."""
        self.check_alphabet(d)
        position = 0
        for letter in self.letters:
            position = position * d + (letter - 1)
        return position

    def letter_counts(self, d: int) -> np.ndarray:
        """Count of each letter 1..d in the word (the η vector)."""
        self.check_alphabet(d)
        counts = np.zeros(d, dtype=int)
        for letter in self.letters:
            counts[letter - 1] += 1
        return counts

    def is_constant(self) -> bool:
        """True for words using a single letter (and for the empty word)."""
        return len(set(self.letters)) <= 1


EMPTY_WORD = Word(())


def words(d: int, m: int) -> Iterator[Word]:
    """
    Enumerate all words of length m over {1..d} in canonical order.

    Args:
        d: Alphabet size
        m: Word length (0 yields only the empty word)
    """
    if d < 1 or m < 0:
        raise validation_error("alphabet size must be positive and length non-negative", "d")
    for letters in itertools.product(range(1, d + 1), repeat=m):
        yield Word(letters)


def word_at(d: int, m: int, position: int) -> Word:
    """Inverse of Word.index: the word of length m at a flat position."""
    letters = []
    for _ in range(m):
        position, remainder = divmod(position, d)
        letters.append(remainder + 1)
    return Word(tuple(reversed(letters)))


def shuffle(u: Word | Sequence[int], v: Word | Sequence[int]) -> Counter[Word]:
    """
    Shuffle product of two words as a multiset.

    Every choice of |u| positions out of |u|+|v| receives the letters of u in
    order; the remaining positions receive the letters of v in order. Each
    choice contributes one interleaving, so the multiset has C(|u|+|v|, |u|)
    elements counted with multiplicity.

    Args:
        u: Left word
        v: Right word

    Returns:
        Counter mapping each interleaving to its multiplicity

    Example:
        >>> shuffle(Word((1, 1)), Word((1,)))
        Counter({Word(1.1.1): 3})
    """
    u = u if isinstance(u, Word) else Word(tuple(u))
    v = v if isinstance(v, Word) else Word(tuple(v))
    total = len(u) + len(v)
    result: Counter[Word] = Counter()

    for positions in itertools.combinations(range(total), len(u)):
        chosen = set(positions)
        u_letters = iter(u.letters)
        v_letters = iter(v.letters)
        letters = tuple(
            next(u_letters) if slot in chosen else next(v_letters)
            for slot in range(total)
        )
        result[Word(letters)] += 1

    return result
