"""Exact combinatorics of words of 1-form symbols.

Words are finite sequences of symbol ids, and the empty word stands for
the constant function 1.  Elements are formal linear combinations of
words whose coefficients are either exact (int / Fraction) or complex
floats, fixed per registry.  Everything here is pure combinatorics; the
numeric meaning of a word is supplied later by binding each symbol to a
concrete 1-form.
"""

from __future__ import annotations

import json
from fractions import Fraction

__all__ = [
    "FormSymbol",
    "SymbolRegistry",
    "Word",
    "EMPTY_WORD",
    "AlgebraElement",
    "shuffle",
    "shuffle_words",
    "deconcatenations",
    "reverse_signed",
    "element_to_json",
    "element_from_json",
]


class FormSymbol:
    """A named slot for a 1-form.  Identity is the id string alone."""

    __slots__ = ("id", "label")

    def __init__(self, id: str, label: str | None = None):
        self.id = str(id)
        self.label = str(id) if label is None else label

    def __eq__(self, other):
        return isinstance(other, FormSymbol) and self.id == other.id

    def __hash__(self):
        return hash(self.id)

    def __repr__(self):
        return f"FormSymbol({self.id!r})"


class SymbolRegistry:
    """Interns symbols and fixes the coefficient mode.

    Mode "exact" keeps int and Fraction coefficients untouched, for
    identity testing with no rounding.  Mode "float" coerces every
    coefficient to complex, for numeric evaluation.
    """

    def __init__(self, mode: str = "exact"):
        if mode not in ("exact", "float"):
            raise ValueError(f"unknown coefficient mode {mode!r}")
        self.mode = mode
        self._symbols: dict[str, FormSymbol] = {}

    def symbol(self, id: str, label: str | None = None) -> FormSymbol:
        sym = self._symbols.get(str(id))
        if sym is None:
            sym = FormSymbol(id, label)
            self._symbols[sym.id] = sym
        elif label is not None and label != sym.label:
            raise ValueError(
                f"symbol {sym.id!r} is already registered with label {sym.label!r}"
            )
        return sym

    def symbols(self, ids) -> list[FormSymbol]:
        return [self.symbol(i) for i in ids]

    def coefficient(self, c):
        if self.mode == "float":
            return complex(c)
        if isinstance(c, bool):
            raise TypeError("bool is not a coefficient")
        if isinstance(c, (int, Fraction)):
            return c
        raise TypeError(
            f"exact mode needs int or Fraction coefficients, got {type(c).__name__}"
        )

    def element(self, terms) -> "AlgebraElement":
        """Build an element from a {word_or_letters: coefficient} mapping."""
        out = {}
        for w, c in terms.items():
            if not isinstance(w, Word):
                w = Word(w)
            out[w] = out.get(w, 0) + self.coefficient(c)
        return AlgebraElement(out)


def _letter_id(letter) -> str:
    if isinstance(letter, FormSymbol):
        return letter.id
    if isinstance(letter, str):
        return letter
    raise TypeError(f"letters must be symbols or id strings, got {type(letter).__name__}")


class Word:
    """An ordered tuple of symbol ids.  Immutable and hashable."""

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        if isinstance(letters, Word):
            object.__setattr__(self, "letters", letters.letters)
            return
        if isinstance(letters, (str, FormSymbol)):
            letters = (letters,)
        object.__setattr__(self, "letters", tuple(_letter_id(l) for l in letters))

    def __setattr__(self, name, value):
        raise AttributeError("Word is immutable")

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return Word(self.letters[idx])
        return self.letters[idx]

    def __add__(self, other):
        """Concatenation."""
        if not isinstance(other, Word):
            other = Word(other)
        return Word(self.letters + other.letters)

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(("Word", self.letters))

    def __repr__(self):
        if not self.letters:
            return "Word()"
        return f"Word({'.'.join(self.letters)})"

    def sort_key(self):
        """Graded lexicographic key used for canonical term ordering."""
        return (len(self.letters), self.letters)


EMPTY_WORD = Word()


class AlgebraElement:
    """A formal linear combination of words.

    Terms with coefficient exactly zero are dropped on construction, so
    equality is plain term-by-term comparison.  The zero element has no
    terms and degree -1; the empty word is the unit.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean: dict[Word, object] = {}
        if terms:
            for w, c in terms.items():
                if not isinstance(w, Word):
                    w = Word(w)
                if c == 0:
                    continue
                clean[w] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    @classmethod
    def from_word(cls, word, coeff=1) -> "AlgebraElement":
        return cls({Word(word): coeff})

    @classmethod
    def unit(cls) -> "AlgebraElement":
        return cls({EMPTY_WORD: 1})

    @classmethod
    def zero(cls) -> "AlgebraElement":
        return cls()

    @property
    def degree(self) -> int:
        """Length of the longest word, or -1 for the zero element."""
        if not self.terms:
            return -1
        return max(len(w) for w in self.terms)

    def coefficient(self, word):
        return self.terms.get(Word(word), 0)

    def words(self) -> list[Word]:
        return sorted(self.terms, key=Word.sort_key)

    def map_coefficients(self, fn) -> "AlgebraElement":
        return AlgebraElement({w: fn(c) for w, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        combined = dict(self.terms)
        for w, c in other.terms.items():
            combined[w] = combined.get(w, 0) + c
        return AlgebraElement(combined)

    def __sub__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return AlgebraElement({w: -c for w, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return shuffle(self, other)
        return AlgebraElement({w: c * other for w, c in self.terms.items()})

    def __rmul__(self, scalar):
        return AlgebraElement({w: scalar * c for w, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, AlgebraElement) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "AlgebraElement(0)"
        bits = []
        for w in self.words():
            c = self.terms[w]
            name = ".".join(w.letters) if len(w) else "1"
            bits.append(f"{c}*{name}")
        return "AlgebraElement(" + " + ".join(bits) + ")"


def _interleavings(u: tuple, v: tuple):
    # Yields every order-preserving interleaving, with multiplicity when
    # letters repeat; the leaf count is always binomial(|u|+|v|, |u|).
    if not u:
        yield v
        return
    if not v:
        yield u
        return
    for tail in _interleavings(u[1:], v):
        yield (u[0],) + tail
    for tail in _interleavings(u, v[1:]):
        yield (v[0],) + tail


def shuffle_words(w1, w2) -> AlgebraElement:
    """Shuffle product of two words, with integer coefficients."""
    w1, w2 = Word(w1), Word(w2)
    acc: dict[Word, object] = {}
    for letters in _interleavings(w1.letters, w2.letters):
        w = Word(letters)
        acc[w] = acc.get(w, 0) + 1
    return AlgebraElement(acc)


def shuffle(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Bilinear extension of the word shuffle to elements."""
    if not isinstance(a, AlgebraElement):
        a = AlgebraElement.from_word(a)
    if not isinstance(b, AlgebraElement):
        b = AlgebraElement.from_word(b)
    acc: dict[Word, object] = {}
    for w1, c1 in a.terms.items():
        for w2, c2 in b.terms.items():
            c = c1 * c2
            for letters in _interleavings(w1.letters, w2.letters):
                w = Word(letters)
                acc[w] = acc.get(w, 0) + c
    return AlgebraElement(acc)


def deconcatenations(word) -> list[tuple[Word, Word]]:
    """All splits of a word into a prefix and a suffix, in order.

    Returns r+1 pairs for a word of length r, from (empty, word) up to
    (word, empty).
    """
    word = Word(word)
    return [(word[:j], word[j:]) for j in range(len(word) + 1)]


def reverse_signed(word) -> tuple[int, Word]:
    """Reversed word together with the sign (-1)**length."""
    word = Word(word)
    sign = -1 if len(word) % 2 else 1
    return sign, Word(word.letters[::-1])


def element_to_json(element: AlgebraElement, indent: int | None = None) -> str:
    """Serialize an element; terms are sorted by the canonical word order.

    Coefficients are written as re/im floats, so float-mode elements
    round-trip bit-exactly.
    """
    out = []
    for w in element.words():
        c = complex(element.terms[w])
        out.append({"word": list(w.letters), "re": c.real, "im": c.imag})
    return json.dumps({"terms": out}, indent=indent)


def element_from_json(text: str) -> AlgebraElement:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "terms" not in doc:
        raise ValueError("expected an object with a 'terms' list")
    acc: dict[Word, complex] = {}
    for item in doc["terms"]:
        w = Word(item["word"])
        acc[w] = acc.get(w, 0) + complex(item["re"], item["im"])
    return AlgebraElement(acc)
