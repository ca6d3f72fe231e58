"""A first walk on the annulus.

Integrate words of 1-forms along loops and arcs, and watch the
identities that make iterated integrals an algebra: values multiply
under shuffle, split over concatenation, and flip sign under reversal.
"""

import math

import numpy as np

from iterint import (
    Word,
    check_composition,
    check_reversal,
    check_shuffle,
    compose,
    get_domain,
    get_form,
    get_path,
    iterint,
)

domain = get_domain("annulus")
binding = {
    "t": get_form("dtheta", domain),   # winds once per loop
    "r": get_form("dr", domain),       # exact, so loop integrals vanish
}

core = get_path("annulus-core")
print("single letters on the core loop:")
for letter in "tr":
    value, err = iterint(core, Word((letter,)), binding, n=1024)
    print(f"  integral of {letter}: {value.real:+.12f}  (error estimate {err:.1e})")
print(f"  2*pi           : {2 * np.pi:+.12f}")

# repeated letters divide by a factorial: t^k integrates to (2*pi)^k / k!
print("\npowers of the angular letter:")
for k in (1, 2, 3):
    value, _ = iterint(core, Word(("t",) * k), binding, n=1024)
    oracle = (2 * np.pi) ** k / math.factorial(k)
    print(f"  t^{k}: {value.real:.10f}   oracle {oracle:.10f}")

# the empty word is the constant 1, exactly
unit = iterint(core, Word(()), binding, n=8).value
print(f"\nempty word: {unit}")

# two wavy half-loops that join end to end
upper = get_path("annulus-wavy-upper")
lower = get_path("annulus-wavy-lower")
whole = compose(upper, lower)
value, _ = iterint(whole, Word(("t",)), binding, n=2048)
print(f"\nwavy loop still winds once: {value.real:.12f}")

print("\nidentity residuals on the wavy arcs (n = 2048):")
word = Word(("t", "r"))
print(f"  composition : {check_composition(upper, lower, word, binding, n=2048):.2e}")
print(f"  reversal    : {check_reversal(upper, word, binding, n=2048):.2e}")
print(f"  shuffle     : {check_shuffle(upper, Word(('t',)), word, binding, n=2048):.2e}")

# refinement: quadrature error falls at least quadratically in the grid
word = Word(("t", "r", "t"))
reference = iterint(upper, word, binding, n=8192).value
print("\ngrid refinement on a length-3 word:")
for n in (128, 256, 512, 1024):
    value, _ = iterint(upper, word, binding, n=n)
    print(f"  n = {n:5d}: error {abs(value - reference):.3e}")
