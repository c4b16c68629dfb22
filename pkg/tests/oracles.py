"""Frozen oracle values, computed independently of the code under test.

MULTIPLES maps each derived condition kind to the displayed family it
matches and the fixed rational factor between them (displayed = factor *
derived) under the convention that displayed entries are read at the
sorted coefficient index.  The factors were fixed by hand expansion of the
integrability residual of a cubic right-hand side and then cross-checked on
random forms before being frozen here.
"""

from fractions import Fraction

MULTIPLES = {
    "A": ("I'", Fraction(1)),
    "B": ("II'", Fraction(1)),
    "C": ("III'", Fraction(1)),
    "D": ("IV'", Fraction(1)),
}

# F^{1,1} = y, n = 2: the (II') entry at (j1, j2, j3, k1) = (1, 1, 2, 2)
# reduces to the single term delta_{j3}^{k1} G_{11,y} = 1.
G11_Y_WITNESS = ("II'", (1, 1, 2, 2), Fraction(1))

# #squares - #(G, H, L, M) for n = 2..6.
COUNTING_EXCESS = {2: 3, 3: 4, 4: 5, 5: 6, 6: 7}
