"""Exact symbolic algebra for phase-space displacement words.

A word is a product of single-mode position translations ``X(s) = exp(-i s p)``
and momentum translations ``Z(t) = exp(i t x)`` with complex parameters,
kept in a canonical normal-ordered form: a complex scalar times, for each
mode in index order, a ``Z`` factor followed by an ``X`` factor.  All
reordering factors follow from the canonical commutator ``[x, p] = i``;
nothing in this module is transcribed from closed-form tables, so the
module doubles as an oracle for every phase and damping factor produced
elsewhere in the package.

Scalars are held as complex logarithms: damping factors such as
``exp(-t**2 * e**(-2r))`` arise for complex displacement parameters and
would underflow in linear form.  The imaginary part of the logarithm is
reduced to ``(-pi, pi]`` so equal words compare equal.

Gates are described by small tuples shared with the numeric engine:
``("P", mode, eta)``, ``("F", mode)`` and ``("CZ", i, j)``.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

_TWO_PI = 2.0 * math.pi

#: Factor in an un-ordered word expression: ("Z"|"X", mode, parameter).
Factor = tuple[str, int, complex]


def _canon_log(z: complex) -> complex:
    """Reduce the imaginary part of a log-scalar to ``(-pi, pi]``."""
    im = z.imag
    if -math.pi < im <= math.pi:
        return z
    im = math.remainder(im, _TWO_PI)
    if im <= -math.pi:
        im += _TWO_PI
    return complex(z.real, im)


class WHWord:
    """Normal-ordered displacement word ``scalar * prod_j Z_j(t_j) X_j(s_j)``.

    Instances are immutable; all algebra returns new words.  Modes with a
    vanishing ``(t, s)`` pair are dropped, so the identity word has no
    factors at all.
    """

    __slots__ = ("_factors", "log_scalar")

    def __init__(self, factors: Mapping[int, tuple[complex, complex]] | None = None,
                 log_scalar: complex = 0j):
        cleaned: dict[int, tuple[complex, complex]] = {}
        if factors:
            for mode, (t, s) in factors.items():
                t = complex(t)
                s = complex(s)
                if t != 0 or s != 0:
                    cleaned[int(mode)] = (t, s)
        self._factors = cleaned
        self.log_scalar = _canon_log(complex(log_scalar))

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls) -> "WHWord":
        return cls()

    @classmethod
    def z_op(cls, mode: int, t: complex) -> "WHWord":
        """Momentum translation ``Z(t) = exp(i t x)`` on one mode."""
        return cls({mode: (complex(t), 0j)})

    @classmethod
    def x_op(cls, mode: int, s: complex) -> "WHWord":
        """Position translation ``X(s) = exp(-i s p)`` on one mode."""
        return cls({mode: (0j, complex(s))})

    # -- views -------------------------------------------------------------

    @property
    def factors(self) -> dict[int, tuple[complex, complex]]:
        return dict(self._factors)

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(sorted(self._factors))

    @property
    def scalar(self) -> complex:
        return cmath.exp(self.log_scalar)

    def param(self, mode: int) -> tuple[complex, complex]:
        """The ``(t, s)`` pair on ``mode`` (zeros when absent)."""
        return self._factors.get(mode, (0j, 0j))

    def is_identity(self) -> bool:
        return not self._factors and self.log_scalar == 0

    # -- group operations ----------------------------------------------------

    def __mul__(self, other: "WHWord") -> "WHWord":
        """Operator product ``self * other``, re-normal-ordered.

        Within each mode the left word's ``X`` must cross the right word's
        ``Z``, producing ``exp(-i s_left t_right)`` per the translation
        commutation identity.
        """
        if not isinstance(other, WHWord):
            return NotImplemented
        factors = dict(self._factors)
        log = self.log_scalar + other.log_scalar
        for mode, (t2, s2) in other._factors.items():
            t1, s1 = factors.get(mode, (0j, 0j))
            log += -1j * s1 * t2
            factors[mode] = (t1 + t2, s1 + s2)
        return WHWord(factors, log)

    def inverse(self) -> "WHWord":
        factors: dict[int, tuple[complex, complex]] = {}
        log = -self.log_scalar
        for mode, (t, s) in self._factors.items():
            # (Z(t)X(s))^-1 = X(-s)Z(-t) = exp(-i t s) Z(-t)X(-s)
            log += -1j * t * s
            factors[mode] = (-t, -s)
        return WHWord(factors, log)

    def __pow__(self, n: int) -> "WHWord":
        if n < 0:
            return self.inverse() ** (-n)
        out = WHWord.identity()
        for _ in range(n):
            out = out * self
        return out

    def scaled(self, log_scalar: complex) -> "WHWord":
        """Same factors with an extra scalar ``exp(log_scalar)``."""
        return WHWord(self._factors, self.log_scalar + log_scalar)

    def without_scalar(self) -> "WHWord":
        return WHWord(self._factors, 0j)

    # -- comparison ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WHWord):
            return NotImplemented
        return (self._factors == other._factors
                and self.log_scalar == other.log_scalar)

    def __hash__(self) -> int:
        return hash((tuple(sorted(self._factors.items())), self.log_scalar))

    def __repr__(self) -> str:
        return f"WHWord({format_word(self)!r})"


def normal_order(expression: Iterable[Factor] | WHWord) -> WHWord:
    """Normal-order a product of ``Z``/``X`` factors.

    ``expression`` is a sequence of ``(kind, mode, parameter)`` factors in
    operator order (leftmost applied last), or an already-ordered word
    (returned unchanged).  Swapping ``X(s)`` past ``Z(t)`` on one mode
    contributes ``exp(-i s t)``; factors on distinct modes commute.
    """
    if isinstance(expression, WHWord):
        return expression
    word = WHWord.identity()
    for kind, mode, param in expression:
        if kind == "Z":
            word = word * WHWord.z_op(mode, param)
        elif kind == "X":
            word = word * WHWord.x_op(mode, param)
        else:
            raise ValueError(f"unknown factor kind {kind!r}")
    return word


def swap_log(u: WHWord, w: WHWord) -> complex:
    """Log of the scalar ``c`` with ``u * w == c * (w * u)``.

    Bilinear in the displacement parameters; only modes where the two
    words overlap contribute.
    """
    total = 0j
    for mode, (tu, su) in u._factors.items():
        tw, sw = w.param(mode)
        if tw != 0 or sw != 0:
            total += tu * sw - su * tw
    return _canon_log(1j * total)


def equivalent(word1: WHWord, word2: WHWord, tolerance: float = 0.0) -> bool:
    """Field-by-field comparison of canonical forms.

    With ``tolerance == 0`` the comparison is exact (suitable for words
    built from integer-valued parameters).  Scalars are compared through
    their canonical logs, so a difference of ``2*pi*i`` does not matter.
    """
    if tolerance == 0.0:
        return word1 == word2
    if abs(word1.log_scalar - word2.log_scalar) > tolerance:
        # re-check across the branch cut
        d = word1.log_scalar - word2.log_scalar
        if abs(complex(d.real, math.remainder(d.imag, _TWO_PI))) > tolerance:
            return False
    for mode in set(word1._factors) | set(word2._factors):
        t1, s1 = word1.param(mode)
        t2, s2 = word2.param(mode)
        if abs(t1 - t2) > tolerance or abs(s1 - s2) > tolerance:
            return False
    return True


# -- stabilizer conjugation --------------------------------------------------


def violation(word: WHWord, gen) -> complex:
    """Linear-form value ``sum_j (s_j a_j + t_j b_j)`` of a word against a
    nullifier with position coefficients ``a`` and momentum coefficients
    ``b``.

    This is simultaneously the shift of the nullifier expectation produced
    by applying the word to a nullified state and the coefficient in the
    stabilizer swap factor below.
    """
    total = 0j
    for mode, (alpha, beta) in gen.coeffs.items():
        t, s = word.param(mode)
        if t != 0 or s != 0:
            total += s * alpha + t * beta
    return total


def conjugate_by_stabilizer(word: WHWord, gen, param: float | complex) -> complex:
    """Scalar ``c(param)`` with ``Stab(param) * word = c * word * Stab(param)``.

    ``Stab(param) = exp(-i * param * n)`` for the linear nullifier ``n``
    described by ``gen``; because ``n`` is linear and the word is a product
    of displacement exponentials, every commutator is central and the swap
    factor is exactly ``exp(-i * param * violation(word, gen))``.
    """
    return cmath.exp(conjugate_by_stabilizer_log(word, gen, param))


def conjugate_by_stabilizer_log(word: WHWord, gen, param: float | complex) -> complex:
    return _canon_log(-1j * complex(param) * violation(word, gen))


# -- residual generators -------------------------------------------------------


@dataclass(frozen=True)
class GeneratorPoly:
    """Polynomial generator ``poly`` of a residual factor ``exp(i * poly)``.

    Terms map a monomial - a sorted tuple of ``(mode, letter)`` operator
    factors with ``letter`` in ``{"x", "p"}`` - to a complex coefficient.
    Total degree is bounded by three and at most one mode may carry terms
    of degree two or higher.
    """

    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        quad_modes = set()
        for mono, coeff in self.terms.items():
            coeff = complex(coeff)
            if coeff == 0:
                continue
            mono = tuple(sorted(mono))
            if len(mono) > 3:
                raise ValueError("generator degree exceeds three")
            if len(mono) >= 2:
                modes_in = {m for m, _ in mono}
                if len(modes_in) == 1:
                    quad_modes |= modes_in
            cleaned[mono] = cleaned.get(mono, 0j) + coeff
        if len(quad_modes) > 1:
            raise ValueError("degree >= 2 terms restricted to a single mode")
        object.__setattr__(self, "terms", cleaned)

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def is_hermitian(self, tolerance: float = 0.0) -> bool:
        """True when every coefficient is real (monomials here are products
        of commuting operators, hence Hermitian themselves)."""
        return all(abs(c.imag) <= tolerance for c in self.terms.values())

    def coefficient(self, mono) -> complex:
        return self.terms.get(tuple(sorted(mono)), 0j)


_GATE_KINDS = {"P", "F", "CZ"}


def _check_gate(gate) -> tuple:
    if not gate or gate[0] not in _GATE_KINDS:
        raise ValueError(f"unsupported gate {gate!r}")
    return tuple(gate)


def _conjugated_exponent(alpha: dict, beta: dict, gate) -> tuple[dict, dict]:
    """Heisenberg image of the linear exponent ``i(sum a x + sum b p)``
    under conjugation by the gate's inverse (``U+ . U``)."""
    kind = gate[0]
    alpha = dict(alpha)
    beta = dict(beta)
    if kind == "P":
        _, mode, eta = gate
        b = beta.get(mode, 0j)
        if b:
            # p -> p + eta x
            alpha[mode] = alpha.get(mode, 0j) + eta * b
    elif kind == "F":
        _, mode = gate
        a = alpha.pop(mode, 0j)
        b = beta.pop(mode, 0j)
        # x -> -p, p -> x
        if b:
            alpha[mode] = b
        if a:
            beta[mode] = -a
    else:  # CZ
        _, i, j = gate
        bi = beta.get(i, 0j)
        bj = beta.get(j, 0j)
        if bi:
            alpha[j] = alpha.get(j, 0j) + bi
        if bj:
            alpha[i] = alpha.get(i, 0j) + bj
    return alpha, beta


def _word_from_exponent(alpha: dict, beta: dict) -> WHWord:
    """Split ``exp(i(sum a_m x_m + sum b_m p_m))`` into canonical factors.

    Distinct modes commute; within a mode the split
    ``exp(i(a x + b p)) = exp(i a b / 2) Z(a) X(-b)`` follows from the
    central Baker-Campbell-Hausdorff identity.
    """
    factors: dict[int, tuple[complex, complex]] = {}
    log = 0j
    for mode in set(alpha) | set(beta):
        a = alpha.get(mode, 0j)
        b = beta.get(mode, 0j)
        log += 0.5j * a * b
        factors[mode] = (a, -b)
    return WHWord(factors, log)


def commute_through_quadratic(word: WHWord, gate) -> tuple[WHWord, GeneratorPoly, complex]:
    """Decompose ``word * gate = gate * word'`` for a quadratic-generator gate.

    Returns ``(residual, poly, log_scalar)`` with
    ``word' = exp(log_scalar) * residual * exp(i * poly)``; quadratic gates
    map displacements to displacements, so ``poly`` is always zero and is
    returned only for signature uniformity with the cubic case.  The
    factor is derived by conjugating each ``Z``/``X`` exponent through the
    gate's Heisenberg action and re-normal-ordering, never read off a
    table.
    """
    gate = _check_gate(gate)
    out = WHWord.identity()
    for mode in sorted(word._factors):
        t, s = word._factors[mode]
        if t != 0:
            a, b = _conjugated_exponent({mode: t}, {}, gate)
            out = out * _word_from_exponent(a, b)
        if s != 0:
            a, b = _conjugated_exponent({}, {mode: -s}, gate)
            out = out * _word_from_exponent(a, b)
    log = _canon_log(word.log_scalar + out.log_scalar)
    return out.without_scalar(), GeneratorPoly(), log


def commute_through_cubic(word: WHWord, gamma: float, mode: int) -> tuple[WHWord, GeneratorPoly, complex]:
    """Decompose ``word * V(gamma) = V(gamma) * word'`` for ``V = exp(i g x^3)``.

    The conjugated position translation is disentangled exactly,

        ``V+ X(s) V = exp(-i s p - 3 i g s x^2)``
                    ``= X(s) exp(-i (3 g s x^2 + 3 g s^2 x + g s^3))``,

    via the integral form of the shift of an ``x``-polynomial through
    ``X(s)``.  The linear term merges into the word as ``Z(-3 g s^2)`` and
    the constant into the scalar, leaving a purely quadratic residual
    generator: ``word' = exp(log) * Z(t - 3 g s^2) X(s) * exp(-3 i g s x^2)``
    on the cubic mode.  Degree-three terms cancel for displacement words.
    """
    gamma = float(gamma)
    factors = word.factors
    t, s = word.param(mode)
    log = word.log_scalar
    poly = GeneratorPoly()
    if gamma != 0.0 and s != 0:
        # X(s)Z(-3 g s^2) reorder factor exp(3 i g s^3) and constant exp(-i g s^3)
        log = log + 2j * gamma * s ** 3
        factors[mode] = (t - 3 * gamma * s * s, s)
        poly = GeneratorPoly({((mode, "x"), (mode, "x")): -3 * gamma * s})
    return WHWord(factors, 0j), poly, _canon_log(log)


# -- text form ---------------------------------------------------------------

_FACTOR_RE = re.compile(r"([ZX])\[(\d+)\]\(([^)]*)\)")
_LOG_RE = re.compile(r"^exp\(([^)]*)\)$")


def _format_param(value: complex) -> str:
    if value.imag == 0.0:
        return repr(value.real)
    return f"{value.real!r}{value.imag:+}i".replace("+-", "-")


def _parse_param(text: str) -> complex:
    text = text.strip()
    if text.endswith("i"):
        return complex(text[:-1].replace("i", "j") + "j")
    return complex(float(text))


def format_word(word: WHWord) -> str:
    """Line format ``exp(a+bi) * Z[3](1.5) X[3](2.0)``.

    The scalar is printed as an explicit complex logarithm so that the
    round trip through :func:`parse_word` is bit-exact and damped scalars
    never overflow.  A unit scalar is omitted.
    """
    parts = []
    if word.log_scalar != 0:
        parts.append(f"exp({_format_param(word.log_scalar)})")
    for mode in word.modes:
        t, s = word.param(mode)
        if t != 0:
            parts.append(f"Z[{mode}]({_format_param(t)})")
        if s != 0:
            parts.append(f"X[{mode}]({_format_param(s)})")
    if not parts:
        return "1"
    return " * ".join(parts)


def parse_word(text: str) -> WHWord:
    """Inverse of :func:`format_word`; also accepts a plain complex scalar
    prefix such as ``(0.5-0.866i)``."""
    text = text.strip()
    if text == "1":
        return WHWord.identity()
    log = 0j
    factors: list[Factor] = []
    for chunk in (p.strip() for p in text.split("*")):
        if not chunk:
            continue
        m = _FACTOR_RE.fullmatch(chunk)
        if m:
            factors.append((m.group(1), int(m.group(2)), _parse_param(m.group(3))))
            continue
        m = _LOG_RE.fullmatch(chunk)
        if m:
            log += _parse_param(m.group(1))
            continue
        scalar = _parse_param(chunk.strip("()"))
        log += cmath.log(scalar)
    word = normal_order(factors)
    return WHWord(word._factors, word.log_scalar + log)
