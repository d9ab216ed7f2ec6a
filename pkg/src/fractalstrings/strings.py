"""Self-similar string specs and their geometric zeta function.

A self-similar string is generated by an initiator: an interval of length
``L`` replaced by scaled copies (ratios ``r_j``) interspersed with gaps
``g_k``, with ``sum(r_j) + sum(g_k) = 1``.  Its geometric zeta function has
the closed form

    zeta(s) = L^s * sum_k g_k^s / (1 - sum_j r_j^s),

so everything here reduces to exponential Dirichlet polynomials
``P(s) = constant - sum_j c_j exp(-w_j s)`` with real coefficients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np

from .errors import PoleError, SpecInvariantError
from .values import ExactReal

INITIATOR_TOL = 1e-12
WEIGHT_MERGE_TOL = 1e-14
POLE_TOL = 1e-13


@dataclass(frozen=True)
class DirichletPolynomial:
    """P(s) = constant - sum_j c_j * exp(-w_j * s), w_j strictly increasing.

    ``sources`` keeps the exact literal behind each weight (w = log(1/r))
    when one is known, so the extended-precision path can recompute weights
    with guard digits instead of reusing the rounded double.
    """

    constant: float
    weights: tuple[float, ...]
    coeffs: tuple[float, ...]
    sources: tuple[ExactReal | None, ...] = ()

    def __post_init__(self):
        if len(self.weights) != len(self.coeffs):
            raise ValueError("weights and coeffs length mismatch")
        if not self.sources:
            object.__setattr__(self, "sources", (None,) * len(self.weights))

    @staticmethod
    def from_terms(constant, terms) -> "DirichletPolynomial":
        """Build from (weight, coeff, source) triples, merging duplicates.

        Weights closer than 1e-14 relative are one term with summed
        coefficient; zero coefficients drop out.
        """
        triples = sorted(terms, key=lambda t: t[0])
        merged: list[list] = []
        for w, c, src in triples:
            if merged and abs(w - merged[-1][0]) <= WEIGHT_MERGE_TOL * max(1.0, abs(w)):
                merged[-1][1] += c
                if merged[-1][2] is None:
                    merged[-1][2] = src
            else:
                merged.append([w, c, src])
        kept = [(w, c, s) for w, c, s in merged if c != 0.0]
        return DirichletPolynomial(
            float(constant),
            tuple(t[0] for t in kept),
            tuple(t[1] for t in kept),
            tuple(t[2] for t in kept),
        )

    @property
    def scale(self) -> float:
        """Magnitude scale |constant| + sum |c_j| used by relative tolerances."""
        return abs(self.constant) + sum(abs(c) for c in self.coeffs)

    def __call__(self, s):
        return self.eval(s)

    def eval(self, s):
        """Evaluate at a complex scalar or ndarray."""
        s = np.asarray(s, dtype=complex)
        w = np.array(self.weights)
        c = np.array(self.coeffs)
        val = self.constant - np.exp(-np.multiply.outer(s, w)) @ c
        return complex(val) if val.ndim == 0 else val

    def deriv(self, s):
        """d/ds P(s) = sum_j c_j w_j exp(-w_j s)."""
        s = np.asarray(s, dtype=complex)
        w = np.array(self.weights)
        c = np.array(self.coeffs)
        val = np.exp(-np.multiply.outer(s, w)) @ (c * w)
        return complex(val) if val.ndim == 0 else val

    def _weights_mp(self):
        out = []
        for w, src in zip(self.weights, self.sources):
            out.append(src.neg_log_mp() if src is not None else mp.mpf(w))
        return out

    def eval_mp(self, s, dps: int = 32):
        """Extended-precision evaluation (guard digits for root clusters)."""
        with mp.workdps(dps):
            sm = mp.mpc(s)
            total = mp.mpc(self.constant)
            for w, c in zip(self._weights_mp(), self.coeffs):
                total -= c * mp.e ** (-w * sm)
            return total

    def deriv_mp(self, s, dps: int = 32):
        with mp.workdps(dps):
            sm = mp.mpc(s)
            total = mp.mpc(0)
            for w, c in zip(self._weights_mp(), self.coeffs):
                total += c * w * mp.e ** (-w * sm)
            return total

    def refine_newton_mp(self, s0, dps: int = 32, steps: int = 12,
                         mult: int = 1):
        """Extended-precision Newton polish from s0; returns a double.

        ``mult`` > 1 uses the multiplicity-aware step m*f/f', restoring
        quadratic convergence at a multiple root (where double precision
        alone cannot do better than ~sqrt(eps))."""
        with mp.workdps(dps):
            s = mp.mpc(s0)
            for _ in range(steps):
                d = self.deriv_mp(s, dps)
                if d == 0:
                    break
                step = mult * self.eval_mp(s, dps) / d
                s -= step
                if abs(step) < mp.mpf(10) ** (-(dps - 4)):
                    break
            return complex(s)


def _as_pairs(raw, key):
    pairs = []
    for entry in raw:
        if isinstance(entry, dict):
            value = ExactReal.from_any(entry[key])
            mult = int(entry.get("m", 1))
        elif isinstance(entry, (tuple, list)):
            value = ExactReal.from_any(entry[0])
            mult = int(entry[1]) if len(entry) > 1 else 1
        else:
            value = ExactReal.from_any(entry)
            mult = 1
        pairs.append((value, mult))
    return pairs


@dataclass(frozen=True)
class SelfSimilarStringSpec:
    """Initiator data (L; r_1..r_N; g_1..g_K) of a self-similar string.

    Ratios and gaps are (value, multiplicity) pairs, ratios sorted with the
    largest first.  ``declared_base``/``declared_exponents`` carry a lattice
    structure given explicitly as (base r, integer exponents), bypassing
    numeric lattice detection.
    """

    total_length: ExactReal
    ratios: tuple[tuple[ExactReal, int], ...]
    gaps: tuple[tuple[ExactReal, int], ...]
    name: str | None = None
    declared_base: ExactReal | None = None
    declared_exponents: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        ratios = tuple(
            sorted(self.ratios, key=lambda p: float(p[0]), reverse=True)
        )
        object.__setattr__(self, "ratios", ratios)
        L = float(self.total_length)
        if not L > 0:
            raise SpecInvariantError("total length must be positive", L=L)
        for value, mult in self.ratios:
            v = float(value)
            if not (0.0 < v < 1.0) or mult < 1:
                raise SpecInvariantError("ratios must lie in (0,1)", ratio=v)
        for value, mult in self.gaps:
            v = float(value)
            if not (0.0 < v < 1.0) or mult < 1:
                raise SpecInvariantError("gaps must lie in (0,1)", gap=v)
        if self.N < 2:
            raise SpecInvariantError("need at least two scaled copies", N=self.N)
        if self.K < 1:
            raise SpecInvariantError("need at least one gap", K=self.K)
        total = sum(float(v) * m for v, m in self.ratios) + sum(
            float(v) * m for v, m in self.gaps
        )
        if abs(total - 1.0) > INITIATOR_TOL:
            raise SpecInvariantError(
                "initiator identity sum(r) + sum(g) = 1 violated",
                total=total,
            )

    # -- counts ---------------------------------------------------------

    @property
    def N(self) -> int:
        return sum(m for _, m in self.ratios)

    @property
    def K(self) -> int:
        return sum(m for _, m in self.gaps)

    def ratio_floats(self) -> list[float]:
        """Ratios expanded by multiplicity, nonincreasing."""
        out = []
        for value, mult in self.ratios:
            out.extend([float(value)] * mult)
        return out

    def gap_floats(self) -> list[float]:
        out = []
        for value, mult in self.gaps:
            out.extend([float(value)] * mult)
        return out

    # -- polynomials ----------------------------------------------------

    def denominator(self) -> DirichletPolynomial:
        """f(s) = 1 - sum_j m_j r_j^s."""
        return DirichletPolynomial.from_terms(
            1.0,
            [(r.neg_log(), float(m), r) for r, m in self.ratios],
        )

    def gap_polynomial(self) -> DirichletPolynomial:
        """Q(s) = sum_k m_k g_k^s (the numerator without the L^s factor)."""
        return DirichletPolynomial.from_terms(
            0.0,
            [(g.neg_log(), -float(m), g) for g, m in self.gaps],
        )

    def numerator_value(self, s):
        """L^s * sum_k g_k^s."""
        s = np.asarray(s, dtype=complex)
        logL = math.log(float(self.total_length))
        val = np.exp(s * logL) * self.gap_polynomial().eval(s)
        return complex(val) if val.ndim == 0 else val

    def numerator_deriv(self, s):
        s = np.asarray(s, dtype=complex)
        logL = math.log(float(self.total_length))
        q = self.gap_polynomial()
        val = np.exp(s * logL) * (logL * q.eval(s) + q.deriv(s))
        return complex(val) if val.ndim == 0 else val

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        doc: dict = {"L": self.total_length.serialize()}
        if self.declared_base is not None:
            doc["lattice"] = {
                "r": self.declared_base.serialize(),
                "exponents": [[k, m] for k, m in self.declared_exponents],
            }
        else:
            doc["ratios"] = [
                {"r": v.serialize(), "m": m} for v, m in self.ratios
            ]
        doc["gaps"] = [{"g": v.serialize(), "m": m} for v, m in self.gaps]
        if self.name:
            doc["name"] = self.name
        return doc

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)

    @staticmethod
    def from_json_dict(doc: dict) -> "SelfSimilarStringSpec":
        try:
            L = ExactReal.from_any(doc["L"])
            gaps = tuple(_as_pairs(doc["gaps"], "g"))
            if "lattice" in doc:
                lat = doc["lattice"]
                base = ExactReal.from_any(lat["r"])
                exps = []
                for entry in lat["exponents"]:
                    if isinstance(entry, (list, tuple)):
                        exps.append((int(entry[0]), int(entry[1])))
                    else:
                        exps.append((int(entry), 1))
                merged: dict[int, int] = {}
                for k, m in exps:
                    merged[k] = merged.get(k, 0) + m
                exps = tuple(sorted(merged.items()))
                ratios = tuple(
                    (
                        ExactReal.power(
                            base.mantissa if not base.is_power else base.base,
                            (base.exponent if base.is_power else Fraction(1)) * k,
                        ),
                        m,
                    )
                    for k, m in exps
                )
                return SelfSimilarStringSpec(
                    L,
                    ratios,
                    gaps,
                    name=doc.get("name"),
                    declared_base=base,
                    declared_exponents=exps,
                )
            ratios = tuple(_as_pairs(doc["ratios"], "r"))
            return SelfSimilarStringSpec(L, ratios, gaps, name=doc.get("name"))
        except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
            raise SpecInvariantError(f"malformed string spec: {exc}") from exc

    @staticmethod
    def from_json(text: str) -> "SelfSimilarStringSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecInvariantError(f"invalid JSON: {exc}") from exc
        return SelfSimilarStringSpec.from_json_dict(doc)

    @staticmethod
    def load(path) -> "SelfSimilarStringSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return SelfSimilarStringSpec.from_json(fh.read())


def make_spec(L, ratios, gaps, name=None) -> SelfSimilarStringSpec:
    """Convenience constructor from plain (value, multiplicity) lists."""
    return SelfSimilarStringSpec(
        ExactReal.from_any(L),
        tuple(
            (ExactReal.from_any(r), int(m))
            for r, m in (p if isinstance(p, (tuple, list)) else (p, 1) for p in ratios)
        ),
        tuple(
            (ExactReal.from_any(g), int(m))
            for g, m in (p if isinstance(p, (tuple, list)) else (p, 1) for p in gaps)
        ),
        name=name,
    )


# -- operations ----------------------------------------------------------


def eval_denominator(spec: SelfSimilarStringSpec, s):
    """f(s) = 1 - sum m_j r_j^s (entire; conjugate-symmetric)."""
    return spec.denominator().eval(s)


def eval_zeta(spec: SelfSimilarStringSpec, s):
    """Geometric zeta via the closed form; raises PoleError near a pole."""
    den = spec.denominator().eval(s)
    num = spec.numerator_value(s)
    if np.ndim(den) == 0:
        if abs(den) < POLE_TOL * (1.0 + abs(num)):
            raise PoleError(
                "denominator vanishes: s is (numerically) a complex dimension",
                s=complex(np.asarray(s, dtype=complex)),
            )
        return num / den
    bad = np.abs(den) < POLE_TOL * (1.0 + np.abs(num))
    if bad.any():
        raise PoleError("denominator vanishes inside array input")
    return num / den


def zeta_at_zero(spec: SelfSimilarStringSpec) -> Fraction:
    """zeta(0) = K / (1 - N) exactly."""
    return Fraction(spec.K, 1 - spec.N)
