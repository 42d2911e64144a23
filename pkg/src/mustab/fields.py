"""Monomial vector fields on the nonnegative orthant and their structure checks.

A vector field component is a finite signed sum of monomials
``c * x1^a1 * ... * xn^an`` with real exponents ``aj >= 0``.  This class is
closed under the anisotropic change of variables used elsewhere in the
package (up to negative exponents, which are tolerated but flagged) and
admits exact Jacobians and exact homogeneity certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CERTIFIED = "certified"
REFUTED = "refuted"
UNDECIDED = "undecided"

# sampling fallback parameters for the structure checks
N_SAMPLES = 200
SAMPLE_RANGE = (1e-3, 1e3)
TOL_COOP = 1e-9
TOL_HOM = 1e-9


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class Monomial:
    """A single term ``coeff * prod_j x_j**exponents[j]``."""

    coeff: float
    exponents: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeff", float(self.coeff))
        object.__setattr__(self, "exponents", tuple(float(e) for e in self.exponents))
        if self.coeff == 0.0:
            raise FieldError("zero-coefficient monomial")


class PolyMap:
    """A vector field with monomial components, kept in canonical form.

    Canonical means like terms are merged and zero terms dropped, so within
    one component the exponent vectors are pairwise distinct.
    """

    def __init__(self, n, components, allow_negative_exponents=False):
        self.n = int(n)
        if len(components) != self.n:
            raise FieldError(
                "expected %d components, got %d" % (self.n, len(components))
            )
        canon = []
        for i, terms in enumerate(components):
            merged = {}
            for term in terms:
                if not isinstance(term, Monomial):
                    term = Monomial(term[0], term[1])
                if len(term.exponents) != self.n:
                    raise FieldError(
                        "component %d: exponent vector of length %d, expected %d"
                        % (i, len(term.exponents), self.n)
                    )
                if not allow_negative_exponents and min(term.exponents) < 0:
                    raise FieldError(
                        "component %d: negative exponent %r"
                        % (i, min(term.exponents))
                    )
                merged[term.exponents] = merged.get(term.exponents, 0.0) + term.coeff
            canon.append(
                tuple(
                    Monomial(c, e)
                    for e, c in sorted(merged.items())
                    if c != 0.0
                )
            )
        self.components = tuple(canon)
        # per-component dense arrays for fast evaluation
        self._coeffs = []
        self._expo = []
        for terms in self.components:
            if terms:
                self._coeffs.append(np.array([m.coeff for m in terms]))
                self._expo.append(np.array([m.exponents for m in terms]))
            else:
                self._coeffs.append(np.zeros(0))
                self._expo.append(np.zeros((0, self.n)))

    def __eq__(self, other):
        return isinstance(other, PolyMap) and self.components == other.components

    def __repr__(self):
        return "PolyMap(n=%d, %r)" % (self.n, self.components)

    @property
    def min_exponent(self):
        exps = [e for terms in self.components for m in terms for e in m.exponents]
        return min(exps) if exps else 0.0

    def is_zero(self):
        return all(len(terms) == 0 for terms in self.components)

    def scale(self, alpha):
        return PolyMap(
            self.n,
            [
                [Monomial(alpha * m.coeff, m.exponents) for m in terms]
                for terms in self.components
            ],
            allow_negative_exponents=True,
        )


class _FastEval:
    """Validation-free evaluator for the integrator hot loop.

    Stacks all monomials of a map into one exponent matrix so a call is a
    single power/prod/matmul chain.  Only safe for nonnegative exponents
    and nonnegative points (0**0 evaluates to 1 under numpy semantics).
    """

    def __init__(self, F):
        self.n = F.n
        rows, coeffs, comp = [], [], []
        for i, terms in enumerate(F.components):
            for m in terms:
                rows.append(m.exponents)
                coeffs.append(m.coeff)
                comp.append(i)
        if rows:
            self.E = np.asarray(rows, dtype=float)
            self.C = np.asarray(coeffs, dtype=float)
            self.S = np.zeros((F.n, len(coeffs)))
            self.S[comp, np.arange(len(coeffs))] = 1.0
        else:
            self.E = None

    def __call__(self, x):
        if self.E is None:
            return np.zeros(self.n)
        return self.S @ (self.C * np.prod(x ** self.E, axis=1))


def fast_evaluator(F: PolyMap) -> _FastEval:
    if F.min_exponent < 0:
        raise FieldError("fast evaluation requires nonnegative exponents")
    return _FastEval(F)


def _powers(x, expo):
    # 0^0 := 1 so constant monomials are well defined
    base = np.where(expo != 0.0, x[None, :], 1.0)
    with np.errstate(divide="ignore"):
        return np.prod(np.power(base, expo), axis=1)


def eval_field(F: PolyMap, x) -> np.ndarray:
    """Evaluate F at a point of the nonnegative orthant (0^0 evaluates to 1)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (F.n,):
        raise FieldError("point of shape %r, expected (%d,)" % (x.shape, F.n))
    out = np.empty(F.n)
    for i in range(F.n):
        if len(F._coeffs[i]) == 0:
            out[i] = 0.0
        else:
            out[i] = F._coeffs[i] @ _powers(x, F._expo[i])
    if not np.all(np.isfinite(out)):
        raise FieldError("field value not finite at %r" % (x.tolist(),))
    return out


def jacobian(F: PolyMap, x) -> np.ndarray:
    """Exact analytic Jacobian at a strictly positive point."""
    x = np.asarray(x, dtype=float)
    if x.shape != (F.n,):
        raise FieldError("point of shape %r, expected (%d,)" % (x.shape, F.n))
    if np.any(x <= 0.0):
        raise FieldError("jacobian requires a strictly positive point")
    J = np.zeros((F.n, F.n))
    for i in range(F.n):
        coeffs, expo = F._coeffs[i], F._expo[i]
        if len(coeffs) == 0:
            continue
        vals = coeffs * np.prod(np.power(x[None, :], expo), axis=1)
        # d/dx_j of c*prod x^a = a_j * value / x_j, exact for x_j > 0
        J[i, :] = (vals[:, None] * expo / x[None, :]).sum(axis=0)
    return J


def _sample_points(rng, n, count=N_SAMPLES, lo=SAMPLE_RANGE[0], hi=SAMPLE_RANGE[1]):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=(count, n)))


@dataclass
class Verdict:
    status: str
    witness: object = None

    @property
    def certified(self):
        return self.status == CERTIFIED


@dataclass
class StructureReport:
    cooperative: Verdict = None
    nondecreasing: Verdict = None
    homogeneity_f: object = None
    homogeneity_g: object = None
    omega: dict = field(default_factory=dict)

    def to_dict(self):
        def enc(v):
            if isinstance(v, Verdict):
                w = v.witness
                if isinstance(w, np.ndarray):
                    w = w.tolist()
                elif isinstance(w, tuple):
                    w = list(w)
                return {"status": v.status, "witness": w}
            return v

        return {
            "cooperative": enc(self.cooperative),
            "nondecreasing": enc(self.nondecreasing),
            "homogeneity_f": enc(self.homogeneity_f),
            "homogeneity_g": enc(self.homogeneity_g),
            "omega": {str(k): enc(v) for k, v in self.omega.items()},
        }


def check_cooperative(F: PolyMap, rng=None) -> Verdict:
    """Off-diagonal Jacobian nonnegativity on the open positive orthant.

    Symbolic sufficient rule: every monomial of component i that depends on
    x_j (j != i) has nonnegative coefficient.  Mixed-sign cases fall back to
    sampled Jacobians and can only be refuted, never certified.
    """
    symbolic_ok = True
    for i, terms in enumerate(F.components):
        for m in terms:
            if m.coeff >= 0:
                continue
            if any(m.exponents[j] > 0 for j in range(F.n) if j != i):
                symbolic_ok = False
                break
        if not symbolic_ok:
            break
    if symbolic_ok:
        return Verdict(CERTIFIED)
    rng = rng or np.random.default_rng(0)
    for x in _sample_points(rng, F.n):
        J = jacobian(F, x)
        off = J - np.diag(np.diag(J))
        if off.min() < -TOL_COOP:
            i, j = np.unravel_index(np.argmin(off), off.shape)
            return Verdict(REFUTED, witness=(int(i), int(j), x.copy()))
    return Verdict(UNDECIDED)


def check_nondecreasing(G: PolyMap, rng=None) -> Verdict:
    """Componentwise monotonicity of G on the nonnegative orthant."""
    if all(m.coeff >= 0 for terms in G.components for m in terms):
        return Verdict(CERTIFIED)
    rng = rng or np.random.default_rng(1)
    for x in _sample_points(rng, G.n):
        J = jacobian(G, x)
        if J.min() < -TOL_COOP:
            i, j = np.unravel_index(np.argmin(J), J.shape)
            return Verdict(REFUTED, witness=(int(i), int(j), x.copy()))
    return Verdict(UNDECIDED)


@dataclass(frozen=True)
class DilationMap:
    """Anisotropic scaling weights r > 0: x_i -> lam**r_i * x_i."""

    r: tuple

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(float(v) for v in self.r))
        if any(v <= 0 for v in self.r):
            raise FieldError("dilation weights must be strictly positive")

    def __len__(self):
        return len(self.r)

    def apply(self, lam, x):
        return np.asarray(x, dtype=float) * lam ** np.asarray(self.r)


NOT_HOMOGENEOUS = "not_homogeneous"


def homogeneity_degree(F: PolyMap, r: DilationMap):
    """Degree p such that F(dilate(lam, x)) = lam**p * dilate(lam, F(x)).

    For a monomial c*x^a in component i this holds iff
    sum_j a_j r_j == p + r_i, so the degree is read off the exponents.
    Returns the shared p, or (NOT_HOMOGENEOUS, (component, monomial_index))
    on the first violation.
    """
    if len(r) != F.n:
        raise FieldError("dilation of length %d for an n=%d map" % (len(r), F.n))
    if F.is_zero():
        raise FieldError("homogeneity degree of the zero map is undefined")
    rv = np.asarray(r.r)
    p = None
    for i, terms in enumerate(F.components):
        for k, m in enumerate(terms):
            cand = float(np.dot(m.exponents, rv)) - r.r[i]
            if p is None:
                p = cand
            elif abs(cand - p) > TOL_HOM:
                return (NOT_HOMOGENEOUS, (i, k))
    if p < -TOL_HOM:
        return (NOT_HOMOGENEOUS, None)
    return max(p, 0.0)


def check_omega_condition(G: PolyMap, i, rng=None) -> Verdict:
    """Does component i dominate a positive multiple of x_i?

    Certified when component i has a positive monomial that is exactly
    linear in x_i and no negative monomials at all: then
    g_i(x) >= c * prod_{j!=i} x_j^{a_j} * x_i with a positive factor
    depending only on the other coordinates.  Refuted when a sweep of x_i
    (other coordinates frozen) drives g_i(x)/x_i to zero at either end.
    """
    if not 0 <= i < G.n:
        raise FieldError("component index %d out of range" % i)
    terms = G.components[i]
    has_linear = any(
        m.coeff > 0 and abs(m.exponents[i] - 1.0) <= TOL_HOM for m in terms
    )
    if has_linear and all(m.coeff >= 0 for m in terms):
        return Verdict(CERTIFIED)
    rng = rng or np.random.default_rng(2)
    sweep = np.logspace(-6, 6, 25)
    for base in _sample_points(rng, G.n, count=8, lo=0.1, hi=10.0):
        ratios = np.empty(len(sweep))
        for k, xi in enumerate(sweep):
            x = base.copy()
            x[i] = xi
            ratios[k] = eval_field(G, x)[i] / xi
        if not np.all(np.isfinite(ratios)):
            continue
        if ratios.min() < -TOL_COOP:
            x = base.copy()
            x[i] = sweep[int(np.argmin(ratios))]
            return Verdict(REFUTED, witness=x)
        mid = abs(ratios[len(sweep) // 2])
        for idx in (0, len(sweep) - 1):
            if abs(ratios[idx]) <= 1e-6 * max(mid, 1e-30):
                x = base.copy()
                x[i] = sweep[idx]
                return Verdict(REFUTED, witness=x)
    return Verdict(UNDECIDED)
