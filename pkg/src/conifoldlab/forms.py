"""Pointwise exterior algebra on a complex 3-dimensional chart.

A (p,q)-form is stored on strictly increasing multi-indices over a named
3-element coframe.  Real (1,1)-forms are carried as Hermitian 3x3 matrices H
through

    omega = i * sum_{j,k} H[j,k] theta^j wedge thetabar^k,

and real (2,2)-forms as Hermitian matrices S in the complementary basis

    E[j,k] = (-1)^(j+k) theta^{comp(k)} wedge thetabar^{comp(j)},

where comp(j) is the increasing complement of j in {0,1,2}.  In words: the
holomorphic part of E[j,k] omits index k and the anti-holomorphic part omits
index j; the twist between the two slots is what makes the square map come
out as a plain adjugate.  With this convention

    omega wedge omega  <->  S = 2 adj(H),

which the test-suite verifies against the brute-force wedge expansion.  All
other modules inherit this single sign/ordering convention.
"""

from dataclasses import dataclass, field

import numpy as np

CHART_COFRAME = ("du", "dv", "dz")
ADAPTED_COFRAME = ("dx", "dy", "dz")

_COMPLEMENT = {0: (1, 2), 1: (0, 2), 2: (0, 1)}

# Eigenvalues below this fraction of the largest magnitude count as zero,
# so degeneracy detection is scale invariant.
POSITIVITY_RTOL = 1e-12


class FormDegreeError(ValueError):
    """Wedge product would exceed bidegree (3,3)."""


class NonPositiveFormError(ValueError):
    """A form required to be positive definite is not."""


def _merge_sign(left, right):
    """Sign of sorting the concatenation of two disjoint increasing tuples."""
    sign = 1
    for a in left:
        for b in right:
            if a > b:
                sign = -sign
    return sign


@dataclass
class PQForm:
    """Bigraded exterior-algebra element at a point.

    coeffs maps (I, J) -> complex, where I and J are strictly increasing
    tuples of holomorphic / anti-holomorphic coframe indices with |I| = p,
    |J| = q.  Zero coefficients may be omitted.
    """

    p: int
    q: int
    coeffs: dict = field(default_factory=dict)
    coframe: tuple = CHART_COFRAME

    def __post_init__(self):
        if not (0 <= self.p <= 3 and 0 <= self.q <= 3):
            raise FormDegreeError(f"bidegree ({self.p},{self.q}) out of range")
        for (I, J) in self.coeffs:
            if len(I) != self.p or len(J) != self.q:
                raise ValueError(f"index ({I},{J}) does not match bidegree")
            if tuple(sorted(set(I))) != I or tuple(sorted(set(J))) != J:
                raise ValueError(f"index ({I},{J}) not strictly increasing")

    def copy(self):
        return PQForm(self.p, self.q, dict(self.coeffs), self.coframe)

    def __add__(self, other):
        if (self.p, self.q) != (other.p, other.q):
            raise ValueError("cannot add forms of different bidegree")
        if self.coframe != other.coframe:
            raise ValueError("cannot add forms in different coframes")
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0.0) + c
        return PQForm(self.p, self.q, out, self.coframe)

    def __sub__(self, other):
        return self + (other * (-1.0))

    def __mul__(self, scalar):
        return PQForm(
            self.p,
            self.q,
            {k: scalar * c for k, c in self.coeffs.items()},
            self.coframe,
        )

    __rmul__ = __mul__

    def conjugate(self):
        """Complex conjugate, a (q,p)-form."""
        out = {}
        for (I, J), c in self.coeffs.items():
            # conj(theta^I wedge thetabar^J) = thetabar^I wedge theta^J;
            # moving theta^J back to the front costs (-1)^(pq).
            sign = (-1) ** (len(I) * len(J))
            out[(J, I)] = sign * np.conj(c)
        return PQForm(self.q, self.p, out, self.coframe)

    def max_abs(self):
        if not self.coeffs:
            return 0.0
        return max(abs(c) for c in self.coeffs.values())

    def get(self, I, J):
        return self.coeffs.get((tuple(I), tuple(J)), 0.0)

    def is_real(self, tol=1e-12):
        """Conjugation symmetry check for p == q forms."""
        if self.p != self.q:
            return False
        diff = self - self.conjugate()
        scale = max(self.max_abs(), 1.0)
        return diff.max_abs() <= tol * scale


def wedge(a, b):
    """Graded-antisymmetric product of two PQForms with Koszul signs."""
    if a.coframe != b.coframe:
        raise ValueError("wedge of forms in different coframes")
    p, q = a.p + b.p, a.q + b.q
    if p > 3 or q > 3:
        raise FormDegreeError(
            f"wedge of ({a.p},{a.q}) and ({b.p},{b.q}) exceeds (3,3)"
        )
    out = {}
    for (I1, J1), c1 in a.coeffs.items():
        if c1 == 0:
            continue
        for (I2, J2), c2 in b.coeffs.items():
            if c2 == 0:
                continue
            if set(I1) & set(I2) or set(J1) & set(J2):
                continue
            # move the holomorphic block I2 across the anti-holomorphic J1
            sign = (-1) ** (len(J1) * len(I2))
            sign *= _merge_sign(I1, I2) * _merge_sign(J1, J2)
            I = tuple(sorted(I1 + I2))
            J = tuple(sorted(J1 + J2))
            out[(I, J)] = out.get((I, J), 0.0) + sign * c1 * c2
    return PQForm(p, q, out, a.coframe)


@dataclass
class HermitianMatrixForm:
    """Real (1,1)-form omega = i sum H[j,k] theta^j wedge thetabar^k."""

    H: np.ndarray
    coframe: tuple = CHART_COFRAME

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=complex)
        if self.H.shape != (3, 3):
            raise ValueError("H must be 3x3")
        scale = max(np.max(np.abs(self.H)), 1.0)
        if np.max(np.abs(self.H - self.H.conj().T)) > 1e-10 * scale:
            raise ValueError("H is not Hermitian")
        # scrub roundoff so eigvalsh sees an exactly Hermitian matrix
        self.H = 0.5 * (self.H + self.H.conj().T)

    def to_pq(self):
        coeffs = {}
        for j in range(3):
            for k in range(3):
                if self.H[j, k] != 0:
                    coeffs[((j,), (k,))] = 1j * self.H[j, k]
        return PQForm(1, 1, coeffs, self.coframe)

    @classmethod
    def from_pq(cls, form):
        if (form.p, form.q) != (1, 1):
            raise ValueError("not a (1,1)-form")
        H = np.zeros((3, 3), dtype=complex)
        for ((j,), (k,)), c in form.coeffs.items():
            H[j, k] = c / 1j
        return cls(H, form.coframe)

    def transform(self, J, coframe=None):
        """Coefficient matrix in new coordinates with dw = J dxi.

        J[j,a] = d w^j / d xi^a; the (1,1) coefficient matrix maps to
        J^T H conj(J).
        """
        J = np.asarray(J, dtype=complex)
        return HermitianMatrixForm(J.T @ self.H @ J.conj(), coframe or self.coframe)

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.H)

    def __add__(self, other):
        self._check(other)
        return HermitianMatrixForm(self.H + other.H, self.coframe)

    def __sub__(self, other):
        self._check(other)
        return HermitianMatrixForm(self.H - other.H, self.coframe)

    def __mul__(self, scalar):
        return HermitianMatrixForm(self.H * scalar, self.coframe)

    __rmul__ = __mul__

    def _check(self, other):
        if self.coframe != other.coframe:
            raise ValueError("mixing coframes")


@dataclass
class TwoTwoMatrixForm:
    """Real (2,2)-form sum S[j,k] E[j,k] in the complementary coframe."""

    S: np.ndarray
    coframe: tuple = CHART_COFRAME

    def __post_init__(self):
        self.S = np.asarray(self.S, dtype=complex)
        if self.S.shape != (3, 3):
            raise ValueError("S must be 3x3")
        scale = max(np.max(np.abs(self.S)), 1.0)
        if np.max(np.abs(self.S - self.S.conj().T)) > 1e-10 * scale:
            raise ValueError("S is not Hermitian")
        self.S = 0.5 * (self.S + self.S.conj().T)

    def to_pq(self):
        coeffs = {}
        for j in range(3):
            for k in range(3):
                c = self.S[j, k]
                if c != 0:
                    sign = (-1) ** (j + k)
                    coeffs[(_COMPLEMENT[k], _COMPLEMENT[j])] = sign * c
        return PQForm(2, 2, coeffs, self.coframe)

    @classmethod
    def from_pq(cls, form, tol=1e-8):
        if (form.p, form.q) != (2, 2):
            raise ValueError("not a (2,2)-form")
        S = np.zeros((3, 3), dtype=complex)
        for j in range(3):
            for k in range(3):
                S[j, k] = (-1) ** (j + k) * form.get(_COMPLEMENT[k], _COMPLEMENT[j])
        scale = max(np.max(np.abs(S)), 1.0)
        if np.max(np.abs(S - S.conj().T)) > tol * scale:
            raise ValueError("(2,2)-form is not real")
        return cls(S, form.coframe)

    def __add__(self, other):
        return TwoTwoMatrixForm(self.S + other.S, self.coframe)

    def __sub__(self, other):
        return TwoTwoMatrixForm(self.S - other.S, self.coframe)

    def __mul__(self, scalar):
        return TwoTwoMatrixForm(self.S * scalar, self.coframe)

    __rmul__ = __mul__


def adjugate3(A):
    """Adjugate of a 3x3 matrix from explicit cofactors (no inversion)."""
    A = np.asarray(A, dtype=complex)
    adj = np.empty((3, 3), dtype=complex)
    for j in range(3):
        for k in range(3):
            # adj[j,k] = (-1)^(j+k) * minor(delete row k, delete col j)
            m = A[np.ix_(_COMPLEMENT[k], _COMPLEMENT[j])]
            adj[j, k] = (-1) ** (j + k) * (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    return adj


def to_two_two(omega):
    """Square map: omega wedge omega as a TwoTwoMatrixForm, S = 2 adj(H)."""
    return TwoTwoMatrixForm(2.0 * adjugate3(omega.H), omega.coframe)


def wedge_11(a, b):
    """a wedge b for two real (1,1)-forms, via the polarized adjugate.

    adj(A + B) - adj(A) - adj(B) is the bilinear middle term of the square
    map, so it represents a wedge b exactly in the E-basis.
    """
    if a.coframe != b.coframe:
        raise ValueError("mixing coframes")
    S = adjugate3(a.H + b.H) - adjugate3(a.H) - adjugate3(b.H)
    return TwoTwoMatrixForm(S, a.coframe)


def michelsohn_root(sigma):
    """Unique positive (1,1)-form omega with omega^2 = sigma (dimension 3).

    Closed form: H = sqrt(det(S/2)) * (S/2)^{-1}.  Exact for positive
    definite S; raises NonPositiveFormError otherwise.
    """
    M = sigma.S / 2.0
    eigs = np.linalg.eigvalsh(M)
    if eigs[0] <= POSITIVITY_RTOL * max(abs(eigs[-1]), 1e-300):
        raise NonPositiveFormError(
            f"(2,2)-form is not positive definite (min eigenvalue {eigs[0]:.3e}); "
            "the metric candidate has left the positive cone"
        )
    det = float(np.prod(eigs))
    H = np.sqrt(det) * np.linalg.inv(M)
    return HermitianMatrixForm(H, sigma.coframe)


def lefschetz_trace(ref, eta):
    """Trace of eta against the reference metric: trace(H_ref^{-1} H_eta).

    Vanishes exactly when eta is primitive with respect to ref.
    """
    if ref.coframe != eta.coframe:
        raise ValueError("mixing coframes")
    eigs = np.linalg.eigvalsh(ref.H)
    if eigs[0] <= POSITIVITY_RTOL * max(abs(eigs[-1]), 1e-300):
        raise NonPositiveFormError("reference form is singular or not positive")
    val = np.trace(np.linalg.solve(ref.H, eta.H))
    return float(val.real)


def positivity_check(omega):
    """(all eigenvalues positive?, smallest eigenvalue)."""
    eigs = omega.eigenvalues()
    ok = eigs[0] > POSITIVITY_RTOL * max(abs(eigs[-1]), 0.0)
    return bool(ok), float(eigs[0])


def top_coefficient(form):
    """Coefficient of a (3,3)-form against the volume element.

    The volume element is (i theta^0 thetabar^0) ^ (i theta^1 thetabar^1) ^
    (i theta^2 thetabar^2) = i * theta^{012} wedge thetabar^{012}; for a
    metric H one has omega^3 = 6 det(H) * vol.
    """
    if (form.p, form.q) != (3, 3):
        raise ValueError("not a (3,3)-form")
    c = form.get((0, 1, 2), (0, 1, 2))
    return c / 1j
