"""Cut-off profiles, the cut-off balanced square and the preglued metric.

The construction follows three stages on the two model charts:

* singular side (w-coordinates): the cone metric plus i ddbar of a cut-off
  synthetic potential A r^(2+lambda0), interpolating to the cone inside the
  annulus eps^p < r < 2 eps^p;
* resolution side (zeta-coordinates): the square of the asymptotically
  conical metric is cut off to the square of the cone across R/4 < r < R/2,
  and the positive root of the resulting (2,2)-form is the balanced metric;
* connected sum: the two sides are identified along cone annuli by scaling
  fibre coordinates with lam^(3/4) (so radii scale with lam^(1/2)), with
  lam = eps^(2(p+q)) and R = eps^(-q).

All scalar profiles are quintic polynomial blends, C^2 at their breakpoints
and monotone on the blend interval.
"""

from dataclasses import dataclass, field

import numpy as np

from . import cdlo as cdlo_mod
from .conifold import (
    ChartPoint,
    RadialPotential,
    cone_metric,
    fs_pullback,
    log_term,
    power_potential,
    radial_hessian,
    radius,
    radius_cubed,
    slow_term,
)
from .forms import (
    HermitianMatrixForm,
    TwoTwoMatrixForm,
    adjugate3,
    michelsohn_root,
    positivity_check,
    to_two_two,
    wedge_11,
)


class InfeasibleParamsError(ValueError):
    """Gluing parameters violate a required inequality."""


class PositivityLossError(RuntimeError):
    """A metric candidate left the positive cone; message names the region."""


# ---------------------------------------------------------------------------
# cut-off profiles


def _smoothstep(s):
    return s**3 * (10.0 + s * (-15.0 + 6.0 * s))


def _smoothstep_d1(s):
    return 30.0 * s**2 * (1.0 + s * (-2.0 + s))


def _smoothstep_d2(s):
    return 60.0 * s * (1.0 + s * (-3.0 + 2.0 * s))


@dataclass(frozen=True)
class CutoffProfile:
    """C^2 monotone profile: plateau, quintic blend, plateau."""

    lo: float
    hi: float
    start_value: float
    end_value: float
    variant: str  # "chi" (increasing) or "xi" (decreasing)

    def _s(self, y):
        return (y - self.lo) / (self.hi - self.lo)

    def value(self, y):
        y = np.asarray(y, dtype=float)
        s = np.clip(self._s(y), 0.0, 1.0)
        out = self.start_value + (self.end_value - self.start_value) * _smoothstep(s)
        return out if out.shape else float(out)

    def d1(self, y):
        y = np.asarray(y, dtype=float)
        s = self._s(y)
        inside = (s > 0.0) & (s < 1.0)
        out = np.where(
            inside,
            (self.end_value - self.start_value)
            * _smoothstep_d1(np.clip(s, 0.0, 1.0))
            / (self.hi - self.lo),
            0.0,
        )
        return out if out.shape else float(out)

    def d2(self, y):
        y = np.asarray(y, dtype=float)
        s = self._s(y)
        inside = (s > 0.0) & (s < 1.0)
        out = np.where(
            inside,
            (self.end_value - self.start_value)
            * _smoothstep_d2(np.clip(s, 0.0, 1.0))
            / (self.hi - self.lo) ** 2,
            0.0,
        )
        return out if out.shape else float(out)


def chi_profile():
    """Increasing cut-off: 0 on [0,1], blend on [1,2], 1 on [2,inf)."""
    return CutoffProfile(1.0, 2.0, 0.0, 1.0, "chi")


def xi_profile():
    """Decreasing cut-off: 1 on [0,1/16], blend on [1/16,1/4], 0 beyond."""
    return CutoffProfile(1.0 / 16.0, 0.25, 1.0, 0.0, "xi")


_CHI = chi_profile()
_XI = xi_profile()


def chi(r, eps, p):
    """chi(eps^-p r) with first and second derivative in r."""
    scale = eps ** (-p)
    y = scale * r
    return (
        _CHI.value(y),
        scale * _CHI.d1(y),
        scale**2 * _CHI.d2(y),
    )


def scalar_profiles(r, R):
    """(alpha_R, beta_R, gamma_R) at radius r for cut-off scale R.

    alpha = 2 y xi'(y) + y^2 xi''(y), beta = xi(y) + y xi'(y) with y = r^2/R^2,
    and gamma = alpha + beta; all O(1) uniformly in R.
    """
    y = (r / R) ** 2
    xv, x1, x2 = _XI.value(y), _XI.d1(y), _XI.d2(y)
    alpha = 2.0 * y * x1 + y**2 * x2
    beta = xv + y * x1
    return alpha, beta, alpha + beta


def xi_radial_potential(R):
    """xi(r^2 / R^2) as a potential of t = r^3."""
    R2 = float(R) ** 2

    def arg(t):
        return t ** (2.0 / 3.0) / R2

    def d_arg(t):
        return (2.0 / 3.0) * t ** (-1.0 / 3.0) / R2

    def d2_arg(t):
        return -(2.0 / 9.0) * t ** (-4.0 / 3.0) / R2

    return RadialPotential(
        lambda t: _XI.value(arg(t)),
        lambda t: _XI.d1(arg(t)) * d_arg(t),
        lambda t: _XI.d2(arg(t)) * d_arg(t) ** 2 + _XI.d1(arg(t)) * d2_arg(t),
    )


def chi_radial_potential(eps, p):
    """chi(eps^-p r) as a potential of t = r^3."""
    scale = float(eps) ** (-float(p))

    def arg(t):
        return scale * t ** (1.0 / 3.0)

    def d_arg(t):
        return scale * (1.0 / 3.0) * t ** (-2.0 / 3.0)

    def d2_arg(t):
        return scale * (-2.0 / 9.0) * t ** (-5.0 / 3.0)

    return RadialPotential(
        lambda t: _CHI.value(arg(t)),
        lambda t: _CHI.d1(arg(t)) * d_arg(t),
        lambda t: _CHI.d2(arg(t)) * d_arg(t) ** 2 + _CHI.d1(arg(t)) * d2_arg(t),
    )


def tail_radial_potential(coeffs):
    """Truncated tail sum c_n t^(-2n/3) as a RadialPotential (t = r^3 = y)."""
    return RadialPotential(
        lambda t: coeffs.tail(t),
        lambda t: coeffs.tail_d1(t),
        lambda t: coeffs.tail_d2(t),
    )


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class GluingParams:
    """Parameter record for the connected-sum construction.

    eps, p, q control the scales R = eps^-q and lam = eps^(2(p+q)); lambda0
    is the decay rate of the synthetic singular-side potential, amplitude its
    size; b and tau are the weight and slack used by the deformation step.
    The inequality p m~ - q (b + 2) > tau > 0 is required only where the
    fixed-point argument runs (solver, contraction); pregluing and decay
    measurements must remain available outside it.
    """

    eps: float
    p: float
    q: float
    lambda0: float = 2.0
    b: float = 0.5
    tau: float = 0.1
    amplitude: float = 0.01

    def __post_init__(self):
        checks = [
            (0.0 < self.eps < 1.0, "0 < eps < 1"),
            (self.p > 0.0, "p > 0"),
            (self.q > 0.0, "q > 0"),
            (self.lambda0 > 0.0, "lambda0 > 0"),
            (0.0 < self.b < 2.0, "b in (0, 2)"),
            (self.tau > 0.0, "tau > 0"),
            (self.amplitude >= 0.0, "amplitude >= 0"),
        ]
        for ok, text in checks:
            if not ok:
                raise InfeasibleParamsError(f"parameter constraint violated: {text}")

    @property
    def R(self):
        return self.eps ** (-self.q)

    @property
    def lam(self):
        return self.eps ** (2.0 * (self.p + self.q))

    @property
    def m(self):
        return min(self.lambda0, 2.0 * self.q / self.p)

    @property
    def m_tilde(self):
        return min(self.lambda0, 4.0 * self.q / self.p)

    @property
    def contraction_margin(self):
        return self.p * self.m_tilde - self.q * (self.b + 2.0) - self.tau

    @property
    def contraction_feasible(self):
        return self.contraction_margin > 0.0

    def require_contraction_feasible(self):
        if not self.contraction_feasible:
            raise InfeasibleParamsError(
                "feasibility inequality p*m_tilde - q*(b+2) > tau violated: "
                f"{self.p}*{self.m_tilde} - {self.q}*({self.b}+2) = "
                f"{self.p * self.m_tilde - self.q * (self.b + 2.0):.6g} "
                f"<= tau = {self.tau}"
            )

    def replace(self, **kw):
        data = {
            "eps": self.eps,
            "p": self.p,
            "q": self.q,
            "lambda0": self.lambda0,
            "b": self.b,
            "tau": self.tau,
            "amplitude": self.amplitude,
        }
        data.update(kw)
        return GluingParams(**data)

    @classmethod
    def from_file(cls, path):
        """Read parameters from flat key=value text with # comments."""
        values = {}
        known = {"eps", "p", "q", "lambda0", "b", "tau", "amplitude"}
        with open(path) as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise InfeasibleParamsError(
                        f"{path}:{line_no}: expected key=value, got {raw!r}"
                    )
                key, val = (s.strip() for s in line.split("=", 1))
                if key not in known:
                    raise InfeasibleParamsError(f"{path}:{line_no}: unknown key {key!r}")
                values[key] = float(val)
        return cls(**values)


# ---------------------------------------------------------------------------
# singular-side metric


def singular_potential(params):
    """chi_eps(r) * A r^(2+lambda0) as a RadialPotential of t = r^3."""
    phi = power_potential((2.0 + params.lambda0) / 3.0, params.amplitude)
    return chi_radial_potential(params.eps, params.p) * phi


def _cone_relative_min_eig(H, cone):
    """Smallest eigenvalue of H measured in units of the local cone metric.

    The raw coordinate matrices have condition ~ r^-3 at small radii, so the
    plain scale-relative eigenvalue test misfires there; the generalized
    pencil against the cone is scale- and frame-invariant.
    """
    from scipy.linalg import eigh

    return float(eigh(H.H, cone.H, eigvals_only=True)[0])


def singular_side_metric(pt, params, check_positivity=True):
    """Cone metric plus the cut-off synthetic potential, on {r <= 1}."""
    r = radius(pt)
    if r > 1.0 + 1e-12:
        raise ValueError(f"point with r = {r:g} outside the model region r <= 1")
    cone = cone_metric(pt)
    H = cone + singular_potential(params).hessian(pt)
    if check_positivity:
        smallest = _cone_relative_min_eig(H, cone)
        if smallest <= 1e-9:
            raise PositivityLossError(
                f"singular-side metric not positive at r = {r:.4g} "
                f"(cut-off annulus [{params.eps**params.p:.3g}, "
                f"{2 * params.eps**params.p:.3g}]): cone-relative min eigenvalue "
                f"{smallest:.3e}; amplitude too large for this eps"
            )
    return H


# ---------------------------------------------------------------------------
# cut-off square and its root


def fs_quarter(pt):
    """pi^* omega_FS (the un-normalized Fubini-Study pullback)."""
    return 0.25 * fs_pullback(pt)


def tail_one_one(pt, R=None, coeffs=None, log_anchor=1.0):
    """Explicit (1,1) potential Q of the square's slow tail.

    Q = 2 t_pot * cone + 2 t_pot * slow + t_pot * i ddbar t_pot
        - 48 log(r/anchor) pi^* omega_FS + 36 log(r/anchor) i ddbar log r,

    where t_pot is the series tail of the conical potential.  Then i ddbar Q
    reproduces omega_co1^2 - omega_co0^2 - 2 omega_co0 ^ slow exactly (any
    anchor: shifting the logarithm changes Q by a constant times a closed
    form).  Entries decay like r^-2 log r.  R is accepted for interface
    symmetry with the cut-off display and does not enter Q itself.
    """
    if coeffs is None:
        coeffs = cdlo_mod.SeriesCoefficients((0.0,))
    t = radius_cubed(pt)
    tail = tail_radial_potential(coeffs)
    tau_v = tail.value(t)
    log_ratio = np.log(radius(pt) / log_anchor)

    Q = (2.0 * tau_v) * cone_metric(pt)
    Q = Q + (2.0 * tau_v) * slow_term(pt)
    Q = Q + tau_v * radial_hessian(pt, tail.d1(t), tail.d2(t))
    Q = Q + (-48.0 * log_ratio) * fs_quarter(pt)
    Q = Q + (6.0 * log_ratio) * log_term(pt)  # 36 log(.) i ddbar log r
    return Q


def _display_terms(R, coeffs, log_anchor):
    """Scalar potentials and closed factors of the cut-off square display."""
    xi = xi_radial_potential(R)
    tail = tail_radial_potential(coeffs)
    main = power_potential(2.0 / 3.0, 1.5) * xi  # (3/2) r^2 xi_R(r^2)

    # Q decomposed into radial scalars times closed (1,1)-forms
    log_pot = RadialPotential(
        lambda t: np.log(t) / 3.0 - np.log(log_anchor),
        lambda t: 1.0 / (3.0 * t),
        lambda t: -1.0 / (3.0 * t * t),
    )
    scalars = [
        xi * (2.0 * tail),
        xi * (2.0 * tail),
        xi * tail,
        xi * (-12.0 * log_pot),
    ]
    return main, scalars


def cutoff_squared(
    pt,
    R,
    profile=None,
    coeffs=None,
    log_anchor=None,
    check_positivity=True,
    tamper=0.0,
):
    """The cut-off square of the balanced metric as a (2,2) matrix form.

    On r >= R/4 this is the display

        cone^2 + 2 i ddbar((3/2) r^2 xi_R(r^2)) ^ slow + i ddbar(xi_R Q),

    exactly the cone square for r >= R/2; below R/4 it returns the square
    of the asymptotically conical metric from the radial profile.  The
    logarithm inside Q is anchored at mid-annulus scale by default, which
    changes Q only by closed pieces multiplied by constants (so nothing
    outside the blend annulus) and keeps the square positive down to R = 10.

    tamper > 0 adds (gamma^2 - gamma) * tamper * cone^2, whose radial factor
    d no longer kills (unlike radial multiples of cone ^ slow, which stay
    closed); used as a negative control for balancedness checks.
    """
    if coeffs is None:
        coeffs = cdlo_mod.SeriesCoefficients((0.0,))
    if log_anchor is None:
        log_anchor = 0.2 * R
    r = radius(pt)
    if r < R / 4.0:
        if profile is None:
            raise ValueError("profile required below the cut-off annulus")
        return to_two_two(cdlo_mod.cdlo_metric(pt, profile))
    cone = cone_metric(pt)
    if r >= R / 2.0 and tamper == 0.0:
        return to_two_two(cone)

    t = radius_cubed(pt)
    main, scalars = _display_terms(R, coeffs, log_anchor)
    slow = slow_term(pt)
    tail = tail_radial_potential(coeffs)
    closed_factors = [
        cone,
        slow,
        radial_hessian(pt, tail.d1(t), tail.d2(t)),  # i ddbar tail
        fs_pullback(pt) - 0.5 * log_term(pt),  # 4 pi* w_FS - 3 i ddbar log r
    ]

    sigma = to_two_two(cone)
    sigma = sigma + 2.0 * wedge_11(main.hessian(pt), slow)
    for pot, closed in zip(scalars, closed_factors):
        sigma = sigma + wedge_11(pot.hessian(pt), closed)

    if tamper != 0.0:
        _, _, gamma = scalar_profiles(r, R)
        sigma = sigma + (tamper * (gamma**2 - gamma)) * to_two_two(cone)

    if check_positivity:
        from scipy.linalg import eigh

        ref = to_two_two(cone)
        smallest = float(eigh(sigma.S, ref.S, eigvals_only=True)[0])
        if smallest <= 1e-9:
            raise PositivityLossError(
                f"cut-off square not positive at r = {r:.4g} (R = {R:g}): "
                f"cone-relative min eigenvalue {smallest:.3e}; R too small"
            )
    return sigma


def omega_r_metric(pt, R, profile=None, coeffs=None, **kw):
    """The cut-off balanced metric: positive root of the cut-off square."""
    r = radius(pt)
    if r >= R / 2.0:
        return cone_metric(pt)
    if r < R / 4.0:
        if profile is None:
            raise ValueError("profile required below the cut-off annulus")
        return cdlo_mod.cdlo_metric(pt, profile)
    return michelsohn_root(cutoff_squared(pt, R, profile, coeffs, **kw))


def omega_r_expansion(pt, R):
    """First-order description cone + gamma_R * slow, for comparisons."""
    _, _, gamma = scalar_profiles(radius(pt), R)
    return cone_metric(pt) + gamma * slow_term(pt)


# ---------------------------------------------------------------------------
# connected sum


@dataclass
class MetricField:
    """Evaluatable point -> positive (1,1)-form with domain metadata."""

    label: str
    fn: callable
    params: dict = field(default_factory=dict)

    def __call__(self, pt):
        return self.fn(pt)

    def matrix(self, pt):
        return self.fn(pt).H


def cone_field():
    return MetricField("cone", cone_metric)


def cdlo_field(profile):
    return MetricField("cdlo", lambda pt: cdlo_mod.cdlo_metric(pt, profile))


def omega_r_field(R, profile, coeffs, **kw):
    return MetricField(
        "cutoff",
        lambda pt: omega_r_metric(pt, R, profile, coeffs, **kw),
        {"R": R},
    )


def singular_field(params):
    return MetricField(
        "singular-side", lambda pt: singular_side_metric(pt, params), {"params": params}
    )


def w_to_zeta(pt, params):
    """Chart identification: fibres scale by lam^(-3/4), base unchanged."""
    s = params.lam ** (-0.75)
    return ChartPoint(pt.z, s * pt.u, s * pt.v)


def zeta_to_w(pt, params):
    s = params.lam**0.75
    return ChartPoint(pt.z, s * pt.u, s * pt.v)


def _zeta_jacobian(params):
    """J[j,a] = d zeta^j / d w^a for the identification, order (u, v, z)."""
    s = params.lam ** (-0.75)
    return np.diag([s, s, 1.0]).astype(complex)


class PregluedField:
    """The connected-sum metric on the two-chart model.

    Charts are labelled 'singular' (w-coordinates, small radii) and
    'resolution' (zeta-coordinates, large radii); the identification scales
    radii by lam^(1/2).  Within each chart the field matches the defining
    three-case description exactly:

        lam * omega_R          on r(zeta) <= R/2,
        cone                   on eps^p/2 <= r(w) <= eps^p,
        singular-side metric   on r(w) >= eps^p.
    """

    label = "preglued"

    def __init__(self, params, profile, coeffs):
        self.params = params
        self.profile = profile
        self.coeffs = coeffs
        self._J = _zeta_jacobian(params)
        self._Jinv = np.linalg.inv(self._J)

    def region(self, pt, chart="singular"):
        params = self.params
        if chart == "resolution":
            pt = zeta_to_w(pt, params)
        r = radius(pt)
        ep = params.eps**params.p
        if r < ep / 4.0:
            return "cdlo"
        if r < ep / 2.0:
            return "cutoff-annulus"
        if r <= ep:
            return "cone-neck"
        if r < 2.0 * ep:
            return "chi-annulus"
        return "singular-side"

    def pullback_resolution(self, pt):
        """lam * omega_R pulled back to w-coordinates at any w-point."""
        zeta = w_to_zeta(pt, self.params)
        H_res = omega_r_metric(zeta, self.params.R, self.profile, self.coeffs)
        return self.params.lam * H_res.transform(self._J)

    def matrix_w(self, pt):
        """Metric coefficients in w-chart coordinates."""
        params = self.params
        r = radius(pt)
        ep = params.eps**params.p
        if r <= ep / 2.0:
            return self.pullback_resolution(pt)
        if r <= ep:
            return cone_metric(pt)
        return singular_side_metric(pt, params)

    def matrix_zeta(self, pt):
        """Metric coefficients in zeta-chart coordinates."""
        params = self.params
        r = radius(pt)
        if r <= params.R / 2.0:
            return params.lam * omega_r_metric(
                pt, params.R, self.profile, self.coeffs
            )
        if r <= params.R:
            return params.lam * cone_metric(pt)
        w = zeta_to_w(pt, params)
        return singular_side_metric(w, params).transform(self._Jinv)

    def __call__(self, pt, chart="singular"):
        if chart == "singular":
            return self.matrix_w(pt)
        if chart == "resolution":
            return self.matrix_zeta(pt)
        raise ValueError(f"unknown chart {chart!r}")

    def field_w(self):
        return MetricField("preglued", self.matrix_w, {"params": self.params})


def preglue(params, profile, coeffs):
    """Build the connected-sum field; params must pass basic validation."""
    if params.eps ** params.p >= 0.5:
        raise InfeasibleParamsError(
            "eps^p must be well below the model radius 1: "
            f"eps^p = {params.eps**params.p:g}"
        )
    return PregluedField(params, profile, coeffs)


def reference_volume_density(pt, params):
    """det of the uncut singular-side metric, the volume normalization.

    Plays the role of the holomorphic volume form on the desk model: the
    Chern-Ricci potential of any field is measured against this density, so
    a field equal to the (uncut) singular-side metric has potential exactly
    zero, as the true compact Calabi-Yau side does.
    """
    phi = power_potential((2.0 + params.lambda0) / 3.0, params.amplitude)
    H = cone_metric(pt) + phi.hessian(pt)
    return float(np.linalg.det(H.H).real)
