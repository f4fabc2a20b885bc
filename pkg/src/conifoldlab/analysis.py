"""Verification instrumentation for the glued metrics.

Numerical exterior derivative of form fields (Wirtinger central differences
coefficient by coefficient), volume potentials against the model volume
density, log-log decay-rate regression, and machine-readable reports.  All
sampling is deterministic: log-spaced radial shells with seeded angular
directions.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from . import gluing
from .conifold import ChartPoint, cone_metric, radius
from .forms import PQForm, to_two_two, wedge

_COORD_NAMES = ("u", "v", "z")


# ---------------------------------------------------------------------------
# sampling


def direction(seed):
    """Deterministic unit fibre direction from an integer seed."""
    rng = np.random.default_rng(seed)
    w = rng.normal(size=2) + 1j * rng.normal(size=2)
    return w / np.linalg.norm(w)


def shell_point(r, seed=0, z=0.0):
    """Point at conical radius r with seeded angular position."""
    w = direction(seed)
    s = np.sqrt(r**3 / (1.0 + abs(z) ** 2))
    return ChartPoint(z, s * w[0], s * w[1])


def radial_shell_points(radii, seeds=(0,), z=0.0):
    return [(r, shell_point(r, seed, z)) for r in radii for seed in seeds]


def op_norm(dev_H, ref_H):
    """Operator norm of a Hermitian perturbation against a reference metric."""
    return float(np.max(np.abs(eigh(dev_H, ref_H, eigvals_only=True))))


# ---------------------------------------------------------------------------
# numerical exterior calculus on form fields


def _shifted(pt, j, delta):
    if j == 0:
        return ChartPoint(pt.z, pt.u + delta, pt.v)
    if j == 1:
        return ChartPoint(pt.z, pt.u, pt.v + delta)
    return ChartPoint(pt.z + delta, pt.u, pt.v)


def _coord_step(pt, j, h):
    c = (pt.u, pt.v, pt.z)[j]
    return h * max(1.0, abs(c))


def _combine(forms_and_weights, p, q, coframe):
    out = {}
    for f, w in forms_and_weights:
        for key, c in f.coeffs.items():
            out[key] = out.get(key, 0.0) + w * c
    return PQForm(p, q, out, coframe)


def pq_field_partial(fn, pt, j, anti=False, h=1e-3):
    """Wirtinger derivative of a PQForm-valued field along coordinate j."""
    step = _coord_step(pt, j, h)
    fxp = fn(_shifted(pt, j, step))
    fxm = fn(_shifted(pt, j, -step))
    fyp = fn(_shifted(pt, j, 1j * step))
    fym = fn(_shifted(pt, j, -1j * step))
    sx = 1.0 / (2.0 * step)
    sy = (1j if anti else -1j) / (2.0 * step)
    return _combine(
        [(fxp, 0.5 * sx), (fxm, -0.5 * sx), (fyp, 0.5 * sy), (fym, -0.5 * sy)],
        fxp.p,
        fxp.q,
        fxp.coframe,
    )


def _basis_one_form(j, anti=False):
    if anti:
        return PQForm(0, 1, {((), (j,)): 1.0})
    return PQForm(1, 0, {((j,), ()): 1.0})


def del_field(fn, pt, h=1e-3):
    """Numerical holomorphic exterior derivative of a form field."""
    probe = fn(pt)
    out = PQForm(probe.p + 1, probe.q, {}, probe.coframe)
    for j in range(3):
        out = out + wedge(_basis_one_form(j), pq_field_partial(fn, pt, j, False, h))
    return out


def delbar_field(fn, pt, h=1e-3):
    """Numerical anti-holomorphic exterior derivative of a form field."""
    probe = fn(pt)
    out = PQForm(probe.p, probe.q + 1, {}, probe.coframe)
    for j in range(3):
        out = out + wedge(
            _basis_one_form(j, True), pq_field_partial(fn, pt, j, True, h)
        )
    return out


def i_del_delbar_field(fn, pt, h=1e-3):
    """i d dbar of a form field by nested numerical differentiation."""
    inner = lambda q: delbar_field(fn, q, h)  # noqa: E731
    out = PQForm(fn(pt).p + 1, fn(pt).q + 1, {}, fn(pt).coframe)
    for j in range(3):
        out = out + wedge(_basis_one_form(j), pq_field_partial(inner, pt, j, False, h))
    return 1j * out


def exterior_derivative_residual(field, pt, h=1e-3):
    """Max-norm of the numerical d of the field's (2,2) square.

    field maps points to (1,1) HermitianMatrixForms (a MetricField works);
    the residual is the largest coefficient of the numerically differentiated
    5-form d sigma with sigma the squared field.  Second-order accurate: for
    balanced fields the residual falls by 4 per step halving, away from the
    cut-off profile breakpoints where third derivatives jump.
    """
    sigma_fn = lambda q: to_two_two(field(q)).to_pq()  # noqa: E731
    d_hol = del_field(sigma_fn, pt, h)
    d_anti = delbar_field(sigma_fn, pt, h)
    return max(d_hol.max_abs(), d_anti.max_abs())


def residual_refinement_ratio(field, pt, h=1e-3):
    """(residual at h) / (residual at h/2); close to 4 at second order."""
    r1 = exterior_derivative_residual(field, pt, h)
    r2 = exterior_derivative_residual(field, pt, h / 2.0)
    return r1 / r2, r1, r2


# ---------------------------------------------------------------------------
# volume potentials


def chern_ricci_potential(field, pt, norm_const=0.0, reference=None):
    """log(reference volume / field volume) at a point.

    The default reference is the cone metric, which is Ricci-flat on the
    model, so the potential of the cone vanishes identically and any
    asymptotically conical field has potential tending to zero; norm_const
    is an additive gauge for other normalizations.
    """
    ref_det = (
        np.linalg.det(cone_metric(pt).H).real
        if reference is None
        else float(reference(pt))
    )
    field_det = np.linalg.det(field(pt).H).real
    if field_det <= 0.0:
        raise gluing.PositivityLossError(
            f"field volume not positive at r = {radius(pt):.4g}"
        )
    return float(np.log(ref_det / field_det) + norm_const)


def preglued_potential(pre, pt):
    """Chern-Ricci potential of the connected-sum field in the w-chart.

    Measured against the uncut singular-side volume density, which stands in
    for the global holomorphic volume: the potential then vanishes exactly
    where the field equals the singular-side metric.
    """
    ref = gluing.reference_volume_density(pt, pre.params)
    det = np.linalg.det(pre.matrix_w(pt).H).real
    if det <= 0.0:
        raise gluing.PositivityLossError(
            f"preglued volume not positive at r = {radius(pt):.4g}"
        )
    return float(np.log(ref / det))


# ---------------------------------------------------------------------------
# decay reports


@dataclass
class DecayReport:
    """Least-squares slope of log |value| against log r."""

    label: str
    slope: float
    intercept: float
    max_residual: float
    r_range: tuple
    n_samples: int
    n_dropped: int = 0
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "label": self.label,
            "slope": self.slope,
            "intercept": self.intercept,
            "max_residual": self.max_residual,
            "r_min": self.r_range[0],
            "r_max": self.r_range[1],
            "n_samples": self.n_samples,
            "n_dropped": self.n_dropped,
        }
        out.update(self.extras)
        return out


@dataclass
class ResidualSample:
    """One residual measurement at one point."""

    r: float
    label: str
    residual: float
    step: float

    def __post_init__(self):
        if self.residual < 0:
            raise ValueError("residuals are non-negative")


def decay_fit(samples, label="decay"):
    """Fit log|value| = slope * log r + intercept.

    samples: sequence of (r, value).  Zero or negative magnitudes are
    dropped (counted in the report); at least 4 surviving samples required.
    """
    kept = [(r, abs(v)) for r, v in samples if abs(v) > 0.0]
    dropped = len(list(samples)) - len(kept)
    if len(kept) < 4:
        raise ValueError(f"need at least 4 nonzero samples, got {len(kept)}")
    r = np.array([s[0] for s in kept])
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    x = np.log(r)
    y = np.log(np.array([s[1] for s in kept]))
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = np.max(np.abs(A @ np.array([slope, intercept]) - y))
    return DecayReport(
        label,
        float(slope),
        float(intercept),
        float(resid),
        (float(r.min()), float(r.max())),
        len(kept),
        dropped,
    )


def cdlo_decay_report(profile, r_lo=10.0, r_hi=100.0, n=24, seeds=(0, 1)):
    """Slope of the cone-deviation of the asymptotically conical metric."""
    from .cdlo import cdlo_metric

    samples = []
    for r in np.geomspace(r_lo, r_hi, n):
        worst = 0.0
        for seed in seeds:
            pt = shell_point(r, seed)
            dev = cdlo_metric(pt, profile).H - cone_metric(pt).H
            worst = max(worst, op_norm(dev, cone_metric(pt).H))
        samples.append((r, worst))
    rep = decay_fit(samples, "cdlo-cone-deviation")
    rep.extras["predicted"] = -2.0
    return rep


def cutoff_volume_report(profile, coeffs, R_values=(10.0, 20.0, 40.0, 80.0),
                         n_r=30, seeds=(0, 1, 2)):
    """Sup of |vol ratio - 1| and of the metric deviation over the annulus.

    Returns (volume report with slope in log R, deviation report); the
    volume rate is the construction's improvement, the deviation rate the
    naive one.
    """
    vol_samples, dev_samples = [], []
    for R in R_values:
        vmax, dmax = 0.0, 0.0
        for i, r in enumerate(np.geomspace(R / 4 * 1.001, R / 2 * 0.999, n_r)):
            for k, seed in enumerate(seeds):
                pt = shell_point(r, 31 * i + seed)
                H0 = cone_metric(pt).H
                HR = gluing.omega_r_metric(pt, R, profile, coeffs).H
                vol = np.linalg.det(HR).real / np.linalg.det(H0).real
                vmax = max(vmax, abs(vol - 1.0))
                dmax = max(dmax, op_norm(HR - H0, H0))
        vol_samples.append((R, vmax))
        dev_samples.append((R, dmax))
    vol_rep = decay_fit(vol_samples, "cutoff-volume-ratio")
    vol_rep.extras["predicted"] = -4.0
    dev_rep = decay_fit(dev_samples, "cutoff-metric-deviation")
    dev_rep.extras["predicted"] = -2.0
    return vol_rep, dev_rep


def singular_side_report(params, n_eps=4, n_r=10, seeds=(0, 1)):
    """Decay rate of the singular-side potential across the chi annulus.

    Sweeps eps downward so the annulus walks toward the tip; the potential
    magnitude there scales like r^lambda0.
    """
    samples = []
    for k in range(n_eps):
        eps_k = params.eps * 0.5**k
        pk = params.replace(eps=eps_k)
        ep = eps_k**params.p
        worst = 0.0
        for i, r in enumerate(np.geomspace(ep * 1.02, 2 * ep * 0.98, n_r)):
            for seed in seeds:
                pt = shell_point(r, 7 * i + seed)
                f = chern_ricci_potential(
                    lambda q: gluing.singular_side_metric(q, pk), pt
                )
                worst = max(worst, abs(f))
        samples.append((ep, worst))
    rep = decay_fit(samples, "singular-side-potential")
    rep.extras["predicted"] = params.lambda0
    return rep


def chern_ricci_decay(params, profile, coeffs, n_eps=4, n_r=24, seeds=(0, 1)):
    """Fitted decay of the preglued Chern-Ricci potential at the neck scale.

    For each eps in a downward sweep, sup |f| is taken over the whole gluing
    region (cut-off annulus, neck, chi annulus) and regressed against the
    neck radius eps^p.  The report carries the predicted rate
    m~ = min(lambda0, 4q/p) and, for contrast, the naive metric-deviation
    rate m = min(lambda0, 2q/p) measured the same way.
    """
    f_samples, dev_samples = [], []
    for k in range(n_eps):
        eps_k = params.eps * 0.5**k
        pk = params.replace(eps=eps_k)
        pre = gluing.preglue(pk, profile, coeffs)
        ep = eps_k**pk.p
        lam_half = pk.lam**0.5
        radii = np.concatenate(
            [
                np.geomspace(lam_half * pk.R / 4 * 1.02, lam_half * pk.R / 2 * 0.98, n_r // 2),
                np.geomspace(ep * 1.02, 2 * ep * 0.98, n_r // 2),
            ]
        )
        fmax, dmax = 0.0, 0.0
        for i, r in enumerate(radii):
            for seed in seeds:
                pt = shell_point(r, 13 * i + seed)
                fmax = max(fmax, abs(preglued_potential(pre, pt)))
                H = pre.matrix_w(pt).H
                H0 = cone_metric(pt).H
                dmax = max(dmax, op_norm(H - H0, H0))
        f_samples.append((ep, fmax))
        dev_samples.append((ep, dmax))
    rep = decay_fit(f_samples, "chern-ricci-potential")
    dev_rep = decay_fit(dev_samples, "preglued-metric-deviation")
    rep.extras.update(
        {
            "predicted_m_tilde": params.m_tilde,
            "predicted_m": params.m,
            "deviation_slope": dev_rep.slope,
        }
    )
    return rep


# ---------------------------------------------------------------------------
# report emission


def write_json(obj, path=None):
    text = json.dumps(obj, sort_keys=True, indent=2)
    if path is None:
        return text
    with open(path, "w") as fh:
        fh.write(text + "\n")
    return text


def write_samples_csv(path, rows, header=("region", "r", "entry", "value_re", "value_im")):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def field_samples_csv(path, pre, radii, seeds=(0,)):
    """Export preglued field samples as CSV rows (region, r, matrix entries)."""
    rows = []
    for r in radii:
        for seed in seeds:
            pt = shell_point(r, seed)
            H = pre.matrix_w(pt).H
            region = pre.region(pt)
            for j in range(3):
                for k in range(3):
                    rows.append(
                        (region, f"{r:.8e}", f"{j}{k}", f"{H[j,k].real:.12e}", f"{H[j,k].imag:.12e}")
                    )
    write_samples_csv(path, rows)
