"""The height pairing on the model family and its logarithmic asymptotics.

For two mean-zero densities a, b the pairing at parameter L = log(1/|s|) is
``integral(phi_a * b dA)`` with phi_a the preferred potential of a.  Its
leading behavior is affine in log|s|^2 = -2L, and the slope is predicted by
the intersection-matrix pseudoinverse applied to the component-integral
vectors.  This module evaluates the pairing, sweeps it over L, fits the
log-asymptote, and checks the reparametrization consistency under base
change s = t^d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .dualgraph import DualGraph, build_intersection_matrix, pairing_constant, pseudoinverse
from .errors import ValidationError
from .geometry import DensityField, FamilyConfig, WarpedChain, build_chain
from .potential import FOUR_PI, _load_vector, solve_direct
from .spectral import assemble_mode_operator


def pairing_value(chain: WarpedChain, dens_a: DensityField, dens_b: DensityField,
                  check_symmetry: bool = False) -> float:
    """Pairing of two densities on one fiber: integral(phi_a * b dA).

    With ``check_symmetry`` the value is recomputed with the roles swapped
    and the two numbers must agree to 1e-10.
    """
    pot_a = solve_direct(chain, dens_a)
    q_b = _load_vector(chain, dens_b)
    value = float(pot_a.phi @ q_b)
    if check_symmetry:
        pot_b = solve_direct(chain, dens_b)
        q_a = _load_vector(chain, dens_a)
        other = float(pot_b.phi @ q_a)
        if abs(value - other) > 1e-10 * (1.0 + abs(value)):
            raise ValidationError(
                f"pairing symmetry violated: {value!r} vs {other!r}"
            )
    return value


def pairing_energy(chain: WarpedChain, dens_a: DensityField) -> tuple[float, float]:
    """Self-pairing and its Dirichlet-energy form (1/4pi) |d phi|^2.

    The two must agree: the self-pairing is a positive quadratic form.
    """
    pot = solve_direct(chain, dens_a)
    q = _load_vector(chain, dens_a)
    value = float(pot.phi @ q)
    S, _ = assemble_mode_operator(chain, 0)
    energy = float(pot.phi @ S @ pot.phi) / FOUR_PI
    return value, energy


@dataclass(frozen=True)
class PairingCurve:
    """Sampled pairing over an L-grid, with provenance of both slots."""

    L: np.ndarray
    s: np.ndarray
    values: np.ndarray
    alpha_desc: str = ""
    beta_desc: str = ""

    def __post_init__(self):
        if not np.all(np.diff(self.L) > 0):
            raise ValidationError("L grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("pairing values must be finite")


def pairing_sweep(cfg: FamilyConfig, a_builder, b_builder, L_grid,
                  resolution: int = 48, alpha_desc: str = "",
                  beta_desc: str = "") -> PairingCurve:
    """Evaluate the pairing on each chain of an L-grid.

    ``a_builder(chain) -> DensityField`` rebuilds each slot per chain (the
    mean-zero projection depends on the fiber), keeping the sweep
    deterministic and ordered by L.
    """
    Ls = np.sort(np.asarray(list(L_grid), dtype=float))
    values = []
    for L in Ls:
        chain = build_chain(cfg, float(L), resolution=resolution)
        values.append(pairing_value(chain, a_builder(chain), b_builder(chain)))
    return PairingCurve(
        L=Ls,
        s=np.exp(-Ls),
        values=np.asarray(values),
        alpha_desc=alpha_desc,
        beta_desc=beta_desc,
    )


@dataclass(frozen=True)
class FitResult:
    """Affine fit value = intercept + c_fit * log|s|^2 (regressor -2L)."""

    c_fit: float
    intercept: float
    residual_rms: float
    window: tuple[float, float]
    stability_delta: float   # max slope change when refitting window halves


def fit_log_asymptote(curve: PairingCurve, window: tuple[float, float] = (50.0, 200.0)
                      ) -> FitResult:
    lo, hi = window
    mask = (curve.L >= lo) & (curve.L <= hi)
    if int(mask.sum()) < 4:
        raise ValidationError("fit window must contain at least 4 samples")
    x = -2.0 * curve.L[mask]
    y = curve.values[mask]

    def affine_fit(xs, ys):
        A = np.stack([xs, np.ones_like(xs)], axis=1)
        coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
        return coef  # (slope, intercept)

    slope, intercept = affine_fit(x, y)
    resid = y - (slope * x + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    half = x.size // 2
    deltas = []
    for xs, ys in ((x[:half], y[:half]), (x[half:], y[half:])):
        if xs.size >= 2:
            deltas.append(abs(affine_fit(xs, ys)[0] - slope))
    return FitResult(
        c_fit=float(slope),
        intercept=float(intercept),
        residual_rms=rms,
        window=(float(lo), float(hi)),
        stability_delta=float(max(deltas)) if deltas else 0.0,
    )


def predicted_constant(g: DualGraph, dens_a: DensityField, dens_b: DensityField) -> float:
    """Slope prediction v_a^T M^+ v_b from the component integrals.

    The fat-only component integrals carry an O(1/L) ambiguity that lies in
    the kernel direction of the pseudoinverse, so they are centered exactly
    before evaluation.
    """
    if not g.reduced:
        raise ValidationError("the slope formula is stated for reduced fibers")
    v_a = np.asarray(dens_a.component_integrals, dtype=float)
    v_b = np.asarray(dens_b.component_integrals, dtype=float)
    v_a = v_a - v_a.mean()
    v_b = v_b - v_b.mean()
    m_plus = pseudoinverse(build_intersection_matrix(g))
    return pairing_constant(m_plus, v_a, v_b).value


def pullback_chain(cfg: FamilyConfig, L_t: float, d: int, resolution: int = 48) -> WarpedChain:
    """Chain of the base-changed family at parameter t: neck weight 1/(d*L_t).

    Under s = t^d the degeneration parameter satisfies L_s = d * L_t; the
    pulled-back family is the same model with the rescaled neck weight.
    """
    if d < 1:
        raise ValidationError("base-change degree must be a positive integer")
    return build_chain(cfg, d * L_t, resolution=resolution)


@dataclass(frozen=True)
class BaseChangeReport:
    degree: int
    max_discrepancy: float
    slope_in_t: float
    slope_in_s: float


def base_change_consistency(cfg: FamilyConfig, d: int, t_L_grid, a_builder,
                            b_builder, resolution: int = 48) -> BaseChangeReport:
    """Check pairing(s = t^d) against the pairing of the pulled-back family.

    In the model both sides are the same chain by construction, so this is a
    reparametrization consistency check; the fitted slopes in the two
    conventions must differ by exactly the factor d.
    """
    t_Ls = np.sort(np.asarray(list(t_L_grid), dtype=float))
    vals_s = []
    vals_t = []
    for L_t in t_Ls:
        chain_s = build_chain(cfg, d * float(L_t), resolution=resolution)
        vals_s.append(pairing_value(chain_s, a_builder(chain_s), b_builder(chain_s)))
        chain_t = pullback_chain(cfg, float(L_t), d, resolution=resolution)
        vals_t.append(pairing_value(chain_t, a_builder(chain_t), b_builder(chain_t)))
    vals_s = np.asarray(vals_s)
    vals_t = np.asarray(vals_t)
    disc = float(np.max(np.abs(vals_s - vals_t)))
    scale = max(1.0, float(np.max(np.abs(vals_s))))

    curve_t = PairingCurve(L=t_Ls, s=np.exp(-t_Ls), values=vals_t)
    curve_s = PairingCurve(L=d * t_Ls, s=np.exp(-d * t_Ls), values=vals_s)
    window_t = (float(t_Ls[0]), float(t_Ls[-1]))
    window_s = (float(d * t_Ls[0]), float(d * t_Ls[-1]))
    slope_t = fit_log_asymptote(curve_t, window_t).c_fit
    slope_s = fit_log_asymptote(curve_s, window_s).c_fit
    return BaseChangeReport(
        degree=d,
        max_discrepancy=disc / scale,
        slope_in_t=slope_t,
        slope_in_s=slope_s,
    )


@dataclass(frozen=True)
class HolderProbe:
    """Exploratory decay-model comparison for a converging pairing curve."""

    converged: bool
    limit_estimate: float
    best_family: str            # "power" or "exponential"
    power_exponent: float
    power_rms: float
    exp_rate: float
    exp_rms: float


def holder_probe(curve: PairingCurve) -> HolderProbe:
    """Fit |value - limit| against power-law and exponential decay families.

    Output is exploratory data, never a pass/fail: the sharp modulus of
    continuity of the extension is an open question.
    """
    L = curve.L
    y = curve.values
    if L.size < 5:
        raise ValidationError("probe needs at least 5 samples")
    diffs = np.abs(np.diff(y))
    converged = bool(diffs[-1] <= diffs[0] + 1e-15)

    def model_pow(Ls, v_inf, C, p):
        return v_inf + C * Ls ** (-p)

    def model_exp(Ls, v_inf, C, a):
        return v_inf + C * np.exp(-a * Ls)

    guess_vinf = float(y[-1])
    guess_C = float(y[0] - y[-1]) * float(L[0])
    results = {}
    for name, model, p0 in (
        ("power", model_pow, (guess_vinf, guess_C if guess_C != 0 else 1.0, 1.0)),
        ("exponential", model_exp, (guess_vinf, float(y[0] - y[-1]) or 1.0, 0.1)),
    ):
        try:
            popt, _ = scipy.optimize.curve_fit(model, L, y, p0=p0, maxfev=20000)
            rms = float(np.sqrt(np.mean((y - model(L, *popt)) ** 2)))
        except (RuntimeError, scipy.optimize.OptimizeWarning):
            popt, rms = (guess_vinf, 0.0, 0.0), float("inf")
        results[name] = (popt, rms)
    (pow_opt, pow_rms) = results["power"]
    (exp_opt, exp_rms) = results["exponential"]
    best = "power" if pow_rms <= exp_rms else "exponential"
    limit = pow_opt[0] if best == "power" else exp_opt[0]
    return HolderProbe(
        converged=converged,
        limit_estimate=float(limit),
        best_family=best,
        power_exponent=float(pow_opt[2]),
        power_rms=pow_rms,
        exp_rate=float(exp_opt[2]),
        exp_rms=exp_rms,
    )
