"""Time-scale extraction from occupation traces and one-period spectra.

Measurement conventions:

  * The collapse criterion is applied to the upper envelope of the trace,
    never to raw samples, because the raw occupation crosses the threshold
    every resonant cycle even without any damping.
  * "No collapse" and "no revival" are expected outcomes, reported as None;
    asking for a period of a trace that never oscillates is a usage error
    and raises.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks, peak_widths

__all__ = [
    "COLLAPSE_THRESHOLD",
    "OscillationTrace",
    "SpectralRevival",
    "RevivalReport",
    "GFit",
    "upper_envelope",
    "collapse_time",
    "revival_time",
    "spectral_revival_estimate",
    "cluster_weights",
    "coefficient_width",
    "measured_period",
    "initial_period",
    "fit_inverse_g",
    "build_revival_report",
]

# envelope value at which the oscillation counts as collapsed:
# (max + mean)/2 fallen to 1/e above the mean, i.e. 1/2 + 1/(2e)
COLLAPSE_THRESHOLD = 0.5 + 0.5 / math.e


@dataclass(frozen=True)
class OscillationTrace:
    """Sampled upper-band occupation N_b(t) with a parameter fingerprint."""

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if t.size >= 2 and not np.all(np.diff(t) > 0):
            raise ValueError("sample times must be strictly increasing")
        if v.size and (v.min() < -1e-9 or v.max() > 1.0 + 1e-9):
            raise ValueError(f"occupations outside [0, 1]: range [{v.min()}, {v.max()}]")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])


def upper_envelope(trace: OscillationTrace, window: float) -> OscillationTrace:
    """Per-window maxima of the trace, placed at the window centers.

    The window should be about one (measured) oscillation period so that
    every window contains a crest.  A trailing partial window is dropped:
    it cannot be guaranteed to contain a crest, and a spurious dip there
    would fake a collapse.  Values between centers are meant to be read by
    linear interpolation.
    """
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    if trace.span < 3 * window:
        raise ValueError(
            f"trace spans {trace.span:g}, need at least 3 windows of {window:g} for an envelope"
        )
    t0 = trace.times[0]
    n_windows = int(math.floor(trace.span / window * (1 + 1e-12)))
    edges = t0 + window * np.arange(n_windows + 1)
    idx = np.searchsorted(trace.times, edges)
    centers, maxima = [], []
    for k in range(n_windows):
        lo, hi = idx[k], idx[k + 1]
        if hi > lo:
            centers.append(t0 + window * (k + 0.5))
            maxima.append(trace.values[lo:hi].max())
    return OscillationTrace(np.array(centers), np.array(maxima), dict(trace.meta))


def _crest_times(trace: OscillationTrace, prominence: float | None):
    """Parabolically refined times of the qualifying maxima of the trace.

    The default prominence, a quarter of the value range, rejects the small
    off-resonant wiggles riding on the resonant oscillation.
    """
    v = trace.values
    if prominence is None:
        spread = float(v.max() - v.min()) if v.size else 0.0
        if spread <= 0:
            raise ValueError("trace is constant; period undefined")
        prominence = 0.25 * spread
    peaks, _ = find_peaks(v, prominence=prominence)
    return [_refine_peak(trace.times, v, p) for p in peaks]


def measured_period(trace: OscillationTrace, prominence: float | None = None) -> float:
    """Oscillation period from the mean spacing of successive maxima.

    Meant for traces that oscillate steadily (no collapse); on a beating
    signal the full-trace mean is biased, use initial_period instead.
    Raises if fewer than two maxima qualify.
    """
    crests = _crest_times(trace, prominence)
    if len(crests) < 2:
        raise ValueError(f"found {len(crests)} qualifying maxima; need at least 2 for a period")
    return float(np.mean(np.diff(crests)))


def initial_period(
    trace: OscillationTrace, max_cycles: int = 3, prominence: float | None = None
) -> float:
    """Resonant period measured from the first few oscillation crests.

    Collapse distorts the late-time crest spacing, so the envelope window of
    a collapsing trace must be measured where the oscillation is still
    coherent.  The median spacing is used so that a deep collapse between
    early crests cannot drag the estimate; for a steady trace this agrees
    with measured_period.
    """
    crests = _crest_times(trace, prominence)
    if len(crests) < 2:
        raise ValueError(f"found {len(crests)} qualifying maxima; need at least 2 for a period")
    return float(np.median(np.diff(crests[:max_cycles + 1])))


def _refine_peak(times, values, p) -> float:
    """Vertex of the parabola through the three samples around index p."""
    if p == 0 or p == len(values) - 1:
        return float(times[p])
    t = times[p - 1:p + 2].astype(float)
    y = values[p - 1:p + 2].astype(float)
    denom = (y[0] - 2.0 * y[1] + y[2])
    if denom >= 0.0:  # flat or corrupted neighbourhood; keep the sample
        return float(t[1])
    # uniform or nearly uniform spacing is assumed within one sample triplet
    h = 0.5 * (t[2] - t[0])
    return float(t[1] + 0.5 * h * (y[0] - y[2]) / denom)


def collapse_time(
    trace: OscillationTrace,
    window: float | None = None,
    threshold: float = COLLAPSE_THRESHOLD,
) -> float | None:
    """First time the upper envelope falls through the collapse threshold.

    The envelope window defaults to the resonant period measured from the
    initial crests (the interaction shifts the period slightly, so the
    analytic value is not used).  Returns None when the envelope never
    collapses.  Raises if the envelope never exceeds the threshold in the
    first place, i.e. the trace never oscillated and "collapse" is
    meaningless.
    """
    if window is None:
        window = initial_period(trace)
    env = upper_envelope(trace, window)
    v, t = env.values, env.times
    if v[0] <= threshold:
        raise ValueError(
            f"initial envelope {v[0]:.4f} does not exceed the collapse threshold "
            f"{threshold:.4f}; the trace never oscillated"
        )
    below = np.nonzero(v <= threshold)[0]
    if below.size == 0:
        return None
    k = int(below[0])
    # linear interpolation between the bracketing envelope samples
    frac = (v[k - 1] - threshold) / (v[k - 1] - v[k])
    return float(t[k - 1] + frac * (t[k] - t[k - 1]))


def revival_time(
    trace: OscillationTrace,
    t_coll: float,
    window: float | None = None,
    prominence: float = 0.05,
) -> tuple[float, float] | None:
    """Time and FWHM of the first envelope maximum after the collapse.

    The maximum must stand out from the post-collapse plateau by
    `prominence`; its time is the envelope sample time (window center) of
    the peak.  Returns (t_rev, fwhm) or None when no qualifying maximum
    exists (monotone decay, trace too short, ...).
    """
    if window is None:
        window = initial_period(trace)
    env = upper_envelope(trace, window)
    sel = env.times > t_coll
    t, v = env.times[sel], env.values[sel]
    if t.size < 3:
        return None
    peaks, _ = find_peaks(v, prominence=prominence)
    if peaks.size == 0:
        return None
    p = int(peaks[0])
    widths = peak_widths(v, [p], rel_height=0.5)[0]
    fwhm = float(widths[0]) * window
    return float(t[p]), fwhm


@dataclass(frozen=True)
class SpectralRevival:
    """Quasi-energy gaps of the three dominant coefficients and the beat time."""

    omega_12: float
    omega_23: float
    t_rev: float  # 2*pi / |omega_23 - omega_12|; inf when the gaps are equal


def _nearest_image(eps, anchor, period):
    """Representative of eps (defined modulo period) closest to anchor."""
    return eps - period * np.round((eps - anchor) / period)


def spectral_revival_estimate(
    spectrum,
    resolution_floor: float = 1e-12,
) -> SpectralRevival:
    """Revival time from the beat of the three largest-|c_n| quasi-energies.

    The three are unwrapped across the folding boundary to mutually nearest
    images, sorted by quasi-energy, and the difference of neighbouring gaps
    gives the beat period 2*pi/|omega_23 - omega_12|.  An equally spaced
    triplet beats forever (infinite estimate).
    """
    c = np.abs(np.asarray(spectrum.coefficients))
    if np.count_nonzero(c > 1e-12) < 3:
        raise ValueError("need at least 3 nonzero coefficients for a spectral estimate")
    top = np.argsort(c, kind="stable")[-3:]
    eps = np.asarray(spectrum.quasi_energies)[top]
    period = spectrum.force
    anchor = eps[np.argmax(c[top])]
    eps = np.sort(_nearest_image(eps, anchor, period))
    omega_12 = float(eps[1] - eps[0])
    omega_23 = float(eps[2] - eps[1])
    beat = abs(omega_23 - omega_12)
    t_rev = 2.0 * math.pi / beat if beat >= resolution_floor else math.inf
    return SpectralRevival(omega_12=omega_12, omega_23=omega_23, t_rev=t_rev)


def cluster_weights(spectrum, tol: float = 1e-10):
    """Aggregate |c_n|^2 over numerically degenerate quasi-energy clusters.

    Without interactions the quasi-energies of states with different
    occupation patterns are exactly degenerate, and any orthonormal basis of
    a degenerate cluster is as good as any other; individual coefficients
    are then basis-dependent while the per-cluster weight is physical.
    Returns (energies, weights) sorted by energy, where each energy is the
    weight-averaged quasi-energy of its cluster.  Clusters are groups with
    neighbour spacing <= tol, including across the folding boundary.
    """
    eps = np.asarray(spectrum.quasi_energies, dtype=float)
    w = np.abs(np.asarray(spectrum.coefficients)) ** 2
    order = np.argsort(eps, kind="stable")
    eps, w = eps[order], w[order]
    period = spectrum.force

    groups = [[0]]
    for k in range(1, eps.size):
        if eps[k] - eps[k - 1] <= tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    # the fold boundary can split one physical cluster in two
    if len(groups) > 1 and (eps[groups[0][0]] + period) - eps[groups[-1][-1]] <= tol:
        first = groups.pop(0)
        eps = eps.copy()
        eps[first] += period
        groups[-1].extend(first)

    energies, weights = [], []
    for grp in groups:
        total = float(w[grp].sum())
        e = float((eps[grp] * w[grp]).sum() / total) if total > 0 else float(eps[grp].mean())
        if e >= period / 2:  # refold a merged boundary cluster
            e -= period
        energies.append(e)
        weights.append(total)
    order = np.argsort(energies)
    return np.asarray(energies)[order], np.asarray(weights)[order]


def coefficient_width(
    spectrum,
    ladder_spacing: float | None = None,
    weight_floor: float = 1e-4,
) -> float | None:
    """Width of the coefficient distribution over the quasi-energy ladder.

    The significant coefficients (|c_n|^2 > weight_floor) of a resonant run
    sit on a ladder of spacing ~ Omega_res; each is assigned its nearest
    rung index k and the |c_n|^2-weighted standard deviation of k is
    returned.  The spacing defaults to the gap between the two largest
    coefficients.  Returns None when no ladder is identifiable (fewer than
    two significant coefficients would fix a vanishing spacing).
    """
    w = np.abs(np.asarray(spectrum.coefficients)) ** 2
    eps = np.asarray(spectrum.quasi_energies)
    period = spectrum.force
    sig = np.nonzero(w > weight_floor)[0]
    if sig.size == 0:
        return None
    if sig.size == 1:
        return 0.0
    order = sig[np.argsort(w[sig], kind="stable")][::-1]  # by weight, descending
    anchor = eps[order[0]]
    eps_sig = _nearest_image(eps[sig], anchor, period)
    if ladder_spacing is None:
        second = _nearest_image(eps[order[1]], anchor, period)
        ladder_spacing = abs(second - anchor)
    if not ladder_spacing > 1e-12:
        return None
    rungs = np.round((eps_sig - anchor) / ladder_spacing)
    weights = w[sig] / w[sig].sum()
    mean = float(weights @ rungs)
    var = float(weights @ (rungs - mean) ** 2)
    return math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class GFit:
    """Least-squares line t = slope/g + intercept and its worst residual."""

    slope: float
    intercept: float
    max_relative_residual: float


def fit_inverse_g(points) -> GFit:
    """Fit times against the inverse interaction strength.

    `points` is a sequence of (g, time) pairs with at least 3 distinct g
    values; residuals are measured relative to the fitted values.
    """
    pts = [(float(g), float(t)) for g, t in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points for a 1/g fit, got {len(pts)}")
    gs = [g for g, _ in pts]
    if len(set(gs)) != len(gs):
        raise ValueError("duplicate g values make the 1/g fit degenerate")
    if any(g == 0 for g in gs):
        raise ValueError("g = 0 has no inverse")
    x = 1.0 / np.array(gs)
    y = np.array([t for _, t in pts])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    if np.any(fitted == 0):
        raise ValueError("fitted values hit zero; relative residuals undefined")
    resid = float(np.max(np.abs(y - fitted) / np.abs(fitted)))
    return GFit(slope=float(slope), intercept=float(intercept), max_relative_residual=resid)


@dataclass(frozen=True)
class RevivalReport:
    """Measured and predicted collapse/revival scales for one run."""

    t_coll_measured: float | None
    t_rev_measured: float | None
    t_rev_universal: float | None  # closed-form 4*pi/(g Wx J0^2 J0^2) estimate
    t_rev_spectral: float | None   # three-coefficient beat estimate
    omega_12: float | None
    omega_23: float | None
    delta_n: float | None
    ratio: float | None            # t_rev_measured / t_coll_measured
    revival_fwhm: float | None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.t_coll_measured is not None and self.t_rev_measured is not None:
            if not self.t_rev_measured > self.t_coll_measured:
                raise ValueError(
                    f"revival at {self.t_rev_measured:g} does not follow the collapse "
                    f"at {self.t_coll_measured:g}"
                )

    def as_dict(self) -> dict:
        record = {
            "t_coll_measured": self.t_coll_measured,
            "t_rev_measured": self.t_rev_measured,
            "t_rev_universal": self.t_rev_universal,
            "t_rev_spectral": self.t_rev_spectral,
            "omega_12": self.omega_12,
            "omega_23": self.omega_23,
            "delta_n": self.delta_n,
            "ratio": self.ratio,
            "revival_fwhm": self.revival_fwhm,
        }
        record.update(self.meta)
        return record


def build_revival_report(
    trace: OscillationTrace,
    spectrum,
    t_rev_universal: float | None = None,
    revival_prominence: float = 0.05,
) -> RevivalReport:
    """Measure a trace, attach the spectral estimates, and bundle the result."""
    window = initial_period(trace)
    t_coll = collapse_time(trace, window)
    t_rev = fwhm = None
    if t_coll is not None:
        rev = revival_time(trace, t_coll, window, prominence=revival_prominence)
        if rev is not None:
            t_rev, fwhm = rev
    try:
        spectral = spectral_revival_estimate(spectrum)
        t_rev_spectral = spectral.t_rev if math.isfinite(spectral.t_rev) else None
        omega_12, omega_23 = spectral.omega_12, spectral.omega_23
    except ValueError:  # fewer than three participating states
        t_rev_spectral = omega_12 = omega_23 = None
    delta_n = coefficient_width(spectrum)
    ratio = t_rev / t_coll if (t_rev is not None and t_coll) else None
    return RevivalReport(
        t_coll_measured=t_coll,
        t_rev_measured=t_rev,
        t_rev_universal=t_rev_universal,
        t_rev_spectral=t_rev_spectral,
        omega_12=omega_12,
        omega_23=omega_23,
        delta_n=delta_n,
        ratio=ratio,
        revival_fwhm=fwhm,
        meta=dict(trace.meta),
    )
