"""Periodic orbits and torsion for a time-periodic Hamiltonian flow on T^2.

The Hamiltonian is h_t(x, y) = lam(x) * nu(y - t) with profiles

    lam(x) = 1 + b*cos(2 pi x),
    nu(y)  = 1 + a1*(cos(2 pi y) - 1) + a2*(cos(4 pi y) - 1),

where a1 = 3/10 and a2 is chosen so that nu(0) = 1, nu'(0) = 0 and
nu''(0) = -1.  The profile has exactly two critical points: the maximum
at y = 0 and a minimum nu(1/2) = 2/5.  The minimum must stay below
1/(2 pi b): any critical level y* of nu with |nu(y*)| >= 1/(2 pi b) would
carry its own family of period-1 solutions along the lines y = t + y*
(a single-harmonic profile with minimum 1 - 1/(2 pi^2) fails this for
every admissible b, which is why the second harmonic is there).

The flow of the Hamiltonian vector field

    x' = lam(x) nu'(y - t),   y' = -lam'(x) nu(y - t)

is integrated with a fixed-step fourth-order scheme.  For amplitudes b
with 1/(2 pi) < b < 1/(pi sqrt 2) the time-1 map then has exactly two
fixed points of vertical winding one, sitting at the two roots of
lam'(x) = -1; they are located by Newton iteration seeded on a grid,
their linearized return maps are integrated alongside, and the resulting
two-generator complex over the rank-one lattice (phi = 1, chern = 0) is
assembled and fed to the torsion machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .complexes import BasedComplex
from .lattice import GroupElement, Lattice
from .series import DEFAULT_CUTOFF, NovikovElement
from .torsion import WhiteheadClass, milnor_torsion

TWO_PI = 2.0 * math.pi

#: Second profile coefficients: nu(0) = 1, nu'(0) = 0, nu''(0) = -1 with
#: the only other critical value nu(1/2) = 1 - 2*NU_A1 = 2/5.
NU_A1 = 0.3
NU_A2 = (1.0 - (TWO_PI**2) * NU_A1) / (4.0 * TWO_PI**2)

#: Conservative integration defaults: Newton tolerance on the torus,
#: non-degeneracy threshold on det(I - monodromy), fixed steps per period.
NEWTON_TOL = 1e-10
NONDEGENERACY_TOL = 1e-6
SEARCH_STEPS = 256
REFINE_STEPS = 2048


class ProfileError(ValueError):
    """System parameters violate the profile conditions."""


class OrbitSearchError(RuntimeError):
    """Orbit or connecting-trajectory search failed or found garbage."""


class DegenerateEndpointError(ArithmeticError):
    """Index of a symplectic path with eigenvalue 1 at the endpoint."""


@dataclass(frozen=True)
class TorusSystem:
    b: Fraction = Fraction(1, 5)

    def __post_init__(self):
        object.__setattr__(self, "b", Fraction(self.b))

    @property
    def bf(self) -> float:
        return float(self.b)

    # profile functions, numpy friendly
    def lam(self, x):
        return 1.0 + self.bf * np.cos(TWO_PI * x)

    def dlam(self, x):
        return -TWO_PI * self.bf * np.sin(TWO_PI * x)

    def d2lam(self, x):
        return -(TWO_PI**2) * self.bf * np.cos(TWO_PI * x)

    def nu(self, y):
        return (
            1.0
            + NU_A1 * (np.cos(TWO_PI * y) - 1.0)
            + NU_A2 * (np.cos(2 * TWO_PI * y) - 1.0)
        )

    def dnu(self, y):
        return -TWO_PI * NU_A1 * np.sin(TWO_PI * y) - 2 * TWO_PI * NU_A2 * np.sin(
            2 * TWO_PI * y
        )

    def d2nu(self, y):
        return -(TWO_PI**2) * NU_A1 * np.cos(TWO_PI * y) - (2 * TWO_PI) ** 2 * NU_A2 * np.cos(
            2 * TWO_PI * y
        )

    def hamiltonian(self, x, y, t):
        return self.lam(x) * self.nu(y - t)

    def check(self) -> tuple[float, float]:
        """Verify the profile conditions and return the two equilibria.

        Needs min lam' < -1 (two roots of lam' = -1); at each root,
        0 < |lam''| < 2 pi and 0 < |lam| < 2 pi; and every critical level
        of nu away from y = 0 below 1/(2 pi b), so no line y = t + y*
        other than y = t carries period-1 solutions.
        """
        lo, hi = 1.0 / TWO_PI, math.sqrt(0.5) / math.pi
        if not lo < self.bf < hi:
            raise ProfileError(
                "amplitude b=%s outside (1/(2 pi), 1/(pi sqrt 2)) ~ (%.6f, %.6f)"
                % (self.b, lo, hi)
            )
        roots = reduced_equilibria(self)
        if len(roots) != 2:
            raise ProfileError("expected 2 roots of lam'(x) = -1, found %d" % len(roots))
        for x in roots:
            if not 0.0 < abs(self.d2lam(x)) < TWO_PI:
                raise ProfileError("|lam''| = %.6f at x=%.6f not in (0, 2 pi)" % (abs(self.d2lam(x)), x))
            if not 0.0 < abs(self.lam(x)) < TWO_PI:
                raise ProfileError("|lam| = %.6f at x=%.6f not in (0, 2 pi)" % (abs(self.lam(x)), x))
        for y in _critical_points(self.dnu):
            if min(y, 1.0 - y) < 1e-9:
                continue
            if abs(self.nu(y)) >= 1.0 / (TWO_PI * self.bf):
                raise ProfileError(
                    "nu has critical level %.6f at y=%.6f, at least 1/(2 pi b) = %.6f; "
                    "the line y = t + %.6f would carry extra period-1 solutions"
                    % (self.nu(y), y, 1.0 / (TWO_PI * self.bf), y)
                )
        return roots


def _critical_points(deriv, samples: int = 4096) -> tuple[float, ...]:
    """Zeros of a 1-periodic function on [0, 1), by scan and bisection."""
    xs = np.linspace(0.0, 1.0, samples + 1)
    vals = deriv(xs)
    roots = []
    for i in range(samples):
        a, b = xs[i], xs[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            for _ in range(80):
                m = 0.5 * (a + b)
                fm = deriv(m)
                if fa * fm <= 0.0:
                    b, fb = m, fm
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    return tuple(sorted(np.mod(roots, 1.0)))


def vector_field(sys: TorusSystem, x, y, t):
    """Hamiltonian vector field (dh/dy, -dh/dx) of h = lam(x) nu(y - t)."""
    s = y - t
    return sys.lam(x) * sys.dnu(s), -sys.dlam(x) * sys.nu(s)


def variational_matrix(sys: TorusSystem, x, y, t):
    """Jacobian of the vector field in (x, y); trace free."""
    s = y - t
    a11 = sys.dlam(x) * sys.dnu(s)
    a12 = sys.lam(x) * sys.d2nu(s)
    a21 = -sys.d2lam(x) * sys.nu(s)
    return np.stack(
        [np.stack([a11, a12], axis=-1), np.stack([a21, -a11], axis=-1)], axis=-2
    )


def _rhs(sys: TorusSystem, t, state):
    # state: (..., 6) = (x, y, m11, m12, m21, m22)
    x, y = state[..., 0], state[..., 1]
    dx, dy = vector_field(sys, x, y, t)
    a = variational_matrix(sys, x, y, t)
    m = state[..., 2:].reshape(state.shape[:-1] + (2, 2))
    dm = a @ m
    return np.concatenate(
        [np.stack([dx, dy], axis=-1), dm.reshape(state.shape[:-1] + (4,))], axis=-1
    )


def _integrate(sys: TorusSystem, points, steps: int, record: bool = False):
    """Flow points for one period, carrying the variational 2x2 alongside.

    Returns (endpoints, monodromies) and, when recording, the sampled
    trajectory (steps+1, n, 2) and variational path (steps+1, n, 2, 2).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    state = np.concatenate([points, np.tile(np.eye(2).reshape(4), (n, 1))], axis=1)
    h = 1.0 / steps
    traj = var = None
    if record:
        traj = np.empty((steps + 1, n, 2))
        var = np.empty((steps + 1, n, 2, 2))
        traj[0] = state[:, :2]
        var[0] = state[:, 2:].reshape(n, 2, 2)
    t = 0.0
    for k in range(steps):
        k1 = _rhs(sys, t, state)
        k2 = _rhs(sys, t + h / 2, state + (h / 2) * k1)
        k3 = _rhs(sys, t + h / 2, state + (h / 2) * k2)
        k4 = _rhs(sys, t + h, state + h * k3)
        state = state + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        if record:
            traj[k + 1] = state[:, :2]
            var[k + 1] = state[:, 2:].reshape(n, 2, 2)
    ends = state[:, :2]
    mons = state[:, 2:].reshape(n, 2, 2)
    if record:
        return ends, mons, traj, var
    return ends, mons


@dataclass
class PeriodicOrbit:
    x: float
    y: float
    monodromy: np.ndarray
    cz_index: int
    det_gap: float
    trajectory: np.ndarray
    variational_path: np.ndarray
    richardson_gap: float
    steps: int

    @property
    def base(self) -> tuple[float, float]:
        return (self.x, self.y)


def _residual(sys, points, steps):
    ends, mons = _integrate(sys, points, steps)
    f = ends - points - np.array([0.0, 1.0])
    return f, mons


def _newton_search(sys, seeds, steps, tol, max_iter=20, clamp=0.25):
    pts = np.array(seeds, dtype=float)
    active = np.ones(len(pts), dtype=bool)
    found = []
    for _ in range(max_iter):
        if not active.any():
            break
        cur = pts[active]
        f, mons = _residual(sys, cur, steps)
        res = np.abs(f).max(axis=1)
        a = mons[:, 0, 0] - 1.0
        b = mons[:, 0, 1]
        c = mons[:, 1, 0]
        d = mons[:, 1, 1] - 1.0
        det = a * d - b * c
        ok = np.abs(det) > 1e-12
        safe = np.where(ok, det, 1.0)
        du = np.where(ok, (-f[:, 0] * d + f[:, 1] * b) / safe, np.nan)
        dv = np.where(ok, (f[:, 0] * c - f[:, 1] * a) / safe, np.nan)
        step = np.stack([du, dv], axis=1)
        norm = np.abs(step).max(axis=1)
        too_big = norm > clamp
        step[too_big] *= (clamp / norm[too_big])[:, None]
        converged = res < tol
        idx = np.flatnonzero(active)
        for local in np.flatnonzero(converged):
            found.append(cur[local])
        bad = ~ok | ~np.isfinite(step).all(axis=1)
        keep = ~(converged | bad)
        pts[idx[keep]] = cur[keep] + step[keep]
        active[idx[~keep]] = False
    return found


def _wrap01(v: float, tol: float = 1e-9) -> float:
    w = float(np.mod(v, 1.0))
    if w > 1.0 - tol:
        w = 0.0
    return w


def find_orbits(
    sys: TorusSystem,
    tol: float = NEWTON_TOL,
    grid: tuple[int, int] = (48, 24),
    search_steps: int = SEARCH_STEPS,
    refine_steps: int = REFINE_STEPS,
    nondegeneracy_tol: float = NONDEGENERACY_TOL,
) -> list[PeriodicOrbit]:
    """Locate the period-1 orbits of vertical winding 1.

    The residual of the winding-1 return condition is scanned on the grid
    in one batched integration; Newton iteration (solved in the universal
    cover, with a step clamp) then runs from the well-separated lowest
    residual seeds.  Converged points are deduplicated with the wrap-around
    metric, polished at full resolution, and returned with monodromy, a
    step-halving consistency gap, non-degeneracy gap and index, sorted by
    x.  Exhaustiveness is guaranteed only up to the scan resolution.
    """
    sys.check()
    nx, ny = grid
    xs = (np.arange(nx) + 0.5) / nx
    ys = (np.arange(ny) + 0.5) / ny
    seeds = np.array([(x, y) for x in xs for y in ys])
    f, _ = _residual(sys, seeds, search_steps)
    res = np.abs(f).max(axis=1)
    order = np.argsort(res)
    separation = max(1.0 / nx, 1.0 / ny)
    candidates = []
    for i in order:
        if res[i] > 0.5 or len(candidates) >= 40:
            break
        p = seeds[i]
        if all(_torus_dist(p, q) > separation for q in candidates):
            candidates.append(p)
    if not candidates:
        raise OrbitSearchError("no seed on the %dx%d grid is near a winding-1 fixed point" % grid)
    found = _newton_search(sys, np.array(candidates), search_steps, tol)
    if not found:
        raise OrbitSearchError(
            "Newton iteration converged from none of %d candidate seeds" % len(candidates)
        )
    unique: list[np.ndarray] = []
    for p in found:
        q = np.mod(p, 1.0)
        if not any(_torus_dist(q, u) < 1e-5 for u in unique):
            unique.append(q)
    orbits = []
    for p in sorted(unique, key=lambda u: u[0]):
        orbits.append(_refine_orbit(sys, p, refine_steps, tol, nondegeneracy_tol))
    return orbits


def _torus_dist(p, q):
    d = np.abs(np.asarray(p) - np.asarray(q))
    d = np.minimum(d, 1.0 - d)
    return float(d.max())


def _refine_orbit(sys, point, steps, tol, nondegeneracy_tol) -> PeriodicOrbit:
    p = np.array(point, dtype=float)
    offset = np.array([0.0, 1.0])
    for _ in range(8):
        ends, mons = _integrate(sys, p[None, :], steps)
        f = ends[0] - p - offset
        if np.abs(f).max() < tol:
            break
        m = mons[0] - np.eye(2)
        p = p - np.linalg.solve(m, f)
    else:
        raise OrbitSearchError("orbit polish did not reach tolerance %g" % tol)
    ends, mons, traj, var = _integrate(sys, p[None, :], steps, record=True)
    monodromy = mons[0]
    _, mons2 = _integrate(sys, p[None, :], 2 * steps)
    richardson = float(np.abs(mons2[0] - monodromy).max())
    if richardson > 1e-6:
        raise OrbitSearchError(
            "integrator is not converged: step-halving changes the monodromy by %g" % richardson
        )
    gap = float(abs(np.linalg.det(np.eye(2) - monodromy)))
    if gap <= nondegeneracy_tol:
        raise OrbitSearchError("orbit at x=%.6f is degenerate: |det(I-M)| = %g" % (p[0], gap))
    index = conley_zehnder(var[:, 0])
    return PeriodicOrbit(
        x=_wrap01(p[0]),
        y=_wrap01(p[1]),
        monodromy=monodromy,
        cz_index=index,
        det_gap=gap,
        trajectory=traj[:, 0],
        variational_path=var[:, 0],
        richardson_gap=richardson,
        steps=steps,
    )


def monodromy(sys: TorusSystem, base: tuple[float, float], steps: int = REFINE_STEPS):
    """Linearized time-1 return map along the trajectory through base."""
    _, mons = _integrate(sys, np.asarray(base, dtype=float)[None, :], steps)
    return mons[0]


def _winding(path, v):
    u = path @ np.asarray(v, dtype=float)
    angles = np.arctan2(u[:, 1], u[:, 0])
    inc = np.diff(angles)
    inc = (inc + math.pi) % (2 * math.pi) - math.pi
    if np.abs(inc).max() > 1.2:
        raise ValueError("symplectic path sampled too coarsely to track the rotation")
    return float(inc.sum())


def conley_zehnder(path, degeneracy_tol: float = 1e-9) -> int:
    """Index of a sampled symplectic path from the identity.

    Rotation-number algorithm on Sp(2): track the angle swept by the image
    of a reference vector and correct by the endpoint type (any vector for
    an elliptic endpoint, an eigenvector for a hyperbolic one).  Normalized
    so that for exp(t*A) with A = [[0, -p], [-q, 0]] and |p|, |q| < 2 pi it
    agrees with the number of negative eigenvalues of diag(q, -p); a
    prepended full counterclockwise rotation adds 2.
    """
    path = np.asarray(path, dtype=float)
    if path.ndim != 3 or path.shape[1:] != (2, 2):
        raise ValueError("path must be a sequence of 2x2 matrices")
    if np.abs(path[0] - np.eye(2)).max() > 1e-8:
        raise ValueError("path must start at the identity")
    end = path[-1]
    if abs(np.linalg.det(end) - 1.0) > 1e-6:
        raise ValueError("endpoint is not symplectic: det = %g" % np.linalg.det(end))
    if abs(np.linalg.det(end - np.eye(2))) < degeneracy_tol:
        raise DegenerateEndpointError("endpoint has eigenvalue 1 within tolerance")
    trace = end[0, 0] + end[1, 1]
    if abs(trace) < 2.0:
        delta = _winding(path, (1.0, 0.0))
        frac = (delta / math.pi) % 1.0
        if min(frac, 1.0 - frac) < 1e-6:
            raise DegenerateEndpointError("elliptic rotation lands on a grading boundary")
        base = 2 * math.floor(delta / (2 * math.pi)) + 1
    else:
        eigvals, eigvecs = np.linalg.eig(end)
        k = int(np.argmax(np.abs(np.real(eigvals))))
        v = np.real(eigvecs[:, k])
        v = v / np.linalg.norm(v)
        delta = _winding(path, v)
        ratio = delta / math.pi
        base = round(ratio)
        if abs(ratio - base) > 0.25:
            raise ValueError("eigenvector rotation %.4f pi is not close to an integer" % ratio)
    return int(base) + 1


@dataclass(frozen=True)
class Arc:
    lower: float
    upper: float
    sign: int
    source_x: float
    target_x: float
    winding: int


@dataclass(frozen=True)
class ConnectingCount:
    entries: tuple[tuple[GroupElement, int], ...]
    total: int
    arcs: tuple[Arc, ...]


def reduced_equilibria(sys: TorusSystem, samples: int = 4096) -> tuple[float, ...]:
    """Roots of 1 + lam'(x) on the circle, by scan and bisection."""
    return _critical_points(lambda x: 1.0 + sys.dlam(x), samples)


def count_connecting(sys: TorusSystem) -> ConnectingCount:
    """Count heteroclinics of the reduced circle flow x' = 1 + lam'(x).

    Each arc between the two equilibria on which 1 + lam' keeps a fixed
    sign carries exactly one trajectory (up to time shift), running with
    the sign.  The two arcs are labelled by distinct lattice elements: the
    winding of the arc, i.e. how often it crosses x = 0.
    """
    sys.check()
    zeros = reduced_equilibria(sys)
    if len(zeros) != 2:
        raise OrbitSearchError(
            "reduced flow must have exactly 2 equilibria, found %d" % len(zeros)
        )
    z0, z1 = zeros
    arcs = []
    entries = []
    for lo, hi in ((z0, z1), (z1, z0 + 1.0)):
        xs = np.linspace(lo, hi, 258)[1:-1]
        vals = 1.0 + sys.dlam(xs)
        if np.any(vals == 0.0) or vals.min() * vals.max() <= 0.0:
            raise OrbitSearchError(
                "reduced flow changes sign inside the arc (%.6f, %.6f)" % (lo, hi)
            )
        sign = 1 if vals[0] > 0 else -1
        source, target = (lo, hi) if sign > 0 else (hi, lo)
        # arc endpoints are never integers (the first equilibrium is > 0)
        winding = int(math.floor(hi)) - int(math.floor(lo))
        arcs.append(
            Arc(
                lower=lo,
                upper=hi,
                sign=sign,
                source_x=float(np.mod(source, 1.0)),
                target_x=float(np.mod(target, 1.0)),
                winding=winding,
            )
        )
        entries.append(((winding,), 1))
    entries.sort(key=lambda e: e[0])
    return ConnectingCount(tuple(entries), sum(m for _, m in entries), tuple(arcs))


def laurent_lattice() -> Lattice:
    """Rank-one lattice with weight 1 and chern 0 on the generator."""
    return Lattice(1, [Fraction(1)], [0])


def assemble_floer(
    sys: TorusSystem,
    sign_convention: str = "minus",
    orbits: Optional[list[PeriodicOrbit]] = None,
    counts: Optional[ConnectingCount] = None,
) -> BasedComplex:
    """Assemble the two-generator complex of the found orbits.

    One generator per orbit, placed at its index; the differential entry
    sums one monomial per connecting trajectory at its winding label.  With
    the ``plus`` convention all trajectories count +1; with ``minus`` a
    trajectory of odd winding counts -1.  Both give a valid orientation
    bookkeeping and the same torsion class up to the sign of z.
    """
    if sign_convention not in ("plus", "minus"):
        raise ValueError("sign_convention must be 'plus' or 'minus'")
    if orbits is None:
        orbits = find_orbits(sys)
    if counts is None:
        counts = count_connecting(sys)
    if len(orbits) != 2:
        raise OrbitSearchError("expected 2 orbits, found %d" % len(orbits))
    by_index = sorted(orbits, key=lambda o: o.cz_index)
    low, high = by_index
    if high.cz_index - low.cz_index != 1:
        raise OrbitSearchError(
            "orbit indices %d, %d do not differ by 1" % (low.cz_index, high.cz_index)
        )
    for arc in counts.arcs:
        if abs(arc.source_x - low.x) > 1e-6 or abs(arc.target_x - high.x) > 1e-6:
            raise OrbitSearchError(
                "connecting arc runs %.6f -> %.6f, expected %.6f -> %.6f"
                % (arc.source_x, arc.target_x, low.x, high.x)
            )
    lattice = laurent_lattice()
    entry = NovikovElement.zero(lattice)
    for label, mult in counts.entries:
        coeff = mult
        if sign_convention == "minus" and sum(label) % 2:
            coeff = -mult
        entry = entry + NovikovElement.monomial(lattice, coeff, label)
    names = {low.cz_index: ("o%d" % low.cz_index,), high.cz_index: ("o%d" % high.cz_index,)}
    return BasedComplex(lattice, names, {low.cz_index: ((entry,),)}, None)


def torus_torsion(
    sys: TorusSystem,
    sign_convention: str = "minus",
    cplx: Optional[BasedComplex] = None,
    cutoff=DEFAULT_CUTOFF,
) -> WhiteheadClass:
    """Torsion class of the assembled complex; exact for these entries."""
    if cplx is None:
        cplx = assemble_floer(sys, sign_convention)
    return milnor_torsion(cplx, cutoff)


@dataclass
class TorusReport:
    system: TorusSystem
    grid: tuple[int, int]
    search_steps: int
    refine_steps: int
    orbits: list[PeriodicOrbit]
    counts: ConnectingCount
    complexes: dict[str, BasedComplex]
    torsions: dict[str, WhiteheadClass]


def run_example(
    b=Fraction(1, 5),
    tol: float = NEWTON_TOL,
    cutoff=DEFAULT_CUTOFF,
    grid: tuple[int, int] = (48, 24),
    search_steps: int = SEARCH_STEPS,
    refine_steps: int = REFINE_STEPS,
) -> TorusReport:
    """Full pipeline: orbits, indices, connecting counts, complex, torsion."""
    sys = TorusSystem(Fraction(b))
    orbits = find_orbits(sys, tol, grid, search_steps, refine_steps)
    counts = count_connecting(sys)
    complexes = {}
    torsions = {}
    for convention in ("plus", "minus"):
        cplx = assemble_floer(sys, convention, orbits, counts)
        complexes[convention] = cplx
        torsions[convention] = torus_torsion(sys, convention, cplx, cutoff)
    return TorusReport(
        system=sys,
        grid=grid,
        search_steps=search_steps,
        refine_steps=refine_steps,
        orbits=orbits,
        counts=counts,
        complexes=complexes,
        torsions=torsions,
    )
