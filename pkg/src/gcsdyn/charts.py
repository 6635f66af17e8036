# coding: utf-8
"""Coset charts: complex coordinates on the state manifolds, cross-sections,
invariant measures, polar regions, and product quadratures.

Three charts are supported:

* ``plane``  - displacement orbit of the Fock vacuum, z in C,
  measure d2z / pi;
* ``sphere`` - spin orbit of the lowest weight, z the stereographic
  coordinate, measure (2j+1)/pi * d2z / (1+|z|^2)^2;
* ``disk``   - discrete-series orbit of the lowest weight, |z| < 1,
  measure (2k-1)/pi * d2z / (1-|z|^2)^2 (normalizable only for k > 1/2).

Coordinate group actions are closed-form (affine for the plane, Moebius for
sphere and disk); the cocycle phase of the action is extracted numerically by
the family layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lie_core import GroupPoint, Representation, expm_general

__all__ = [
    "CosetChart",
    "PolarRegion",
    "Quadrature",
    "make_chart",
    "make_plane_chart",
    "make_sphere_chart",
    "make_disk_chart",
    "angular_sectors",
]

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

def _wrap_angle(theta: float) -> float:
    return theta % TWO_PI


@dataclass(frozen=True)
class PolarRegion:
    """Rectangle in chart polar coordinates: [r_lo, r_hi) x angular band.

    The angular band starts at ``theta_lo`` (wrapped to [0, 2pi)) and spans
    ``theta_hi - theta_lo``; bands may wrap through zero, and a span of 2pi
    is the full circle.  Such rectangles are closed under the rotation
    subgroup, which is what makes covariance testable exactly on cell
    boundaries.
    """

    r_lo: float
    r_hi: float
    theta_lo: float
    theta_hi: float
    label: str = ""

    def __post_init__(self):
        if self.r_lo < 0 or self.r_hi < self.r_lo:
            raise ValueError("invalid radial band")
        span = self.theta_hi - self.theta_lo
        if span <= 0:
            raise ValueError("angular band must have positive span")
        if span > TWO_PI + 1e-12:
            raise ValueError("angular span exceeds a full circle")
        span = min(span, TWO_PI)
        lo = _wrap_angle(self.theta_lo)
        object.__setattr__(self, "theta_lo", lo)
        object.__setattr__(self, "theta_hi", lo + span)

    @property
    def span(self) -> float:
        return self.theta_hi - self.theta_lo

    def contains(self, z: complex) -> bool:
        r = abs(z)
        if not (self.r_lo <= r < self.r_hi):
            return False
        if self.span >= TWO_PI:
            return True
        theta = math.atan2(z.imag, z.real) if r > 0 else 0.0
        return _wrap_angle(theta - self.theta_lo) < self.span

    def rotated(self, angle: float) -> "PolarRegion":
        """The image of this region under z -> e^{i angle} z."""
        lo = _wrap_angle(self.theta_lo + angle)
        return PolarRegion(self.r_lo, self.r_hi, lo, lo + self.span, self.label)

    def overlaps(self, other: "PolarRegion") -> bool:
        if min(self.r_hi, other.r_hi) <= max(self.r_lo, other.r_lo):
            return False
        a0, wa = self.theta_lo, self.span
        b0, wb = other.theta_lo, other.span
        for shift in (-TWO_PI, 0.0, TWO_PI):
            if min(a0 + wa, b0 + wb + shift) - max(a0, b0 + shift) > 1e-12:
                return True
        return False


def angular_sectors(n: int, r_lo: float = 0.0, r_hi: float = math.inf) -> list[PolarRegion]:
    """Partition of a radial band into n equal angular sectors."""
    if n < 1:
        raise ValueError("need at least one sector")
    out = []
    for k in range(n):
        lo = TWO_PI * k / n
        hi = TWO_PI * (k + 1) / n if k < n - 1 else TWO_PI
        out.append(PolarRegion(r_lo, r_hi, lo, hi, label=f"sector{k}"))
    return out


# ---------------------------------------------------------------------------
# Quadratures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Quadrature:
    """Polar product quadrature on a chart: Gauss-Legendre radii times a
    uniform angular grid (midpoint offset, so sector boundaries at multiples
    of 2pi/n_angles never carry a node).

    ``radial_weights`` already include the polar area jacobian, so plain d2z
    integrals are ``sum_i w_r[i] * (2pi/n_ang) * f(z_ij)`` over the node grid.
    The invariant measure density is applied separately by the family layer.
    """

    radii: np.ndarray            # (nr,)
    radial_weights: np.ndarray   # (nr,) includes the jacobian of |z| d|z|
    n_angles: int
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        r = np.asarray(self.radii, float)
        w = np.asarray(self.radial_weights, float)
        r.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "radial_weights", w)

    @property
    def angles(self) -> np.ndarray:
        k = np.arange(self.n_angles)
        return (k + 0.5) * TWO_PI / self.n_angles

    def nodes(self) -> np.ndarray:
        """All nodes as a flat complex array, radius-major order."""
        return (self.radii[:, None] * np.exp(1j * self.angles[None, :])).ravel()

    def area_weights(self) -> np.ndarray:
        """d2z weight per node, aligned with :meth:`nodes`."""
        w = np.repeat(self.radial_weights, self.n_angles) * (TWO_PI / self.n_angles)
        return w


def _gauss_legendre(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    xm = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
    wm = 0.5 * (hi - lo) * w
    return xm, wm


def radial_quadrature(n_radial: int, r_max: float, n_angles: int,
                      kind: str = "plane") -> Quadrature:
    """Gauss-Legendre radii on [0, r_max] with polar jacobian folded in."""
    r, w = _gauss_legendre(n_radial, 0.0, r_max)
    return Quadrature(radii=r, radial_weights=w * r, n_angles=n_angles,
                      spec={"kind": kind, "n_radial": n_radial,
                            "r_max": r_max, "n_angles": n_angles})


def sphere_quadrature(n_polar: int, n_angles: int) -> Quadrature:
    """Gauss-Legendre in cos(theta) mapped to the stereographic radius.

    Exact for the spin overlap integrands (polynomials of degree <= 2j in
    cos(theta) times azimuthal harmonics), which is what makes the compact
    resolution-of-identity test exact.
    """
    u, wu = _gauss_legendre(n_polar, -1.0, 1.0)      # u = cos(theta)
    theta = np.arccos(u)
    radii = np.tan(theta / 2.0)
    # d2z = (1 + r^2)^2 / 4 * sin(theta) dtheta dphi = (1 + r^2)^2 / 4 * du dphi
    w = wu * (1.0 + radii ** 2) ** 2 / 4.0
    order = np.argsort(radii)
    return Quadrature(radii=radii[order], radial_weights=w[order], n_angles=n_angles,
                      spec={"kind": "sphere", "n_polar": n_polar, "n_angles": n_angles})


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CosetChart:
    """Complex coordinate chart on a coherent-state manifold.

    ``kind`` fixes the geometry; ``rep`` supplies the generators named in
    ``indices``.  ``weight`` is j for the sphere and k for the disk; it sets
    the measure normalization and the moment-map inversion used for seeds.
    """

    kind: str
    rep: Representation
    indices: dict
    weight: float = 0.0

    # -- geometry -----------------------------------------------------------

    def domain_contains(self, z: complex) -> bool:
        if self.kind == "disk":
            return abs(z) < 1.0
        return True

    def cross_section(self, z: complex) -> GroupPoint:
        """Group parameters of the coset representative s(z): the exponential
        of the coset complement (a displacement-type section)."""
        z = complex(z)
        params = np.zeros(self.rep.algebra.dim)
        if self.kind == "plane":
            # exp(alpha a† - conj(alpha) a) = exp(i (p Q - q P)), alpha = (q+ip)/sqrt2
            q = math.sqrt(2.0) * z.real
            p = math.sqrt(2.0) * z.imag
            params[self.indices["Q"]] = p
            params[self.indices["P"]] = -q
            return GroupPoint(params)
        r = abs(z)
        if self.kind == "sphere":
            zeta = math.atan(r) * (z / r) if r > 0 else 0.0
            params[self.indices["Jx"]] = 2.0 * zeta.imag if r > 0 else 0.0
            params[self.indices["Jy"]] = 2.0 * zeta.real if r > 0 else 0.0
            return GroupPoint(params)
        if self.kind == "disk":
            if r >= 1.0:
                raise ValueError(f"|z| = {r} outside the unit disk")
            zeta = math.atanh(r) * (z / r) if r > 0 else 0.0
            params[self.indices["K1"]] = 2.0 * zeta.imag if r > 0 else 0.0
            params[self.indices["K2"]] = 2.0 * zeta.real if r > 0 else 0.0
            return GroupPoint(params)
        raise ValueError(f"unknown chart kind {self.kind!r}")

    def measure_density(self, z: complex) -> float:
        """Invariant measure density mu(z) with respect to d2z."""
        if self.kind == "plane":
            return 1.0 / math.pi
        r2 = abs(z) ** 2
        if self.kind == "sphere":
            two_j = 2.0 * self.weight
            return (two_j + 1.0) / (math.pi * (1.0 + r2) ** 2)
        if self.kind == "disk":
            k = self.weight
            if k <= 0.5:
                raise ValueError(
                    "invariant measure is not normalizable for k <= 1/2")
            return (2.0 * k - 1.0) / (math.pi * (1.0 - r2) ** 2)
        raise ValueError(f"unknown chart kind {self.kind!r}")

    # -- group action on coordinates ----------------------------------------

    def coordinate_action(self, g: GroupPoint, z: complex) -> complex:
        """Closed-form action z -> z' of the group element on the chart."""
        p = np.asarray(g.params, float)
        z = complex(z)
        if self.kind == "plane":
            theta = p[self.indices["N"]] if "N" in self.indices else 0.0
            u = p[self.indices["Q"]]
            v = p[self.indices["P"]]
            if theta == 0.0:
                eps = 1.0
            else:
                eps = (np.exp(1j * theta) - 1.0) / (1j * theta)
            return np.exp(1j * theta) * z + 1j * (u + 1j * v) / math.sqrt(2.0) * eps
        if self.kind == "sphere":
            sx = np.array([[0, 1], [1, 0]], dtype=complex)
            sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
            sz = np.array([[1, 0], [0, -1]], dtype=complex)
            h = (p[self.indices["Jx"]] * sx + p[self.indices["Jy"]] * sy
                 + p[self.indices["Jz"]] * sz) / 2.0
            u2 = expm_general(1j * h)
            a, b = u2[0, 0], u2[0, 1]
            c, d = u2[1, 0], u2[1, 1]
            return (a * z + b) / (c * z + d)
        if self.kind == "disk":
            k0 = np.array([[0.5, 0], [0, -0.5]], dtype=complex)
            k1 = np.array([[0, 0.5], [-0.5, 0]], dtype=complex)
            k2 = np.array([[0, -0.5j], [-0.5j, 0]], dtype=complex)
            h = (p[self.indices["K1"]] * k1 + p[self.indices["K2"]] * k2
                 + p[self.indices["K0"]] * k0)
            u2 = expm_general(1j * h)
            a, b = u2[0, 0], u2[0, 1]
            c, d = u2[1, 0], u2[1, 1]
            return (a * z + b) / (c * z + d)
        raise ValueError(f"unknown chart kind {self.kind!r}")

    def rotation_angle(self, g: GroupPoint) -> float | None:
        """Rotation angle theta when g acts as z -> e^{i theta} z, else None.

        Central components are ignored (they only contribute a phase)."""
        p = np.asarray(g.params, float)
        rotating = {"plane": "N", "sphere": "Jz", "disk": "K0"}[self.kind]
        if rotating not in self.indices:
            return 0.0 if not np.any(p) else None
        rot_idx = self.indices[rotating]
        allowed = {rot_idx}
        if "I" in self.indices:
            allowed.add(self.indices["I"])
        for i, val in enumerate(p):
            if i not in allowed and val != 0.0:
                return None
        return float(p[rot_idx])

    # -- rotation bookkeeping used by the quadrature fast path ---------------

    def rotation_generator(self) -> np.ndarray:
        """Diagonal generator implementing z -> e^{i phi} z by conjugation.

        For each chart this matrix is exactly diagonal in the stored basis,
        so phase rotation of quadrature nodes is exact matrix algebra, not an
        approximation.
        """
        rep = self.rep
        if self.kind == "plane":
            if "N" in self.indices:
                return rep.generators[self.indices["N"]]
            return rep.aux["n"]
        if self.kind == "sphere":
            return rep.generators[self.indices["Jz"]]
        if self.kind == "disk":
            return rep.generators[self.indices["K0"]]
        raise ValueError(f"unknown chart kind {self.kind!r}")

    def fiducial_rotation_eigenvalue(self, fid_state: np.ndarray) -> float:
        """Eigenvalue of the rotation generator on the fiducial (the phase
        the fast path must compensate)."""
        gen = self.rotation_generator()
        val = np.vdot(fid_state, gen @ fid_state)
        return float(val.real)

    # -- defaults ------------------------------------------------------------

    def default_quadrature(self, **overrides) -> Quadrature:
        if self.kind == "plane":
            size = {"n_radial": 120, "r_max": 6.0, "n_angles": 128}
            size.update(overrides)
            return radial_quadrature(size["n_radial"], size["r_max"],
                                     size["n_angles"], kind="plane")
        if self.kind == "sphere":
            size = {"n_polar": 64, "n_angles": 64}
            size.update(overrides)
            return sphere_quadrature(size["n_polar"], size["n_angles"])
        if self.kind == "disk":
            size = {"n_radial": 80, "r_max": 0.9, "n_angles": 64}
            size.update(overrides)
            return radial_quadrature(size["n_radial"], size["r_max"],
                                     size["n_angles"], kind="disk")
        raise ValueError(f"unknown chart kind {self.kind!r}")

    def moment_seed(self, psi: np.ndarray) -> complex:
        """Chart coordinate estimated from expectation values; exact on the
        manifold, a useful starting point off it."""
        rep = self.rep
        if self.kind == "plane":
            if "a" in rep.aux:
                a = rep.aux["a"]
            else:
                a = (rep.generator("Q") + 1j * rep.generator("P")) / math.sqrt(2.0)
            return complex(np.vdot(psi, a @ psi))
        if self.kind == "sphere":
            j = self.weight
            jx = rep.generator("Jx")
            jy = rep.generator("Jy")
            jz = rep.generator("Jz")
            jp_exp = complex(np.vdot(psi, (jx + 1j * jy) @ psi))
            jz_exp = float(np.vdot(psi, jz @ psi).real)
            denom = j - jz_exp
            if abs(denom) < 1e-12:
                return 0.0
            return np.conj(jp_exp) / denom
        if self.kind == "disk":
            k = self.weight
            k1 = rep.generator("K1")
            k2 = rep.generator("K2")
            k0 = rep.generator("K0")
            kp_exp = complex(np.vdot(psi, (k1 + 1j * k2) @ psi))
            k0_exp = float(np.vdot(psi, k0 @ psi).real)
            denom = k0_exp + k
            if abs(denom) < 1e-12:
                return 0.0
            seed = np.conj(kp_exp) / denom
            if abs(seed) >= 1.0:
                seed = seed / abs(seed) * 0.95
            return seed
        raise ValueError(f"unknown chart kind {self.kind!r}")


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def _locate(rep: Representation, names: list[str], optional: tuple[str, ...] = ()) -> dict:
    indices = {}
    for name in names:
        if name not in rep.generator_names:
            raise ValueError(f"representation lacks generator {name!r} "
                             f"(has {rep.generator_names})")
        indices[name] = rep.generator_names.index(name)
    for name in optional:
        if name in rep.generator_names:
            indices[name] = rep.generator_names.index(name)
    return indices


def make_plane_chart(rep: Representation) -> CosetChart:
    """Displacement chart over a representation exposing Q and P."""
    indices = _locate(rep, ["Q", "P"], optional=("N", "I"))
    return CosetChart(kind="plane", rep=rep, indices=indices, weight=0.0)


def make_sphere_chart(rep: Representation) -> CosetChart:
    if rep.algebra.name != "su2":
        raise ValueError("sphere chart requires an su2 representation")
    indices = _locate(rep, ["Jx", "Jy", "Jz"])
    two_j = rep.hilbert_dim - 1
    return CosetChart(kind="sphere", rep=rep, indices=indices, weight=two_j / 2.0)


def make_disk_chart(rep: Representation) -> CosetChart:
    if rep.algebra.name != "su11":
        raise ValueError("disk chart requires an su11 representation")
    indices = _locate(rep, ["K1", "K2", "K0"])
    k = float(rep.aux.get("k_weight", rep.generators[indices["K0"]][0, 0].real))
    return CosetChart(kind="disk", rep=rep, indices=indices, weight=k)


def make_chart(kind: str, rep: Representation) -> CosetChart:
    makers = {"plane": make_plane_chart, "sphere": make_sphere_chart,
              "disk": make_disk_chart}
    if kind not in makers:
        raise ValueError(f"unknown chart kind {kind!r}")
    return makers[kind](rep)
