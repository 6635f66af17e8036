# coding: utf-8
"""Matrix representations of the Lie algebras used throughout the package.

Conventions
-----------
Every representation stores Hermitian generators ``T_a``.  Group elements are
``V(l) = exp(i l_a T_a)`` with real canonical parameters ``l``, so unitarity
holds by construction.  Structure constants are stored in the Hermitian
convention

    [T_a, T_b] = i C_ab^d T_d + i z_ab * 1,

where ``z_ab`` is the central-charge table of a projective representation.
Truncated representations (bosonic ladder operators on a finite Fock space)
carry a reliable subspace on which operator identities are trusted; the
truncation artifacts are confined near the basis boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "AlgebraSpec",
    "Representation",
    "GroupPoint",
    "ValidationReport",
    "TruncationOverflow",
    "build_heisenberg_weyl",
    "build_oscillator_algebra",
    "build_su2",
    "build_su11",
    "build_su11_squeeze",
    "build_bilinear_upq",
    "check_structure",
    "group_exp",
    "fock_lowering",
    "tail_mass",
    "assert_representable",
    "rep_from_spec",
    "rep_to_spec",
]

JACOBI_TOL = 1e-12
HERMITICITY_TOL = 1e-13
COMMUTATOR_TOL = 1e-10
UNITARITY_TOL = 1e-12
TAIL_MASS_TOL = 1e-10

BILINEAR_DIM_CAP = 4096


class TruncationOverflow(Exception):
    """A state pushed too much amplitude into the untrusted boundary region."""


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraSpec:
    """Abstract Lie algebra: basis size, structure constants, central charges.

    ``structure_constants[a, b, d]`` is ``C_ab^d``.  ``central_charges[a, b]``
    is the coefficient of the identity operator in ``[T_a, T_b] / i``.  When
    the identity operator itself is part of the generator basis (Heisenberg
    and oscillator algebras) its position is recorded in ``identity_index``;
    the central charges are still kept in their own table rather than being
    folded into the constants.
    """

    name: str
    dim: int
    structure_constants: np.ndarray
    central_charges: np.ndarray
    identity_index: int | None = None

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        z = np.asarray(self.central_charges)
        if c.shape != (self.dim,) * 3:
            raise ValueError(f"structure constants must be shape {(self.dim,)*3}, got {c.shape}")
        if z.shape != (self.dim, self.dim):
            raise ValueError(f"central charges must be shape {(self.dim, self.dim)}, got {z.shape}")
        if np.any(c + np.swapaxes(c, 0, 1) != 0.0):
            raise ValueError("structure constants must be exactly antisymmetric in (a, b)")
        if np.max(np.abs(z + z.T)) != 0.0:
            raise ValueError("central charges must be exactly antisymmetric")
        jac = self.jacobi_residual()
        if jac > JACOBI_TOL:
            raise ValueError(f"Jacobi identity violated: residual {jac:.3e}")
        c.setflags(write=False)
        zz = np.asarray(z)
        zz.setflags(write=False)
        object.__setattr__(self, "structure_constants", c)
        object.__setattr__(self, "central_charges", zz)

    def jacobi_residual(self) -> float:
        """Max residual of the Jacobi identity, including the 2-cocycle
        condition on the central charges."""
        c = self.structure_constants
        # C_ab^e C_ec^d + C_bc^e C_ea^d + C_ca^e C_eb^d = 0
        t1 = np.einsum("abe,ecd->abcd", c, c)
        jac = t1 + np.einsum("bce,ead->abcd", c, c) + np.einsum("cae,ebd->abcd", c, c)
        res = float(np.max(np.abs(jac)))
        z = self.central_charges
        coc = (np.einsum("abe,ec->abc", c, z)
               + np.einsum("bce,ea->abc", c, z)
               + np.einsum("cae,eb->abc", c, z))
        return max(res, float(np.max(np.abs(coc))))


@dataclass(frozen=True)
class Representation:
    """Hermitian generator matrices of ``V(l) = exp(i l_a T_a)`` on an
    n-dimensional Hilbert space, with truncation metadata."""

    algebra: AlgebraSpec
    hilbert_dim: int
    generators: np.ndarray          # (r, n, n) complex Hermitian
    truncated: bool
    reliable_dim: int
    generator_names: tuple[str, ...]
    reliable_mask: np.ndarray = None  # (n,) bool, trusted basis directions
    aux: dict = field(default_factory=dict)
    build_spec: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.generators, dtype=complex)
        r, n = self.algebra.dim, self.hilbert_dim
        if t.shape != (r, n, n):
            raise ValueError(f"generators must be shape {(r, n, n)}, got {t.shape}")
        herm = max(float(np.max(np.abs(m - m.conj().T))) for m in t)
        if herm > HERMITICITY_TOL:
            raise ValueError(f"generators not Hermitian: max deviation {herm:.3e}")
        if not 1 <= self.reliable_dim <= n:
            raise ValueError("reliable_dim out of range")
        mask = self.reliable_mask
        if mask is None:
            mask = np.arange(n) < self.reliable_dim
        mask = np.asarray(mask, dtype=bool)
        t.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "generators", t)
        object.__setattr__(self, "reliable_mask", mask)
        object.__setattr__(self, "generator_names", tuple(self.generator_names))

    def generator(self, key: int | str) -> np.ndarray:
        """Generator matrix by index or by name."""
        if isinstance(key, str):
            key = self.generator_names.index(key)
        return self.generators[key]

    def compress(self, matrix: np.ndarray) -> np.ndarray:
        """Restrict a matrix to the reliable subspace."""
        idx = np.flatnonzero(self.reliable_mask)
        return matrix[np.ix_(idx, idx)]


@dataclass(frozen=True)
class GroupPoint:
    """Canonical group parameters (first-kind coordinates, one exponential)."""

    params: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.params, dtype=float)
        if not np.all(np.isfinite(p)):
            raise ValueError("group parameters must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "params", p)


@dataclass(frozen=True)
class ValidationReport:
    """Commutator residuals of a representation against its algebra."""

    residuals: np.ndarray       # (r, r) max-abs residual per generator pair
    tolerance: float
    passed: bool
    worst_pair: tuple[int, int]
    worst_residual: float


# ---------------------------------------------------------------------------
# Ladder operators and helpers
# ---------------------------------------------------------------------------

def fock_lowering(n_trunc: int) -> np.ndarray:
    """Truncated bosonic lowering operator: sqrt(k) on the first superdiagonal."""
    a = np.zeros((n_trunc, n_trunc), dtype=complex)
    ks = np.arange(1, n_trunc)
    a[ks - 1, ks] = np.sqrt(ks)
    return a


def default_reliable_dim(n: int) -> int:
    return n - math.ceil(n / 4)


def tail_mass(state: np.ndarray, mask: np.ndarray) -> float:
    """Amplitude mass carried outside the trusted basis directions."""
    state = np.asarray(state)
    return float(np.sum(np.abs(state[~np.asarray(mask, bool)]) ** 2))


def assert_representable(rep: Representation, state: np.ndarray,
                         tol: float = TAIL_MASS_TOL) -> None:
    """Raise TruncationOverflow when the tail-mass rule is violated."""
    if not rep.truncated:
        return
    m = tail_mass(state, rep.reliable_mask)
    if m > tol:
        raise TruncationOverflow(
            f"state tail mass {m:.3e} above reliable subspace exceeds {tol:.1e}")


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _quadratures_from_ladder(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    adag = a.conj().T
    q = (a + adag) / np.sqrt(2.0)
    p = (a - adag) / (1j * np.sqrt(2.0))
    return _hermitize(q), _hermitize(p)


def build_heisenberg_weyl(n_trunc: int) -> Representation:
    """Position/momentum pair with the identity: generators {Q, P, 1} on a
    truncated Fock space.  Raw ladder matrices are exposed in ``aux``."""
    if n_trunc < 2:
        raise ValueError("n_trunc must be at least 2")
    a = fock_lowering(n_trunc)
    q, p = _quadratures_from_ladder(a)
    eye = np.eye(n_trunc, dtype=complex)
    c = np.zeros((3, 3, 3))
    z = np.zeros((3, 3))
    z[0, 1], z[1, 0] = 1.0, -1.0        # [Q, P] = i
    alg = AlgebraSpec("heisenberg_weyl", 3, c, z, identity_index=2)
    return Representation(
        algebra=alg, hilbert_dim=n_trunc,
        generators=np.stack([q, p, eye]),
        truncated=True, reliable_dim=default_reliable_dim(n_trunc),
        generator_names=("Q", "P", "I"),
        aux={"a": a, "adag": a.conj().T, "n": _hermitize(a.conj().T @ a)},
        build_spec={"algebra": "heisenberg_weyl", "n_trunc": n_trunc},
    )


def build_oscillator_algebra(n_trunc: int) -> Representation:
    """Oscillator algebra {a†a, Q, P, 1}: the centrally extended algebra of
    the two-dimensional Euclidean group realized on a truncated Fock space."""
    if n_trunc < 2:
        raise ValueError("n_trunc must be at least 2")
    a = fock_lowering(n_trunc)
    q, p = _quadratures_from_ladder(a)
    num = _hermitize(a.conj().T @ a)
    eye = np.eye(n_trunc, dtype=complex)
    c = np.zeros((4, 4, 4))
    # [N, Q] = -iP, [N, P] = iQ (basis order N, Q, P, I)
    c[0, 1, 2], c[1, 0, 2] = -1.0, 1.0
    c[0, 2, 1], c[2, 0, 1] = 1.0, -1.0
    z = np.zeros((4, 4))
    z[1, 2], z[2, 1] = 1.0, -1.0        # [Q, P] = i
    alg = AlgebraSpec("oscillator", 4, c, z, identity_index=3)
    return Representation(
        algebra=alg, hilbert_dim=n_trunc,
        generators=np.stack([num, q, p, eye]),
        truncated=True, reliable_dim=default_reliable_dim(n_trunc),
        generator_names=("N", "Q", "P", "I"),
        aux={"a": a, "adag": a.conj().T},
        build_spec={"algebra": "oscillator", "n_trunc": n_trunc},
    )


def build_su2(two_j: int) -> Representation:
    """Exact spin-j representation {Jx, Jy, Jz}, basis ordered m = j .. -j."""
    if two_j < 1:
        raise ValueError("two_j must be a positive integer")
    n = two_j + 1
    j = two_j / 2.0
    m = j - np.arange(n)                       # descending magnetic numbers
    jz = np.diag(m).astype(complex)
    jp = np.zeros((n, n), dtype=complex)       # J+ |m> = c |m+1>, index i -> i-1
    for i in range(1, n):
        mm = m[i]
        jp[i - 1, i] = math.sqrt(j * (j + 1) - mm * (mm + 1))
    jm = jp.conj().T
    jx = _hermitize((jp + jm) / 2.0)
    jy = _hermitize((jp - jm) / 2j)
    c = np.zeros((3, 3, 3))
    for (a, b, d) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:   # [Ja, Jb] = i e_abd Jd
        c[a, b, d], c[b, a, d] = 1.0, -1.0
    alg = AlgebraSpec("su2", 3, c, np.zeros((3, 3)))
    return Representation(
        algebra=alg, hilbert_dim=n,
        generators=np.stack([jx, jy, jz]),
        truncated=False, reliable_dim=n,
        generator_names=("Jx", "Jy", "Jz"),
        build_spec={"algebra": "su2", "two_j": two_j},
    )


def _su11_algebra() -> AlgebraSpec:
    # basis (K1, K2, K0): [K1,K2] = -iK0, [K0,K1] = iK2, [K0,K2] = -iK1
    c = np.zeros((3, 3, 3))
    c[0, 1, 2], c[1, 0, 2] = -1.0, 1.0
    c[2, 0, 1], c[0, 2, 1] = 1.0, -1.0
    c[2, 1, 0], c[1, 2, 0] = -1.0, 1.0
    return AlgebraSpec("su11", 3, c, np.zeros((3, 3)))


def build_su11(k: float, n_trunc: int) -> Representation:
    """Truncated discrete-series D+(k) representation {K1, K2, K0} with
    K+|m> = sqrt((m+1)(m+2k)) |m+1> and K0|m> = (k+m)|m>.

    The Bargmann bound k >= 1/2 is enforced; the single-mode k = 1/4, 3/4
    realization lives in :func:`build_su11_squeeze`.
    """
    if k < 0.5:
        raise ValueError("discrete-series weight k must satisfy k >= 1/2")
    if n_trunc < 2:
        raise ValueError("n_trunc must be at least 2")
    n = n_trunc
    kp = np.zeros((n, n), dtype=complex)
    ms = np.arange(n - 1)
    kp[ms + 1, ms] = np.sqrt((ms + 1) * (ms + 2 * k))
    km = kp.conj().T
    k0 = np.diag(k + np.arange(n)).astype(complex)
    k1 = _hermitize((kp + km) / 2.0)
    k2 = _hermitize((kp - km) / 2j)
    return Representation(
        algebra=_su11_algebra(), hilbert_dim=n,
        generators=np.stack([k1, k2, k0]),
        truncated=True, reliable_dim=default_reliable_dim(n),
        generator_names=("K1", "K2", "K0"),
        aux={"k_weight": k},
        build_spec={"algebra": "su11", "k": k, "n_trunc": n_trunc},
    )


def build_su11_squeeze(n_trunc: int) -> Representation:
    """Single-mode quadratic realization of su(1,1) on a truncated Fock space:
    K+ = a†a†/2, K- = aa/2, K0 = (a†a + 1/2)/2.

    The Fock vacuum is the k = 1/4 lowest-weight vector (even subspace); the
    one-photon state is the k = 3/4 lowest weight (odd subspace).
    """
    if n_trunc < 4:
        raise ValueError("n_trunc must be at least 4")
    a = fock_lowering(n_trunc)
    adag = a.conj().T
    kp = adag @ adag / 2.0
    km = a @ a / 2.0
    k0 = _hermitize((adag @ a + 0.5 * np.eye(n_trunc)) / 2.0)
    k1 = _hermitize((kp + km) / 2.0)
    k2 = _hermitize((kp - km) / 2j)
    return Representation(
        algebra=_su11_algebra(), hilbert_dim=n_trunc,
        generators=np.stack([k1, k2, k0]),
        truncated=True, reliable_dim=default_reliable_dim(n_trunc),
        generator_names=("K1", "K2", "K0"),
        aux={"a": a, "adag": adag, "n": _hermitize(adag @ a), "k_weight": 0.25},
        build_spec={"algebra": "su11_squeeze", "n_trunc": n_trunc},
    )


def _mode_operators(n_modes: int, n_per_mode: int) -> list[np.ndarray]:
    """Lowering operators a_i on the n_modes-fold tensor product."""
    a1 = fock_lowering(n_per_mode)
    eye = np.eye(n_per_mode, dtype=complex)
    ops = []
    for i in range(n_modes):
        factors = [a1 if j == i else eye for j in range(n_modes)]
        op = factors[0]
        for f in factors[1:]:
            op = np.kron(op, f)
        ops.append(op)
    return ops


def build_bilinear_upq(p: int, q: int, defining_generators: Sequence[np.ndarray],
                       n_trunc_per_mode: int, dim_cap: int = BILINEAR_DIM_CAP,
                       closure_tol: float = 1e-10) -> Representation:
    """Bilinear boson realization of u(p, q)-type generators.

    Each defining matrix ``X`` is lifted to ``L = phit X phi`` with
    ``phi = (a_1..a_p, a†_{p+1}..a†_{p+q})`` and
    ``phit = (a†_1..a†_p, -a_{p+1}..-a_{p+q})``, then Hermitized.  The
    resulting generators are homogeneous of degree 0 or ±2 in the ladder
    operators.  The defining matrices must close under commutation with
    ``[X_i, X_j] = i c_ij^k X_k`` for real ``c`` (checked numerically).
    """
    n_modes = p + q
    if n_modes < 1:
        raise ValueError("need at least one mode")
    n_total = n_trunc_per_mode ** n_modes
    if n_total > dim_cap:
        raise ValueError(f"hilbert dimension {n_total} exceeds cap {dim_cap}")
    xs = [np.asarray(x, dtype=complex) for x in defining_generators]
    for x in xs:
        if x.shape != (n_modes, n_modes):
            raise ValueError(f"defining matrices must be {n_modes}x{n_modes}")

    lower = _mode_operators(n_modes, n_trunc_per_mode)
    phi = lower[:p] + [op.conj().T for op in lower[p:]]
    phit = [op.conj().T for op in lower[:p]] + [-op for op in lower[p:]]

    gens = []
    for x in xs:
        L = sum(x[jj, kk] * (phit[jj] @ phi[kk])
                for jj in range(n_modes) for kk in range(n_modes)
                if x[jj, kk] != 0.0)
        if not isinstance(L, np.ndarray):
            L = np.zeros((n_total, n_total), dtype=complex)
        gens.append(_hermitize(L))

    # Structure constants from the defining representation: [X_i, X_j] = i c_ij^k X_k.
    r = len(xs)
    basis = np.stack([x.ravel() for x in xs]).T if r else np.zeros((n_modes ** 2, 0))
    c = np.zeros((r, r, r))
    for i in range(r):
        for jj in range(r):
            comm = xs[i] @ xs[jj] - xs[jj] @ xs[i]
            coef, res, *_ = np.linalg.lstsq(basis, comm.ravel(), rcond=None)
            resid = np.linalg.norm(basis @ coef - comm.ravel())
            if resid > closure_tol * max(1.0, np.linalg.norm(comm)):
                raise ValueError(
                    f"defining matrices do not close under commutation (pair {i},{jj})")
            cc = coef / 1j
            if np.max(np.abs(cc.imag)) > 1e-9:
                raise ValueError(
                    f"commutator coefficients of pair ({i},{jj}) are not i*real")
            c[i, jj] = cc.real
    c = 0.5 * (c - np.swapaxes(c, 0, 1))      # exact antisymmetry
    alg = AlgebraSpec(f"bilinear_u({p},{q})", r, c, np.zeros((r, r)))

    # Trusted region: every mode occupation below its own reliable cutoff.
    m_mode = default_reliable_dim(n_trunc_per_mode)
    occ = np.indices((n_trunc_per_mode,) * n_modes).reshape(n_modes, -1)
    mask = np.all(occ < m_mode, axis=0)
    return Representation(
        algebra=alg, hilbert_dim=n_total,
        generators=np.stack(gens) if gens else np.zeros((0, n_total, n_total)),
        truncated=True, reliable_dim=int(mask.sum()),
        generator_names=tuple(f"L{i}" for i in range(r)),
        reliable_mask=mask,
        aux={"a_modes": lower, "n_modes": n_modes, "n_per_mode": n_trunc_per_mode},
        build_spec={"algebra": "bilinear_upq", "p": p, "q": q,
                    "n_trunc_per_mode": n_trunc_per_mode},
    )


# ---------------------------------------------------------------------------
# Validation and the group map
# ---------------------------------------------------------------------------

def check_structure(rep: Representation, tol: float = COMMUTATOR_TOL) -> ValidationReport:
    """Measure commutator residuals against the declared algebra.

    For every generator pair the residual
    ``[T_a, T_b] - i C_ab^d T_d - i z_ab 1`` is compressed to the reliable
    subspace and its max-abs entry recorded.  Exact representations are
    checked on the full space.
    """
    r = rep.algebra.dim
    c = rep.algebra.structure_constants
    z = rep.algebra.central_charges
    t = rep.generators
    eye = np.eye(rep.hilbert_dim)
    res = np.zeros((r, r))
    for a in range(r):
        for b in range(a + 1, r):
            target = 1j * np.einsum("d,dij->ij", c[a, b], t) + 1j * z[a, b] * eye
            diff = t[a] @ t[b] - t[b] @ t[a] - target
            res[a, b] = res[b, a] = float(np.max(np.abs(rep.compress(diff))))
    worst = np.unravel_index(np.argmax(res), res.shape)
    worst_val = float(res[worst])
    return ValidationReport(residuals=res, tolerance=tol,
                            passed=bool(worst_val < tol),
                            worst_pair=(int(worst[0]), int(worst[1])),
                            worst_residual=worst_val)


def expm_hermitian(h: np.ndarray) -> np.ndarray:
    """exp(iH) for Hermitian H via eigendecomposition."""
    w, u = np.linalg.eigh(h)
    return (u * np.exp(1j * w)) @ u.conj().T


def expm_general(m: np.ndarray) -> np.ndarray:
    """Matrix exponential for general arguments (scaling and squaring)."""
    return scipy.linalg.expm(m)


def group_exp(rep: Representation, g: GroupPoint) -> np.ndarray:
    """Unitary group element ``V(l) = exp(i l_a T_a)``."""
    params = np.asarray(g.params, dtype=float)
    if params.shape != (rep.algebra.dim,):
        raise ValueError(f"expected {rep.algebra.dim} parameters, got {params.shape}")
    h = np.einsum("a,aij->ij", params, rep.generators)
    return expm_hermitian(h)


def group_exp_apply(rep: Representation, g: GroupPoint, state: np.ndarray) -> np.ndarray:
    """Apply ``V(l)`` to a state without forming the full matrix product."""
    params = np.asarray(g.params, dtype=float)
    h = np.einsum("a,aij->ij", params, rep.generators)
    w, u = np.linalg.eigh(h)
    return u @ (np.exp(1j * w) * (u.conj().T @ state))


# ---------------------------------------------------------------------------
# Serialization: representations rebuild from a small JSON description
# ---------------------------------------------------------------------------

_BUILDERS = {
    "heisenberg_weyl": lambda s: build_heisenberg_weyl(int(s["n_trunc"])),
    "oscillator": lambda s: build_oscillator_algebra(int(s["n_trunc"])),
    "su2": lambda s: build_su2(int(s["two_j"])),
    "su11": lambda s: build_su11(float(s["k"]), int(s["n_trunc"])),
    "su11_squeeze": lambda s: build_su11_squeeze(int(s["n_trunc"])),
}


def rep_to_spec(rep: Representation) -> dict:
    if not rep.build_spec:
        raise ValueError("representation carries no rebuild recipe")
    return dict(rep.build_spec)


def rep_from_spec(spec: dict) -> Representation:
    name = spec.get("algebra")
    if name not in _BUILDERS:
        raise ValueError(f"unknown algebra {name!r}; known: {sorted(_BUILDERS)}")
    return _BUILDERS[name](spec)
