"""Pure matrix-valued inner functions on the unit disk.

A function is held in two interchangeable forms:

* a Blaschke-Potapov factorization  Theta(z) = U0 * F_1(z) * ... * F_n(z)
  with elementary factors F(z) = (I - uu*) + b_a(z) uu*,
  b_a(z) = (z - a) / (1 - conj(a) z);
* a state-space realization  Theta(z) = D + z C (I - zA)^{-1} B  whose block
  matrix [[A, B], [C, D]] is exactly unitary.

The realization is the working representation: it makes the model space
K_Theta = H^2 - Theta H^2 an isometric copy of C^n (n = number of factors)
and turns every operator identity in this package into finite linear
algebra.  The factor product is kept as an independent evaluation route.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    FactorInvalidError,
    GenerationFailedError,
    NotPureError,
    NotUnitaryError,
    SingularResolventError,
)
from .serialize import content_hash, matrix_to_pairs, pairs_to_matrix, pair_to_complex, complex_to_pair, vector_to_pairs, pairs_to_vector

RADIUS_CAP_DEFAULT = 0.95
PURITY_MARGIN_DEFAULT = 1e-8
BLOCK_UNITARITY_TOL = 1e-10
BOUNDARY_UNITARITY_TOL = 1e-10
UNIT_NORM_TOL = 1e-12
CONSTRUCTION_GRID = 128


def blaschke(a: complex, z):
    """Scalar Blaschke factor b_a(z) = (z - a)/(1 - conj(a) z); z may be an array."""
    return (z - a) / (1.0 - np.conj(a) * z)


def unitarity_residual(m: np.ndarray) -> float:
    eye = np.eye(m.shape[0])
    return max(
        float(np.linalg.norm(m @ m.conj().T - eye, 2)),
        float(np.linalg.norm(m.conj().T @ m - eye, 2)),
    )


def _frozen_array(obj, name: str, value: np.ndarray) -> None:
    value = np.array(value, dtype=complex)
    value.setflags(write=False)
    object.__setattr__(obj, name, value)


@dataclass(frozen=True)
class ElementaryFactor:
    """Blaschke-Potapov factor (I - uu*) + b_a(z) uu* with zero a and direction u."""

    a: complex
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        u = np.asarray(self.u, dtype=complex).ravel()
        if abs(self.a) >= 1.0:
            raise FactorInvalidError(f"factor zero must lie in the open disk, got |a| = {abs(self.a)}")
        if abs(np.linalg.norm(u) - 1.0) > UNIT_NORM_TOL:
            raise FactorInvalidError(f"direction must be a unit vector, got norm {np.linalg.norm(u)}")
        _frozen_array(self, "u", u)

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    def matrix(self, z):
        """Factor value at z; z scalar -> (d, d), z array of shape (M,) -> (M, d, d)."""
        proj = np.outer(self.u, self.u.conj())
        rest = np.eye(self.dim) - proj
        b = blaschke(self.a, np.asarray(z))
        if b.ndim == 0:
            return rest + complex(b) * proj
        return rest[None, :, :] + b[:, None, None] * proj

    def realization(self) -> "UnitaryRealization":
        u = self.u.reshape(-1, 1)
        s = np.sqrt(1.0 - abs(self.a) ** 2)
        return UnitaryRealization(
            A=np.array([[np.conj(self.a)]]),
            B=s * u.conj().T,
            C=s * u,
            D=np.eye(self.dim) - (1.0 + self.a) * (u @ u.conj().T),
        )

    def to_payload(self) -> dict:
        return {"a": complex_to_pair(self.a), "u": vector_to_pairs(self.u)}

    @classmethod
    def from_payload(cls, payload: dict) -> "ElementaryFactor":
        return cls(a=pair_to_complex(payload["a"]), u=pairs_to_vector(payload["u"]))


@dataclass(frozen=True)
class UnitaryRealization:
    """State-space quadruple (A, B, C, D) with unitary block [[A, B], [C, D]]."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        for name in ("A", "B", "C", "D"):
            _frozen_array(self, name, np.atleast_2d(getattr(self, name)))

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def dim(self) -> int:
        return self.D.shape[0]

    def block(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])

    def unitarity_residual(self) -> float:
        return unitarity_residual(self.block())

    def spectral_radius(self) -> float:
        if self.state_dim == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))

    def validate(self, atol: float = BLOCK_UNITARITY_TOL) -> None:
        res = self.unitarity_residual()
        if res > atol:
            raise NotUnitaryError(f"realization block unitarity residual {res:.3e} exceeds {atol:.1e}")

    def evaluate(self, z: complex) -> np.ndarray:
        """Theta(z) = D + z C (I - zA)^{-1} B."""
        if self.state_dim == 0:
            return self.D.copy()
        try:
            resolvent = np.linalg.solve(np.eye(self.state_dim) - z * self.A, self.B)
        except np.linalg.LinAlgError as exc:
            raise SingularResolventError(f"I - zA singular at z = {z}") from exc
        return self.D + z * (self.C @ resolvent)

    def _resolvent_samples(self, zs: np.ndarray) -> np.ndarray:
        """(I - zA)^{-1} stacked over zs, shape (M, n, n)."""
        n = self.state_dim
        zs = np.asarray(zs, dtype=complex).ravel()
        try:
            return np.linalg.inv(np.eye(n) - zs[:, None, None] * self.A)
        except np.linalg.LinAlgError as exc:
            raise SingularResolventError("I - zA singular at a sample point") from exc

    def transfer_samples(self, zs: np.ndarray) -> np.ndarray:
        """Theta at each z in zs, shape (M, d, d)."""
        zs = np.asarray(zs, dtype=complex).ravel()
        if self.state_dim == 0:
            return np.broadcast_to(self.D, (zs.size,) + self.D.shape).copy()
        res = self._resolvent_samples(zs)
        core = np.einsum("dk,mkl,ln->mdn", self.C, res, self.B)
        return self.D[None, :, :] + zs[:, None, None] * core

    def basis_samples(self, zs: np.ndarray) -> np.ndarray:
        """C (I - zA)^{-1} at each z, shape (M, d, n); column j samples the
        j-th coordinate basis function of the model space."""
        zs = np.asarray(zs, dtype=complex).ravel()
        if self.state_dim == 0:
            return np.zeros((zs.size, self.dim, 0), dtype=complex)
        res = self._resolvent_samples(zs)
        return np.einsum("dk,mkn->mdn", self.C, res)

    def taylor(self, order: int) -> np.ndarray:
        """Coefficients Theta_0..Theta_order, shape (order + 1, d, d);
        Theta_0 = D and Theta_k = C A^{k-1} B."""
        if order < 0:
            raise ValueError("order must be nonnegative")
        out = np.zeros((order + 1, self.dim, self.dim), dtype=complex)
        out[0] = self.D
        if self.state_dim == 0:
            return out
        power = self.B.copy()
        for k in range(1, order + 1):
            out[k] = self.C @ power
            power = self.A @ power
        return out


def constant_realization(u0: np.ndarray) -> UnitaryRealization:
    d = u0.shape[0]
    return UnitaryRealization(
        A=np.zeros((0, 0)), B=np.zeros((0, d)), C=np.zeros((d, 0)), D=u0
    )


def cascade(first: UnitaryRealization, second: UnitaryRealization) -> UnitaryRealization:
    """Series connection realizing the product Theta_1(z) Theta_2(z).

    Exactly preserves block unitarity: the cascade block factors as a product
    of the two unitary blocks embedded in the larger space.
    """
    n1, n2 = first.state_dim, second.state_dim
    return UnitaryRealization(
        A=np.block([[first.A, first.B @ second.C], [np.zeros((n2, n1)), second.A]]),
        B=np.vstack([first.B @ second.D, second.B]),
        C=np.hstack([first.C, first.D @ second.C]),
        D=first.D @ second.D,
    )


@dataclass(frozen=True)
class MatrixInnerFunction:
    """A pure rational inner function with its unitary realization.

    ``factors`` is None for functions derived from another inner function
    (e.g. by the Crofoot transform); such functions carry only the
    realization and cannot be evaluated through the factor product.
    """

    dim: int
    u0: np.ndarray
    factors: tuple[ElementaryFactor, ...] | None
    realization: UnitaryRealization

    def __post_init__(self):
        _frozen_array(self, "u0", self.u0)
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def degree(self) -> int:
        """Dimension of the model space K_Theta."""
        return self.realization.state_dim

    def evaluate(self, z: complex) -> np.ndarray:
        return self.realization.evaluate(z)

    __call__ = evaluate

    def transfer_samples(self, zs) -> np.ndarray:
        return self.realization.transfer_samples(zs)

    def basis_samples(self, zs) -> np.ndarray:
        return self.realization.basis_samples(zs)

    def evaluate_factors(self, z):
        """Evaluate through the Blaschke-Potapov product; the route that never
        touches the realization.  z scalar -> (d, d); array (M,) -> (M, d, d)."""
        if self.factors is None:
            raise ValueError("this inner function has no factor representation")
        zs = np.asarray(z, dtype=complex)
        scalar = zs.ndim == 0
        zs = np.atleast_1d(zs)
        out = np.broadcast_to(self.u0, (zs.size, self.dim, self.dim)).copy()
        for factor in self.factors:
            out = out @ factor.matrix(zs)
        return out[0] if scalar else out

    def taylor_coefficients(self, order: int) -> np.ndarray:
        return self.realization.taylor(order)

    def purity_norm(self) -> float:
        """||Theta(0)||; strictly below 1 for a pure inner function."""
        return float(np.linalg.norm(self.realization.evaluate(0.0), 2))

    def boundary_unitarity_residual(self, grid_size: int = CONSTRUCTION_GRID) -> float:
        nodes = np.exp(2j * np.pi * np.arange(grid_size) / grid_size)
        samples = self.transfer_samples(nodes)
        gram = np.einsum("mij,mkj->mik", samples, samples.conj())
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def to_payload(self) -> dict:
        if self.factors is None:
            return {
                "kind": "realization",
                "d": self.dim,
                "A": matrix_to_pairs(self.realization.A),
                "B": matrix_to_pairs(self.realization.B),
                "C": matrix_to_pairs(self.realization.C),
                "D": matrix_to_pairs(self.realization.D),
            }
        return {
            "kind": "factors",
            "d": self.dim,
            "u0": matrix_to_pairs(self.u0),
            "factors": [f.to_payload() for f in self.factors],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "MatrixInnerFunction":
        if payload.get("kind", "factors") != "factors":
            raise ValueError("only factor-form inner functions can be loaded")
        u0 = pairs_to_matrix(payload["u0"])
        factors = [ElementaryFactor.from_payload(p) for p in payload["factors"]]
        return assemble_inner(u0, factors)

    def content_hash(self) -> str:
        return content_hash(self.to_payload())


def assemble_inner(
    u0: np.ndarray,
    factors: Sequence[ElementaryFactor],
    radius_cap: float = RADIUS_CAP_DEFAULT,
    purity_margin: float = PURITY_MARGIN_DEFAULT,
    check_grid: int = CONSTRUCTION_GRID,
) -> MatrixInnerFunction:
    """Build Theta = U0 * F_1(z) ... F_n(z) with a cascaded unitary realization.

    Validates U0 unitarity, the factor radius cap, purity of the product, and
    boundary unitarity of the realization.
    """
    u0 = np.atleast_2d(np.asarray(u0, dtype=complex))
    factors = tuple(factors)
    if not factors:
        raise FactorInvalidError("factor list must be non-empty")
    res = unitarity_residual(u0)
    if res > BLOCK_UNITARITY_TOL:
        raise NotUnitaryError(f"U0 unitarity residual {res:.3e}")
    d = u0.shape[0]
    for k, factor in enumerate(factors):
        if factor.dim != d:
            raise FactorInvalidError(f"factor {k} has dimension {factor.dim}, expected {d}")
        if abs(factor.a) > radius_cap:
            raise FactorInvalidError(
                f"factor {k} zero has |a| = {abs(factor.a):.6f} > radius cap {radius_cap}"
            )
    realization = constant_realization(u0)
    for factor in factors:
        realization = cascade(realization, factor.realization())
    realization.validate()
    theta = MatrixInnerFunction(dim=d, u0=u0, factors=factors, realization=realization)
    purity = theta.purity_norm()
    if purity >= 1.0 - purity_margin:
        raise NotPureError(
            f"||Theta(0)|| = {purity:.12f} leaves no purity margin; "
            "a coefficient direction is untouched by the factors"
        )
    boundary = theta.boundary_unitarity_residual(check_grid)
    if boundary > BOUNDARY_UNITARITY_TOL:
        raise NotUnitaryError(f"boundary unitarity residual {boundary:.3e}")
    return theta


def inner_from_realization(
    realization: UnitaryRealization,
    purity_margin: float = PURITY_MARGIN_DEFAULT,
    check_grid: int = CONSTRUCTION_GRID,
) -> MatrixInnerFunction:
    """Wrap a realization as a (factor-free) inner function, with the same
    purity and unitarity validation as ``assemble_inner``."""
    realization.validate()
    d = realization.dim
    theta = MatrixInnerFunction(
        dim=d, u0=np.eye(d), factors=None, realization=realization
    )
    purity = theta.purity_norm()
    if purity >= 1.0 - purity_margin:
        raise NotPureError(f"||Theta(0)|| = {purity:.12f} leaves no purity margin")
    boundary = theta.boundary_unitarity_residual(check_grid)
    if boundary > BOUNDARY_UNITARITY_TOL:
        raise NotUnitaryError(f"boundary unitarity residual {boundary:.3e}")
    return theta


def scalar_inner(zeros: Sequence[complex], radius_cap: float = RADIUS_CAP_DEFAULT) -> MatrixInnerFunction:
    """Scalar (d = 1) Blaschke product with the given zeros."""
    factors = [ElementaryFactor(a=a, u=np.array([1.0])) for a in zeros]
    return assemble_inner(np.eye(1), factors, radius_cap=radius_cap)


def _random_direction(rng: np.random.Generator, d: int, real: bool) -> np.ndarray:
    v = rng.standard_normal(d)
    if not real:
        v = v + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def _random_zero(rng: np.random.Generator, radius_cap: float) -> complex:
    return radius_cap * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())


def random_inner(
    dim: int,
    degree: int,
    seed=None,
    symmetric: bool = False,
    radius_cap: float = RADIUS_CAP_DEFAULT,
    purity_margin: float = PURITY_MARGIN_DEFAULT,
    retries: int = 60,
    rng: np.random.Generator | None = None,
) -> MatrixInnerFunction:
    """Deterministic seeded generator of pure inner functions.

    With ``symmetric`` the factor list is a palindrome of real-direction
    factors and U0 = I, which forces Theta(z)^T = Theta(z) pointwise:
    transposing reverses the factor order, and a palindrome of complex
    symmetric factors is reversal-invariant.  (Real directions alone do not
    suffice; elementary factors do not commute.)  Mirrored factors repeat
    their direction, so symmetric purity needs ceil(degree / 2) >= dim.

    Directions are re-drawn until the product is pure; the zeros are drawn
    once.  Raises GenerationFailedError when the retry budget is exhausted,
    e.g. for dim > degree where purity is impossible.
    """
    if dim < 1 or degree < 1:
        raise ValueError("dim and degree must be positive")
    if rng is None:
        rng = np.random.default_rng(seed)

    if symmetric:
        half, odd = divmod(degree, 2)
        zeros = [_random_zero(rng, radius_cap) for _ in range(half + odd)]
        u0 = np.eye(dim)
    else:
        zeros = [_random_zero(rng, radius_cap) for _ in range(degree)]
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        u0, _ = np.linalg.qr(g)

    last_error: Exception | None = None
    for _ in range(retries):
        if symmetric:
            dirs = [_random_direction(rng, dim, real=True) for _ in zeros]
            lead = list(zip(zeros[:half], dirs[:half]))
            mid = list(zip(zeros[half:], dirs[half:]))  # empty unless degree is odd
            pairs = lead + mid + lead[::-1]
        else:
            pairs = [(a, _random_direction(rng, dim, real=False)) for a in zeros]
        factors = [ElementaryFactor(a=a, u=u) for a, u in pairs]
        try:
            return assemble_inner(
                u0, factors, radius_cap=radius_cap, purity_margin=purity_margin
            )
        except NotPureError as exc:
            last_error = exc
    raise GenerationFailedError(
        f"no pure inner function with dim={dim}, degree={degree} after {retries} tries"
    ) from last_error
