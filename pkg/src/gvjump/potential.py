"""Target potentials, exposed through their gradient and certified bounds.

The samplers never evaluate ``U`` itself. A potential is a gradient oracle
together with a global bound on its Hessian norm (a Lipschitz constant of
``grad U``) and/or a global bound on ``|grad U|``; at least one of the two is
needed to build prior rate bounds for thinning.
"""

from __future__ import annotations

import math
import threading
from typing import Callable, Optional

import numpy as np


class PotentialError(ValueError):
    """Invalid potential definition or evaluation request."""


class PotentialModel:
    """Gradient oracle with the bounds required by thinning.

    Args:
        dim: dimension of the position space.
        grad: callable mapping a position array of shape ``(dim,)`` to the
            force vector ``grad U(x)``.
        hessian_bound: global bound ``M`` on the operator norm of the Hessian.
        grad_sup_bound: global bound ``L`` on ``|grad U|``.
        name: label used in logs and CSV headers.
    """

    def __init__(
        self,
        dim: int,
        grad: Callable[[np.ndarray], np.ndarray],
        hessian_bound: Optional[float] = None,
        grad_sup_bound: Optional[float] = None,
        name: str = "potential",
        vectorized: bool = False,
    ):
        if dim < 1:
            raise PotentialError(f"dim must be positive, got {dim}")
        if hessian_bound is None and grad_sup_bound is None:
            raise PotentialError(
                "a hessian_bound or grad_sup_bound is required to simulate by thinning"
            )
        for label, value in (("hessian_bound", hessian_bound), ("grad_sup_bound", grad_sup_bound)):
            if value is not None and not (value >= 0 and math.isfinite(value)):
                raise PotentialError(f"{label} must be finite and non-negative, got {value}")
        self.dim = int(dim)
        self._grad = grad
        self.hessian_bound = None if hessian_bound is None else float(hessian_bound)
        self.grad_sup_bound = None if grad_sup_bound is None else float(grad_sup_bound)
        self.name = name
        self.vectorized = vectorized
        self._count = 0
        self._lock = threading.Lock()

    def grad(self, x) -> np.ndarray:
        """Evaluate ``grad U(x)`` and tally the evaluation."""
        if len(x) != self.dim:
            raise PotentialError(f"expected a position of length {self.dim}, got {len(x)}")
        with self._lock:
            self._count += 1
        return self._grad(x)

    def grad_many(self, xs) -> np.ndarray:
        """Gradients at the rows of ``xs`` (shape ``(n, dim)``); tallies ``n`` evaluations."""
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise PotentialError(f"expected positions of shape (n, {self.dim}), got {xs.shape}")
        with self._lock:
            self._count += len(xs)
        if self.vectorized:
            return np.asarray(self._grad(xs), dtype=float)
        return np.array([self._grad(x) for x in xs], dtype=float).reshape(xs.shape)

    # a force component is the same object seen as one term of a splitting
    xi = grad

    @property
    def evaluations(self) -> int:
        return self._count

    def reset_counter(self) -> None:
        with self._lock:
            self._count = 0

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(name={self.name!r}, dim={self.dim}, "
            f"hessian_bound={self.hessian_bound}, grad_sup_bound={self.grad_sup_bound})"
        )


class ForceComponent(PotentialModel):
    """One vector field ``xi_i`` of a splitting ``grad U = sum_i xi_i``.

    Same interface as :class:`PotentialModel`; ``grad`` returns ``xi_i(x)``,
    which need not be a gradient.
    """


class QuadraticPotential(PotentialModel):
    """``U(x) = x_1^2/2 + lambda * (x_2^2 + ... + x_d^2)/2``.

    In dimension 2 this is the asymmetric Gaussian target with eigenvalue
    ratio ``lambda_asym``; ``lambda_asym = 1`` is the radially symmetric case.
    In dimension 1 only ``lambda_asym = 1`` makes sense and is required.
    """

    def __init__(self, lambda_asym: float = 1.0, dim: int = 2):
        if not lambda_asym >= 1.0:
            raise PotentialError(f"lambda_asym must be >= 1, got {lambda_asym}")
        if dim == 1 and lambda_asym != 1.0:
            raise PotentialError("a one-dimensional quadratic has no asymmetry parameter")
        stiffness = np.full(dim, float(lambda_asym))
        stiffness[0] = 1.0
        self.lambda_asym = float(lambda_asym)
        self.stiffness = stiffness
        super().__init__(
            dim,
            stiffness.__mul__,
            hessian_bound=float(stiffness.max()),
            name=f"quadratic(lambda={lambda_asym:g})",
            vectorized=True,
        )

    def energy(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(np.dot(self.stiffness, x * x))


def tangent(model: PotentialModel, x) -> np.ndarray:
    """Unit vector along ``grad U(x)``, or zero at (numerical) critical points."""
    f = model.grad(x)
    return _unit(f, x)


def _unit(f: np.ndarray, x) -> np.ndarray:
    norm = math.sqrt(float(np.dot(f, f)))
    tol = 1e-12 * (1.0 + math.sqrt(float(np.dot(x, x))))
    if norm <= tol:
        return np.zeros_like(f, dtype=float)
    return f / norm


def ray_rate_coefficients(model: PotentialModel, x, v) -> tuple[float, float]:
    """Return ``(v . grad U(x), |grad U(x)|)``.

    These anchor the ray bounds ``v . grad U(x+tv) <= g0 + M|v|^2 t`` and
    ``|grad U(x+tv)| <= gnorm0 + M|v| t`` used to build prior rate bounds.
    """
    if model.hessian_bound is None and model.grad_sup_bound is None:
        raise PotentialError("no bound available on this potential")
    f = model.grad(x)
    return float(np.dot(v, f)), math.sqrt(float(np.dot(f, f)))


def bounded_force(
    dim: int,
    field: Callable[[np.ndarray], np.ndarray],
    sup_bound: float,
    lipschitz: Optional[float] = None,
    name: str = "force",
) -> ForceComponent:
    """Wrap a bounded vector field as a :class:`ForceComponent`."""
    return ForceComponent(dim, field, hessian_bound=lipschitz, grad_sup_bound=sup_bound, name=name)


def coordinate_components(model: PotentialModel) -> list[ForceComponent]:
    """Split ``grad U`` into its coordinate fields ``d_i U(x) e_i``."""
    components = []
    for i in range(model.dim):

        def field(x, i=i):
            out = np.zeros(model.dim)
            out[i] = model._grad(x)[i]
            return out

        components.append(
            ForceComponent(
                model.dim,
                field,
                hessian_bound=model.hessian_bound,
                grad_sup_bound=model.grad_sup_bound,
                name=f"{model.name}[{i}]",
            )
        )
    return components
