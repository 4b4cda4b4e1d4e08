"""Moments int phi_i q_beta of the local dof basis against the orthonormal basis.

Rows are component-blocked: (comp, beta) -> comp * dim_p(degree) + beta. Moments up
to the internal degree come straight from the dofs; higher ones come from the
enhancement condition int (v - Pi v) q = 0, where ``enhancement`` holds the
polynomial coefficients of the degree-k projector Pi. Moments above degree k of
an enlarged space vanish because Pi v has degree k.
"""

from __future__ import annotations

import numpy as np

from vembench.errors import DomainError
from vembench.polynomials import degree_of_index, dim_p, pad_coefficients
from vembench.projectors.context import ElementContext, trace_pairing
from vembench.projectors.dofmap import LocalSpace

REMAINDER_TOL = 1e-10


class MomentProvider:
    def __init__(self, space: LocalSpace, context: ElementContext, enhancement: np.ndarray | None = None) -> None:
        self.space = space
        self.context = context
        self.enhancement = enhancement
        self._cache: dict[int, np.ndarray] = {}

    def _check_degree(self, degree: int) -> None:
        if degree > self.space.max_moment_degree:
            raise DomainError(
                f"Moments of degree {degree} are not computable in a {self.space.kind} space.",
                details={"degree": degree, "max": self.space.max_moment_degree},
            )

    def matrix(self, degree: int) -> np.ndarray:
        self._check_degree(degree)
        if degree not in self._cache:
            if self.space.problem.is_stokes:
                self._cache[degree] = self._stokes(degree)
            else:
                self._cache[degree] = self._scalar(degree, include_enhancement=True)
        return self._cache[degree]

    def known(self, degree: int) -> tuple[np.ndarray, np.ndarray]:
        """Moments with the enhancement rows left zero, plus a mask of those rows."""
        self._check_degree(degree)
        return self._scalar(degree, include_enhancement=False), self._enhancement_mask(degree)

    def _enhancement_mask(self, degree: int) -> np.ndarray:
        size = dim_p(degree)
        space = self.space
        per_comp = np.array(
            [space.internal_degree < degree_of_index(beta) <= space.k for beta in range(size)],
            dtype=bool,
        )
        return np.tile(per_comp, space.ncomp)

    def _scalar(self, degree: int, *, include_enhancement: bool) -> np.ndarray:
        space = self.space
        size = dim_p(degree)
        large = dim_p(space.k)
        area = self.context.area
        moments = np.zeros((space.ncomp * size, space.n_dofs))
        needs_enhancement = include_enhancement and bool(self._enhancement_mask(degree).any())
        if needs_enhancement and self.enhancement is None:
            raise DomainError("Enhanced moments requested without an enhancement projector.")
        for comp in range(space.ncomp):
            for beta in range(size):
                row = comp * size + beta
                d = degree_of_index(beta)
                if d <= space.internal_degree:
                    moments[row, space.moment_dof(comp, beta)] = area
                elif d <= space.k and include_enhancement:
                    moments[row] = self.enhancement[comp * large + beta]  # type: ignore[index]
        return moments

    def _stokes(self, degree: int) -> np.ndarray:
        space = self.space
        context = self.context
        perp_degree = space.internal_degree
        top = max(degree, perp_degree)
        area = context.area
        basis = context.basis(top + 1)

        gradients = context.gradient_block(top)
        complement = context.perp_basis(top)
        n_grad = gradients.shape[1]

        def flux_against_q(rule):
            values = basis.evaluate(rule.points, top + 1)[:, 1:]
            return rule.normal_weights[:, :, None] * values[:, None, :]

        # int phi . grad q_gamma = -int div(phi) q_gamma + boundary flux
        grad_moments = trace_pairing(space, flux_against_q, top + 1).T
        for gamma in range(1, min(space.n_div, n_grad) + 1):
            grad_moments[gamma - 1, space.div_dof(gamma)] -= area

        to_grad = np.linalg.pinv(gradients)
        if space.n_perp:
            perp = pad_coefficients(context.perp_basis(perp_degree), 2, perp_degree, top)
        else:
            perp = np.zeros((2 * dim_p(top), 0))
        perp_in_complement = complement.T @ perp
        perp_in_grad = to_grad @ perp

        perp_moments = -perp_in_grad.T @ grad_moments
        for index in range(space.n_perp):
            perp_moments[index, space.perp_dof(index)] += area

        if space.n_perp:
            split = np.linalg.pinv(perp_in_complement) @ complement.T
        else:
            split = np.zeros((0, 2 * dim_p(top)))
        remainder = complement.T - perp_in_complement @ split
        moments = to_grad.T @ grad_moments + split.T @ perp_moments
        if np.abs(remainder).max(initial=0.0) > REMAINDER_TOL:
            if self.enhancement is None:
                raise DomainError("Enhanced moments requested without an enhancement projector.")
            projected = pad_coefficients(self.enhancement, 2, space.k, top)
            moments += (complement @ remainder).T @ projected

        if top != degree:
            moments = pad_coefficients(moments, 2, top, degree)
        return moments
