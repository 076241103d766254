"""Module containing the spin-orbital Hamiltonian, the sector specification,
and the frozen-core reduction."""


import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np


logger = logging.getLogger(__name__)


DROP_TOLERANCE = 1e-12
"""Integrals smaller than this (in hartree) are stored as exact zeros."""

SYMMETRY_TOLERANCE = 1e-12
"""Tolerance of the Hermiticity, permutation and spin checks."""


@dataclass(frozen=True)
class SectorSpec:
    """Fixed electron counts of the two spin channels."""

    m_up: int
    """Number of spin-up electrons."""
    m_down: int
    """Number of spin-down electrons."""

    def validate(self, n_spin_orbitals: int, /) -> None:
        """Raises `ValueError` if the counts do not fit in `n_spin_orbitals`
        spin orbitals."""
        n_spatial = n_spin_orbitals // 2
        for name, count in (("m_up", self.m_up), ("m_down", self.m_down)):
            if not 0 <= count <= n_spatial:
                raise ValueError(
                    f"{name}={count} is outside the range 0..{n_spatial}."
                )

    @property
    def n_electrons(self) -> int:
        """Total number of electrons."""
        return self.m_up + self.m_down


@dataclass(frozen=True, eq=False)
class SpinOrbitalHamiltonian:
    """Second-quantized electronic Hamiltonian over N spin orbitals.

    H = core + sum_pq t_pq a+_p a_q + 1/2 sum_pqrs v_pqrs a+_p a+_q a_s a_r

    Spin orbitals are blocked: 0..N/2-1 are spin-up and N/2..N-1 are
    spin-down, spin orbital p and p + N/2 sharing spatial orbital p.
    """

    one_body: np.ndarray
    """N x N real tensor t_pq (hartree)."""
    two_body: np.ndarray
    """N x N x N x N real tensor <pq|v|rs> in physicist notation
    (hartree)."""
    core_energy: float = 0.0
    """Scalar energy offset (hartree)."""

    def __post_init__(self) -> None:
        one_body = np.array(self.one_body, dtype=float)
        two_body = np.array(self.two_body, dtype=float)
        n = one_body.shape[0] if one_body.ndim == 2 else -1
        if n <= 0 or n % 2 or one_body.shape != (n, n):
            raise ValueError(
                "One-body tensor must be square with an even, positive "
                f"dimension, got shape {one_body.shape}."
            )
        if two_body.shape != (n, n, n, n):
            raise ValueError(
                f"Two-body tensor must have shape {(n, n, n, n)}, got "
                f"{two_body.shape}."
            )
        one_body[np.abs(one_body) < DROP_TOLERANCE] = 0.0
        two_body[np.abs(two_body) < DROP_TOLERANCE] = 0.0
        one_body.setflags(write=False)
        two_body.setflags(write=False)
        object.__setattr__(self, "one_body", one_body)
        object.__setattr__(self, "two_body", two_body)
        object.__setattr__(self, "core_energy", float(self.core_energy))

    @classmethod
    def from_spatial(
        cls,
        h1: np.ndarray,
        eri: np.ndarray,
        core_energy: float = 0.0,
        /,
    ) -> "SpinOrbitalHamiltonian":
        """Builds the blocked spin-orbital Hamiltonian from spatial
        integrals.

        `h1` is the n x n one-body matrix and `eri` the n^4 tensor of
        chemist-notation integrals (ij|kl).
        """
        h1 = np.asarray(h1, dtype=float)
        eri = np.asarray(eri, dtype=float)
        n = h1.shape[0]
        spin = np.arange(2 * n) // n
        spatial = np.arange(2 * n) % n
        same_spin = spin[:, None] == spin[None, :]

        one_body = np.where(same_spin, h1[np.ix_(spatial, spatial)], 0.0)

        # <pq|v|rs> = (pr|qs)
        chem = eri[np.ix_(spatial, spatial, spatial, spatial)]
        two_body = chem.transpose(0, 2, 1, 3)
        mask = same_spin[:, None, :, None] & same_spin[None, :, None, :]
        two_body = np.where(mask, two_body, 0.0)
        return cls(one_body, two_body, core_energy)

    @property
    def n_spin_orbitals(self) -> int:
        """Number of spin orbitals N."""
        return self.one_body.shape[0]

    @property
    def n_spatial_orbitals(self) -> int:
        """Number of spatial orbitals N/2."""
        return self.n_spin_orbitals // 2

    def spin_of(self, p: int, /) -> int:
        """Returns 0 for a spin-up and 1 for a spin-down orbital index."""
        return p // self.n_spatial_orbitals

    def spins(self) -> np.ndarray:
        """Returns the spin label (0 up, 1 down) of every spin orbital."""
        return np.arange(self.n_spin_orbitals) // self.n_spatial_orbitals

    def check_invariants(self, tolerance: float = SYMMETRY_TOLERANCE) -> None:
        """Raises `ValueError` if a symmetry or spin invariant is violated."""
        t, v = self.one_body, self.two_body
        if not np.allclose(t, t.T, rtol=0.0, atol=tolerance):
            raise ValueError("One-body tensor is not symmetric.")
        if not np.allclose(
            v, v.transpose(1, 0, 3, 2), rtol=0.0, atol=tolerance
        ):
            raise ValueError("Two-body tensor violates v_pqrs = v_qpsr.")
        if not np.allclose(
            v, v.transpose(2, 3, 0, 1), rtol=0.0, atol=tolerance
        ):
            raise ValueError("Two-body tensor violates v_pqrs = v_rspq.")

        spin = self.spins()
        same_spin = spin[:, None] == spin[None, :]
        if np.any(np.abs(t[~same_spin]) > tolerance):
            raise ValueError("One-body tensor couples different spins.")
        mask = same_spin[:, None, :, None] & same_spin[None, :, None, :]
        if np.any(np.abs(v[~mask]) > tolerance):
            raise ValueError("Two-body tensor does not conserve spin.")

    def is_spin_restricted(self, tolerance: float = 1e-12) -> bool:
        """Returns whether spin-up and spin-down integrals coincide, i.e.
        whether the Hamiltonian comes from a single set of spatial
        integrals."""
        n = self.n_spatial_orbitals
        up, down = slice(0, n), slice(n, 2 * n)
        t, v = self.one_body, self.two_body
        blocks = [
            (t[up, up], t[down, down]),
            (v[up, up, up, up], v[down, down, down, down]),
            (v[up, up, up, up], v[up, down, up, down]),
            (v[up, up, up, up], v[down, up, down, up]),
        ]
        return all(
            np.allclose(a, b, rtol=0.0, atol=tolerance) for a, b in blocks
        )

    def same_tensors(self, other: "SpinOrbitalHamiltonian", /) -> bool:
        """Returns whether both Hamiltonians have bit-identical tensors and
        core energies."""
        return (
            self.core_energy == other.core_energy
            and np.array_equal(self.one_body, other.one_body)
            and np.array_equal(self.two_body, other.two_body)
        )


def freeze_core(
    h: SpinOrbitalHamiltonian,
    sector: SectorSpec,
    frozen_spatial: Iterable[int],
    /,
) -> tuple[SpinOrbitalHamiltonian, SectorSpec]:
    """Removes doubly occupied spatial orbitals from the Hamiltonian.

    The mean field of the frozen electrons is folded into the core energy
    and the one-body tensor. Returns the reduced Hamiltonian over the
    remaining spin orbitals (still blocked) and the reduced sector.

    Raises `ValueError` if an index is out of range or repeated, or if more
    orbitals are frozen than either spin channel holds electrons.
    """
    sector.validate(h.n_spin_orbitals)
    frozen = [int(f) for f in frozen_spatial]
    n = h.n_spatial_orbitals
    if len(set(frozen)) != len(frozen):
        raise ValueError(f"Frozen orbitals {frozen} contain duplicates.")
    for f in frozen:
        if not 0 <= f < n:
            raise ValueError(
                f"Frozen orbital {f} is outside the range 0..{n - 1}."
            )
    if len(frozen) > min(sector.m_up, sector.m_down):
        raise ValueError(
            f"Cannot freeze {len(frozen)} doubly occupied orbitals in "
            f"sector ({sector.m_up}, {sector.m_down})."
        )
    if not frozen:
        return h, sector
    if len(frozen) == n:
        raise ValueError("At least one spatial orbital must stay active.")

    frozen_so = np.array(frozen + [f + n for f in frozen])
    active_spatial = [p for p in range(n) if p not in frozen]
    active_so = np.array(active_spatial + [p + n for p in active_spatial])
    t, v = h.one_body, h.two_body

    v_frozen = v[np.ix_(frozen_so, frozen_so, frozen_so, frozen_so)]
    core_energy = (
        h.core_energy
        + t[frozen_so, frozen_so].sum()
        + 0.5 * np.einsum("fgfg->", v_frozen)
        - 0.5 * np.einsum("fggf->", v_frozen)
    )
    coulomb = np.einsum(
        "pfqf->pq", v[np.ix_(active_so, frozen_so, active_so, frozen_so)]
    )
    exchange = np.einsum(
        "pffq->pq", v[np.ix_(active_so, frozen_so, frozen_so, active_so)]
    )
    one_body = t[np.ix_(active_so, active_so)] + coulomb - exchange
    two_body = v[np.ix_(active_so, active_so, active_so, active_so)]

    reduced = SpinOrbitalHamiltonian(one_body, two_body, core_energy)
    reduced_sector = SectorSpec(
        sector.m_up - len(frozen), sector.m_down - len(frozen)
    )
    logger.info(
        "Froze spatial orbitals %s: %d -> %d spin orbitals, core %.10f Eh",
        frozen,
        h.n_spin_orbitals,
        reduced.n_spin_orbitals,
        core_energy,
    )
    return reduced, reduced_sector
