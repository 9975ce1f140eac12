"""Unitary (entropy-conserving) dynamics in natural units (hbar = 1).

The propagator U = exp(-iHt) is built by spectral decomposition of the
Hamiltonian: exact on Hermitian input, unitary by construction, and with no
series-truncation error. States evolve as U rho U^dag; observables evolve
with the opposite sign, U^dag O U, so that Tr(rho(t) O) = Tr(rho O(t)).
"""

from __future__ import annotations

import numpy as np

from .linalg import eig_hermitian, require_hermitian
from .states import as_density_matrix


def propagator(hamiltonian, t: float) -> np.ndarray:
    """Unitary exp(-iHt) via eigendecomposition of the Hamiltonian."""
    spectrum = eig_hermitian(hamiltonian, name="hamiltonian")
    v = spectrum.eigenvectors
    phases = np.exp(-1j * spectrum.eigenvalues * t)
    return (v * phases) @ v.conj().T


def evolve_unitary(rho, hamiltonian, t: float) -> np.ndarray:
    """Evolve a density matrix for time t under a Hamiltonian.

    Preserves the eigenvalue multiset of rho, hence trace, purity and
    von Neumann entropy. Negative t runs the reversible dynamics backwards.
    """
    a = as_density_matrix(rho)
    h = require_hermitian(hamiltonian, name="hamiltonian")
    if h.shape != a.shape:
        raise ValueError(f"dimension mismatch: rho {a.shape} vs hamiltonian {h.shape}")
    u = propagator(h, t)
    out = u @ a @ u.conj().T
    # Re-symmetrize to keep the Hermiticity invariant tight against roundoff.
    return (out + out.conj().T) / 2.0


def evolve_observable(observable, hamiltonian, t: float) -> np.ndarray:
    """Evolve an observable for time t (adjoint action, sign opposite to states)."""
    o = require_hermitian(observable, name="observable")
    h = require_hermitian(hamiltonian, name="hamiltonian")
    if h.shape != o.shape:
        raise ValueError(
            f"dimension mismatch: observable {o.shape} vs hamiltonian {h.shape}"
        )
    u = propagator(h, t)
    out = u.conj().T @ o @ u
    return (out + out.conj().T) / 2.0
