"""
Photon statistics behind one disordered slab
============================================

A single disorder realization is a unitary scattering matrix. Light enters
through one left mode; every output mode then carries a share of the input
photons set by its intensity coefficient. This script follows one realization
and checks the closed-form moments against brute-force Fock-space enumeration.
"""

import numpy as np

from qspeckle import EnsembleSpec, InputState, draw_realization, oracle_fock, unitarity_defect
from qspeckle.moments import mode_cross_covariance, mode_variance, total_transmission_stats

spec = EnsembleSpec(n_modes=4, ell_over_L=0.5, master_seed=1)
s = draw_realization(spec, index=0)
print(f"unitarity defect: {unitarity_defect(s):.1e}")

# Intensity coefficients for input mode 0, transmitted and reflected.
T = s.transmission()[0]
R = s.reflection()[0]
print("T_0b =", np.round(T, 4), " sum =", round(T.sum(), 4))
print("R_0b =", np.round(R, 4), " sum =", round(R.sum(), 4))

# %%
# Three inputs with the same mean photon number respond very differently.
for state in (InputState.coherent(2), InputState.thermal(2), InputState.fock(2)):
    mean, var = total_transmission_stats(s, 0, state)
    cov = mode_cross_covariance(s, 0, 1, 2, state)
    print(f"{state.label:18s} <n_T> = {mean:.4f}  var/mean = {var / mean:.4f}  cov(n_1, n_2) = {cov:+.5f}")

# %%
# Coherent light stays Poissonian, thermal light keeps its excess noise and
# two photons split binomially. The oracle expands the two-photon output state
# over every occupation pattern of the eight output channels.
ref = oracle_fock(s, 0, 2)
state = InputState.fock(2)
n = spec.n_modes
print("oracle var(n_t1) =", ref.covariance[n + 1, n + 1], " engine =", mode_variance(s, 0, 1, state))
print("oracle cov(n_t1, n_t2) =", ref.covariance[n + 1, n + 2], " engine =", mode_cross_covariance(s, 0, 1, 2, state))
