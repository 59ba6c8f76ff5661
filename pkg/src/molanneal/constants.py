"""Pinned physical constants.

Every unit conversion in the package is derived from the values below, so
changing one of them here changes it everywhere.
"""

H_PLANCK = 6.62607015e-34  # J s
MU_B = 9.2740100783e-24  # J / T
G_S = 2.00231930436
DEBYE = 3.33564e-30  # C m
FOUR_PI_EPS0 = 1.11265005545e-10  # C^2 J^-1 m^-1
CM_INV_TO_HZ = 29.9792458e9

# g_S mu_B / h, Hz per tesla (~28.0249514 GHz/T)
ZEEMAN_HZ_PER_T = G_S * MU_B / H_PLANCK
# 1 D x 1 kV/cm in Hz (~503.412 MHz)
STARK_HZ_PER_D_KV_CM = DEBYE * 1e5 / H_PLANCK
# d^2 / (4 pi eps0 h R^3) for d = 1 D, R = 1 nm (~1.50926e11 Hz)
DIPOLE_HZ_NM3_PER_D2 = DEBYE**2 / (FOUR_PI_EPS0 * H_PLANCK * 1e-27)

V_PER_M_TO_KV_PER_CM = 1e-5


def pinned() -> dict[str, float]:
    """All pinned and derived constants, for run manifests."""
    return {
        "h_J_s": H_PLANCK,
        "mu_B_J_T": MU_B,
        "g_S": G_S,
        "debye_C_m": DEBYE,
        "four_pi_eps0": FOUR_PI_EPS0,
        "cm_inv_Hz": CM_INV_TO_HZ,
        "zeeman_Hz_per_T": ZEEMAN_HZ_PER_T,
        "stark_Hz_per_D_kV_cm": STARK_HZ_PER_D_KV_CM,
        "dipole_Hz_nm3_per_D2": DIPOLE_HZ_NM3_PER_D2,
    }
