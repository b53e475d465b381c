"""
From reduced-form coefficients to demand elasticities
=====================================================

The export-value regression on the exchange rate gives a coefficient that
mixes the demand elasticity with the slope of inverse supply. This script
walks through the mapping in both directions.
"""

# %%
import numpy as np

from tradeiv import attenuation_report, beta_from_eta, epsilon_from_omega, eta_from_beta

# %%
# With a flat supply curve the mapping is a shift by one.
for b in (-26.22, 3.06, -0.47, -2.47):
    print(f"beta = {b:7.2f}  ->  eta = {eta_from_beta(b, 0.0):7.2f}")

# %%
# A positive supply slope shrinks the reduced-form coefficient toward zero,
# so reading beta - 1 as the elasticity understates how elastic demand is.
eta = -3.47
for omega in (0.0, 0.05, 0.089, 0.2):
    b = beta_from_eta(eta, omega)
    print(f"omega = {omega:5.3f}  beta = {b:7.4f}  eta if omega ignored = {b - 1:7.4f}")

# %%
# Going back: the elasticity implied by beta = -2.47 at several slopes.
for omega in (0.0, 0.089, 0.2):
    print(f"omega = {omega:5.3f}  eta = {eta_from_beta(-2.47, omega):8.4f}")

# %%
# The slope has a supply-elasticity reading.
print("epsilon at omega = 0.089:", round(epsilon_from_omega(0.089), 3))

# %%
# The attenuation bound on a grid of elastic demand values.
etas = np.linspace(-30, -1.01, 50)
holds = [attenuation_report(e, 0.089).bound_holds for e in etas]
print("bound holds everywhere on the grid:", all(holds))
print(attenuation_report(-3.47, 0.089))
