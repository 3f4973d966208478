"""The convention constants table. Every transform-scale constant in the
package is defined here, once, with its derivation, so no factor can drift
silently between modules.

Analog forward transform
------------------------
    F[f](omega) = ANALOG_FORWARD_SCALE * integral e^{-i omega t} f(t) dt

with ANALOG_FORWARD_SCALE = 1/(2*pi). Under this convention the transform
of a Gaussian envelope is

    F[e^{-t^2/(2 a^2)}](omega) = (a / sqrt(2*pi)) * e^{-a^2 omega^2 / 2},

since the integral evaluates to a*sqrt(2*pi)*e^{-a^2 omega^2/2} and the
1/(2*pi) prefactor leaves a/sqrt(2*pi).

Discrete transform
------------------
DFT coefficients are plain forward sums with no 1/N prefactor:

    v_j = sum_k w_k y_k e^{-i omega_j t_k}.

Derived per-kernel constants
----------------------------
Transforming e^{-sigma^2 (t - t_k)^2 / 2} * e^{-i xi_j (t - t_k)} under the
analog convention gives

    (1 / (sigma * sqrt(2*pi))) * e^{-(omega + xi_j)^2 / (2 sigma^2)} * e^{-i omega t_k},

so the posterior-mean transform built on the cosine-mixture kernel
sigma * e^{-sigma^2 tau^2 / 2} * sum_j e^{h_j} cos(xi_j tau) carries the
single amplitude constant

    MIXTURE_TRANSFORM_SCALE = 1 / sqrt(2*pi)

(the kernel's leading sigma cancels the transform's 1/sigma), and the
stationary transform of a squared-exponential kernel beta*e^{-tau^2/(2 nu^2)}
is (beta * nu / sqrt(2*pi)) * e^{-nu^2 omega^2 / 2}.
"""

import math

ANALOG_FORWARD_SCALE = 1.0 / (2.0 * math.pi)

DFT_FORWARD_SCALE = 1.0

MIXTURE_TRANSFORM_SCALE = 1.0 / math.sqrt(2.0 * math.pi)

# Tags stored on spectra so a consumer can tell which constant produced them.
CONVENTION_DFT_SUM = "dft-sum"
CONVENTION_ANALOG = "analog-1/2pi"
