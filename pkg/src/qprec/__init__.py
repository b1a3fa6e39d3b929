"""Numerical laboratory for linear-quantized massive-MIMO precoding.

Implements the downlink transmission model with low-resolution DACs, its
statistically equivalent Gaussian reformulation and the deterministic
large-system limit, SINR/SEP estimation for all three, the explicit
concentration and tail bounds that control the finite-to-asymptotic gap,
and SINR maximization over parametric shaping-function families.
"""

__version__ = "0.1.0"
