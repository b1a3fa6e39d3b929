"""The three downlink models: finite original, Gaussian equivalent, scalar limit.

Original model
    y = eta * H q(P s) + n, with P = V f(D)^T U^H built from the channel SVD
    H = U D V^H and a shaping function f applied to the singular values.

Statistically equivalent model
    Replaces the Haar factors by independent Gaussian vectors via Householder
    complements; (y_hat, s) has exactly the law of (y, s) for N, K >= 3.  The
    received sample collapses to y_hat = eta*(Ts*s + Tg*g2) + n with random
    scalar gains Ts (signal) and Tg (interference-plus-distortion).

Scalar asymptotic model
    Ts, Tg are replaced by their deterministic large-system limits computed
    from the limiting singular-value law and the quantizer's Gaussian moments.

The power scale eta always enforces the transmit constraint with equality:
per draw for the finite models, in expectation for the scalar model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .quantizer import QuantizerSpec, gaussian_moments, quantize
from .spectral import MpLaw, mp_moment, sample_channel, sample_singular_values, theta_interval
from .stochastic import (
    DegenerateDrawError,
    RngStream,
    complement_embed,
    reflect,
    reflect_adjoint,
    sample_complex_gaussian,
    sample_constellation,
)

log = logging.getLogger(__name__)

_MAX_RESAMPLE = 3

QPSK = tuple((a + 1j * b) / np.sqrt(2.0) for a, b in ((1, 1), (-1, 1), (-1, -1), (1, -1)))


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions, noise and symbol statistics, and the power budget."""

    n: int
    k: int
    sigma2_noise: float = 0.1
    constellation: tuple[complex, ...] = QPSK
    power_limit: float = 1.0

    def __post_init__(self) -> None:
        if self.k < 3 or self.n < self.k:
            raise ValueError("need N >= K >= 3")
        if self.n <= self.k:
            raise ValueError("aspect ratio N/K must exceed 1")
        if not np.isfinite(self.sigma2_noise) or self.sigma2_noise < 0:
            raise ValueError("noise variance must be finite and >= 0")
        if self.power_limit <= 0:
            raise ValueError("power limit must be positive")
        pts = np.asarray(self.constellation, dtype=complex)
        if pts.size == 0 or np.any(pts == 0):
            raise ValueError("constellation must be nonempty and exclude 0")

    @classmethod
    def with_gamma(cls, k: int, gamma: float, **kwargs) -> "SystemConfig":
        n = int(round(gamma * k))
        return cls(n=n, k=k, **kwargs)

    @property
    def gamma(self) -> float:
        return self.n / self.k

    @property
    def sigma2_sym(self) -> float:
        return float(np.mean(np.abs(np.asarray(self.constellation)) ** 2))

    @property
    def points(self) -> np.ndarray:
        return np.asarray(self.constellation, dtype=complex)

    @property
    def law(self) -> MpLaw:
        return MpLaw(self.gamma)


@dataclass(frozen=True)
class ShapingFunction:
    """Shaping function f applied to singular values inside the precoder.

    Families: matched filter f(d)=d, zero forcing f(d)=1/d, and regularized
    zero forcing f(d)=d/(d^2+rho).  All are positive, bounded, and Lipschitz
    on the padded bulk support, which is what the stability theory needs.
    """

    family: str
    rho: float = 0.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in ("mf", "zf", "rzf"):
            raise ValueError("family must be one of 'mf', 'zf', 'rzf'")
        if self.family == "rzf" and self.rho <= 0:
            raise ValueError("rzf requires rho > 0")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def __call__(self, d: np.ndarray | float) -> np.ndarray | float:
        d = np.asarray(d, dtype=float)
        if self.family == "mf":
            out = d.copy()
        elif self.family == "zf":
            out = 1.0 / d
        else:
            out = d / (d * d + self.rho)
        out = self.scale * out
        return out if out.ndim else float(out)

    @property
    def label(self) -> str:
        base = self.family if self.family != "rzf" else f"rzf({self.rho:g})"
        return base if self.scale == 1.0 else f"{self.scale:g}*{base}"

    def sup_bound(self, gamma: float) -> float:
        lo, hi = theta_interval(gamma)
        grid = np.linspace(lo, hi, 4001)
        return float(np.max(np.abs(self(grid))))

    def lipschitz_bound(self, gamma: float) -> float:
        lo, hi = theta_interval(gamma)
        grid = np.linspace(lo, hi, 4001)
        vals = np.asarray(self(grid))
        return float(np.max(np.abs(np.diff(vals) / np.diff(grid))))


def mf() -> ShapingFunction:
    return ShapingFunction("mf")


def zf() -> ShapingFunction:
    return ShapingFunction("zf")


def rzf(rho: float) -> ShapingFunction:
    return ShapingFunction("rzf", rho=rho)


@dataclass(frozen=True)
class ShapedMoments:
    """Limiting moments of (d, f(d)) used throughout the scalar model."""

    mean_df: float      # E[d f(d)]
    var_df: float       # var[d f(d)]
    mean_f2: float      # E[f(d)^2]
    mean_d2f2: float    # E[d^2 f(d)^2]
    mean_d2: float      # E[d^2]


def shaped_moments(shaping: ShapingFunction, law: MpLaw) -> ShapedMoments:
    mean_df = mp_moment(lambda d: d * shaping(d), law)
    mean_d2f2 = mp_moment(lambda d: (d * shaping(d)) ** 2, law)
    mean_f2 = mp_moment(lambda d: shaping(d) ** 2, law)
    mean_d2 = mp_moment(lambda d: d * d, law)
    return ShapedMoments(mean_df=mean_df, var_df=mean_d2f2 - mean_df**2,
                         mean_f2=mean_f2, mean_d2f2=mean_d2f2, mean_d2=mean_d2)


@dataclass(frozen=True)
class ScalarModel:
    """Deterministic parameters of the large-system scalar channel."""

    input_scale: float        # limit of ||shaped precoder input|| / ||z||
    power_scale: float        # eta from the expected power constraint
    linear_gain: complex      # Bussgang-type gain of the quantizer
    distortion_rms: float     # residual quantization distortion (rms)
    signal_gain: float        # limit of the signal coefficient
    interference_gain: float  # limit of the interference coefficient
    moments: ShapedMoments
    sigma2_sym: float
    sigma2_noise: float

    def __post_init__(self) -> None:
        expected = np.sqrt(self.sigma2_sym * abs(self.linear_gain) ** 2 * self.moments.var_df
                           + self.distortion_rms**2)
        if abs(self.interference_gain - expected) > 1e-10 * max(1.0, expected):
            raise ValueError("interference gain inconsistent with its defining identity")


class DegenerateQuantizerError(RuntimeError):
    """The quantizer output power vanished; no power scale exists."""


def scalar_gains_at(moments: ShapedMoments, sigma2_sym: float, quant: QuantizerSpec,
                    alpha: float) -> tuple[float, float, complex, float]:
    """(signal gain, interference gain, linear gain, distortion rms) at scale alpha."""
    gm = gaussian_moments(quant, alpha)
    c1 = gm.linear_gain
    c2 = gm.distortion_rms
    ts = c1 * moments.mean_df
    tg = np.sqrt(sigma2_sym * abs(c1) ** 2 * moments.var_df + c2 * c2)
    return float(np.real(ts)), float(tg), c1, c2


def asymptotic_model(config: SystemConfig, shaping: ShapingFunction,
                     quant: QuantizerSpec) -> ScalarModel:
    """Scalar limit of the equivalent model for the given shaping/quantizer."""
    law = config.law
    moments = shaped_moments(shaping, law)
    alpha_bar = float(np.sqrt(config.sigma2_sym * moments.mean_f2 / config.gamma))
    gm = gaussian_moments(quant, alpha_bar)
    if gm.eq2 <= 0:
        raise DegenerateQuantizerError("quantizer output power is zero at this scale")
    eta = float(np.sqrt(config.power_limit / gm.eq2))
    ts, tg, c1, c2 = scalar_gains_at(moments, config.sigma2_sym, quant, alpha_bar)
    return ScalarModel(input_scale=alpha_bar, power_scale=eta, linear_gain=c1,
                       distortion_rms=c2, signal_gain=ts, interference_gain=tg,
                       moments=moments, sigma2_sym=config.sigma2_sym,
                       sigma2_noise=config.sigma2_noise)


# ---------------------------------------------------------------------------
# Finite-dimensional sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OriginalBatch:
    """Monte-Carlo samples from the original quantized-precoding model."""

    y: np.ndarray               # trials x K received vectors
    s: np.ndarray               # trials x K data vectors
    eta: np.ndarray             # per-draw power scales
    transmit_power: np.ndarray  # eta^2 ||q||^2 / N, the enforced budget
    resampled: int = 0


def simulate_original(config: SystemConfig, shaping: ShapingFunction,
                      quant: QuantizerSpec, rng: RngStream, trials: int) -> OriginalBatch:
    """Sample the original model; eta enforces the power budget per draw."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n, k = config.n, config.k
    y = np.empty((trials, k), dtype=complex)
    s_out = np.empty((trials, k), dtype=complex)
    etas = np.empty(trials)
    power = np.empty(trials)
    resampled = 0
    for t in range(trials):
        for attempt in range(_MAX_RESAMPLE + 1):
            ch = sample_channel(config, rng)
            s = sample_constellation(config.points, k, rng)
            noise = sample_complex_gaussian(k, config.sigma2_noise, rng)
            # P s = V f(D)^T U^H s, using only the thin factors.
            shaped = shaping(ch.d) * (ch.u.conj().T @ s)
            ps = ch.vh.conj().T @ shaped
            qx = np.asarray(quantize(quant, ps))
            qnorm = float(np.linalg.norm(qx))
            if qnorm > 0:
                break
            resampled += 1
            log.warning("degenerate draw (zero quantized vector), resampling")
        else:
            raise DegenerateDrawError("quantized transmit vector is identically zero")
        eta = np.sqrt(config.power_limit * n) / qnorm
        y[t] = eta * (ch.h @ qx) + noise
        s_out[t] = s
        etas[t] = eta
        power[t] = eta**2 * qnorm**2 / n
    return OriginalBatch(y=y, s=s_out, eta=etas, transmit_power=power,
                         resampled=resampled)


@dataclass(frozen=True)
class EquivalentDraw:
    """One realization of the Gaussian equivalent model."""

    signal_gain: complex
    interference_gain: float
    linear_gain: complex
    distortion_rms: float
    input_scale: float
    power_scale: float
    y_hat: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class EquivalentBatch:
    signal_gain: np.ndarray
    interference_gain: np.ndarray
    linear_gain: np.ndarray
    distortion_rms: np.ndarray
    input_scale: np.ndarray
    power_scale: np.ndarray
    transmit_power: np.ndarray
    y_hat: np.ndarray   # trials x K
    s: np.ndarray       # trials x K
    resampled: int = 0

    def __len__(self) -> int:
        return self.signal_gain.size

    def draws(self) -> Iterator[EquivalentDraw]:
        for t in range(len(self)):
            yield EquivalentDraw(
                signal_gain=complex(self.signal_gain[t]),
                interference_gain=float(self.interference_gain[t]),
                linear_gain=complex(self.linear_gain[t]),
                distortion_rms=float(self.distortion_rms[t]),
                input_scale=float(self.input_scale[t]),
                power_scale=float(self.power_scale[t]),
                y_hat=self.y_hat[t], s=self.s[t])


def _equivalent_gains(config: SystemConfig, shaping: ShapingFunction,
                      quant: QuantizerSpec, rng: RngStream,
                      fast_spectrum: bool = True) -> dict:
    """One draw of all equivalent-model internals; raises on degeneracy."""
    n, k = config.n, config.k
    for attempt in range(_MAX_RESAMPLE + 1):
        if fast_spectrum:
            d = sample_singular_values(n, k, rng)
        else:
            d = sample_channel(config, rng).d
        g1 = sample_complex_gaussian(k, 1.0, rng)
        g2 = sample_complex_gaussian(k, 1.0, rng)
        z1 = sample_complex_gaussian(n, 1.0, rng)
        z2 = sample_complex_gaussian(n, 1.0, rng)
        s = sample_constellation(config.points, k, rng)
        s_norm = float(np.linalg.norm(s))
        g1_norm = float(np.linalg.norm(g1))
        z1_norm = float(np.linalg.norm(z1))
        fd = np.asarray(shaping(d))
        shat = np.zeros(n, dtype=complex)
        shat[:k] = (s_norm / g1_norm) * fd * g1
        shat_norm = float(np.linalg.norm(shat))
        alpha = shat_norm / z1_norm
        if min(s_norm, g1_norm, z1_norm, shat_norm) <= 0 or not np.isfinite(alpha):
            log.warning("degenerate draw in the equivalent model, resampling")
            continue
        qz = np.asarray(quantize(quant, alpha * z1))
        qz_norm = float(np.linalg.norm(qz))
        if qz_norm <= 0:
            log.warning("degenerate quantized draw, resampling")
            continue
        c1 = complex(np.vdot(z1, qz) / (alpha * z1_norm**2))
        z2_tail = z2[1:]
        c2 = float(np.linalg.norm(reflect(z1, qz)[1:]) / np.linalg.norm(z2_tail))
        # w = C1 D shat + C2 D B(shat) z2[2:N], keeping the first K rows.
        mixed = complement_embed(shat, z2_tail)[:k]
        w = c1 * d * shat[:k] + c2 * d * mixed
        g2_rot = reflect_adjoint(s, g2)      # R(s)^{-1} g2, unitary inverse
        denom = float(np.linalg.norm(g2_rot[1:]))
        if denom <= 0:
            log.warning("degenerate rotated interference draw, resampling")
            continue
        t_g = float(np.linalg.norm(reflect(g1, w)[1:]) / denom)
        t_s = complex(np.vdot(g1, w) / (g1_norm * s_norm)
                      - t_g * g2_rot[0] / s_norm)
        eta = float(np.sqrt(config.power_limit * n) / qz_norm)
        return dict(d=d, s=s, g2=g2, t_s=t_s, t_g=t_g, c1=c1, c2=c2,
                    alpha=alpha, eta=eta, qnorm=qz_norm, attempt=attempt)
    raise DegenerateDrawError("equivalent-model draw degenerate after retries")


def simulate_equivalent(config: SystemConfig, shaping: ShapingFunction,
                        quant: QuantizerSpec, rng: RngStream, trials: int,
                        fast_spectrum: bool = True) -> EquivalentBatch:
    """Sample the statistically equivalent model (full received vectors)."""
    if config.n < 3 or config.k < 3:
        raise ValueError("equivalence requires N >= 3 and K >= 3")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    k = config.k
    out = dict(signal_gain=np.empty(trials, dtype=complex),
               interference_gain=np.empty(trials),
               linear_gain=np.empty(trials, dtype=complex),
               distortion_rms=np.empty(trials),
               input_scale=np.empty(trials),
               power_scale=np.empty(trials),
               transmit_power=np.empty(trials),
               y_hat=np.empty((trials, k), dtype=complex),
               s=np.empty((trials, k), dtype=complex))
    resampled = 0
    for t in range(trials):
        g = _equivalent_gains(config, shaping, quant, rng, fast_spectrum)
        resampled += g["attempt"]
        noise = sample_complex_gaussian(k, config.sigma2_noise, rng)
        out["signal_gain"][t] = g["t_s"]
        out["interference_gain"][t] = g["t_g"]
        out["linear_gain"][t] = g["c1"]
        out["distortion_rms"][t] = g["c2"]
        out["input_scale"][t] = g["alpha"]
        out["power_scale"][t] = g["eta"]
        out["transmit_power"][t] = g["eta"] ** 2 * g["qnorm"] ** 2 / config.n
        out["y_hat"][t] = g["eta"] * (g["t_s"] * g["s"] + g["t_g"] * g["g2"]) + noise
        out["s"][t] = g["s"]
    return EquivalentBatch(resampled=resampled, **out)


def sample_scalar_outputs(model: ScalarModel, config: SystemConfig, rng: RngStream,
                          trials: int) -> tuple[np.ndarray, np.ndarray]:
    """i.i.d. draws (y_bar, s) from the scalar asymptotic channel."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    s = sample_constellation(config.points, trials, rng)
    g = sample_complex_gaussian(trials, 1.0, rng)
    noise = sample_complex_gaussian(trials, config.sigma2_noise, rng)
    y = model.power_scale * (model.signal_gain * s + model.interference_gain * g) + noise
    return y, s


# ---------------------------------------------------------------------------
# Coupled functional models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoupledSamples:
    """Per-user samples of the finite and limiting models on shared draws.

    ``y_mid`` evaluates the scalar model at the *finite-draw* scale pair
    (power scale and input scale of that draw); it isolates the parameter
    error from the gain-concentration error in optimizer diagnostics.
    ``g2_user`` is the shared unit Gaussian interference factor of the user.
    """

    s: np.ndarray
    y_hat: np.ndarray
    y_bar: np.ndarray
    y_mid: np.ndarray
    signal_gain: np.ndarray
    interference_gain: np.ndarray
    g2_user: np.ndarray
    input_scale: np.ndarray
    power_scale: np.ndarray


@dataclass(frozen=True)
class CoupledModel:
    """Finite equivalent model and its scalar limit on identical draws."""

    config: SystemConfig
    shaping: ShapingFunction
    quant: QuantizerSpec
    eta_override: float | None = None
    user: int = 0
    scalar: ScalarModel = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "scalar",
                           asymptotic_model(self.config, self.shaping, self.quant))

    def finite_scale(self, alpha: float) -> tuple[float, float]:
        """Scalar-model gains re-evaluated at a finite-draw input scale."""
        ts, tg, _, _ = scalar_gains_at(self.scalar.moments, self.config.sigma2_sym,
                                       self.quant, alpha)
        return ts, tg

    def sample(self, rng: RngStream, trials: int,
               fast_spectrum: bool = True) -> CoupledSamples:
        k_user = self.user
        model = self.scalar
        out = {name: np.empty(trials, dtype=complex)
               for name in ("s", "y_hat", "y_bar", "y_mid", "signal_gain", "g2_user")}
        tg_arr = np.empty(trials)
        alpha_arr = np.empty(trials)
        eta_arr = np.empty(trials)
        for t in range(trials):
            g = _equivalent_gains(self.config, self.shaping, self.quant, rng,
                                  fast_spectrum)
            noise = sample_complex_gaussian(1, self.config.sigma2_noise, rng)[0]
            s_k = g["s"][k_user]
            g2_k = g["g2"][k_user]
            eta_fin = self.eta_override if self.eta_override is not None else g["eta"]
            eta_bar = self.eta_override if self.eta_override is not None else model.power_scale
            ts_mid, tg_mid = self.finite_scale(g["alpha"])
            out["s"][t] = s_k
            out["y_hat"][t] = eta_fin * (g["t_s"] * s_k + g["t_g"] * g2_k) + noise
            out["y_bar"][t] = eta_bar * (model.signal_gain * s_k
                                         + model.interference_gain * g2_k) + noise
            out["y_mid"][t] = eta_fin * (ts_mid * s_k + tg_mid * g2_k) + noise
            out["signal_gain"][t] = g["t_s"]
            out["g2_user"][t] = g2_k
            tg_arr[t] = g["t_g"]
            alpha_arr[t] = g["alpha"]
            eta_arr[t] = eta_fin
        return CoupledSamples(s=out["s"], y_hat=out["y_hat"], y_bar=out["y_bar"],
                              y_mid=out["y_mid"], signal_gain=out["signal_gain"],
                              interference_gain=tg_arr, g2_user=out["g2_user"],
                              input_scale=alpha_arr, power_scale=eta_arr)


def functional_models(config: SystemConfig, shaping: ShapingFunction,
                      quant: QuantizerSpec, eta_override: float | None = None,
                      user: int = 0) -> CoupledModel:
    """Paired finite/asymptotic samplers fed by identical underlying draws."""
    if eta_override is not None and eta_override <= 0:
        raise ValueError("eta_override must be positive")
    return CoupledModel(config=config, shaping=shaping, quant=quant,
                        eta_override=eta_override, user=user)
