"""Finite-SNR Gaussian mutual-information evaluation of a scheme plan.

Per Monte-Carlo trial the evaluator draws an independent channel
realization for every slot and accounts rates layer by layer in decode
dependency order:

  1. first-antenna (common) layers, decoded at both users by SIC strongest
     first, everything else as noise;
  2. quantized-interference links resolved: the usable description rate of
     each overheard interference is min(its quantization rate, the carrying
     common layer's delivered mutual information at either user), and the
     receivers' residual after subtracting the reconstruction is Gaussian
     with the matching rate-distortion variance (exactly 1 when the link is
     well provisioned and fully delivered);
  3. private zero-forced symbols and jointly decoded two-symbol vectors.
     A vector's owner decodes from its direct observation (after common
     removal and, where linked, interference subtraction) stacked with the
     quantized record of the vector overheard at the other user, a 2x2
     log-det rate.

Rates are mutual informations, not symbol-error simulations: the point is
the high-SNR slope, estimated by least squares on the top half of a power
grid.  Per-layer entries of a jointly decoded vector are the joint rate
split proportionally to each symbol's genie-aided (others-known) rate, so
they sum to the joint rate and keep each symbol's pre-log.

All randomness is drawn from streams keyed by (seed, grid point, slot), so
results are reproducible for a given (seed, trial count, grid) no matter
how the work is ordered, and the same channels are reused when different
schemes are compared on the same grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, SnrPoint, orth_complement, sample_channel, unit
from .geometry import DofPoint
from .schemes import (
    OWNER_COMMON,
    OWNER_USER1,
    OWNER_USER2,
    QuantizationLink,
    SchemePlan,
    SlotPlan,
    SymbolLayer,
    validate_plan,
)

__all__ = [
    "QuantizedInterference",
    "RateLedger",
    "DofEstimate",
    "PlanValidationError",
    "evaluate_plan",
    "estimate_dof",
    "residual_power_probe",
    "rate_common_layer",
    "rate_zf_symbol",
    "rate_joint_vector",
]

_TAG_CHANNEL = 1
_TAG_PROBE = 2


class PlanValidationError(ValueError):
    """evaluate_plan refused a plan with outstanding diagnostics."""


@dataclass(frozen=True, eq=False)
class QuantizedInterference:
    """Samples of one overheard interference and its quantization error."""

    link: QuantizationLink
    clean_value: np.ndarray
    quant_error: np.ndarray

    @property
    def reconstructed(self) -> np.ndarray:
        return self.clean_value - self.quant_error


@dataclass(frozen=True, eq=False)
class RateLedger:
    """Measured rates and channel-use accounting for one evaluated plan.

    user_rate are total bits per plan run (sum of the owning layers'
    per_symbol_rate entries); divide by channel_uses for bits per use.
    link_delivered maps each interference id to the carrying common layer's
    delivered MI (min over the two users of the trial mean), link_noise to
    the effective residual variance after subtraction.
    """

    per_symbol_rate: dict[str, float]
    user_rate: tuple[float, float]
    user_rate_stderr: tuple[float, float]
    channel_uses: float
    snr: SnrPoint
    n_trials: int
    seed: int
    link_delivered: dict[str, float]
    link_noise: dict[str, float]


@dataclass(frozen=True, eq=False)
class DofEstimate:
    """Per-user rate points over a power grid and the fitted pre-log slopes."""

    points: tuple[tuple[float, float, float], ...]      # (log2 P, r1, r2)
    point_stderr: tuple[tuple[float, float], ...]
    slope: DofPoint
    stderr: tuple[float, float]


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed)] + [int(k) for k in key]))


def _p_key(snr: SnrPoint) -> int:
    return int(round(snr.p_db * 1000.0))


def _vdot(h: np.ndarray, v: np.ndarray) -> np.ndarray:
    """h^H v along the trailing axis."""
    return (np.conj(h) * v).sum(axis=-1)


def _gains_for_slot(slot: SlotPlan, ch: ChannelRealization):
    """Per-layer complex receive gains at user 1 and user 2."""
    vecs = {
        (1, "orth"): orth_complement(ch.h_est),
        (1, "along"): unit(ch.h_est),
        (2, "orth"): orth_complement(ch.g_est),
        (2, "along"): unit(ch.g_est),
    }
    gain1, gain2 = {}, {}
    for layer in slot.layers:
        pc = layer.precoder
        if pc.kind == "first_antenna":
            gain1[layer.id] = np.conj(ch.h_true[..., 0])
            gain2[layer.id] = np.conj(ch.g_true[..., 0])
        else:
            v = vecs[(pc.user, pc.kind)]
            gain1[layer.id] = _vdot(ch.h_true, v)
            gain2[layer.id] = _vdot(ch.g_true, v)
    return gain1, gain2


def _common_mis(slot: SlotPlan, gain1, gain2, p: float):
    """SIC mutual informations of every first-antenna layer at both users.

    Decoding strongest first; the noise for each layer is every weaker
    first-antenna layer plus all fresh layers at their true received powers
    plus unit AWGN.
    """
    sic = slot.commons(p)
    fresh = [l for l in slot.layers if l.precoder.kind != "first_antenna"]
    out = []
    for gains in (gain1, gain2):
        mis = {}
        fresh_rx = sum(np.abs(gains[l.id]) ** 2 * l.power(p) for l in fresh) if fresh else 0.0
        rx = [np.abs(gains[l.id]) ** 2 * l.power(p) for l in sic]
        for i, layer in enumerate(sic):
            below = sum(rx[i + 1:]) + fresh_rx
            mis[layer.id] = np.log2(1.0 + rx[i] / (below + 1.0))
        out.append(mis)
    return out[0], out[1]


def _logdet_mi(rows, powers):
    """log2 det(I + H Q H^H N^-1) for one or two observation rows.

    rows is a list of (per-layer gain arrays, noise variance); powers the
    per-layer transmit powers.  With a single row this reduces to the scalar
    SINR formula.
    """
    g1, n1 = rows[0]
    a11 = sum(p * np.abs(g) ** 2 for g, p in zip(g1, powers)) / n1
    if len(rows) == 1:
        return np.log2(1.0 + a11)
    g2, n2 = rows[1]
    a22 = sum(p * np.abs(g) ** 2 for g, p in zip(g2, powers)) / n2
    a12 = sum(p * g * np.conj(h) for g, h, p in zip(g1, g2, powers)) / np.sqrt(n1 * n2)
    det = (1.0 + a11) * (1.0 + a22) - np.abs(a12) ** 2
    return np.log2(np.maximum(det, 1.0))


def _genie_mi(rows, powers, i):
    """Rate of layer i when the other layers of its group are known: MRC of
    all observation rows against noise only."""
    snr = sum(np.abs(g[i]) ** 2 / n for g, n in rows) * powers[i]
    return np.log2(1.0 + snr)


class _SlotEval:
    """Per-slot channel draw digested into gains, powers and common MIs."""

    __slots__ = ("slot", "gain1", "gain2", "mi1", "mi2")

    def __init__(self, slot: SlotPlan, ch: ChannelRealization, p: float):
        self.slot = slot
        self.gain1, self.gain2 = _gains_for_slot(slot, ch)
        self.mi1, self.mi2 = _common_mis(slot, self.gain1, self.gain2, p)


@dataclass(frozen=True, eq=False)
class _LinkInfo:
    link: QuantizationLink
    delivered: float
    quant_var: float
    effective_var: float


def _source_group(plan: SchemePlan, link: QuantizationLink) -> list[SymbolLayer]:
    owner = OWNER_USER2 if link.observer == OWNER_USER1 else OWNER_USER1
    return plan.slot(link.source_slot).fresh(owner)


def _quant_var(plan: SchemePlan, link: QuantizationLink, p: float) -> float:
    """Rate-distortion residual variance of the quantizer itself.

    The source interference is received with power ~ P**e_src; describing it
    with quant_prelog * log2(P) bits leaves distortion P**(e_src - prelog),
    exactly 1 for a correctly provisioned link.
    """
    alpha = plan.quality.alpha1 if link.observer == OWNER_USER1 else plan.quality.alpha2
    e_src = max(l.power_exponent for l in _source_group(plan, link)) - alpha
    return p ** (e_src - link.quant_prelog)


def _resolve_links(plan: SchemePlan, evals: dict[int, _SlotEval], p: float):
    """Delivered rates and effective residual variances, one entry per link.

    A shortfall of the carrying common layer's delivered MI below the
    quantization-rate demand coarsens the description the receivers get:
    every missing bit doubles the residual variance.
    """
    log2p = math.log2(p)
    info: dict[tuple[int, str], _LinkInfo] = {}
    for link in plan.links:
        carrier_slot, _ = plan.find_layer(link.retransmit_layer)
        ev = evals[carrier_slot.index]
        delivered = min(
            float(np.mean(ev.mi1[link.retransmit_layer])),
            float(np.mean(ev.mi2[link.retransmit_layer])),
        )
        quant_var = _quant_var(plan, link, p)
        shortfall = max(0.0, link.quant_prelog * log2p - delivered)
        info[(link.source_slot, link.observer)] = _LinkInfo(
            link=link,
            delivered=delivered,
            quant_var=quant_var,
            effective_var=quant_var * 2.0 ** shortfall,
        )
    return info


def _fresh_group_rates(ev: _SlotEval, link_info, p: float, owner: str):
    """Joint rate and per-layer split of one user's fresh layers in a slot.

    Returns None when the user has no fresh layers here.  The direct
    observation's noise is 1 + the residual of the linked own-interference,
    or the other user's layers at their true leakage powers when nothing
    was quantized; the side observation (when the group's image at the
    other user is linked) carries only the quantization error.
    """
    slot = ev.slot
    layers = slot.fresh(owner)
    if not layers:
        return None
    if owner == OWNER_USER1:
        gains_direct, gains_cross, other = ev.gain1, ev.gain2, OWNER_USER2
    else:
        gains_direct, gains_cross, other = ev.gain2, ev.gain1, OWNER_USER1

    powers = [l.power(p) for l in layers]
    own_link = link_info.get((slot.index, owner))
    if own_link is not None:
        n_direct = 1.0 + own_link.effective_var
    else:
        leak = sum(np.abs(gains_direct[l.id]) ** 2 * l.power(p) for l in slot.fresh(other))
        n_direct = 1.0 + leak
    rows = [([gains_direct[l.id] for l in layers], n_direct)]

    record_link = link_info.get((slot.index, other))
    if record_link is not None:
        rows.append(([gains_cross[l.id] for l in layers], record_link.effective_var))

    joint = _logdet_mi(rows, powers)
    if len(layers) == 1:
        return layers, joint, [joint]
    genie = [_genie_mi(rows, powers, i) for i in range(len(layers))]
    total = sum(genie)
    shares = [np.where(total > 0.0, joint * g / np.where(total > 0.0, total, 1.0), 0.0) for g in genie]
    return layers, joint, shares


def evaluate_plan(plan: SchemePlan, snr: SnrPoint, n_trials: int, seed: int) -> RateLedger:
    """Measure every layer's Gaussian MI rate over n_trials channel draws.

    Raises PlanValidationError when the plan has validation diagnostics and
    ValueError on a quality mismatch.  Deterministic for a given
    (seed, n_trials, snr): channel streams are keyed by grid point and slot
    index, trial i reading row i of each draw.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if snr.quality != plan.quality:
        raise ValueError("SNR point and plan disagree on CSIT quality")
    diags = validate_plan(plan)
    if diags:
        raise PlanValidationError("; ".join(diags))

    p = snr.p
    pkey = _p_key(snr)
    evals: dict[int, _SlotEval] = {}
    for slot in plan.all_slots():
        rng = _stream(seed, _TAG_CHANNEL, pkey, slot.index)
        ch = sample_channel(snr, rng, size=n_trials)
        evals[slot.index] = _SlotEval(slot, ch, p)

    link_info = _resolve_links(plan, evals, p)

    per_symbol: dict[str, float] = {}
    totals = {OWNER_USER1: np.zeros(n_trials), OWNER_USER2: np.zeros(n_trials)}

    log2p = math.log2(p)
    for slot in plan.all_slots():
        ev = evals[slot.index]
        for layer in slot.commons(p):
            per_trial = np.minimum(ev.mi1[layer.id], ev.mi2[layer.id])
            if layer.owner == OWNER_COMMON:
                # retransmission overhead, no user bits; the usable rate is
                # capped by the quantization bits the layer actually carries
                per_symbol[layer.id] = min(float(np.mean(per_trial)), layer.encoding_prelog * log2p)
            else:
                totals[layer.owner] += per_trial
                per_symbol[layer.id] = float(np.mean(per_trial))
        for owner in (OWNER_USER1, OWNER_USER2):
            group = _fresh_group_rates(ev, link_info, p, owner)
            if group is None:
                continue
            layers, joint, shares = group
            totals[owner] += joint
            for layer, share in zip(layers, shares):
                per_symbol[layer.id] = float(np.mean(share))

    r1, r2 = totals[OWNER_USER1], totals[OWNER_USER2]

    def _se(x):
        return float(np.std(x, ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0

    return RateLedger(
        per_symbol_rate=per_symbol,
        user_rate=(float(np.mean(r1)), float(np.mean(r2))),
        user_rate_stderr=(_se(r1), _se(r2)),
        channel_uses=plan.channel_uses(),
        snr=snr,
        n_trials=n_trials,
        seed=seed,
        link_delivered={li.link.interference_id: li.delivered for li in link_info.values()},
        link_noise={li.link.interference_id: li.effective_var for li in link_info.values()},
    )


def estimate_dof(plan: SchemePlan, p_grid: list[SnrPoint], n_trials: int, seed: int) -> DofEstimate:
    """Fit the per-user rate slopes against log2(P) over a power grid.

    Requires at least 3 strictly increasing points spanning 40 dB; the fit
    uses the top half of the grid (at least two points) to suppress the
    O(1) offsets that bias small-P slopes.  The slope standard error
    propagates the per-point Monte-Carlo errors through the least-squares
    weights.  Tiny negative fitted slopes are floored at 0 (pre-logs are
    nonnegative; the raw rates stay available in points).
    """
    if len(p_grid) < 3:
        raise ValueError("p_grid needs at least 3 points")
    ps = [s.p for s in p_grid]
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise ValueError("p_grid must be strictly increasing")
    if 10.0 * math.log10(ps[-1] / ps[0]) < 40.0 - 1e-9:
        raise ValueError("p_grid must span at least 40 dB")
    for s in p_grid:
        if s.quality != plan.quality:
            raise ValueError("p_grid quality mismatch with plan")

    points, stderrs = [], []
    for snr in p_grid:
        ledger = evaluate_plan(plan, snr, n_trials, seed)
        uses = ledger.channel_uses
        points.append((snr.log2p, ledger.user_rate[0] / uses, ledger.user_rate[1] / uses))
        stderrs.append((ledger.user_rate_stderr[0] / uses, ledger.user_rate_stderr[1] / uses))

    k = max(2, math.ceil(len(points) / 2))
    x = np.array([pt[0] for pt in points[-k:]])
    xbar = x.mean()
    sxx = float(((x - xbar) ** 2).sum())
    weights = (x - xbar) / sxx

    slopes, errs = [], []
    for user in (1, 2):
        y = np.array([pt[user] for pt in points[-k:]])
        se = np.array([e[user - 1] for e in stderrs[-k:]])
        slopes.append(float((weights * y).sum()))
        errs.append(float(np.sqrt((weights ** 2 * se ** 2).sum())))

    return DofEstimate(
        points=tuple(points),
        point_stderr=tuple(stderrs),
        slope=DofPoint(max(slopes[0], 0.0), max(slopes[1], 0.0)),
        stderr=(errs[0], errs[1]),
    )


def residual_power_probe(plan: SchemePlan, snr: SnrPoint, n_trials: int, seed: int) -> dict[str, float]:
    """Mean residual power |eta - eta_hat|^2 at each subtraction point.

    For every quantization link this draws the source symbols and channel,
    forms the overheard interference and its quantized reconstruction, and
    averages the residual.  A well-provisioned link leaves the constructed
    unit-variance quantization error (mean 1, flat in P); a link whose
    quantization pre-log undershoots the interference's received-power
    exponent by x leaves a residual growing as P**x.

    Diagnostic tool: runs on plans that fail validation (that is the point
    of probing a deliberately mis-specified link).
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    p = snr.p
    pkey = _p_key(snr)
    out: dict[str, float] = {}
    for i, link in enumerate(plan.links):
        rng = _stream(seed, _TAG_PROBE, pkey, link.source_slot, i)
        slot = plan.slot(link.source_slot)
        ch = sample_channel(snr, rng, size=n_trials)
        gain1, gain2 = _gains_for_slot(slot, ch)
        gains = gain1 if link.observer == OWNER_USER1 else gain2
        source = _source_group(plan, link)
        scale = math.sqrt(0.5)
        eta = sum(
            gains[l.id] * math.sqrt(l.power(p))
            * scale * (rng.standard_normal(n_trials) + 1j * rng.standard_normal(n_trials))
            for l in source
        )
        var = _quant_var(plan, link, p)
        err = math.sqrt(var) * scale * (rng.standard_normal(n_trials) + 1j * rng.standard_normal(n_trials))
        q = QuantizedInterference(link=link, clean_value=eta, quant_error=err)
        out[link.interference_id] = float(np.mean(np.abs(q.clean_value - q.reconstructed) ** 2))
    return out


# ---------------------------------------------------------------------------
# single-layer rate formulas (the building blocks the evaluator composes)
# ---------------------------------------------------------------------------


def rate_common_layer(plan_slot: SlotPlan, layer: SymbolLayer, ch: ChannelRealization, snr: SnrPoint):
    """Both users' SIC mutual informations of one first-antenna layer.

    The deliverable rate of the layer is the minimum of the two (its bits
    must decode at both receivers).
    """
    if layer not in plan_slot.layers:
        raise ValueError(f"layer {layer.id!r} is not part of slot {plan_slot.index}")
    gain1, gain2 = _gains_for_slot(plan_slot, ch)
    mi1, mi2 = _common_mis(plan_slot, gain1, gain2, snr.p)
    return mi1[layer.id], mi2[layer.id]


def rate_zf_symbol(u_layer: SymbolLayer, ch: ChannelRealization, snr: SnrPoint, residual_power=0.0):
    """Rate of a single zero-forced symbol at its intended user.

    log2(1 + |gain|^2 P_layer / (residual_power + 1)) where residual_power
    bundles whatever interference was not removed (quantization residue,
    below-noise leakage at its true finite-P power).
    """
    user = 1 if u_layer.owner == OWNER_USER1 else 2
    h = ch.h_true if user == 1 else ch.g_true
    vecs = {
        (1, "orth"): lambda: orth_complement(ch.h_est),
        (1, "along"): lambda: unit(ch.h_est),
        (2, "orth"): lambda: orth_complement(ch.g_est),
        (2, "along"): lambda: unit(ch.g_est),
    }
    gain = _vdot(h, vecs[(u_layer.precoder.user, u_layer.precoder.kind)]())
    return np.log2(1.0 + np.abs(gain) ** 2 * u_layer.power(snr.p) / (residual_power + 1.0))


def rate_joint_vector(v_layers, ch: ChannelRealization, snr: SnrPoint, direct_noise=1.0, side_noise=1.0):
    """Joint rate of a two-symbol vector from direct + quantized-record rows.

    The owner's direct observation (noise direct_noise) is stacked with the
    overheard image reconstructed at the other user (noise side_noise, the
    quantization error), and the rate is log2 det(I + H Q H^H N^-1).
    """
    v_layers = list(v_layers)
    if not v_layers:
        raise ValueError("need at least one layer")
    owner = v_layers[0].owner
    direct, cross = (ch.g_true, ch.h_true) if owner == OWNER_USER2 else (ch.h_true, ch.g_true)
    vecs = {
        (1, "orth"): orth_complement(ch.h_est),
        (1, "along"): unit(ch.h_est),
        (2, "orth"): orth_complement(ch.g_est),
        (2, "along"): unit(ch.g_est),
    }
    powers = [l.power(snr.p) for l in v_layers]
    g_direct = [_vdot(direct, vecs[(l.precoder.user, l.precoder.kind)]) for l in v_layers]
    g_cross = [_vdot(cross, vecs[(l.precoder.user, l.precoder.kind)]) for l in v_layers]
    rows = [(g_direct, direct_noise), (g_cross, side_noise)]
    return _logdet_mi(rows, powers)
