"""Declarative multi-slot transmission plans and the five scheme presets.

A plan is a list of slots; each slot stacks layers (one symbol or one
retransmitted quantized-interference message) with a precoder, a power of
the form  coef * P**exp - sub_coef * P**sub_exp  and an encoding pre-log.
Quantization links tie an overheard interference (the image of one user's
symbols at the other user's antenna) to the later common layer that
multicasts its quantized bits.

Preset catalogue (selected by CSIT quality (alpha1, alpha2), Delta = gap):

  ges12-asym   three-slot baseline designed for equal qualities, run with
               unequal ones; slot-3 symbol of user 1 is interference-limited
               and user 2 gives up Delta/3 DoF.
  case-i       two-slot cycle achieving ((1+alpha1)/2, 1); requires
               2*alpha2 - alpha1 >= 1.
  case-ii      three-slot cycle achieving the max-sum intersection point
               ((2+2*alpha1-alpha2)/3, (2+2*alpha2-alpha1)/3); requires
               2*alpha2 - alpha1 < 1.
  case-ii-alt  case-i flow with user 1's big-slot symbol turned down to
               P**alpha2, achieving (alpha2, 1); requires 2*alpha2-alpha1 < 1.
  sc-zf        single-slot superposition + zero-forcing, achieving
               (1, alpha1).

Layers whose encoding pre-log evaluates to <= 0 at the given quality are
dropped, together with any quantization link whose rate vanishes; the rate
accounting is unchanged by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .geometry import CsitQuality, DofPoint, contains, dof_region

__all__ = [
    "OWNER_USER1",
    "OWNER_USER2",
    "OWNER_COMMON",
    "PrecoderSpec",
    "orth_to",
    "along",
    "first_antenna",
    "SymbolLayer",
    "QuantizationLink",
    "SlotPlan",
    "SchemePlan",
    "SchemeConditionError",
    "build_ges12_asym",
    "build_case_i",
    "build_case_ii",
    "build_case_ii_alt",
    "build_sc_zf",
    "build_preset",
    "PRESET_NAMES",
    "validate_plan",
    "plan_as_dict",
]

OWNER_USER1 = "user1"
OWNER_USER2 = "user2"
OWNER_COMMON = "common"

_PRELOG_EPS = 1e-12


class SchemeConditionError(ValueError):
    """A preset was requested outside its quality-pair validity condition."""


@dataclass(frozen=True)
class PrecoderSpec:
    """Direction a layer is transmitted on.

    kind "orth"/"along" target the named user's estimated channel (its unit
    orthogonal complement / the unit estimate itself); "first_antenna" puts
    the layer on antenna 1 only, which is how common messages are stacked.
    """

    kind: str
    user: int | None = None

    def __post_init__(self):
        if self.kind not in ("orth", "along", "first_antenna"):
            raise ValueError(f"unknown precoder kind {self.kind!r}")
        if self.kind == "first_antenna":
            if self.user is not None:
                raise ValueError("first_antenna precoder takes no user")
        elif self.user not in (1, 2):
            raise ValueError("precoder user must be 1 or 2")


def orth_to(user: int) -> PrecoderSpec:
    return PrecoderSpec("orth", user)


def along(user: int) -> PrecoderSpec:
    return PrecoderSpec("along", user)


def first_antenna() -> PrecoderSpec:
    return PrecoderSpec("first_antenna")


@dataclass(frozen=True)
class SymbolLayer:
    """One stacked signal component of a slot.

    Power at transmit SNR P is

        max(power_coefficient * P**power_exponent
            - power_sub_coefficient * P**power_sub_exponent, 0)

    which covers both the plain coef*P**exp allocations and the
    "P - P**s"-style differences used for the top layers.
    encoding_prelog is the layer's code rate divided by log2(P).
    """

    id: str
    owner: str
    precoder: PrecoderSpec
    power_exponent: float
    power_coefficient: float
    encoding_prelog: float
    power_sub_coefficient: float = 0.0
    power_sub_exponent: float = 0.0

    def __post_init__(self):
        if self.owner not in (OWNER_USER1, OWNER_USER2, OWNER_COMMON):
            raise ValueError(f"unknown owner {self.owner!r}")
        if self.power_coefficient <= 0.0:
            raise ValueError("power coefficient must be positive")

    def power(self, p: float) -> float:
        """Allocated power at transmit SNR p (floored at 0)."""
        value = self.power_coefficient * p ** self.power_exponent
        if self.power_sub_coefficient:
            value -= self.power_sub_coefficient * p ** self.power_sub_exponent
        return max(value, 0.0)


@dataclass(frozen=True)
class QuantizationLink:
    """Ties an overheard interference to the common layer retransmitting it.

    observer is the user at whose antenna the interference was received;
    quant_prelog is the quantization rate divided by log2(P), chosen equal
    to the interference's received-power exponent so the quantization error
    lands at the unit noise floor.
    """

    source_slot: int
    observer: str
    interference_id: str
    quant_prelog: float
    retransmit_layer: str

    def __post_init__(self):
        if self.observer not in (OWNER_USER1, OWNER_USER2):
            raise ValueError("observer must be user1 or user2")


@dataclass(frozen=True)
class SlotPlan:
    """One channel use: an ordered stack of layers."""

    index: int
    layers: tuple[SymbolLayer, ...]

    def commons(self, p: float) -> list[SymbolLayer]:
        """First-antenna layers in SIC decode order (strongest first)."""
        sic = [l for l in self.layers if l.precoder.kind == "first_antenna"]
        return sorted(sic, key=lambda l: l.power(p), reverse=True)

    def fresh(self, owner: str) -> list[SymbolLayer]:
        """Zero-forcing / vector layers of one user (first-antenna excluded)."""
        return [l for l in self.layers if l.owner == owner and l.precoder.kind != "first_antenna"]


@dataclass(frozen=True)
class SchemePlan:
    """A fully materialized transmission plan.

    prologue_slots holds the lead-in slots plus the terminating
    boundary slot that flushes the last cycle's retransmissions;
    cycle_slots holds the n_cycles repetitions of the cycle pattern.
    Channel-use accounting is the virtual one: the prologue counts
    prologue_channel_uses and each cycle cycle_channel_uses, fractional
    because retransmission layers only occupy part of a slot.
    """

    name: str
    quality: CsitQuality
    prologue_slots: tuple[SlotPlan, ...]
    cycle_slots: tuple[SlotPlan, ...]
    links: tuple[QuantizationLink, ...]
    predicted_dof: DofPoint
    prologue_channel_uses: float
    cycle_channel_uses: float
    n_cycles: int

    def all_slots(self) -> list[SlotPlan]:
        return sorted(self.prologue_slots + self.cycle_slots, key=lambda s: s.index)

    def channel_uses(self) -> float:
        return self.prologue_channel_uses + self.n_cycles * self.cycle_channel_uses

    def slot(self, index: int) -> SlotPlan:
        for s in self.all_slots():
            if s.index == index:
                return s
        raise KeyError(f"no slot with index {index}")

    def find_layer(self, layer_id: str) -> tuple[SlotPlan, SymbolLayer]:
        for s in self.all_slots():
            for layer in s.layers:
                if layer.id == layer_id:
                    return s, layer
        raise KeyError(f"no layer with id {layer_id!r}")

    def link_for(self, slot_index: int, observer: str) -> QuantizationLink | None:
        for link in self.links:
            if link.source_slot == slot_index and link.observer == observer:
                return link
        return None


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _layer(layer_id, owner, precoder, coef, exp, prelog, sub=(0.0, 0.0)) -> SymbolLayer | None:
    """Build a layer, or None when its encoding pre-log vanishes."""
    if prelog <= _PRELOG_EPS:
        return None
    return SymbolLayer(
        id=layer_id,
        owner=owner,
        precoder=precoder,
        power_exponent=exp,
        power_coefficient=coef,
        encoding_prelog=prelog,
        power_sub_coefficient=sub[0],
        power_sub_exponent=sub[1],
    )


def _kept(layers) -> tuple[SymbolLayer, ...]:
    return tuple(l for l in layers if l is not None)


def _source_exponent(layers: list[SymbolLayer], observer: str, quality: CsitQuality) -> float | None:
    """Received-power exponent of the interference a group leaks at `observer`.

    User 1 overhears user 2's layers through the orth-precoder attenuation
    P**(-alpha1); user 2 mirrors with alpha2.  The exponent is the max layer
    power exponent minus that attenuation.
    """
    if not layers:
        return None
    alpha = quality.alpha1 if observer == OWNER_USER1 else quality.alpha2
    return max(l.power_exponent for l in layers) - alpha


def _link_and_carrier(slot_index, observer, quality, source_layers, carrier_id):
    """Quantization link for a slot's overheard interference, or None.

    The quantization rate is pinned to the source's received-power exponent;
    a vanishing rate means the interference sits at the noise floor and
    nothing needs to be retransmitted.
    """
    exponent = _source_exponent(source_layers, observer, quality)
    if exponent is None or exponent <= _PRELOG_EPS:
        return None
    tag = "1" if observer == OWNER_USER1 else "2"
    link = QuantizationLink(
        source_slot=slot_index,
        observer=observer,
        interference_id=f"eta_{slot_index}_{tag}",
        quant_prelog=exponent,
        retransmit_layer=carrier_id,
    )
    return link


def _prologue(quality: CsitQuality):
    """Slots 1-2 shared by ges12-asym, case-i and case-ii, plus their links.

    Slot 1 sends a two-symbol vector per user (top symbols zero-forced, the
    extra symbols along the estimates); both overheard interferences are
    quantized, one multicast in slot 2 and one in slot 3.  Slot 2 carries
    that first common message over single zero-forced symbols at P**alpha1.
    Coefficients follow the generic power template (1/2 and 1/4 splits) so
    each slot's total power meets the transmit constraint.
    """
    a1, a2 = quality.alpha1, quality.alpha2
    slot1_u = _kept([
        _layer("u1_1", OWNER_USER1, orth_to(2), 0.5, 1.0, 1.0, sub=(0.25, 1.0 - a2)),
        _layer("u1_2", OWNER_USER1, along(2), 0.25, 1.0 - a2, 1.0 - a2),
    ])
    slot1_v = _kept([
        _layer("v1_1", OWNER_USER2, orth_to(1), 0.5, 1.0, 1.0, sub=(0.25, 1.0 - a1)),
        _layer("v1_2", OWNER_USER2, along(1), 0.25, 1.0 - a1, 1.0 - a1),
    ])
    slot1 = SlotPlan(1, slot1_u + slot1_v)

    links = []
    link11 = _link_and_carrier(1, OWNER_USER1, quality, list(slot1_v), "eta_hat_1_1")
    link12 = _link_and_carrier(1, OWNER_USER2, quality, list(slot1_u), "eta_hat_1_2")

    slot2_layers = []
    if link11 is not None:
        links.append(link11)
        slot2_layers.append(_layer("eta_hat_1_1", OWNER_COMMON, first_antenna(), 1.0, 1.0, link11.quant_prelog))
    slot2_layers += [
        _layer("u2", OWNER_USER1, orth_to(2), 0.5, a1, a1),
        _layer("v2", OWNER_USER2, orth_to(1), 0.5, a1, a1),
    ]
    slot2 = SlotPlan(2, _kept(slot2_layers))
    if link12 is not None:
        links.append(link12)
    return slot1, slot2, link12, links


def _slot3_fresh(idx: int, quality: CsitQuality):
    """Fresh layers of the small-power cycle slot: u at P**alpha2/2, the
    user-2 vector split as (P**alpha2/2 - P**Delta/4, P**Delta/4)."""
    a1, a2, d = quality.alpha1, quality.alpha2, quality.delta()
    u = _kept([_layer(f"u{idx}", OWNER_USER1, orth_to(2), 0.5, a2, a2)])
    v = _kept([
        _layer(f"v{idx}_1", OWNER_USER2, orth_to(1), 0.5, a2, a2, sub=(0.25, d)),
        _layer(f"v{idx}_2", OWNER_USER2, along(1), 0.25, d, d),
    ])
    return u, v


def build_ges12_asym(quality: CsitQuality) -> SchemePlan:
    """Three-slot baseline: both interference records multicast sequentially.

    Slot 3 is where the asymmetry bites: user 2's fresh symbol is received
    by user 1 with power P**Delta above the noise floor and is never
    retransmitted, so user 1's slot-3 symbol is encoded at pre-log alpha1
    only.  Predicted DoF ((2+2*alpha1-alpha2)/3, (2+alpha2)/3), i.e. user 2
    sits Delta/3 below the region's max-sum corner.
    """
    a1, a2 = quality.alpha1, quality.alpha2
    slot1, slot2, link12, links = _prologue(quality)

    slot3_layers = []
    if link12 is not None:
        slot3_layers.append(_layer("eta_hat_1_2", OWNER_COMMON, first_antenna(), 1.0, 1.0, link12.quant_prelog))
    slot3_layers += [
        _layer("u3", OWNER_USER1, orth_to(2), 0.5, a2, a1),  # interference-limited rate
        _layer("v3", OWNER_USER2, orth_to(1), 0.5, a2, a2),
    ]
    slot3 = SlotPlan(3, _kept(slot3_layers))

    predicted = DofPoint((2.0 + 2.0 * a1 - a2) / 3.0, (2.0 + a2) / 3.0)
    return SchemePlan(
        name="ges12-asym",
        quality=quality,
        prologue_slots=(slot1, slot2, slot3),
        cycle_slots=(),
        links=tuple(links),
        predicted_dof=predicted,
        prologue_channel_uses=3.0,
        cycle_channel_uses=0.0,
        n_cycles=0,
    )


def _cycled_plan(name, quality, n_cycles, slots_per_cycle, make_cycle, make_terminator, predicted, cycle_uses):
    """Common assembly for the cycled presets.

    make_cycle(k, first_index) returns (slots, links) of cycle k; the
    carriers referenced by links landing after the cycle are created either
    by the next cycle or by make_terminator(links_pending).
    """
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    slot1, slot2, link12, links = _prologue(quality)
    cycle_slots: list[SlotPlan] = []
    pending = [link12] if link12 is not None else []

    for k in range(n_cycles):
        first = 3 + slots_per_cycle * k
        slots, new_links, pending = make_cycle(k, first, pending)
        cycle_slots += slots
        links += new_links

    terminator = make_terminator(3 + slots_per_cycle * n_cycles, pending)
    prologue = (slot1, slot2) + ((terminator,) if terminator is not None else ())

    a2 = quality.alpha2
    return SchemePlan(
        name=name,
        quality=quality,
        prologue_slots=prologue,
        cycle_slots=tuple(cycle_slots),
        links=tuple(links),
        predicted_dof=predicted,
        prologue_channel_uses=3.0 - a2,
        cycle_channel_uses=cycle_uses,
        n_cycles=n_cycles,
    )


def _carrier_layers_single(carrier_links, a2):
    """Top-power common layer(s) of a two-slot-cycle A slot / terminator."""
    return _kept([
        _layer(link.retransmit_layer, OWNER_COMMON, first_antenna(), 1.0, 1.0, link.quant_prelog, sub=(1.0, a2))
        for link in carrier_links
    ])


def _build_two_slot_cycle(name, quality, n_cycles, u_big_exponent):
    """Shared skeleton of case-i and case-ii-alt (two-slot cycles A, B).

    A slots use the small-power pattern; B slots send user 1's symbol at
    P**u_big_exponent / 2 and user 2's vector split as
    (P**(1-Delta)/2 - P**(1-alpha2)/4, P**(1-alpha2)/4).  Each A slot's
    overheard interference is multicast inside the same cycle's B slot; each
    B slot's inside the next A slot (or the terminator).
    """
    a1, a2, d = quality.alpha1, quality.alpha2, quality.delta()

    def make_cycle(k, first, pending):
        a_idx, b_idx = first, first + 1
        u_a, v_a = _slot3_fresh(a_idx, quality)
        link_a = _link_and_carrier(a_idx, OWNER_USER1, quality, list(v_a), f"eta_hat_{a_idx}_1")
        slot_a = SlotPlan(a_idx, _carrier_layers_single(pending, a2) + u_a + v_a)

        u_b = _kept([_layer(f"u{b_idx}", OWNER_USER1, orth_to(2), 0.5, u_big_exponent, u_big_exponent)])
        v_b = _kept([
            _layer(f"v{b_idx}_1", OWNER_USER2, orth_to(1), 0.5, 1.0 - d, 1.0 - d, sub=(0.25, 1.0 - a2)),
            _layer(f"v{b_idx}_2", OWNER_USER2, along(1), 0.25, 1.0 - a2, 1.0 - a2),
        ])
        b_commons = _kept([
            _layer(link_a.retransmit_layer, OWNER_COMMON, first_antenna(), 1.0, 1.0, link_a.quant_prelog, sub=(1.0, 1.0 - d))
        ]) if link_a is not None else ()
        slot_b = SlotPlan(b_idx, b_commons + u_b + v_b)

        link_b = _link_and_carrier(b_idx, OWNER_USER1, quality, list(v_b), f"eta_hat_{b_idx}_1")
        new_links = [l for l in (link_a, link_b) if l is not None]
        return [slot_a, slot_b], new_links, ([link_b] if link_b is not None else [])

    def make_terminator(index, pending):
        layers = _carrier_layers_single(pending, a2)
        if not layers:
            return None
        return SlotPlan(index, layers)

    predicted = DofPoint((1.0 + a1) / 2.0, 1.0) if name == "case-i" else DofPoint(a2, 1.0)
    return _cycled_plan(name, quality, n_cycles, 2, make_cycle, make_terminator, predicted, 2.0)


def build_case_i(quality: CsitQuality, n_cycles: int) -> SchemePlan:
    """Two-slot cycle achieving ((1+alpha1)/2, 1); needs 2*alpha2-alpha1 >= 1.

    Per cycle user 1 sends one symbol per slot (pre-logs alpha2 and 1-Delta)
    and user 2 a two-symbol vector per slot (pre-log sums alpha2+Delta and
    2-Delta-alpha2); only user 1 overhears interference, quantized at
    pre-log Delta resp. 1-alpha2 and multicast in the following slot.
    """
    if 2.0 * quality.alpha2 - quality.alpha1 < 1.0:
        raise SchemeConditionError(
            "case-i requires 2*alpha2 - alpha1 >= 1 "
            f"(got {2.0 * quality.alpha2 - quality.alpha1:.3g}); use case-ii"
        )
    return _build_two_slot_cycle("case-i", quality, n_cycles, 1.0 - quality.delta())


def build_case_ii_alt(quality: CsitQuality, n_cycles: int) -> SchemePlan:
    """case-i flow with user 1's big symbol turned down to P**alpha2.

    Keeping the channel-use accounting of the two-slot cycle while capping
    user 1 at pre-log alpha2 per slot lands on the corner (alpha2, 1).
    Valid where the max-sum intersection point is interior, i.e.
    2*alpha2 - alpha1 < 1.
    """
    if 2.0 * quality.alpha2 - quality.alpha1 >= 1.0:
        raise SchemeConditionError(
            "case-ii-alt requires 2*alpha2 - alpha1 < 1 "
            f"(got {2.0 * quality.alpha2 - quality.alpha1:.3g}); use case-i"
        )
    return _build_two_slot_cycle("case-ii-alt", quality, n_cycles, quality.alpha2)


def build_case_ii(quality: CsitQuality, n_cycles: int) -> SchemePlan:
    """Three-slot cycle achieving the max-sum corner; needs 2*alpha2-alpha1 < 1.

    Cycle slots A, C use the small-power pattern; the middle slot B sends a
    two-symbol vector to BOTH users, so both overhear interference there.
    B's user-1 record is multicast in C; B's user-2 record and C's user-1
    record are stacked in the next cycle's A slot over disjoint power
    intervals [P**(Delta+alpha2), P] and [P**alpha2, P**(Delta+alpha2)],
    decoded in that order.
    """
    a1, a2, d = quality.alpha1, quality.alpha2, quality.delta()
    if 2.0 * a2 - a1 >= 1.0:
        raise SchemeConditionError(
            f"case-ii requires 2*alpha2 - alpha1 < 1 (got {2.0 * a2 - a1:.3g}); use case-i"
        )

    def stacked_carriers(pending):
        # pending = [B-slot user2 link, C-slot user1 link], either optional.
        layers = []
        for link in pending:
            if link.observer == OWNER_USER2:
                layers.append(_layer(link.retransmit_layer, OWNER_COMMON, first_antenna(),
                                     1.0, 1.0, link.quant_prelog, sub=(1.0, d + a2)))
            else:
                layers.append(_layer(link.retransmit_layer, OWNER_COMMON, first_antenna(),
                                     1.0, d + a2, link.quant_prelog, sub=(1.0, a2)))
        return _kept(layers)

    def make_cycle(k, first, pending):
        a_idx, b_idx, c_idx = first, first + 1, first + 2

        u_a, v_a = _slot3_fresh(a_idx, quality)
        if k == 0:
            commons_a = _carrier_layers_single(pending, a2)
        else:
            commons_a = stacked_carriers(pending)
        slot_a = SlotPlan(a_idx, commons_a + u_a + v_a)
        link_a = _link_and_carrier(a_idx, OWNER_USER1, quality, list(v_a), f"eta_hat_{a_idx}_1")

        u_b = _kept([
            _layer(f"u{b_idx}_1", OWNER_USER1, orth_to(2), 0.5, 1.0 - d, 1.0 - d, sub=(0.25, 1.0 - d - a2)),
            _layer(f"u{b_idx}_2", OWNER_USER1, along(2), 0.25, 1.0 - d - a2, 1.0 - d - a2),
        ])
        v_b = _kept([
            _layer(f"v{b_idx}_1", OWNER_USER2, orth_to(1), 0.5, 1.0 - d, 1.0 - d, sub=(0.25, 1.0 - a2)),
            _layer(f"v{b_idx}_2", OWNER_USER2, along(1), 0.25, 1.0 - a2, 1.0 - a2),
        ])
        b_commons = _kept([
            _layer(link_a.retransmit_layer, OWNER_COMMON, first_antenna(), 1.0, 1.0, link_a.quant_prelog, sub=(1.0, 1.0 - d))
        ]) if link_a is not None else ()
        slot_b = SlotPlan(b_idx, b_commons + u_b + v_b)
        link_b1 = _link_and_carrier(b_idx, OWNER_USER1, quality, list(v_b), f"eta_hat_{b_idx}_1")
        link_b2 = _link_and_carrier(b_idx, OWNER_USER2, quality, list(u_b), f"eta_hat_{b_idx}_2")

        u_c, v_c = _slot3_fresh(c_idx, quality)
        c_commons = _kept([
            _layer(link_b1.retransmit_layer, OWNER_COMMON, first_antenna(), 1.0, 1.0, link_b1.quant_prelog, sub=(1.0, a2))
        ]) if link_b1 is not None else ()
        slot_c = SlotPlan(c_idx, c_commons + u_c + v_c)
        link_c = _link_and_carrier(c_idx, OWNER_USER1, quality, list(v_c), f"eta_hat_{c_idx}_1")

        new_links = [l for l in (link_a, link_b1, link_b2, link_c) if l is not None]
        pending_next = [l for l in (link_b2, link_c) if l is not None]
        return [slot_a, slot_b, slot_c], new_links, pending_next

    def make_terminator(index, pending):
        layers = stacked_carriers(pending)
        if not layers:
            return None
        return SlotPlan(index, layers)

    predicted = DofPoint((2.0 + 2.0 * a1 - a2) / 3.0, (2.0 + 2.0 * a2 - a1) / 3.0)
    return _cycled_plan("case-ii", quality, n_cycles, 3, make_cycle, make_terminator, predicted, 3.0)


def build_sc_zf(quality: CsitQuality) -> SchemePlan:
    """Single-slot superposition + zero-forcing achieving (1, alpha1).

    A user-1 message rides on top at P - P**alpha1, decoded by both
    receivers and stripped; underneath, each user gets one zero-forced
    symbol at P**alpha1 / 2.
    """
    a1 = quality.alpha1
    layers = _kept([
        _layer("x_c", OWNER_USER1, first_antenna(), 1.0, 1.0, 1.0 - a1, sub=(1.0, a1)),
        _layer("u1", OWNER_USER1, orth_to(2), 0.5, a1, a1),
        _layer("v1", OWNER_USER2, orth_to(1), 0.5, a1, a1),
    ])
    slot = SlotPlan(1, layers)
    return SchemePlan(
        name="sc-zf",
        quality=quality,
        prologue_slots=(slot,),
        cycle_slots=(),
        links=(),
        predicted_dof=DofPoint(1.0, a1),
        prologue_channel_uses=1.0,
        cycle_channel_uses=0.0,
        n_cycles=0,
    )


_BUILDERS = {
    "ges12-asym": lambda q, n: build_ges12_asym(q),
    "case-i": build_case_i,
    "case-ii": build_case_ii,
    "case-ii-alt": build_case_ii_alt,
    "sc-zf": lambda q, n: build_sc_zf(q),
}

PRESET_NAMES = tuple(_BUILDERS) + ("auto",)


def build_preset(name: str, quality: CsitQuality, n_cycles: int) -> SchemePlan:
    """Build a preset by name; "auto" picks case-i or case-ii per the
    2*alpha2 - alpha1 >= 1 condition (boundary routed to case-i)."""
    if name == "auto":
        name = "case-i" if 2.0 * quality.alpha2 - quality.alpha1 >= 1.0 else "case-ii"
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESET_NAMES)}") from None
    return builder(quality, n_cycles)


# ---------------------------------------------------------------------------
# validation and serialization
# ---------------------------------------------------------------------------

_BUDGET_TOL = 1e-9


def validate_plan(plan: SchemePlan) -> list[str]:
    """Static consistency diagnostics; an empty list means the plan is sound.

    Checks the asymptotic per-slot power budget (no exponent above 1 and
    leading coefficients summing to at most 1), pre-log sanity, duplicate
    (owner, precoder) collisions among non-common layers, link causality and
    the quantization-rate/received-power match, and that the predicted DoF
    sits inside the region polygon.
    """
    diags: list[str] = []
    slots = plan.all_slots()
    slot_index = {}
    for s in slots:
        if s.index in slot_index:
            diags.append(f"duplicate slot index {s.index}")
        slot_index[s.index] = s

    layer_home: dict[str, int] = {}
    for s in slots:
        max_exp = max((l.power_exponent for l in s.layers), default=0.0)
        if max_exp > 1.0 + _BUDGET_TOL:
            diags.append(f"power budget exceeded: slot {s.index} has exponent {max_exp:.6g} > 1")
        # net coefficient at the leading exponent; subtracted terms may land there too
        top_coef = sum(l.power_coefficient for l in s.layers
                       if abs(l.power_exponent - max_exp) <= _BUDGET_TOL)
        top_coef -= sum(l.power_sub_coefficient for l in s.layers
                        if l.power_sub_coefficient and abs(l.power_sub_exponent - max_exp) <= _BUDGET_TOL)
        if max_exp >= 1.0 - _BUDGET_TOL and top_coef > 1.0 + _BUDGET_TOL:
            diags.append(
                f"power budget exceeded: slot {s.index} leading coefficients sum to {top_coef:.6g} > 1"
            )
        seen = set()
        for l in s.layers:
            if l.id in layer_home:
                diags.append(f"duplicate layer id {l.id!r} (slots {layer_home[l.id]} and {s.index})")
            layer_home[l.id] = s.index
            if l.encoding_prelog <= _PRELOG_EPS:
                diags.append(f"layer {l.id!r} has non-positive encoding pre-log")
            if l.precoder.kind != "first_antenna":
                key = (l.owner, l.precoder.kind, l.precoder.user)
                if key in seen:
                    diags.append(f"slot {s.index}: duplicate (owner, precoder) {key}")
                seen.add(key)

    for link in plan.links:
        if link.source_slot not in slot_index:
            diags.append(f"link {link.interference_id}: source slot {link.source_slot} missing")
            continue
        if link.retransmit_layer not in layer_home:
            diags.append(f"link {link.interference_id}: carrier layer {link.retransmit_layer!r} missing")
            continue
        carrier_slot = layer_home[link.retransmit_layer]
        if carrier_slot <= link.source_slot:
            diags.append(
                f"link {link.interference_id}: causality violated "
                f"(carrier slot {carrier_slot} not after source slot {link.source_slot})"
            )
        source_owner = OWNER_USER2 if link.observer == OWNER_USER1 else OWNER_USER1
        source_layers = slot_index[link.source_slot].fresh(source_owner)
        exponent = _source_exponent(source_layers, link.observer, plan.quality)
        if exponent is None:
            diags.append(f"link {link.interference_id}: source interference missing")
        elif abs(exponent - link.quant_prelog) > 1e-9:
            diags.append(
                f"link {link.interference_id}: quantization rate mismatch "
                f"(prelog {link.quant_prelog:.6g} vs received exponent {exponent:.6g})"
            )

    region = dof_region(plan.quality)
    if not contains(region, plan.predicted_dof, tol=1e-9):
        diags.append(f"predicted DoF {plan.predicted_dof.as_tuple()} outside the region")
    return diags


def plan_as_dict(plan: SchemePlan) -> dict:
    """JSON tree mirroring the plan's fields, for inspection and goldens."""

    def layer_dict(l: SymbolLayer) -> dict:
        d = {
            "id": l.id,
            "owner": l.owner,
            "precoder": {"kind": l.precoder.kind, "user": l.precoder.user},
            "power_coefficient": l.power_coefficient,
            "power_exponent": l.power_exponent,
            "encoding_prelog": l.encoding_prelog,
        }
        if l.power_sub_coefficient:
            d["power_sub_coefficient"] = l.power_sub_coefficient
            d["power_sub_exponent"] = l.power_sub_exponent
        return d

    return {
        "name": plan.name,
        "alpha1": plan.quality.alpha1,
        "alpha2": plan.quality.alpha2,
        "n_cycles": plan.n_cycles,
        "predicted_dof": list(plan.predicted_dof.as_tuple()),
        "prologue_channel_uses": plan.prologue_channel_uses,
        "cycle_channel_uses": plan.cycle_channel_uses,
        "slots": [
            {"index": s.index, "layers": [layer_dict(l) for l in s.layers]}
            for s in plan.all_slots()
        ],
        "links": [
            {
                "source_slot": k.source_slot,
                "observer": k.observer,
                "interference_id": k.interference_id,
                "quant_prelog": k.quant_prelog,
                "retransmit_layer": k.retransmit_layer,
            }
            for k in plan.links
        ],
    }


def perturb_link_prelog(plan: SchemePlan, interference_id: str, delta: float) -> SchemePlan:
    """Copy of the plan with one link's quantization pre-log shifted.

    Diagnostic helper: a deliberately under-provisioned link leaves residual
    interference growing as P**(-delta), which the residual-power probe is
    expected to flag.
    """
    new_links = []
    found = False
    for link in plan.links:
        if link.interference_id == interference_id:
            link = replace(link, quant_prelog=link.quant_prelog + delta)
            found = True
        new_links.append(link)
    if not found:
        raise KeyError(f"no link with interference id {interference_id!r}")
    return replace(plan, links=tuple(new_links))
