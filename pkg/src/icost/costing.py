"""Turning cost-factor input plus complexity profiles into per-instance weights.

A cost factor is given as a scalar, a list or a mapping. Any entry may be an
:class:`IRScaled` multiple of the imbalance ratio, which is resolved against
the IR of whichever training partition the spec is applied to. After
resolution every minority cost is floored at 1, the weight of a majority
instance.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from . import complexity
from .complexity import DEFAULT_K, Category, MstProfile, NeighborhoodProfile
from .dataset import ratio_of
from .errors import BadArity, NonPositiveCost, OrderViolation, ProfileMismatch, ValidationError


class Mode(str, enum.Enum):
    ORIGINAL = "original"
    NEIGHBORHOOD = "neighborhood"
    MST = "mst"


class Scheme(str, enum.Enum):
    INS = "ins"
    GEN = "gen"


@dataclass(frozen=True)
class IRScaled:
    """A cost expressed as ``multiplier * IR``."""

    multiplier: float

    def resolve(self, ir: float) -> float:
        return self.multiplier * ir

    def __str__(self):
        return "IR" if self.multiplier == 1 else f"{self.multiplier!r}*IR"


Number = Union[float, IRScaled]
CostValues = Union[None, Number, Sequence[Number], Mapping[str, Number]]

INS_KEYS = ("cfb", "cfs", "cfp")
MST_KEYS = ("cfl", "cfn")
_ALIASES = {"border": "cfb", "safe": "cfs", "pure": "cfp", "linked": "cfl", "normal": "cfn"}


@dataclass(frozen=True)
class CostSpec:
    """Cost configuration.

    ``majority_linked_cost`` optionally lowers the weight of majority
    instances that share an MST edge with the minority class (MST mode only).
    """

    mode: Mode = Mode.NEIGHBORHOOD
    scheme: Scheme = Scheme.INS
    values: CostValues = None
    n_neighbors: int = DEFAULT_K
    majority_linked_cost: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(str(self.mode).lower() if not isinstance(self.mode, Mode) else self.mode))
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        v = self.values
        if isinstance(v, list):
            object.__setattr__(self, "values", tuple(v))
        elif isinstance(v, Mapping):
            object.__setattr__(self, "values", _FrozenMap(v))
        if self.n_neighbors < 1:
            raise ValidationError("n_neighbors must be >= 1")
        mlc = self.majority_linked_cost
        if mlc is not None and not (0 < mlc <= 1):
            raise ValidationError("majority_linked_cost must lie in (0, 1]")

    def describe(self) -> str:
        parts = [self.mode.value]
        if self.mode is Mode.NEIGHBORHOOD:
            parts.append(self.scheme.value)
        parts.append(format_values(self.values))
        return "/".join(parts)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "scheme": self.scheme.value,
            "values": _values_to_json(self.values),
            "n_neighbors": self.n_neighbors,
            "majority_linked_cost": self.majority_linked_cost,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CostSpec":
        return cls(
            mode=doc.get("mode", "neighborhood"),
            scheme=doc.get("scheme", doc.get("type", "ins")),
            values=_values_from_json(doc.get("values", doc.get("cost_factor"))),
            n_neighbors=int(doc.get("n_neighbors", DEFAULT_K)),
            majority_linked_cost=doc.get("majority_linked_cost"),
        )


class _FrozenMap(dict):
    # hashable read-only mapping so CostSpec stays usable as a dict key
    def __hash__(self):
        return hash(tuple(sorted((k, self[k]) for k in self)))

    def _ro(self, *a, **kw):
        raise TypeError("cost-factor mapping is read-only")

    __setitem__ = __delitem__ = update = pop = popitem = clear = setdefault = _ro


# ----------------------------------------------------------------------------
# parsing / formatting
# ----------------------------------------------------------------------------

_IR_RE = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*?\s*)?IR\s*$", re.IGNORECASE)


def parse_number(token) -> Number:
    """``"2.5"`` -> 2.5, ``"0.2*IR"`` / ``"0.2IR"`` / ``"IR"`` -> IRScaled."""
    if isinstance(token, IRScaled):
        return token
    if isinstance(token, (int, float)) and not isinstance(token, bool):
        return float(token)
    s = str(token).strip()
    m = _IR_RE.match(s)
    if m:
        return IRScaled(float(m.group(1)) if m.group(1) else 1.0)
    try:
        return float(s)
    except ValueError:
        raise ValidationError(f"cannot parse cost value {token!r}") from None


def parse_cost_factor(text: str | None) -> CostValues:
    """Parse the ``--cost-factor`` flag: a scalar, a comma list, or a JSON object."""
    if text is None:
        return None
    s = text.strip()
    if not s:
        return None
    if s.startswith("{"):
        try:
            doc = json.loads(s)
        except json.JSONDecodeError as e:
            raise ValidationError(f"bad JSON cost-factor map: {e}") from None
        return {str(k): parse_number(v) for k, v in doc.items()}
    if s.startswith("["):
        try:
            return tuple(parse_number(v) for v in json.loads(s))
        except json.JSONDecodeError as e:
            raise ValidationError(f"bad JSON cost-factor list: {e}") from None
    if "," in s:
        return tuple(parse_number(p) for p in s.split(","))
    return parse_number(s)


def _num_to_json(v):
    return str(v) if isinstance(v, IRScaled) else v


def _values_to_json(values):
    if values is None:
        return None
    if isinstance(values, Mapping):
        return {k: _num_to_json(v) for k, v in values.items()}
    if isinstance(values, (tuple, list)):
        return [_num_to_json(v) for v in values]
    return _num_to_json(values)


def _values_from_json(doc):
    if doc is None:
        return None
    if isinstance(doc, Mapping):
        return {str(k): parse_number(v) for k, v in doc.items()}
    if isinstance(doc, (list, tuple)):
        return tuple(parse_number(v) for v in doc)
    if isinstance(doc, str):
        return parse_cost_factor(doc)
    return parse_number(doc)


def format_values(values) -> str:
    if values is None:
        return "default"
    if isinstance(values, Mapping):
        return "{" + ",".join(f"{k}={v}" for k, v in values.items()) + "}"
    if isinstance(values, (tuple, list)):
        return "[" + ",".join(str(v) for v in values) + "]"
    return str(values)


# ----------------------------------------------------------------------------
# resolution
# ----------------------------------------------------------------------------

def _resolve_number(v, ir: float, what: str) -> float:
    if isinstance(v, IRScaled):
        x = v.resolve(ir)
    elif isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool):
        x = float(v)
    else:
        raise ValidationError(f"{what}: expected a number, got {v!r}")
    if not math.isfinite(x) or x <= 0:
        raise NonPositiveCost(f"{what}: cost must be positive and finite, got {x}")
    return x


def _floor(x: float) -> float:
    return max(x, 1.0)


def _is_scalar(v) -> bool:
    return isinstance(v, (int, float, IRScaled, np.floating, np.integer)) and not isinstance(v, bool)


def _named(values, keys: tuple[str, ...], ir: float) -> list[float]:
    if isinstance(values, Mapping):
        canon = {}
        for k, v in values.items():
            key = _ALIASES.get(str(k).lower(), str(k).lower())
            if key in canon:
                raise BadArity(f"cost key {k!r} given twice")
            canon[key] = v
        if set(canon) != set(keys):
            raise BadArity(f"expected keys {list(keys)}, got {sorted(values)}")
        return [_resolve_number(canon[k], ir, k) for k in keys]
    if len(values) != len(keys):
        raise BadArity(f"expected {len(keys)} cost values {list(keys)}, got {len(values)}")
    return [_resolve_number(v, ir, k) for k, v in zip(keys, values)]


def _check_ir(ir: float) -> float:
    ir = float(ir)
    if not math.isfinite(ir) or ir <= 0:
        raise ValidationError(f"imbalance ratio must be positive, got {ir}")
    return ir


def resolve_original(spec: CostSpec, ir: float) -> float:
    ir = _check_ir(ir)
    v = spec.values
    if v is None:
        return _floor(ir)
    if not _is_scalar(v):
        raise BadArity("original mode takes a single cost factor")
    return _floor(_resolve_number(v, ir, "cost-factor"))


def resolve_ins(spec: CostSpec, ir: float) -> tuple[float, float, float]:
    """Border/safe/pure costs ``(cfb, cfs, cfp)``."""
    ir = _check_ir(ir)
    v = spec.values
    if v is None:
        raw = [ir, 0.5 * ir, 0.25 * ir]
    elif _is_scalar(v):
        c = _resolve_number(v, ir, "cost-factor")
        raw = [c, 0.5 * c, 0.25 * c]
    else:
        raw = _named(v, INS_KEYS, ir)
    cfb, cfs, cfp = (_floor(x) for x in raw)
    # checked after the floor so an absolute pure cost of 1 is valid at any IR
    if not (cfb >= cfs >= cfp):
        raise OrderViolation(f"need cfb >= cfs >= cfp, got {cfb}, {cfs}, {cfp}")
    return cfb, cfs, cfp


def resolve_mst(spec: CostSpec, ir: float) -> tuple[float, float]:
    """Linked/normal costs ``(cfl, cfn)``."""
    ir = _check_ir(ir)
    v = spec.values
    if v is None:
        raw = [ir, 0.5 * ir]
    elif _is_scalar(v):
        c = _resolve_number(v, ir, "cost-factor")
        raw = [c, 0.5 * c]
    else:
        raw = _named(v, MST_KEYS, ir)
    cfl, cfn = (_floor(x) for x in raw)
    if cfl < cfn:
        raise OrderViolation(f"need cfl >= cfn, got {cfl}, {cfn}")
    return cfl, cfn


def resolve_gen(spec: CostSpec, ir: float, k: int | None = None) -> tuple[float, ...]:
    """Per-grade costs for grades 0..k.

    A scalar ``c`` (IR by default) is spread linearly, grade ``j`` getting
    ``1 + j * (c - 1) / k``. Explicit lists are not required to be monotone,
    so the top grade (all neighbours opposite, likely noise) can be damped.
    """
    ir = _check_ir(ir)
    k = spec.n_neighbors if k is None else k
    v = spec.values
    if v is None or _is_scalar(v):
        c = ir if v is None else _resolve_number(v, ir, "cost-factor")
        raw = [1.0 + j * (c - 1.0) / k for j in range(k + 1)]
    elif isinstance(v, Mapping):
        keys = tuple(f"g{j}" for j in range(k + 1))
        if set(map(str, v)) != set(keys):
            raise BadArity(f"expected keys {list(keys)}, got {sorted(map(str, v))}")
        raw = [_resolve_number(v[key], ir, key) for key in keys]
    else:
        if len(v) != k + 1:
            raise BadArity(f"gen scheme needs k+1={k + 1} grade costs, got {len(v)}")
        raw = [_resolve_number(x, ir, f"g{j}") for j, x in enumerate(v)]
    return tuple(_floor(x) for x in raw)


def resolved_costs(spec: CostSpec, ir: float) -> dict[str, float]:
    """Resolved cost table keyed by category name (for reports)."""
    if spec.mode is Mode.ORIGINAL:
        return {"minority": resolve_original(spec, ir)}
    if spec.mode is Mode.MST:
        return dict(zip(("linked", "normal"), resolve_mst(spec, ir)))
    if spec.scheme is Scheme.INS:
        return dict(zip(("border", "safe", "pure"), resolve_ins(spec, ir)))
    return {f"g{j}": c for j, c in enumerate(resolve_gen(spec, ir))}


# ----------------------------------------------------------------------------
# weights
# ----------------------------------------------------------------------------

def assign_weights(spec: CostSpec, profiles, labels, ir: float, majority_linked=None) -> np.ndarray:
    """One weight per instance; majority rows get 1, minority rows their category cost.

    ``profiles`` must cover exactly the minority rows (class 1) and is ignored
    in original mode. ``majority_linked`` is a boolean mask over all rows, only
    consulted when ``spec.majority_linked_cost`` is set.
    """
    y = np.asarray(labels)
    minority = np.flatnonzero(y == 1)
    w = np.ones(len(y), dtype=float)

    if spec.mode is Mode.ORIGINAL:
        w[minority] = resolve_original(spec, ir)
        return w

    idx = np.array([p.instance_index for p in profiles], dtype=np.int64)
    if len(idx) != len(minority) or not np.array_equal(np.sort(idx), minority):
        raise ProfileMismatch("profiles must cover exactly the minority instances")

    if spec.mode is Mode.MST:
        if profiles and not isinstance(profiles[0], MstProfile):
            raise ProfileMismatch("MST mode needs MST profiles")
        cfl, cfn = resolve_mst(spec, ir)
        w[idx] = [cfl if p.linked else cfn for p in profiles]
        if spec.majority_linked_cost is not None:
            if majority_linked is None:
                raise ValidationError("majority_linked_cost set but no linked mask given")
            mask = np.asarray(majority_linked, dtype=bool) & (y != 1)
            w[mask] = spec.majority_linked_cost
        return w

    if profiles and not isinstance(profiles[0], NeighborhoodProfile):
        raise ProfileMismatch("neighborhood mode needs neighborhood profiles")
    if spec.scheme is Scheme.INS:
        costs = dict(zip((Category.BORDER, Category.SAFE, Category.PURE), resolve_ins(spec, ir)))
        w[idx] = [costs[p.category] for p in profiles]
    else:
        grades = resolve_gen(spec, ir)
        if any(p.grade >= len(grades) for p in profiles):
            raise ProfileMismatch("profile grade exceeds n_neighbors")
        w[idx] = [grades[p.grade] for p in profiles]
    return w


@dataclass
class WeightedProblem:
    """Weights together with the profiles and resolved cost table that produced them."""

    weights: np.ndarray
    ir: float
    costs: dict[str, float]
    profiles: list = field(default_factory=list)


def weigh(X, y, spec: CostSpec, ir: float | None = None) -> WeightedProblem:
    """Profile the minority rows of ``(X, y)`` under ``spec`` and assign weights.

    ``ir`` defaults to the (floored) imbalance ratio of ``y`` itself.
    """
    y = np.asarray(y)
    ir = ratio_of(y) if ir is None else ir
    profiles: list = []
    majority_linked = None
    if spec.mode is Mode.NEIGHBORHOOD:
        profiles = complexity.knn_profiles(X, y, spec.n_neighbors)
    elif spec.mode is Mode.MST:
        mst = complexity.build_mst(X)
        profiles = complexity.mst_profiles(mst, y)
        if spec.majority_linked_cost is not None:
            majority_linked = complexity.linked_mask(mst, y)
    w = assign_weights(spec, profiles, y, ir, majority_linked=majority_linked)
    return WeightedProblem(w, float(ir), resolved_costs(spec, ir), profiles)
