"""Run configuration: JSON schema, validation and the built-in presets.

A configuration looks like::

    {
      "group": {"kind": "lattice", "rank": 1},
      "levels": [{"n": 4}, {"n": 8, "subgroup": [8]}, {"n": 16, "box": 16, "tile": [[0], [1]]}],
      "generators": "default",
      "index_cap": 100000,
      "verify_radius": 4,
      "action": {
        "kind": "translation", "subgroup": [2],
        "test_elements": [[[1, 0], [0, -1]]],
        "q_projection": null
      }
    }

``levels[*].subgroup`` is optional; without it the separating subgroup is
found by scanning the group's subgroup family.  ``box`` defaults to ``n``.
``tile`` (optional) fixes K explicitly instead of completing F.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import contfrac
from .crossed import (
    ActionInstance,
    FiniteDimAlgebra,
    InnerAction,
    TranslationAction,
    TrivialAction,
    bunce_deddens_instance,
    matrix_from_json,
    rotation_action,
    tilted_projection,
)
from .groups import DEFAULT_INDEX_CAP, Group, GroupElement, group_from_dict
from .linalg import DENSE_THRESHOLD


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Level:
    n: int
    box: int
    subgroup: Any = None
    tile: list | None = None


@dataclass
class RunConfig:
    group: Group
    levels: list[Level]
    generators: list[GroupElement]
    action: dict | None = None
    index_cap: int = DEFAULT_INDEX_CAP
    verify_radius: int = 3
    dense_threshold: int = DENSE_THRESHOLD
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        try:
            G = group_from_dict(d["group"])
            levels = [
                Level(int(lv["n"]), int(lv.get("box", lv["n"])), lv.get("subgroup"), lv.get("tile"))
                for lv in d["levels"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid group or levels: {exc}") from exc
        if not levels:
            raise ConfigError("at least one level is required")
        ns = [lv.n for lv in levels]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError(f"levels must be strictly increasing in n, got {ns}")
        for lv in levels:
            if lv.n < 1 or lv.box < 1:
                raise ConfigError("n and box must be positive")
            if lv.subgroup is not None:
                try:
                    G.subgroup(lv.subgroup)
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"bad subgroup {lv.subgroup!r} at n={lv.n}: {exc}") from exc
        gens = d.get("generators", "default")
        try:
            if gens == "default":
                generators = G.generators()
            else:
                generators = [G.element(G.nf_from_json(g)) for g in gens]
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad generator list: {exc}") from exc
        if d.get("include_identity", True) and G.identity() not in generators:
            generators = [G.identity()] + generators
        cfg = cls(
            group=G,
            levels=levels,
            generators=generators,
            action=d.get("action"),
            index_cap=int(d.get("index_cap", DEFAULT_INDEX_CAP)),
            verify_radius=int(d.get("verify_radius", 3)),
            dense_threshold=int(d.get("dense_threshold", DENSE_THRESHOLD)),
            raw=d,
        )
        if cfg.action is not None:
            cfg.action_instance()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(d)

    def action_instance(self) -> ActionInstance:
        if self.action is None:
            raise ConfigError("this command needs an 'action' section")
        try:
            return build_action(self.group, self.action)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid action section: {exc}") from exc

    def q_projection(self, n: int, dim: int) -> np.ndarray | None:
        spec = (self.action or {}).get("q_projection")
        if spec is None:
            return None
        if isinstance(spec, dict) and "tilt" in spec:
            # angle t with sin(2t) = tilt / n
            t = 0.5 * float(np.arcsin(min(1.0, float(spec["tilt"]) / n)))
            return tilted_projection(dim, t)
        return matrix_from_json(spec)


def build_action(G: Group, spec: dict) -> ActionInstance:
    kind = spec["kind"]
    tests = [matrix_from_json(m) for m in spec.get("test_elements", [])]
    labels = tuple(spec.get("labels", ()))
    if kind == "translation":
        L = G.subgroup(spec["subgroup"])
        if not tests:
            return bunce_deddens_instance(G, L)
        return ActionInstance(TranslationAction(G, L), tuple(tests), labels)
    if kind == "trivial":
        A = FiniteDimAlgebra(tuple(spec.get("blocks", [1])))
        if not tests:
            tests = [A.unit()]
        return ActionInstance(TrivialAction(G, A), tuple(tests), labels)
    if kind == "rotation":
        theta = theta_from_json(spec.get("theta", "golden"))
        alpha = rotation_action(theta)
        if G != alpha.group:
            raise ConfigError("rotation actions live on Z")
        if not tests:
            tests = [np.array([[0, 1], [1, 0]], dtype=complex)]
            labels = ("flip",)
        return ActionInstance(alpha, tuple(tests), labels)
    if kind == "inner":
        A = FiniteDimAlgebra(tuple(spec["blocks"]))
        us = tuple(matrix_from_json(u) for u in spec["unitaries"])
        return ActionInstance(InnerAction(G, A, us), tuple(tests), labels)
    raise ConfigError(f"unknown action kind {kind!r}")


def theta_from_json(value) -> float:
    if value == "golden":
        return contfrac.GOLDEN_THETA
    if value == "silver":
        return contfrac.SILVER_THETA
    return float(value)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


def preset(name: str) -> dict:
    if name == "bd":
        return {
            "group": {"kind": "lattice", "rank": 1},
            "levels": [{"n": n, "subgroup": [n]} for n in (2, 4, 8, 16, 32)],
            "action": {"kind": "translation", "subgroup": [2]},
        }
    if name == "rotation":
        qs = contfrac.denominators(contfrac.GOLDEN_THETA, 6)
        return {
            "group": {"kind": "lattice", "rank": 1},
            "levels": [{"n": q, "subgroup": [q]} for q in qs],
            "action": {"kind": "rotation", "theta": "golden"},
        }
    if name == "pv":
        qs = contfrac.denominators(contfrac.SILVER_THETA, 5)
        return {
            "group": {"kind": "lattice", "rank": 1},
            "levels": [{"n": q, "subgroup": [q]} for q in qs],
            "action": {"kind": "rotation", "theta": "silver"},
        }
    raise ConfigError(f"unknown preset {name!r}")
