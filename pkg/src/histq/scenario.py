"""Scenario files: a JSON document describing a finite-dimensional setup.

Example::

    {
      "schema": 1,
      "dim": 2,
      "hamiltonian": "zero",
      "initial_state": "pure:1,0",
      "fiducial_time": 0.0,
      "effects": {"up": "projector:z:0", "down": "projector:z:1"},
      "histories": {"h_up": [[1.0, "up"]], "h_down": [[1.0, "down"]]},
      "families": {"z1": ["h_up", "h_down"]}
    }

Matrices are either plain nested lists of reals or ``{"re": ..., "im": ...}``
grids. Kets and basis vectors accept numbers or complex literals such as
``"0.5-0.5j"``. Built-in bases are ``z`` (alias ``computational``), ``x`` and
``y`` (the latter two only for ``dim = 2``).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import numlin as nl
from .decoherence import CONSISTENCY_TOL
from .effects import AlphaParam, DensityState, Effect
from .errors import ScenarioError, ValidationError
from .histories import EvolutionContext, HomogeneousHistory

SCHEMA = 1
UNIT_NAME = "unit"


def parse_complex(x) -> complex:
    if isinstance(x, bool):
        raise ScenarioError(f"not a number: {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, dict) and set(x) <= {"re", "im"}:
        return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", "").replace("i", "j"))
        except ValueError:
            pass
    raise ScenarioError(f"cannot read a complex number from {x!r}")


def parse_matrix(x, dim: int, what: str) -> np.ndarray:
    try:
        if isinstance(x, dict) and "re" in x:
            re = np.asarray(x["re"], dtype=float)
            im = np.asarray(x.get("im", np.zeros_like(re)), dtype=float)
            m = re + 1j * im
        else:
            m = np.array([[parse_complex(v) for v in row] for row in x], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{what}: malformed matrix ({exc})") from exc
    if m.shape != (dim, dim):
        raise ScenarioError(f"{what}: expected a {dim}x{dim} matrix, got shape {m.shape}")
    return m


def parse_vector(x, dim: int, what: str) -> np.ndarray:
    if isinstance(x, str):
        x = x.split(",")
    try:
        v = np.array([parse_complex(c) for c in x], dtype=complex)
    except TypeError as exc:
        raise ScenarioError(f"{what}: malformed vector") from exc
    if v.shape != (dim,):
        raise ScenarioError(f"{what}: expected {dim} components, got {v.size}")
    return v


def builtin_bases(dim: int) -> dict[str, list[np.ndarray]]:
    eye = list(np.eye(dim, dtype=complex))
    out = {"z": eye, "computational": eye}
    if dim == 2:
        s = 1 / np.sqrt(2)
        out["x"] = [np.array([s, s], dtype=complex), np.array([s, -s], dtype=complex)]
        out["y"] = [np.array([s, 1j * s]), np.array([s, -1j * s])]
    return out


def _orthonormal(vectors: list[np.ndarray], name: str) -> list[np.ndarray]:
    m = np.column_stack(vectors)
    if m.shape[0] != m.shape[1]:
        raise ScenarioError(f"basis {name!r} needs exactly dim vectors")
    if nl.max_abs(m.conj().T @ m - nl.identity(m.shape[0])) > nl.TAU_FN:
        raise ScenarioError(f"basis {name!r} is not orthonormal")
    return vectors


@dataclass(frozen=True, eq=False)
class Scenario:
    raw: dict = field(repr=False)
    dim: int
    ctx: EvolutionContext = field(repr=False)
    state: DensityState = field(repr=False)
    bases: dict = field(repr=False)
    effects: dict = field(repr=False)
    histories: dict = field(repr=False)
    families: dict
    alpha: AlphaParam
    tolerance: float | None

    def family(self, name: str | None) -> tuple[str, list[str]]:
        if name is None:
            if not self.families:
                raise ScenarioError("scenario defines no families")
            name = sorted(self.families)[0] if "default" not in self.families else "default"
        if name not in self.families:
            raise ScenarioError(f"unknown family {name!r}")
        return name, list(self.families[name])

    def effect(self, name: str) -> Effect:
        try:
            return self.effects[name]
        except KeyError:
            raise ScenarioError(f"unknown effect {name!r}") from None

    def history(self, name: str) -> HomogeneousHistory:
        try:
            return self.histories[name]
        except KeyError:
            raise ScenarioError(f"unknown history {name!r}") from None

    def section(self, key: str):
        if key not in self.raw:
            raise ScenarioError(f"scenario has no {key!r} section")
        return self.raw[key]


def _parse_effect(spec, dim: int, bases: dict, name: str) -> Effect:
    if isinstance(spec, str):
        kind, _, rest = spec.partition(":")
        if kind == "projector":
            basis, _, idx = rest.rpartition(":")
            if basis not in bases:
                raise ScenarioError(f"effect {name!r}: unknown basis {basis!r}")
            try:
                v = bases[basis][int(idx)]
            except (ValueError, IndexError):
                raise ScenarioError(f"effect {name!r}: bad basis index {idx!r}") from None
            return Effect.projector(v)
        if kind == "scaled-identity":
            try:
                c = float(Fraction(rest))
            except (ValueError, ZeroDivisionError):
                raise ScenarioError(f"effect {name!r}: bad scale {rest!r}") from None
            return Effect.scaled_identity(dim, c)
        if spec == "identity":
            return Effect.identity(dim)
        if spec == "zero":
            return Effect.zero(dim)
        raise ScenarioError(f"effect {name!r}: unknown constructor {spec!r}")
    return Effect(parse_matrix(spec, dim, f"effect {name!r}"))


def _parse_state(spec, dim: int) -> DensityState:
    if isinstance(spec, str):
        kind, _, rest = spec.partition(":")
        if kind == "pure":
            return DensityState.pure(parse_vector(rest, dim, "initial_state"))
        if kind == "maximally-mixed":
            return DensityState.maximally_mixed(dim)
        raise ScenarioError(f"unknown state constructor {spec!r}")
    return DensityState(parse_matrix(spec, dim, "initial_state"))


def from_dict(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    if raw.get("schema", SCHEMA) != SCHEMA:
        raise ScenarioError(f"unsupported schema {raw.get('schema')!r}")
    try:
        dim = int(raw["dim"])
    except (KeyError, TypeError, ValueError):
        raise ScenarioError("scenario needs an integer 'dim'") from None
    if not 1 <= dim <= nl.DIM_CAP:
        raise ScenarioError(f"dim {dim} out of range")

    h = raw.get("hamiltonian", "zero")
    hmat = nl.zeros(dim) if h == "zero" else parse_matrix(h, dim, "hamiltonian")
    ctx = EvolutionContext(hmat, float(raw.get("fiducial_time", 0.0)))
    if "initial_state" not in raw:
        raise ScenarioError("scenario needs an 'initial_state'")
    state = _parse_state(raw["initial_state"], dim)

    bases = builtin_bases(dim)
    for name, vecs in raw.get("bases", {}).items():
        bases[name] = _orthonormal([parse_vector(v, dim, f"basis {name!r}") for v in vecs], name)

    effects = {"identity": Effect.identity(dim), "zero": Effect.zero(dim)}
    for name, spec in raw.get("effects", {}).items():
        effects[name] = _parse_effect(spec, dim, bases, name)

    histories = {UNIT_NAME: HomogeneousHistory.unit(dim)}
    for name, entries in raw.get("histories", {}).items():
        pairs = []
        for item in entries:
            if not (isinstance(item, (list, tuple)) and len(item) == 2):
                raise ScenarioError(f"history {name!r}: entries are [time, effect] pairs")
            t, ename = item
            if ename not in effects:
                raise ScenarioError(f"history {name!r}: unknown effect {ename!r}")
            pairs.append((float(t), effects[ename]))
        histories[name] = HomogeneousHistory(dim, tuple(pairs))

    families = {}
    for name, members in raw.get("families", {}).items():
        for m in members:
            if m not in histories:
                raise ScenarioError(f"family {name!r}: unknown history {m!r}")
        families[name] = list(members)

    tol = raw.get("tolerance")
    return Scenario(
        raw=raw,
        dim=dim,
        ctx=ctx,
        state=state,
        bases=bases,
        effects=effects,
        histories=histories,
        families=families,
        alpha=AlphaParam.parse(str(raw.get("alpha", "1"))),
        tolerance=None if tol is None else float(tol),
    )


def load(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    try:
        return from_dict(raw)
    except ValidationError:
        raise
    except (TypeError, ValueError, AttributeError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc


def digest(raw: dict, extra: dict) -> str:
    blob = json.dumps({"scenario": raw, "flags": extra}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def resolve_tolerance(cli: float | None, scenario: Scenario, env: str | None) -> float:
    """Command line beats the scenario, which beats ``HISTQ_TOLERANCE``."""
    if cli is not None:
        return float(cli)
    if scenario.tolerance is not None:
        return scenario.tolerance
    if env:
        try:
            return float(env)
        except ValueError:
            raise ScenarioError(f"HISTQ_TOLERANCE={env!r} is not a number") from None
    return CONSISTENCY_TOL


def grid(m: np.ndarray) -> dict[str, Any]:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}
