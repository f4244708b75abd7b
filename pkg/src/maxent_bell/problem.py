"""Problem files for ``maxent-bell solve``.

A problem file is JSON::

    {
      "observables": [
        {"name": "B", "builtin": "bell_chsh"},
        {"name": "B2", "builtin": "bell_chsh_squared"},
        {"name": "X", "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}
      ],
      "targets": [1.4142135623730951, 6.0, 0.0],
      "solver": {"tolerance": 1e-10, "max_iterations": 200, "multiplier_cap": 1e4}
    }

Complex matrix entries are ``[re, im]`` pairs. ``solver`` is optional.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bell import bell_chsh_operator, bell_chsh_squared
from .errors import MaxEntError
from .qstate import HERMITIAN_TOL, hermiticity_error
from .solver import ConstraintSet

BUILTINS = {
    "bell_chsh": bell_chsh_operator,
    "bell_chsh_squared": bell_chsh_squared,
}


class FileFormatError(MaxEntError, ValueError):
    """Malformed problem or sweep file; the message names the line or field."""


@dataclass(frozen=True)
class ProblemSpec:
    names: tuple
    sources: tuple  # builtin name, or "matrix"
    observables: tuple
    targets: tuple
    tolerance: float = 1e-10
    max_iterations: int = 200
    multiplier_cap: float = 1e4

    def constraint_set(self) -> ConstraintSet:
        return ConstraintSet(self.observables, self.targets, self.names)

    def bell_pair(self) -> tuple[float, float | None] | None:
        """(b, sigma2) if the problem is exactly the Bell-CHSH mean (and dispersion)."""
        by_source = dict(zip(self.sources, self.targets))
        if set(self.sources) == {"bell_chsh", "bell_chsh_squared"} and len(self.sources) == 2:
            return by_source["bell_chsh"], by_source["bell_chsh_squared"]
        if self.sources == ("bell_chsh",):
            return by_source["bell_chsh"], None
        return None


def parse_json(text: str, what: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{what}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise FileFormatError(f"{what}: top level must be an object")
    return data


def number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FileFormatError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise FileFormatError(f"{path}: expected a finite number")
    return value


def integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FileFormatError(f"{path}: expected an integer, got {value!r}")
    return value


def _matrix(raw, path: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise FileFormatError(f"{path}: expected a non-empty list of rows")
    d = len(raw)
    m = np.zeros((d, d), dtype=complex)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != d:
            raise FileFormatError(f"{path}[{i}]: expected a row of {d} entries")
        for j, entry in enumerate(row):
            p = f"{path}[{i}][{j}]"
            if not isinstance(entry, list) or len(entry) != 2:
                raise FileFormatError(f"{p}: expected [re, im]")
            m[i, j] = complex(number(entry[0], p + "[0]"), number(entry[1], p + "[1]"))
    err = hermiticity_error(m)
    if err > HERMITIAN_TOL:
        raise FileFormatError(f"{path}: matrix is not Hermitian (max |A - A^H| = {err:.3e})")
    return m


def _solver_options(data: dict, what: str) -> dict:
    raw = data.get("solver", {})
    if not isinstance(raw, dict):
        raise FileFormatError(f"{what}: 'solver' must be an object")
    opts = {}
    for key in raw:
        p = f"solver.{key}"
        if key == "tolerance" or key == "multiplier_cap":
            opts[key] = number(raw[key], p)
            if opts[key] <= 0:
                raise FileFormatError(f"{p}: must be positive")
        elif key == "max_iterations":
            opts[key] = integer(raw[key], p)
            if opts[key] < 1:
                raise FileFormatError(f"{p}: must be at least 1")
        else:
            raise FileFormatError(f"{p}: unknown solver option")
    return opts


def parse_problem(text: str) -> ProblemSpec:
    data = parse_json(text, "problem")
    obs_raw = data.get("observables")
    if not isinstance(obs_raw, list) or not obs_raw:
        raise FileFormatError("observables: expected a non-empty list")
    targets_raw = data.get("targets")
    if not isinstance(targets_raw, list):
        raise FileFormatError("targets: expected a list of numbers")
    if len(targets_raw) != len(obs_raw):
        raise FileFormatError(f"targets: {len(targets_raw)} values for {len(obs_raw)} observables")
    names, sources, mats = [], [], []
    for k, entry in enumerate(obs_raw):
        p = f"observables[{k}]"
        if not isinstance(entry, dict):
            raise FileFormatError(f"{p}: expected an object")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise FileFormatError(f"{p}.name: expected a non-empty string")
        if name in names:
            raise FileFormatError(f"{p}.name: duplicate name {name!r}")
        has_builtin, has_matrix = "builtin" in entry, "matrix" in entry
        if has_builtin == has_matrix:
            raise FileFormatError(f"{p}: give exactly one of 'builtin' or 'matrix'")
        if has_builtin:
            src = entry["builtin"]
            if src not in BUILTINS:
                raise FileFormatError(f"{p}.builtin: unknown builtin {src!r} (known: {', '.join(BUILTINS)})")
            mats.append(BUILTINS[src]())
        else:
            src = "matrix"
            mats.append(_matrix(entry["matrix"], f"{p}.matrix"))
        names.append(name)
        sources.append(src)
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise FileFormatError(f"observables: dimensions differ {sorted(dims)}")
    targets = [number(t, f"targets[{k}]") for k, t in enumerate(targets_raw)]
    return ProblemSpec(tuple(names), tuple(sources), tuple(mats), tuple(targets), **_solver_options(data, "problem"))


def load_problem(path) -> ProblemSpec:
    return parse_problem(Path(path).read_text())
