"""Problem-spec JSON files, Hessian exports and trajectory CSV."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import IO

import jsonschema
import numpy as np

from hesskit.graph import GraphError, build_graph
from hesskit.kinematics import Configuration
from hesskit.potentials import AreaTerm, PotentialSpec, make_family

SCHEMA_VERSION = 1


class SpecError(ValueError):
    """A problem spec could not be parsed or failed validation."""


def load_schema() -> dict:
    text = resources.files("hesskit").joinpath("schemas/problem_spec.v1.json").read_text()
    return json.loads(text)


@dataclass(frozen=True, eq=False)
class Problem:
    spec: PotentialSpec
    config: Configuration
    settings: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, Problem):
            return NotImplemented
        return (self.spec == other.spec and self.config == other.config
                and self.settings == other.settings)


def parse_problem(text: str) -> Problem:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return problem_from_dict(raw)


def load_problem(path) -> Problem:
    with open(path) as fh:
        return parse_problem(fh.read())


def problem_from_dict(raw: dict) -> Problem:
    try:
        jsonschema.validate(raw, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SpecError(f"schema violation at {where}: {exc.message}") from None
    d, n = raw["dimension"], raw["n"]
    try:
        g = build_graph(n, [(e["i"], e["j"]) for e in raw["edges"]])
    except GraphError as exc:
        raise SpecError(str(exc)) from None
    fams = []
    for k, e in enumerate(raw["edges"]):
        try:
            fams.append(make_family(e["family"], dict(e.get("params", {}))))
        except (TypeError, ValueError) as exc:
            raise SpecError(f"edge #{k + 1} ({e['i']}, {e['j']}): bad parameters: {exc}") from None
    tris = raw.get("triangles", [])
    if tris and d != 2:
        raise SpecError("triangle area terms require dimension 2")
    try:
        areas = [AreaTerm((t["i"], t["j"], t["k"]), float(t["S_star"]), float(t["K"])) for t in tris]
        spec = PotentialSpec(g, tuple(fams), tuple(areas), d)
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    pos = raw["positions"]
    if len(pos) != n or any(len(row) != d for row in pos):
        raise SpecError(f"positions must be {n} arrays of {d} reals")
    try:
        config = Configuration(np.array(pos, dtype=float), frozenset(raw.get("pinned", [])))
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    return Problem(spec, config, dict(raw.get("settings", {})))


def problem_to_dict(problem: Problem) -> dict:
    spec, c = problem.spec, problem.config
    out = {
        "schema_version": SCHEMA_VERSION,
        "dimension": spec.d,
        "n": spec.graph.n,
        "edges": [
            {"i": i, "j": j, "family": fam.name, "params": fam.params()}
            for (i, j), fam in zip(spec.graph.edges, spec.families)
        ],
        "triangles": [
            {"i": a.triangle[0], "j": a.triangle[1], "k": a.triangle[2], "S_star": a.S_star, "K": a.K}
            for a in spec.areas
        ],
        "positions": c.positions.tolist(),
        "pinned": sorted(c.pinned),
    }
    if problem.settings:
        out["settings"] = dict(problem.settings)
    return out


def dumps_problem(problem: Problem) -> str:
    return json.dumps(problem_to_dict(problem), indent=2)


def hessian_to_dict(M: np.ndarray, report=None, **extra) -> dict:
    """Row-major JSON form of a square matrix, optionally with its spectrum."""
    M = np.asarray(M, dtype=float)
    out = {"dimension": int(M.shape[0]), "data": M.reshape(-1).tolist()}
    if report is not None:
        out["eigenvalues"] = [float(v) for v in report.eigenvalues]
        out["inertia"] = list(report.inertia)
        out["verdict"] = report.verdict
    out.update(extra)
    return out


def hessian_from_dict(obj: dict) -> np.ndarray:
    n = obj["dimension"]
    return np.array(obj["data"], dtype=float).reshape(n, n)


def write_matrix_text(M: np.ndarray, fh: IO[str]) -> None:
    np.savetxt(fh, np.asarray(M, dtype=float), fmt="%.17g")


def write_trajectory_csv(traj, fh: IO[str]) -> None:
    n, d = traj.positions.shape[1:]
    axes = "xyz"[:d]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t"] + [f"p{i + 1}_{a}" for i in range(n) for a in axes] + ["V", "gradnorm"])
    for t, P, V, gn in zip(traj.times, traj.positions, traj.V, traj.grad_norm):
        w.writerow([repr(float(t))] + [repr(float(x)) for x in P.reshape(-1)] + [repr(float(V)), repr(float(gn))])
