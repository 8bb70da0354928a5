"""JSON scenarios: parsing, validation, running and output emission.

A scenario document looks like::

    {
      "name": "free_rigid_body",
      "system": "rigid_body",
      "params": {"inertia": [1, 2, 3]},
      "initial_state": [1, 1, 1],
      "control": null,
      "integrator": {"method": "rk4", "step": 0.001, "t_final": 10},
      "outputs": {"csv_path": "free_rigid_body.csv", "diagnostics": ["energy", "casimir_1"]}
    }

Optional blocks are ``checks`` (conservation thresholds on diagnostics)
and ``equivalence`` (a closed-loop pairing to certify).
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import systems as S
from .algebra import ORTH_TOL, orthogonality_defect
from .control import ADMISSIBLE, ControlLaw, LawKind
from .errors import ParseError, ValidationError
from .integrate import IntegratorSpec, Method, Trajectory, integrate
from .verify import CheckReport, EquivalenceParams, Pairing, check_conservation, check_equivalence

PARAM_FIELDS = {
    S.Variant.RIGID_BODY: {"inertia": 3},
    S.Variant.RIGID_BODY_TORQUE: {"inertia": 3},
    S.Variant.RIGID_BODY_FULL: {"inertia": 3},
    S.Variant.RIGID_BODY_ROTORS: {"ibar": 3, "jrotor": 3},
    S.Variant.HEAVY_TOP: {"inertia": 3, "mgh": 0, "chi": 3},
    S.Variant.HEAVY_TOP_ROTORS: {"ibar": 3, "jrotor": 2, "mgh": 0, "chi": 3},
}

CONTROL_FIELDS = {
    LawKind.TORQUE_P: ("p",),
    LawKind.CONSTANT_TORQUE: ("p",),
    LawKind.ROTOR_GAIN: ("k",),
    LawKind.HT_ROTOR_GAIN: ("k",),
    LawKind.BLOCH: ("eps",),
}

TOP_FIELDS = ("name", "system", "params", "initial_state", "control", "integrator", "outputs", "checks", "equivalence")


@dataclass(frozen=True)
class ControlConfig:
    kind: str
    p: tuple | None = None
    k: float | None = None
    eps: float | None = None

    def law(self) -> ControlLaw:
        return ControlLaw(LawKind(self.kind), p=self.p, k=self.k, eps=self.eps)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for name in CONTROL_FIELDS[LawKind(self.kind)]:
            v = getattr(self, name)
            out[name] = list(v) if isinstance(v, tuple) else v
        return out


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    step: float = 1e-3
    t_final: float = 10.0
    reorth_every: int = 100

    def spec(self) -> IntegratorSpec:
        return IntegratorSpec(Method(self.method), self.step, self.t_final, self.reorth_every)


@dataclass(frozen=True)
class OutputConfig:
    csv_path: str | None = None
    report_path: str | None = None
    diagnostics: tuple[str, ...] | None = None


@dataclass(frozen=True)
class CheckConfig:
    """Threshold on the drift of one recorded diagnostic."""

    diagnostic: str
    tol: float
    relative: bool = False


@dataclass(frozen=True)
class EquivalenceConfig:
    pairing: str
    params: EquivalenceParams = field(default_factory=EquivalenceParams)
    samples: int = 1000
    tol: float = 1e-12
    perturb: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    system: str
    params: tuple[tuple[str, object], ...]
    initial_state: tuple[float, ...]
    integrator: IntegratorConfig
    outputs: OutputConfig
    control: ControlConfig | None = None
    checks: tuple[CheckConfig, ...] = ()
    equivalence: EquivalenceConfig | None = None

    @property
    def variant(self) -> S.Variant:
        return S.Variant(self.system)

    def param(self, name: str):
        return dict(self.params)[name]

    def build_system(self) -> S.SystemDef:
        return build_system(self.variant, dict(self.params))

    def law(self) -> ControlLaw | None:
        return None if self.control is None else self.control.law()

    def csv_name(self) -> str:
        return self.outputs.csv_path or f"{self.name}.csv"

    def report_name(self) -> str:
        return self.outputs.report_path or f"{self.name}.summary.json"

    def to_dict(self) -> dict:
        out: dict = {
            "name": self.name,
            "system": self.system,
            "params": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params},
            "initial_state": list(self.initial_state),
            "control": None if self.control is None else self.control.to_dict(),
            "integrator": {f.name: getattr(self.integrator, f.name) for f in fields(IntegratorConfig)},
            "outputs": {
                "csv_path": self.outputs.csv_path,
                "report_path": self.outputs.report_path,
                "diagnostics": None if self.outputs.diagnostics is None else list(self.outputs.diagnostics),
            },
        }
        if self.checks:
            out["checks"] = [{"diagnostic": c.diagnostic, "tol": c.tol, "relative": c.relative} for c in self.checks]
        if self.equivalence is not None:
            e = self.equivalence
            out["equivalence"] = {
                "pairing": e.pairing,
                "params": e.params.to_dict(),
                "samples": e.samples,
                "tol": e.tol,
                "perturb": e.perturb,
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def build_system(variant: S.Variant, params: dict) -> S.SystemDef:
    if variant is S.Variant.RIGID_BODY:
        return S.rigid_body(params["inertia"])
    if variant is S.Variant.RIGID_BODY_TORQUE:
        return S.rigid_body_torque(params["inertia"])
    if variant is S.Variant.RIGID_BODY_FULL:
        return S.rigid_body_full(params["inertia"])
    if variant is S.Variant.RIGID_BODY_ROTORS:
        return S.rigid_body_rotors(params["ibar"], params["jrotor"])
    if variant is S.Variant.HEAVY_TOP:
        return S.heavy_top(params["inertia"], params["mgh"], params["chi"])
    return S.heavy_top_rotors(params["ibar"], params["jrotor"], params["mgh"], params["chi"])


def available_diagnostics(variant: S.Variant) -> tuple[str, ...]:
    if variant is S.Variant.RIGID_BODY_FULL:
        return ("energy", "casimir_1", "J_1", "J_2", "J_3", "orth_defect", "supplied_power")
    if variant in (S.Variant.HEAVY_TOP, S.Variant.HEAVY_TOP_ROTORS):
        return ("energy", "casimir_1", "casimir_2", "supplied_power")
    return ("energy", "casimir_1", "supplied_power")


# -- parsing ----------------------------------------------------------------------------


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(where, f"expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ValidationError(where, "must be finite")
    return v


def _vector(value, size: int, where: str) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ValidationError(where, f"expected a list of {size} numbers")
    if len(value) != size:
        raise ValidationError(where, f"expected {size} entries, got {len(value)}")
    return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(value))


def _object(value, where: str, allowed) -> dict:
    if not isinstance(value, dict):
        raise ValidationError(where or "document", "expected an object")
    extra = sorted(set(value) - set(allowed))
    if extra:
        raise ValidationError(f"{where}.{extra[0]}" if where else extra[0], f"unknown field; allowed: {', '.join(allowed)}")
    return value


def _system(doc) -> S.Variant:
    if "system" not in doc:
        raise ValidationError("system", "missing required field")
    names = [v.value for v in S.Variant]
    if doc["system"] not in names:
        raise ValidationError("system", f"unknown system {doc['system']!r}; admissible values: {', '.join(names)}")
    return S.Variant(doc["system"])


def _params(doc, variant: S.Variant) -> tuple[tuple[str, object], ...]:
    spec = PARAM_FIELDS[variant]
    raw = _object(doc.get("params"), "params", tuple(spec))
    out = []
    for name, size in spec.items():
        where = f"params.{name}"
        if name not in raw:
            raise ValidationError(where, f"required for system '{variant.value}'")
        out.append((name, _number(raw[name], where) if size == 0 else _vector(raw[name], size, where)))
    values = dict(out)
    for name in ("inertia", "ibar", "jrotor"):
        if name in values and any(v <= 0.0 for v in values[name]):
            raise ValidationError(f"params.{name}", "entries must be > 0")
    if "mgh" in values and values["mgh"] < 0.0:
        raise ValidationError("params.mgh", "must be >= 0")
    if "chi" in values and abs(math.sqrt(sum(c * c for c in values["chi"])) - 1.0) > 1e-12:
        raise ValidationError("params.chi", "chi must be unit length")
    return tuple(out)


def _initial_state(doc, variant: S.Variant) -> tuple[float, ...]:
    if "initial_state" not in doc:
        raise ValidationError("initial_state", "missing required field")
    x = _vector(doc["initial_state"], S.STATE_DIMS[variant], "initial_state")
    if variant is S.Variant.RIGID_BODY_FULL:
        a = np.array(x[:9]).reshape(3, 3)
        if orthogonality_defect(a) > ORTH_TOL or np.linalg.det(a) <= 0.0:
            raise ValidationError("initial_state", "attitude block A_11..A_33 must be a rotation matrix")
    return x


def _control(doc, variant: S.Variant) -> ControlConfig | None:
    raw = doc.get("control")
    if raw is None:
        return None
    raw = _object(raw, "control", ("kind", "p", "k", "eps"))
    kinds = [k.value for k in CONTROL_FIELDS]
    if raw.get("kind") not in kinds:
        raise ValidationError("control.kind", f"unknown control {raw.get('kind')!r}; admissible values: {', '.join(kinds)}")
    kind = LawKind(raw["kind"])
    if variant not in ADMISSIBLE[kind]:
        raise ValidationError("control", f"control '{kind.value}' not admissible for system '{variant.value}'")
    values = {}
    for name in CONTROL_FIELDS[kind]:
        if name not in raw:
            raise ValidationError(f"control.{name}", f"required for control '{kind.value}'")
        values[name] = _vector(raw[name], 3, f"control.{name}") if name == "p" else _number(raw[name], f"control.{name}")
    for name in sorted(set(raw) - {"kind"} - set(CONTROL_FIELDS[kind])):
        raise ValidationError(f"control.{name}", f"not used by control '{kind.value}'")
    return ControlConfig(kind.value, **values)


def _integrator(doc) -> IntegratorConfig:
    raw = _object(doc.get("integrator", {}), "integrator", ("method", "step", "t_final", "reorth_every"))
    method = raw.get("method", "rk4")
    if method not in [m.value for m in Method]:
        raise ValidationError("integrator.method", f"unknown method {method!r}; admissible values: rk4, splitting")
    step = _number(raw.get("step", 1e-3), "integrator.step")
    t_final = _number(raw.get("t_final", 10.0), "integrator.t_final")
    if step <= 0.0:
        raise ValidationError("integrator.step", "integrator.step must be > 0")
    if t_final <= 0.0:
        raise ValidationError("integrator.t_final", "integrator.t_final must be > 0")
    if step > t_final:
        raise ValidationError("integrator.step", "integrator.step must not exceed integrator.t_final")
    reorth = raw.get("reorth_every", 100)
    if isinstance(reorth, bool) or not isinstance(reorth, int) or reorth < 1:
        raise ValidationError("integrator.reorth_every", "must be an integer >= 1")
    return IntegratorConfig(method, step, t_final, reorth)


def _path(value, where: str) -> str | None:
    if value is None:
        return None
    if not isinstance(value, str) or not value:
        raise ValidationError(where, "expected a non-empty string")
    return value


def _outputs(doc, variant: S.Variant) -> OutputConfig:
    raw = _object(doc.get("outputs", {}), "outputs", ("csv_path", "report_path", "diagnostics"))
    diags = raw.get("diagnostics")
    if diags is not None:
        allowed = available_diagnostics(variant)
        if not isinstance(diags, list) or not all(isinstance(d, str) for d in diags):
            raise ValidationError("outputs.diagnostics", "expected a list of names")
        for d in diags:
            if d not in allowed:
                raise ValidationError("outputs.diagnostics", f"unknown diagnostic {d!r}; admissible values: {', '.join(allowed)}")
        diags = tuple(diags)
    return OutputConfig(_path(raw.get("csv_path"), "outputs.csv_path"), _path(raw.get("report_path"), "outputs.report_path"), diags)


def _checks(doc, variant: S.Variant) -> tuple[CheckConfig, ...]:
    raw = doc.get("checks", [])
    if not isinstance(raw, list):
        raise ValidationError("checks", "expected a list")
    out = []
    allowed = available_diagnostics(variant)
    for i, c in enumerate(raw):
        where = f"checks[{i}]"
        c = _object(c, where, ("diagnostic", "tol", "relative"))
        if c.get("diagnostic") not in allowed:
            raise ValidationError(f"{where}.diagnostic", f"admissible values: {', '.join(allowed)}")
        tol = _number(c.get("tol"), f"{where}.tol")
        if tol < 0.0:
            raise ValidationError(f"{where}.tol", "must be >= 0")
        rel = c.get("relative", False)
        if not isinstance(rel, bool):
            raise ValidationError(f"{where}.relative", "expected true or false")
        out.append(CheckConfig(c["diagnostic"], tol, rel))
    return tuple(out)


def _equivalence(doc) -> EquivalenceConfig | None:
    raw = doc.get("equivalence")
    if raw is None:
        return None
    raw = _object(raw, "equivalence", ("pairing", "params", "samples", "tol", "perturb"))
    names = [p.value for p in Pairing]
    if raw.get("pairing") not in names:
        raise ValidationError("equivalence.pairing", f"unknown pairing {raw.get('pairing')!r}; admissible values: {', '.join(names)}")
    defaults = EquivalenceParams()
    given = _object(raw.get("params", {}), "equivalence.params", tuple(defaults.to_dict()))
    values = {}
    for name, default in defaults.to_dict().items():
        where = f"equivalence.params.{name}"
        if name not in given:
            values[name] = tuple(default) if isinstance(default, list) else default
        elif isinstance(default, list):
            values[name] = _vector(given[name], len(default), where)
        else:
            values[name] = _number(given[name], where)
    if values["k"] == 1.0:
        raise ValidationError("equivalence.params.k", "gain k = 1 is degenerate")
    for name in ("ibar", "jrotor", "inertia", "ht_ibar", "ht_jrotor"):
        if any(v <= 0.0 for v in values[name]):
            raise ValidationError(f"equivalence.params.{name}", "entries must be > 0")
    if abs(math.sqrt(sum(c * c for c in values["chi"])) - 1.0) > 1e-12:
        raise ValidationError("equivalence.params.chi", "chi must be unit length")
    samples = raw.get("samples", 1000)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 1:
        raise ValidationError("equivalence.samples", "must be an integer >= 1")
    tol = _number(raw.get("tol", 1e-12), "equivalence.tol")
    perturb = _number(raw.get("perturb", 0.0), "equivalence.perturb")
    return EquivalenceConfig(raw["pairing"], EquivalenceParams(**values), samples, tol, perturb)


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse and validate one JSON scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    doc = _object(doc, "", TOP_FIELDS)
    variant = _system(doc)
    name = doc.get("name", "scenario")
    if not isinstance(name, str) or not name:
        raise ValidationError("name", "expected a non-empty string")
    return ScenarioConfig(
        name=name,
        system=variant.value,
        params=_params(doc, variant),
        initial_state=_initial_state(doc, variant),
        integrator=_integrator(doc),
        outputs=_outputs(doc, variant),
        control=_control(doc, variant),
        checks=_checks(doc, variant),
        equivalence=_equivalence(doc),
    )


def load_scenario(path) -> ScenarioConfig:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


# -- running ----------------------------------------------------------------------------


@dataclass
class RunSummary:
    echo: dict
    wall_time: float
    final_state: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, dict[str, float]] = field(default_factory=dict)
    checks: list[CheckReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "scenario": self.echo,
            "wall_time": self.wall_time,
            "final_state": self.final_state,
            "diagnostics": self.diagnostics,
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        }


def selected_diagnostics(config: ScenarioConfig) -> tuple[str, ...]:
    if config.outputs.diagnostics is not None:
        return config.outputs.diagnostics
    names = available_diagnostics(config.variant)
    if config.control is None:
        names = tuple(n for n in names if n != "supplied_power")
    return names


def diagnostic_stats(series: np.ndarray) -> dict[str, float]:
    return {
        "min": float(np.min(series)),
        "max": float(np.max(series)),
        "drift": float(np.max(np.abs(series - series[0]))),
    }


def simulate(config: ScenarioConfig) -> tuple[S.SystemDef, Trajectory]:
    sys = config.build_system()
    traj = integrate(sys, config.law(), np.array(config.initial_state), config.integrator.spec())
    return sys, traj


def write_csv(path: Path, traj: Trajectory, names) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = [traj.times[:, None], traj.states] + [traj.diagnostics[n][:, None] for n in names]
    table = np.hstack(columns)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *traj.labels, *names])
        for row in table:
            writer.writerow([f"{v:.17g}" for v in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def write_summary(path: Path, summary: RunSummary) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8")


def run(
    config: ScenarioConfig,
    out_dir=".",
    with_checks: bool = False,
    seed: int | None = None,
    extra_checks=(),
) -> RunSummary:
    """Integrate the scenario, write CSV and summary, return the summary.

    With ``with_checks`` the scenario's conservation thresholds and
    equivalence block are evaluated and embedded in the summary.
    """
    out = Path(out_dir)
    t0 = time.perf_counter()
    sys, traj = simulate(config)
    names = selected_diagnostics(config)
    reports: list[CheckReport] = []
    if with_checks:
        for c in config.checks:
            reports.append(check_conservation(traj, c.diagnostic, c.tol, relative=c.relative))
        if config.equivalence is not None:
            reports.append(run_equivalence(config.equivalence, seed))
    for make in extra_checks:
        reports.append(make(sys, traj))
    wall = time.perf_counter() - t0
    summary = RunSummary(
        echo=config.to_dict(),
        wall_time=wall,
        final_state=dict(zip(traj.labels, map(float, traj.final))),
        diagnostics={n: diagnostic_stats(traj.diagnostics[n]) for n in names},
        checks=reports,
    )
    write_csv(out / config.csv_name(), traj, names)
    write_summary(out / config.report_name(), summary)
    return summary


def run_equivalence(eq: EquivalenceConfig, seed: int | None = None) -> CheckReport:
    return check_equivalence(eq.pairing, eq.params, eq.samples, eq.tol, seed=seed, perturb=eq.perturb)
