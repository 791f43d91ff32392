"""Command-line front end.

Exit codes: 0 success, 1 input/output or parse error, 2 associator
solver failure, 3 verification failure. Artifacts are canonical JSON
(sorted keys, exact rational strings) and carry a provenance hash of
their inputs; timings go to the printed report only, so artifacts are
byte-identical across runs and worker counts.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import click

from . import __version__
from .associator import (
    Associator,
    SolverError,
    check_group_like,
    check_hexagons,
    check_pentagon,
    check_units,
    solve_associator,
)
from .hopf import HopfError, QuantumGroup, classical_coaction_check, classical_limit_checks, gamma_H
from .io import InputError, load_toml, parse_bialgebra, parse_graph, parse_module, parse_ordered_morphism
from .liealg import CocycleError, LieError
from .moduli import CiliatedGraph, HMap, ModuliError, TensorQuant
from .ordcat import render_polygons

__all__ = ["main", "cli", "RunConfig", "Report", "EXIT_OK", "EXIT_IO", "EXIT_SOLVER", "EXIT_VERIFY"]

EXIT_OK, EXIT_IO, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3
CACHE_ENV = "QUILTQUANT_CACHE"


class CliFailure(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


@dataclass
class RunConfig:
    command: str
    inputs: List[str]
    hbar_degree: int = 0
    jet_order: int = 0
    phi_path: Optional[str] = None
    phi_degree: Optional[int] = None
    out: Optional[str] = None
    workers: int = 1
    dump_operators: bool = False
    render: bool = False

    def check(self, phi_degree: int) -> None:
        if self.hbar_degree < 0:
            raise CliFailure(EXIT_IO, "hbar degree must be non-negative")
        if self.hbar_degree > phi_degree:
            raise CliFailure(EXIT_IO, f"hbar degree {self.hbar_degree} exceeds the associator degree {phi_degree}")
        if self.jet_order < self.hbar_degree + 1:
            raise CliFailure(EXIT_IO, "jet order must be at least hbar degree + 1")


@dataclass
class Report:
    checks: List[Dict] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    provenance: Dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c["status"] == "zero" for c in self.checks)

    def add(self, name: str, zero: bool, witness=None) -> None:
        self.checks.append({"name": name, "status": "zero" if zero else "nonzero", "witness": None if zero else witness})

    def extend(self, checks: List[Dict]) -> None:
        self.checks.extend(checks)

    def text(self) -> str:
        lines = []
        for c in self.checks:
            mark = "ok  " if c["status"] == "zero" else "FAIL"
            lines.append(f"{mark} {c['name']}")
            if c["status"] != "zero" and c.get("witness") is not None:
                lines.append(f"     witness: {json.dumps(c['witness'], sort_keys=True)}")
        for k, v in self.timings.items():
            lines.append(f"time {k}: {v:.2f}s")
        lines.append("overall: " + ("ok" if self.ok else "FAILED"))
        return "\n".join(lines)


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def sha256(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode())
        h.update(b"\0")
    return h.hexdigest()


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot write {path}: {exc.strerror}") from None


# ------------------------------------------------------------------ associator


def associator_checks(phi: Associator) -> Report:
    rep = Report()
    rep.add("pentagon", check_pentagon(phi).is_zero())
    h1, h2 = check_hexagons(phi)
    rep.add("hexagon 1", h1.is_zero())
    rep.add("hexagon 2", h2.is_zero())
    rep.add("group-like", check_group_like(phi))
    rep.add("units", all(u.is_zero() for u in check_units(phi)))
    return rep


def associator_artifact(phi: Associator, rep: Report) -> Dict:
    obj = phi.to_json_obj()
    return {
        "kind": "associator",
        "version": __version__,
        "degree": phi.degree,
        "tie_break": phi.tie_break,
        "log": obj["log"],
        "series": phi.phi.to_json_obj(),
        "verification": {c["name"]: "0" if c["status"] == "zero" else "nonzero" for c in rep.checks},
        "provenance": {"sha256": sha256("associator", str(phi.degree), phi.tie_break, __version__), "id": phi.ident},
    }


def _cached_associator(degree: int, tie_break: str = "zero") -> Associator:
    cache = os.environ.get(CACHE_ENV)
    path = Path(cache) / f"phi-{degree}-{tie_break}.json" if cache else None
    if path is not None and path.exists():
        return Associator.from_json_obj(json.loads(path.read_text()))
    try:
        phi = solve_associator(degree, tie_break)
    except SolverError as exc:
        raise CliFailure(EXIT_SOLVER, f"associator solver failed: {exc}") from None
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical(phi.to_json_obj()))
    return phi


def _load_phi(path: Optional[str], degree: Optional[int], need: int) -> Associator:
    if path is not None:
        try:
            obj = json.loads(_read(path))
            return Associator.from_json_obj(obj)
        except (ValueError, KeyError) as exc:
            raise CliFailure(EXIT_IO, f"{path}: not an associator artifact ({exc})") from None
    return _cached_associator(max(need, 1) if degree is None else degree)


# ------------------------------------------------------------------ hopf runs


def _hmap_obj(M: HMap) -> Dict:
    return {"per_hbar_degree": M.matrices()}


def _basis_obj(A) -> Dict:
    if isinstance(A, TensorQuant):
        return {"tensor_of": len(A.parts()), "tuples": [list(t) for t in A.tuples]}
    return {"labels": A.labels(), "degrees": A.degrees}


def _cocommutative0(delta: HMap) -> bool:
    AA = delta.tgt
    for col in delta.cols:
        flipped = {AA.index[(b, a)]: c for l, c in col[0].items() for a, b in [AA.tuples[l]]}
        if flipped != col[0]:
            return False
    return True


def run_quantum_group(cfg: RunConfig, bialgebra_text: str, module_text: Optional[str], phi: Optional[Associator] = None) -> tuple:
    """Build and verify the quantum group (and coaction); returns ``(artifact, report)``."""
    b = parse_bialgebra(bialgebra_text, cfg.inputs[0])
    if phi is None:
        phi = _load_phi(cfg.phi_path, cfg.phi_degree, cfg.hbar_degree)
    cfg.check(phi.degree)
    try:
        b.validate()
    except CocycleError as exc:
        raise CliFailure(EXIT_VERIFY, f"not a Lie bialgebra: {exc} (witness {exc.args[1] if len(exc.args) > 1 else None})") from None
    D, N = cfg.hbar_degree, cfg.jet_order
    W = N + 2 * D
    t0 = time.perf_counter()
    QG = QuantumGroup(b, phi, D, N, cfg.workers)
    M = None
    if module_text is not None:
        M = QG.module = parse_module(module_text, QG.mt, QG.H, W, cfg.inputs[1])
    rep = Report()
    data = QG.hopf(direct_route=True)
    rep.extend(data.report)
    rep.extend(classical_limit_checks(QG))
    cocomm = _cocommutative0(data.delta)
    art: Dict = {
        "kind": "quantum_group" if M is None else "quantum_module",
        "version": __version__,
        "inputs": {"bialgebra": bialgebra_text},
        "associator": phi.to_json_obj(),
        "associator_id": phi.ident,
        "truncation": {"hbar_degree": D, "jet_order": N, "weight": W},
        "g_action_convention": "/".join(QG.action.convention),
        "algebra": data.A.to_json_obj(),
        "coproduct": {"target": _basis_obj(data.delta.tgt), **_hmap_obj(data.delta)},
        "counit": _hmap_obj(data.eps),
        "antipode": _hmap_obj(data.S),
        "flags": {"cocommutative_at_hbar0": cocomm},
    }
    if M is not None:
        art["inputs"]["module"] = module_text
        co = QG.coaction()
        rep.extend(co.report)
        if module_text is not None and load_toml(module_text).data.get("kind") == "group":
            rep.extend(classical_coaction_check(QG, co))
        art["comodule"] = co.B.to_json_obj()
        art["coaction"] = {"target": _basis_obj(co.rho.tgt), **_hmap_obj(co.rho)}
    if cfg.dump_operators:
        ops = {"P(2)": _hmap_obj(QG.P_star(2)), "delta1": _hmap_obj(QG.tau_star((0, 2), 2)), "P(3)": _hmap_obj(QG.P_star(3))}
        if M is not None:
            ops["P_M(2)"] = _hmap_obj(QG.PM_star(2))
        art["operators"] = ops
    if cfg.render:
        art["render"] = gamma_H(QG.mt, QG.H, 1).surface.graph.render()
    art["verification"] = [{"name": c["name"], "status": c["status"]} for c in rep.checks]
    prov = sha256(bialgebra_text, module_text or "", phi.ident, str(D), str(N), __version__)
    art["provenance"] = {"sha256": prov}
    rep.provenance = {"sha256": prov}
    rep.timings = dict(QG.timings)
    rep.timings["total"] = time.perf_counter() - t0
    return art, rep


# ------------------------------------------------------------------ rendering


def render_text(text: str, path: str = "<input>") -> str:
    src = load_toml(text, path)
    kind = src.data.get("kind", "graph")
    if kind == "ordered_morphism":
        return render_polygons(parse_ordered_morphism(src))
    if kind == "graph":
        g = parse_graph(text, path)
        gr = CiliatedGraph.build(g.cilia_plus, g.cilia_minus, g.edges)
        diag = gr.diagnostics()
        if diag:
            raise InputError("; ".join(diag), path=path)
        out = gr.render()
        return out + "\n" if out else ""
    if kind in ("gamma_H", "gamma_M"):
        n = src.data.get("n")
        if not isinstance(n, int) or n < 0:
            raise src.error("'n' must be a non-negative integer", "n")
        legs = [str(i) for i in range(n + 1)] + (["M"] if kind == "gamma_M" else [])
        return CiliatedGraph.build({"v": legs}).render() + "\n"
    raise src.error(f"unknown render kind {kind!r}", "kind")


# ------------------------------------------------------------------ commands


@click.group()
@click.version_option(__version__, prog_name="quiltquant")
def cli():
    """Exact quantization of moduli of flat connections on skeletized surfaces."""


@cli.command("forge-associator")
@click.option("--degree", "-d", type=int, required=True, help="Truncation degree of the associator.")
@click.option("--tie-break", type=click.Choice(["zero", "unit"]), default="zero", show_default=True)
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None)
def forge_associator(degree: int, tie_break: str, out: Optional[str]):
    """Solve pentagon and hexagons degree by degree and write phi.json."""
    if degree < 0:
        raise CliFailure(EXIT_IO, "degree must be non-negative")
    t0 = time.perf_counter()
    try:
        phi = solve_associator(degree, tie_break)
    except SolverError as exc:
        raise CliFailure(EXIT_SOLVER, f"associator solver failed: {exc}") from None
    rep = associator_checks(phi)
    rep.timings["solve"] = time.perf_counter() - t0
    text = canonical(associator_artifact(phi, rep))
    _write(out, text)
    if out is None:
        click.echo(text, nl=False)
    click.echo(rep.text(), err=out is None)
    if not rep.ok:
        raise CliFailure(EXIT_SOLVER, "associator constraints are violated")


def _common(f):
    opts = [
        click.option("--hbar-degree", "-D", type=int, default=2, show_default=True),
        click.option("--jet-order", "-N", type=int, default=3, show_default=True),
        click.option("--phi", "phi_path", type=click.Path(dir_okay=False), default=None, help="Associator artifact."),
        click.option("--phi-degree", type=int, default=None, help="Solve an associator of this degree instead."),
        click.option("--out", "-o", type=click.Path(dir_okay=False), default=None),
        click.option("--workers", "-j", type=int, default=1, show_default=True),
        click.option("--dump-operators", is_flag=True, help="Include the induced operator matrices."),
        click.option("--render", "render_flag", is_flag=True, help="Include a drawing of the surface."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _emit(art: Dict, rep: Report, out: Optional[str]) -> None:
    text = canonical(art)
    _write(out, text)
    click.echo(rep.text())
    if not rep.ok:
        raise CliFailure(EXIT_VERIFY, "verification failed")


@cli.command("quantize-group")
@click.argument("bialgebra", type=click.Path(dir_okay=False))
@_common
def quantize_group(bialgebra, hbar_degree, jet_order, phi_path, phi_degree, out, workers, dump_operators, render_flag):
    """Quantize the formal Poisson group of BIALGEBRA and verify the Hopf axioms."""
    cfg = RunConfig("quantize-group", [bialgebra], hbar_degree, jet_order, phi_path, phi_degree, out, workers, dump_operators, render_flag)
    art, rep = run_quantum_group(cfg, _read(bialgebra), None)
    _emit(art, rep, out)


@cli.command("quantize-module")
@click.argument("bialgebra", type=click.Path(dir_okay=False))
@click.option("--module", "-m", "module", type=click.Path(dir_okay=False), required=True)
@_common
def quantize_module(bialgebra, module, hbar_degree, jet_order, phi_path, phi_degree, out, workers, dump_operators, render_flag):
    """Quantize an equivariant space MODULE and verify the comodule-algebra axioms."""
    cfg = RunConfig("quantize-module", [bialgebra, module], hbar_degree, jet_order, phi_path, phi_degree, out, workers, dump_operators, render_flag)
    art, rep = run_quantum_group(cfg, _read(bialgebra), _read(module))
    _emit(art, rep, out)


@cli.command("verify")
@click.argument("artifact", type=click.Path(dir_okay=False))
@click.option("--workers", "-j", type=int, default=1, show_default=True)
def verify(artifact, workers):
    """Recompute ARTIFACT from its embedded inputs and compare."""
    text = _read(artifact)
    try:
        art = json.loads(text)
    except ValueError as exc:
        raise CliFailure(EXIT_IO, f"{artifact}: invalid JSON ({exc})") from None
    kind = art.get("kind")
    if kind == "associator":
        try:
            phi = Associator.from_json_obj(art)
        except (KeyError, ValueError) as exc:
            raise CliFailure(EXIT_IO, f"{artifact}: malformed associator ({exc})") from None
        rep = associator_checks(phi)
        rep.add("series matches log", canonical(phi.phi.to_json_obj()) == canonical(art.get("series")))
        click.echo(rep.text())
        if not rep.ok:
            raise CliFailure(EXIT_VERIFY, "verification failed")
        return
    if kind not in ("quantum_group", "quantum_module"):
        raise CliFailure(EXIT_IO, f"{artifact}: unknown artifact kind {kind!r}")
    try:
        inputs, tr = art["inputs"], art["truncation"]
        phi = Associator.from_json_obj(art["associator"])
    except (KeyError, ValueError) as exc:
        raise CliFailure(EXIT_IO, f"{artifact}: malformed artifact ({exc})") from None
    paths = ["<bialgebra>"] + (["<module>"] if "module" in inputs else [])
    cfg = RunConfig(kind, paths, tr["hbar_degree"], tr["jet_order"], workers=workers, dump_operators="operators" in art, render="render" in art)
    fresh, rep = run_quantum_group(cfg, inputs["bialgebra"], inputs.get("module"), phi)
    rep.add("artifact reproduces", canonical(fresh) == text, {"artifact": artifact})
    click.echo(rep.text())
    if not rep.ok:
        raise CliFailure(EXIT_VERIFY, "verification failed")


@cli.command("render")
@click.argument("input", type=click.Path(dir_okay=False))
def render(input):
    """Draw an ordered morphism or a ciliated graph described by INPUT."""
    click.echo(render_text(_read(input), input), nl=False)


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns (and exits with) the documented exit code."""
    try:
        cli.main(args=argv, prog_name="quiltquant", standalone_mode=False)
        code = EXIT_OK
    except CliFailure as exc:
        click.echo(f"error: {exc}", err=True)
        code = exc.code
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        code = EXIT_IO
    except click.exceptions.Abort:
        code = EXIT_IO
    except click.ClickException as exc:
        exc.show()
        code = EXIT_IO
    except (HopfError, ModuliError, LieError) as exc:
        click.echo(f"error: {exc}", err=True)
        code = EXIT_VERIFY
    except SolverError as exc:
        click.echo(f"error: {exc}", err=True)
        code = EXIT_SOLVER
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":  # pragma: no cover
    main()
