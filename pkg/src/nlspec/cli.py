"""Command-line entry point: ``nlspec <command> --config <path> [--out <dir>] [--seed <u64>]``.

Every command reads one JSON config (validated against the bundled schema),
writes its report files into the output directory, and always writes
``summary.json`` (verdict map) plus ``timings.json`` (wall-clock seconds).
Timings are kept apart so that reruns produce byte-identical reports.

Exit status: 0 when every verdict is PASS, 2 when any verdict is FAIL,
1 on usage, config or computation errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .discretization import (
    DiscreteOperator,
    Mesh,
    QuadratureSettings,
    Weight,
    assemble_stiffness,
    block_surrogate,
    quadrature_drift,
)
from .errors import ConfigError, NlspecError
from .experiments import compare_weights, continuity_sweep, rev_construct
from .kernel import Kernel, validate_kernel
from .minimax import verify_Eminus, verify_Eplus
from .pencil import Pencil, admissible_indices, solve_spectrum

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
ORTHONORMAL_TOL = 1e-8
RESIDUAL_TOL = 1e-7

COMMANDS = {
    "validate-kernel": "check the kernel hypotheses",
    "assemble": "write stiffness A.csv and weight matrix B.csv",
    "spectrum": "solve the two-sided spectrum, write spectrum.csv",
    "minimax-check": "verify the four min-max characterizations on random subspaces",
    "continuity": "eigenvalue continuity sweep under weight perturbations",
    "monotone": "compare eigenvalues of two ordered weights",
    "ucp-demo": "equal-eigenvalue weight edit on an eigenvector zero set",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nlspec", description="Two-sided spectra of weighted nonlocal eigenvalue problems.")
    sub = p.add_subparsers(dest="command", required=True, metavar="command", parser_class=_Parser)
    for name, text in COMMANDS.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", required=True, help="path to the JSON run configuration")
        sp.add_argument("--out", default=None, help="output directory (overrides config 'out'; default: current dir)")
        sp.add_argument("--seed", type=int, default=None, help="RNG seed, unsigned 64-bit (overrides config 'seed')")
    return p


# ------------------------------------------------------------- config bits


def _mesh(cfg) -> Mesh:
    m = cfg["mesh"]
    return Mesh(float(m["a"]), float(m["b"]), int(m["n"]))


def _kernel(cfg) -> Kernel:
    if "kernel" not in cfg:
        raise ConfigError("config needs a 'kernel' entry for this command")
    return Kernel.from_dict(cfg["kernel"])


def _quad(cfg) -> QuadratureSettings:
    return QuadratureSettings(**cfg.get("quadrature", {}))


def _weight(cfg, mesh, key="weight") -> Weight:
    # the primary weight may also sit inside the mesh entry
    entry = cfg.get(key, cfg["mesh"].get(key))
    if entry is None:
        raise ConfigError(f"config needs a '{key}' entry for this command")
    if key in cfg and key in cfg["mesh"]:
        raise ConfigError(f"'{key}' given both at top level and inside 'mesh'")
    return Weight.from_dict(entry, mesh)


def _system(cfg) -> DiscreteOperator:
    return DiscreteOperator.from_kernel(_kernel(cfg), _mesh(cfg), _quad(cfg))


def _seed(cfg) -> int:
    if "seed" not in cfg:
        raise ConfigError("this command is randomized: a seed is mandatory (config 'seed' or --seed)")
    return int(cfg["seed"])


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


# ---------------------------------------------------------------- commands


def cmd_validate_kernel(cfg, out: Path) -> dict:
    report = validate_kernel(_kernel(cfg))
    io.write_json(out / "kernel_report.json", report.to_dict())
    return {"kernel": _verdict(report.passed)}


def cmd_assemble(cfg, out: Path) -> dict:
    kernel, mesh, quad = _kernel(cfg), _mesh(cfg), _quad(cfg)
    A = assemble_stiffness(kernel, mesh, quad)
    io.write_matrix(out / "A.csv", A)
    verdicts = {"assembly": "PASS"}
    if "weight" in cfg or "weight" in cfg["mesh"]:
        io.write_matrix(out / "B.csv", DiscreteOperator(A, mesh).weight_matrix(_weight(cfg, mesh)))
    if mesh.n <= 32:
        drift, _ = quadrature_drift(kernel, mesh, quad)
        io.write_json(out / "assembly.json", {"n": mesh.n, "h": mesh.h, "quadrature_drift": drift})
    return verdicts


def cmd_spectrum(cfg, out: Path) -> dict:
    system = _system(cfg)
    weight = _weight(cfg, system.mesh)
    pencil = Pencil(system.stiffness, system.weight_matrix(weight))
    sp = solve_spectrum(pencil, cfg.get("zero_tol"), cfg.get("solver", "lapack"))
    rows = sp.rows(pencil)
    io.write_dict_rows(out / "spectrum.csv", rows, ["k", "lambda", "mu", "residual"])
    if cfg.get("export_vectors", False):
        n = pencil.n
        io.write_csv(
            out / "vectors.csv",
            ["k"] + [f"v{j + 1}" for j in range(n)],
            ([k] + sp.vector(k).tolist() for k in sp.indices),
        )
    E = np.column_stack([sp.vec_pos, sp.vec_neg])
    ortho = float(np.max(np.abs(E.T @ pencil.A @ E - np.eye(E.shape[1])), initial=0.0))
    worst_res = max((r["residual"] for r in rows), default=0.0)
    adm = admissible_indices(weight, sp)
    io.write_json(
        out / "spectrum.json",
        {
            "n_positive": sp.n_pos,
            "n_negative": sp.n_neg,
            "zero_multiplicity": sp.zero_multiplicity,
            "zero_tol": sp.zero_tol,
            "orthonormality_defect": ortho,
            "worst_residual": worst_res,
            "sign_rule": adm.messages,
        },
    )
    return {
        "orthonormality": _verdict(ortho <= ORTHONORMAL_TOL),
        "residuals": _verdict(worst_res <= RESIDUAL_TOL),
        "sign_rule": _verdict(adm.consistent),
    }


def cmd_minimax_check(cfg, out: Path) -> dict:
    seed = _seed(cfg)
    system = _system(cfg)
    pencil = Pencil(system.stiffness, system.weight_matrix(_weight(cfg, system.mesh)))
    sp = solve_spectrum(pencil, cfg.get("zero_tol"), cfg.get("solver", "lapack"))
    kmax, samples = int(cfg.get("kmax", 4)), int(cfg.get("samples", 1000))
    reports = []
    for k in range(1, min(kmax, sp.n_pos) + 1):
        reports.extend(verify_Eplus(pencil, sp, k, samples, seed))
    for k in range(1, min(kmax, sp.n_neg) + 1):
        reports.extend(verify_Eminus(pencil, sp, k, samples, seed))
    io.write_dict_rows(
        out / "minimax.csv",
        [r.row() for r in reports],
        ["formula", "k", "target", "worst_sample", "witness_value", "samples", "verdict"],
    )
    return {f"{r.formula}[{r.k}]": r.verdict for r in reports}


def cmd_continuity(cfg, out: Path) -> dict:
    mode = cfg.get("mode", "uniform")
    # the uniform shift draws no random numbers
    seed = _seed(cfg) if mode == "random-cells" else int(cfg.get("seed", 0))
    if "eps_list" not in cfg:
        raise ConfigError("continuity needs 'eps_list'")
    system = _system(cfg)
    rho = _weight(cfg, system.mesh)
    rep = continuity_sweep(system, rho, cfg["eps_list"], mode, int(cfg.get("kmax", 6)), seed)
    rows = rep.table()
    io.write_dict_rows(
        out / "continuity.csv", rows, ["eps", "sup_distance", "operator_distance", "k", "deviation", "slack"]
    )
    io.write_json(
        out / "continuity.json",
        {
            "verdict": rep.verdict,
            "worst_slack": rep.worst_slack,
            "converged": rep.converged,
            "skipped": list(rep.skipped),
            "rows": rows,
        },
    )
    return {"continuity": rep.verdict}


def cmd_monotone(cfg, out: Path) -> dict:
    system = _system(cfg)
    rho = _weight(cfg, system.mesh)
    rho_t = _weight(cfg, system.mesh, "weight_tilde")
    rep = compare_weights(system, rho, rho_t, int(cfg.get("kmax", 8)), float(cfg.get("tau", 1e-6)))
    rows = rep.table()
    io.write_dict_rows(out / "monotone.csv", rows, ["k", "lam_rho", "lam_tilde", "gap", "strict", "zero_fraction"])
    io.write_json(out / "monotone.json", {"verdict": rep.verdict, "worst_gap": rep.worst_gap, "rows": rows})
    return {"monotone": rep.verdict}


def cmd_ucp_demo(cfg, out: Path) -> dict:
    if "surrogate" in cfg:
        s = cfg["surrogate"]
        mesh = _mesh(cfg)
        system = block_surrogate(s.get("sizes", (4, 4)), s.get("scales", (1.0, 2.0)), mesh.a, mesh.b)
    else:
        system = _system(cfg)
    rho = _weight(cfg, system.mesh)
    k = int(cfg.get("k", 1))
    eps = float(cfg.get("epsilon", 0.5 if k > 0 else -0.5))
    rho_eps, rep = rev_construct(system, rho, k, eps, float(cfg.get("tau", 1e-10)))
    d = rep.to_dict()
    io.write_csv(out / "ucp.csv", ["cell", "rho", "rho_eps"], zip(range(rho.n_cells), rho.cell_values, rho_eps.cell_values))
    io.write_json(out / "ucp.json", {"verdict": rep.verdict, "rows": [d]})
    return {"ucp-demo": rep.verdict}


HANDLERS = {
    "validate-kernel": cmd_validate_kernel,
    "assemble": cmd_assemble,
    "spectrum": cmd_spectrum,
    "minimax-check": cmd_minimax_check,
    "continuity": cmd_continuity,
    "monotone": cmd_monotone,
    "ucp-demo": cmd_ucp_demo,
}


def run(command: str, cfg: dict, out: Path) -> tuple[int, dict]:
    start = time.perf_counter()
    verdicts = HANDLERS[command](cfg, out)
    elapsed = time.perf_counter() - start
    overall = "PASS" if all(v == "PASS" for v in verdicts.values()) else "FAIL"
    io.write_json(out / "summary.json", {"command": command, "verdict": overall, "verdicts": verdicts})
    io.write_json(out / "timings.json", {"command": command, "wall_seconds": elapsed})
    return (EXIT_OK if overall == "PASS" else EXIT_FAIL), verdicts


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out) if args.out else None
    try:
        cfg = io.load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg["seed"] = args.seed
        out = out or Path(cfg.get("out", "."))
        code, verdicts = run(args.command, cfg, out)
    except NlspecError as exc:
        print(f"nlspec {args.command}: {exc}", file=sys.stderr)
        if out is not None:
            io.write_json(out / "summary.json", {"command": args.command, "verdict": "ERROR", "error": str(exc)})
        return EXIT_ERROR
    for name, v in verdicts.items():
        print(f"{v}  {name}")
    return code


if __name__ == "__main__":
    sys.exit(main())
