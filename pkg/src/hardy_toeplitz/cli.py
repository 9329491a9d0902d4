"""Command-line front end.

Every subcommand reads a symbol file (except ``orbit`` and
``oracle-shkarin``), writes its artifacts atomically and can emit a run
manifest.  Data files never contain timestamps; the wall time lives only in
the manifest.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .eigensystem import adjoint_overvalence_eigenvector, eigenvector, resolvent_solve
from .errors import (
    CapError,
    LeadingCoefficientError,
    PreconditionError,
    RootFindingError,
    SymbolError,
)
from .hypercyclicity import Status, decide, gs_completeness_residual, shkarin_oracle
from .symbol import Symbol
from .truncation import orbit_witness_shift
from .valence import (
    DEFAULT_POLICY,
    SamplingPolicy,
    closed_disc_exact_valence,
    condition_witnesses,
    default_half_width,
    spectral_portrait,
    square_box,
    valence_scan,
)

EXIT_OK = 0
EXIT_UNDECIDED = 2
EXIT_BAD_INPUT = 3       # unreadable file, malformed JSON, malformed symbol
EXIT_LEADING_ZERO = 4
EXIT_CAP = 5
EXIT_PRECONDITION = 6
EXIT_NUMERICAL = 7
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


class InputError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """``"re,im"`` or a bare real number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're,im' or a real number, got {text!r}")


def parse_symbol_file(path: str | Path) -> Symbol:
    """Load and validate a symbol file.

    Malformed files raise :class:`InputError`; symbol invariant violations
    propagate as :class:`SymbolError` subclasses.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        payload = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from exc
    try:
        return Symbol.from_json(payload)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (LeadingCoefficientError, CapError)):
            raise
        raise InputError(f"{path}: {exc}") from exc


def _clean(obj):
    """Plain JSON types; complex numbers become [re, im] and non-finite
    floats the strings "inf", "-inf" or "nan"."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, Status):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def coefficient_csv(coeffs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "re", "im"])
    for i, v in enumerate(np.asarray(coeffs, dtype=complex)):
        w.writerow([i, repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def write_atomic(path: str | Path, data: bytes | str) -> int:
    """Write via a temporary file in the target directory and rename."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return len(data)


@dataclasses.dataclass
class RunManifest:
    command: str
    argv: list[str]
    input_sha256: str | None
    policy: dict
    wall_time_s: float = 0.0
    outputs: list[dict] = dataclasses.field(default_factory=list)
    version: str = __version__

    def to_json(self) -> dict:
        return {
            "tool": "hardy-toeplitz",
            "version": self.version,
            "command": self.command,
            "argv": self.argv,
            "input_sha256": self.input_sha256,
            "policy": self.policy,
            "wall_time_s": self.wall_time_s,
            "outputs": self.outputs,
        }


class _Run:
    """Collects outputs of one invocation for the manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.outputs: list[dict] = []
        self.input_hash = None
        self.policy: dict = {}
        self.argv = list(argv)

    def emit(self, path: str | None, data: str | bytes):
        if path is None or path == "-":
            if isinstance(data, bytes):
                sys.stdout.buffer.write(data)
            else:
                sys.stdout.write(data)
            return
        n = write_atomic(path, data)
        raw = data.encode("utf-8") if isinstance(data, str) else data
        self.outputs.append({"path": str(path), "bytes": n, "sha256": hashlib.sha256(raw).hexdigest()})

    def symbol(self) -> Symbol:
        self.input_hash = hashlib.sha256(Path(self.args.symbol).read_bytes()).hexdigest() \
            if Path(self.args.symbol).is_file() else None
        return parse_symbol_file(self.args.symbol)


def _policy(args) -> SamplingPolicy:
    kw = {}
    if getattr(args, "box", None) is not None:
        kw["box_half_width"] = args.box
    if getattr(args, "delta", None) is not None:
        kw["delta"] = args.delta
    if getattr(args, "samples", None) is not None:
        kw["samples"] = args.samples
    return dataclasses.replace(DEFAULT_POLICY, **kw)


def _sidecar(path: str | None, suffix: str) -> str | None:
    return None if path in (None, "-") else str(Path(path).with_suffix(suffix))


def _verdict_exit(args, status: Status) -> int:
    if args.require_definitive and status is Status.UNDECIDED:
        return EXIT_UNDECIDED
    return EXIT_OK


def cmd_decide(run: _Run) -> int:
    s = run.symbol()
    pol = _policy(run.args)
    run.policy = pol.to_json()
    v = decide(s, pol)
    run.emit(run.args.output, dumps(v.to_json()))
    return _verdict_exit(run.args, v.status)


def cmd_analyze(run: _Run) -> int:
    args = run.args
    s = run.symbol()
    pol = _policy(args)
    run.policy = pol.to_json()
    scan = valence_scan(s, pol)
    cv = closed_disc_exact_valence(s, pol)
    cw = condition_witnesses(s, policy=pol)
    half = args.box if args.box is not None else default_half_width(s, pol.circle_samples)
    res = args.res or 64
    portrait = spectral_portrait(s, square_box(half), res, workers=args.workers)
    verdict = decide(s, pol)
    report = {
        "symbol": s.to_json(),
        "N": s.N,
        "d": s.d,
        "valence": {
            "n_points": scan.n_points,
            "max_count": scan.max_count,
            "violation": None if scan.violation_witness is None
            else {"w": scan.violation_witness[0], "count": scan.violation_witness[1]},
            "n_unresolved": int(scan.unresolved_points.size),
            "grid": scan.grid_spec,
        },
        "closed_valence": cv.to_json(),
        "conditions": cw.to_json(),
        "classification": {"box": list(portrait.box), "res": res,
                           "counts": portrait.counts_by_class()},
        "verdict": verdict.to_json(),
    }
    run.emit(args.output, dumps(report))
    return _verdict_exit(args, verdict.status)


def cmd_portrait(run: _Run) -> int:
    args = run.args
    s = run.symbol()
    half = args.box if args.box is not None else default_half_width(s)
    res = args.res or 256
    box = square_box(half)
    run.policy = {"box": list(box), "res": res, "boundary_tol": DEFAULT_POLICY.boundary_tol}
    p = spectral_portrait(s, box, res, workers=args.workers)
    if args.output in (None, "-"):
        raise UsageError("portrait needs -o PATH for the PGM image")
    run.emit(args.output, p.to_pgm())
    return EXIT_OK


def _coeff_outputs(run: _Run, coeffs, summary: dict) -> None:
    out = run.args.output
    if out in (None, "-"):
        run.emit(None, dumps(summary))
        return
    run.emit(out, coefficient_csv(coeffs))
    run.emit(_sidecar(out, ".json"), dumps(summary))


def cmd_eig(run: _Run) -> int:
    args = run.args
    s = run.symbol()
    q = args.q or [1 + 0j]
    run.policy = {"lambda": args.lam, "q": q, "trunc": args.trunc}
    ev = eigenvector(s, args.lam, q, M=args.trunc)
    _coeff_outputs(run, ev.series.coeffs, {
        "lambda": ev.lam, "q": ev.q_coeffs, "M": ev.M, "decay_rate": ev.decay_rate,
        "residual": ev.residual, "tail_estimate": ev.tail_estimate,
    })
    return EXIT_OK


def cmd_resolvent(run: _Run) -> int:
    args = run.args
    s = run.symbol()
    g = args.g or [1 + 0j]
    M = args.trunc or 512
    run.policy = {"lambda": args.lam, "g": g, "trunc": M}
    sol = resolvent_solve(s, args.lam, g, M=M)
    _coeff_outputs(run, sol.f.coeffs, {
        "lambda": sol.lam, "g": g, "M": sol.M, "q": sol.q_coeffs, "residual": sol.residual,
        "numerator_reconstruction_error": sol.numerator_error, "condition": sol.condition,
        "interior_nodes": [{"z": z, "multiplicity": m} for z, m in sol.interior_nodes],
    })
    return EXIT_OK


def cmd_adjoint(run: _Run) -> int:
    args = run.args
    s = run.symbol()
    M = args.trunc or 256
    run.policy = {"mu": args.mu, "trunc": M}
    ad = adjoint_overvalence_eigenvector(s, args.mu, M=M)
    _coeff_outputs(run, ad.vector.coeffs, {
        "mu": ad.mu, "nodes": ad.nodes, "weights": ad.weights, "M": M,
        "residual": ad.residual, "nullspace_residual": ad.nullspace_residual,
        "tail_bound": ad.tail_bound,
    })
    return EXIT_OK


def cmd_complete(run: _Run) -> int:
    args = run.args
    s = run.symbol()
    M = args.trunc or 128
    run.policy = {"center": args.lam, "radius": args.radius, "K": args.K, "trunc": M,
                  "targets": args.targets}
    rep = gs_completeness_residual(s, args.lam, args.radius, args.K,
                                   targets=range(args.targets), M=M)
    run.emit(args.output, dumps(rep.to_json()))
    return EXIT_OK


def orbit_targets(seed: int, count: int, degree: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        k = int(rng.integers(0, degree + 1))
        out.append(rng.normal(size=k + 1) + 1j * rng.normal(size=k + 1))
    return out


def cmd_orbit(run: _Run) -> int:
    args = run.args
    run.policy = {"gamma": args.gamma, "eps": args.eps, "seed": args.seed,
                  "targets": args.n_targets, "degree": args.degree}
    targets = orbit_targets(args.seed, args.n_targets, args.degree)
    ow = orbit_witness_shift(args.gamma, targets, args.eps)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["checkpoint", "position", "error", "bound"])
    for k, (p, e, b) in enumerate(zip(ow.block_positions, ow.checkpoint_errors, ow.bounds)):
        w.writerow([k, p, repr(float(e)), repr(float(b))])
    run.emit(args.output, buf.getvalue())
    return EXIT_OK


def cmd_shkarin(run: _Run) -> int:
    args = run.args
    run.policy = {"a": args.a, "b": args.b, "c": args.c}
    v = shkarin_oracle(args.a, args.b, args.c)
    run.emit(args.output, dumps(v.to_json()))
    return _verdict_exit(args, v.status)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hardy-toeplitz",
                description="Spectra, eigenvectors and hypercyclicity of Toeplitz operators "
                            "with symbol p(1/z) + phi(z) on H^2.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, symbol=True):
        if symbol:
            sp.add_argument("symbol", help="symbol JSON file")
        sp.add_argument("-o", "--output", help="output path (default: stdout where possible)")
        sp.add_argument("--manifest", help="write a run manifest JSON here")
        return sp

    def verdict_flags(sp):
        sp.add_argument("--require-definitive", action="store_true",
                        help="exit 2 when the verdict is UNDECIDED")

    def sampling(sp):
        sp.add_argument("--box", type=float, help="half-width of the sampling box")
        sp.add_argument("--delta", type=float, help="offset of the circles 1 +- delta")
        sp.add_argument("--samples", type=int, help="samples on those circles")

    sp = common(sub.add_parser("decide", help="three-valued hypercyclicity verdict"))
    sampling(sp)
    verdict_flags(sp)
    sp.set_defaults(func=cmd_decide)

    sp = common(sub.add_parser("analyze", help="valence, classification and verdict report"))
    sampling(sp)
    verdict_flags(sp)
    sp.add_argument("--res", type=int, help="classification grid resolution (default 64)")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_analyze)

    sp = common(sub.add_parser("portrait", help="spectral portrait as a binary PGM"))
    sp.add_argument("--box", type=float, help="half-width of the square box")
    sp.add_argument("--res", type=int, help="pixels per side (default 256)")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_portrait)

    sp = common(sub.add_parser("eig", help="eigenvector coefficients"))
    sp.add_argument("--lambda", dest="lam", type=parse_complex, required=True)
    sp.add_argument("--q", type=parse_complex, action="append",
                    help="numerator coefficient, ascending; repeat per coefficient")
    sp.add_argument("--trunc", type=int, help="series length (default: tail-bounded)")
    sp.set_defaults(func=cmd_eig)

    sp = common(sub.add_parser("resolvent", help="solve T f - lambda f = g"))
    sp.add_argument("--lambda", dest="lam", type=parse_complex, required=True)
    sp.add_argument("--g", type=parse_complex, action="append",
                    help="right-hand side coefficient, ascending; repeat per coefficient")
    sp.add_argument("--trunc", type=int, help="series length (default 512)")
    sp.set_defaults(func=cmd_resolvent)

    sp = common(sub.add_parser("adjoint-eig", help="adjoint eigenvector from over-valence"))
    sp.add_argument("--mu", type=parse_complex, required=True)
    sp.add_argument("--trunc", type=int, help="vector length (default 256)")
    sp.set_defaults(func=cmd_adjoint)

    sp = common(sub.add_parser("complete", help="eigenvector span completeness residuals"))
    sp.add_argument("--lambda", dest="lam", type=parse_complex, required=True,
                    help="centre of the eigenvalue disc")
    sp.add_argument("--radius", type=float, required=True)
    sp.add_argument("--K", type=int, default=40)
    sp.add_argument("--targets", type=int, default=5, help="test e_0 .. e_(targets-1)")
    sp.add_argument("--trunc", type=int, help="vector length (default 128)")
    sp.set_defaults(func=cmd_complete)

    sp = common(sub.add_parser("orbit", help="orbit witness for gamma times the backward shift"),
                symbol=False)
    sp.add_argument("--gamma", type=parse_complex, required=True)
    sp.add_argument("--eps", type=float, default=0.01)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n-targets", type=int, default=10)
    sp.add_argument("--degree", type=int, default=4)
    sp.set_defaults(func=cmd_orbit)

    sp = common(sub.add_parser("oracle-shkarin", help="closed-form verdict for a/z + b + c z"),
                symbol=False)
    sp.add_argument("--a", type=parse_complex, required=True)
    sp.add_argument("--b", type=parse_complex, default=0j)
    sp.add_argument("--c", type=parse_complex, default=0j)
    verdict_flags(sp)
    sp.set_defaults(func=cmd_shkarin)
    return p


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    r = _Run(args, argv)
    t0 = time.perf_counter()
    try:
        code = args.func(r)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except LeadingCoefficientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LEADING_ZERO
    except CapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except SymbolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except PreconditionError as exc:
        print(f"error: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (RootFindingError, np.linalg.LinAlgError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.manifest:
        m = RunManifest(args.command, r.argv, r.input_hash, r.policy,
                        round(time.perf_counter() - t0, 6), r.outputs)
        write_atomic(args.manifest, dumps(m.to_json()))
    return code


def main() -> None:
    raise SystemExit(run())
