"""Command-line interface.

Subcommands: certify, decompose, bounds, counterexample, selftest.
Exit codes: 0 on success, 1 on input errors, 2 when the algorithm cannot
certify (a Fail/NotUnique outcome), so scripts can tell "not certified"
apart from "bad input".  All output is JSON; with a fixed seed and
--threads 1 equal inputs produce byte-identical bytes.  The environment
variable VSX_CONFIG may point to a JSON config file supplying defaults;
explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .decompose import (
    block_term_decompose,
    decomposition_to_json,
    tensor_decompose,
    variety_decompose,
    waring_decompose,
)
from .errors import LinsectError, NonProductW, NotSymmetric, NotUnique, RankMismatch
from .harness import (
    contraction_dim_suite,
    genericity_grid,
    overlap_counterexample,
)
from .intersect import (
    Subspace,
    intersect_components,
    rank_bound,
    subspace_from_json,
)
from .jsonio import dumps_canonical, vector_to_json
from .numlin import TolerancePolicy, eig_pairs, pseudoinverse
from .seeding import gaussian, rng_for
from .simdiag import simultaneous_diagonalize
from .validation import COMPLEX, REAL, field_dtype
from .varieties import (
    VarietySpec,
    generators,
    membership,
    sample_point,
    spec_from_json,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAIL = 2

_ALGORITHMIC = (NotUnique, RankMismatch, NonProductW)


class _InputError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise _InputError(f"cannot read {path}: {exc}") from exc


def _config_defaults() -> dict:
    path = os.environ.get("VSX_CONFIG")
    if not path:
        return {}
    config = _load_json(path)
    if not isinstance(config, dict):
        raise _InputError(f"config file {path} must hold a JSON object")
    return config


def _merge_option(args_value, config: dict, key: str, fallback):
    if args_value is not None:
        return args_value
    if key in config:
        return config[key]
    return fallback


class _Options:
    """Flag/config/default resolution shared by every subcommand."""

    def __init__(self, args: argparse.Namespace):
        config = _config_defaults()
        self.field = _merge_option(args.field, config, "field", COMPLEX)
        if self.field not in (REAL, COMPLEX):
            raise _InputError(f"field must be R or C, got {self.field!r}")
        self.seed = int(_merge_option(args.seed, config, "seed", 0))
        self.threads = int(_merge_option(args.threads, config, "threads", 1))
        self.out = _merge_option(args.out, config, "out", None)
        residual = float(_merge_option(args.tol, config, "tol", 1e-8))
        eig_gap = float(_merge_option(args.eig_gap, config, "eig_gap", 1e-7))
        retries = int(_merge_option(args.retries, config, "retries", 5))
        try:
            self.tol = TolerancePolicy(
                residual_tol=residual, eig_gap_rel_tol=eig_gap, max_retries=retries
            )
        except ValueError as exc:
            raise _InputError(str(exc)) from exc

    def emit(self, payload: dict) -> None:
        text = dumps_canonical(payload)
        if self.out:
            with open(self.out, "w", encoding="utf-8") as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)


def _file_field(payload: dict, options: _Options) -> str:
    file_field = payload.get("field")
    if file_field is None:
        return options.field
    if file_field not in (REAL, COMPLEX):
        raise _InputError(f"file field must be R or C, got {file_field!r}")
    return file_field


def _load_spec(path: str, options: _Options) -> VarietySpec:
    payload = _load_json(path)
    payload.setdefault("field", options.field)
    try:
        return spec_from_json(payload)
    except (LinsectError, KeyError, ValueError, TypeError) as exc:
        raise _InputError(f"bad variety spec in {path}: {exc}") from exc


def _load_subspace(path: str, options: _Options) -> Subspace:
    payload = _load_json(path)
    payload.setdefault("field", options.field)
    try:
        return subspace_from_json(payload)
    except (LinsectError, KeyError, ValueError, TypeError) as exc:
        raise _InputError(f"bad subspace in {path}: {exc}") from exc


def _load_tensor(path: str, options: _Options) -> np.ndarray:
    payload = _load_json(path)
    field = _file_field(payload, options)
    try:
        dims = tuple(int(d) for d in payload["dims"])
        entries = payload["entries"]
        from .jsonio import scalar_from_json

        flat = np.array(
            [scalar_from_json(v, field) for v in entries], dtype=field_dtype(field)
        )
        if flat.size != int(np.prod(dims)):
            raise ValueError(f"expected {int(np.prod(dims))} entries, got {flat.size}")
        return flat.reshape(dims)
    except (KeyError, ValueError, TypeError) as exc:
        raise _InputError(f"bad tensor in {path}: {exc}") from exc


def _cmd_certify(args: argparse.Namespace) -> int:
    options = _Options(args)
    subspace = _load_subspace(args.subspace, options)
    spec = _load_spec(args.variety, options)
    components = generators(spec)
    result = intersect_components(
        subspace, components, seed=options.seed, tol=options.tol, threads=options.threads
    )
    field = subspace.field
    per_component = [
        {"status": res.status, "stage": res.stage, "reason": res.reason}
        for res in result.per_component
    ]
    if result.status == "trivial_all":
        options.emit(
            {"verdict": "entangled", "components": per_component, "field_complete": all(
                res.field_complete for res in result.per_component
            )}
        )
        return EXIT_OK
    if result.status == "found_elements":
        options.emit(
            {
                "verdict": "elements",
                "elements": [vector_to_json(v, field) for v in result.elements],
                "components": per_component,
            }
        )
        return EXIT_OK
    options.emit({"verdict": "inconclusive", "components": per_component})
    return EXIT_FAIL


def _cmd_decompose(args: argparse.Namespace) -> int:
    options = _Options(args)
    tensor = _load_tensor(args.tensor, options)
    mode = args.mode
    field = COMPLEX if np.iscomplexobj(tensor) else REAL
    try:
        if mode == "tensor3":
            if tensor.ndim != 3:
                raise _InputError(f"tensor3 needs 3 modes, got {tensor.ndim}")
            dec = tensor_decompose(tensor, None, options.seed, options.tol)
        elif mode == "tensorm":
            dec = tensor_decompose(tensor, None, options.seed, options.tol)
        elif mode == "waring":
            dec = waring_decompose(tensor, options.seed, options.tol)
        elif mode.startswith("aided:"):
            try:
                r = int(mode.split(":", 1)[1])
            except ValueError as exc:
                raise _InputError(f"bad aided mode {mode!r}") from exc
            if tensor.ndim != 3:
                raise _InputError(f"aided decomposition needs 3 modes, got {tensor.ndim}")
            dec = block_term_decompose(tensor, r, options.seed, options.tol)
        elif mode == "xw":
            if not args.variety:
                raise _InputError("mode xw needs --variety")
            if tensor.ndim != 2:
                raise _InputError(f"xw decomposition needs a matrix, got {tensor.ndim} modes")
            spec = _load_spec(args.variety, options)
            dec = variety_decompose(tensor, spec, options.seed, options.tol)
        else:
            raise _InputError(f"unknown mode {mode!r}")
    except NotSymmetric as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _ALGORITHMIC as exc:
        options.emit({"verdict": "fail", "reason": str(exc), "type": type(exc).__name__})
        return EXIT_FAIL
    options.emit(decomposition_to_json(dec, field))
    return EXIT_OK


def _cmd_bounds(args: argparse.Namespace) -> int:
    options = _Options(args)
    spec = _load_spec(args.variety, options)
    rows = []
    for comp in generators(spec):
        rows.append(
            {"n": comp.n, "d": comp.d, "p": comp.p, "rank_bound": rank_bound(comp)}
        )
    options.emit({"kind": spec.kind, "components": rows})
    return EXIT_OK


def _cmd_counterexample(args: argparse.Namespace) -> int:
    options = _Options(args)
    witness = overlap_counterexample(options.seed, canonical=args.canonical, tol=options.tol)
    options.emit(
        {
            "u_basis": [vector_to_json(witness.u_basis[:, j], REAL) for j in range(3)],
            "points": [vector_to_json(p, REAL) for p in witness.points],
            "u1": vector_to_json(witness.u1, REAL),
            "u2": vector_to_json(witness.u2, REAL),
            "witness": vector_to_json(witness.witness, REAL),
            "residual_in_pair_span": witness.residual_in_pair_span,
            "residual_in_uu": witness.residual_in_uu,
            "ok": witness.ok,
        }
    )
    return EXIT_OK if witness.ok else EXIT_FAIL


def _selftest_checks(options: _Options):
    tol = options.tol
    rtol = tol.residual_tol

    def check_pseudoinverse():
        for seed in range(10):
            rng = rng_for(seed, "selftest-pinv")
            m = gaussian(rng, (7, 5), options.field)
            p = pseudoinverse(m, tol)
            if np.linalg.norm(m @ p @ m - m) > rtol * np.linalg.norm(m):
                return False
        return True

    def check_eigen():
        for seed in range(10):
            rng = rng_for(seed, "selftest-eig")
            m = gaussian(rng, (6, 6), options.field)
            values, vectors = eig_pairs(m)
            residual = np.linalg.norm(m @ vectors - vectors * values[None, :], 2)
            if residual > rtol * max(np.linalg.norm(m), 1.0):
                return False
        return True

    def check_symmetric_algebra():
        from . import symtensor as st

        for seed in range(5):
            rng = rng_for(seed, "selftest-sym")
            v = gaussian(rng, 5, options.field)
            w = gaussian(rng, 5, options.field)
            value = st.sym_inner(st.sym_power(v, 3), st.sym_power(w, 3))
            if abs(value - np.vdot(v, w) ** 3) > rtol * max(1.0, abs(value)):
                return False
            contracted = st.hook(st.sym_power(w, 3), v, 1)
            expected = (v @ w) * st.sym_power(w, 2).coeffs
            if np.abs(contracted.coeffs - expected).max() > rtol:
                return False
        return True

    def check_counts():
        specs = [
            VarietySpec.determinantal(3, 3, 1, options.field),
            VarietySpec.segre((2, 2, 2), options.field),
            VarietySpec.slice_rank1((2, 2, 2), options.field),
            VarietySpec.veronese(3, 2, options.field),
        ]
        from .varieties import component_counts

        for spec in specs:
            comps = generators(spec)
            if [c.p for c in comps] != component_counts(spec):
                return False
            for comp in comps:
                from .numlin import rank_from_gram

                if rank_from_gram(comp.row_gram(), tol) != comp.p:
                    return False
        return True

    def check_sampling():
        spec = VarietySpec.determinantal(3, 3, 1, options.field)
        for seed in range(10):
            x = sample_point(spec, seed)
            if not membership(spec, x, tol):
                return False
        return True

    def check_simdiag():
        for seed in range(5):
            rng = rng_for(seed, "selftest-simdiag")
            factors = [gaussian(rng, (k, 3), options.field) for k in (4, 5, 6)]
            tensor = np.einsum("ia,ja,ka->ijk", *factors)
            outcome = simultaneous_diagonalize(tensor, seed, tol)
            if not outcome.ok or outcome.residual > rtol:
                return False
        return True

    def check_grid():
        spec = VarietySpec.determinantal(4, 4, 1, options.field)
        report = genericity_grid(
            [(spec, 2, 0), (spec, 2, 2)], seeds_per_cell=5, tol=tol,
            threads=options.threads,
        )
        return all(rate == 1.0 for rate in report.all_rates)

    def check_decompose():
        rng = rng_for(3, "selftest-decomp")
        factors = [gaussian(rng, (4, 3), options.field) for _ in range(3)]
        tensor = np.einsum("ia,ja,ka->ijk", *factors)
        dec = tensor_decompose(tensor, None, options.seed, tol)
        return dec.residual <= rtol

    def check_hook_bound():
        ok, _ = contraction_dim_suite(
            VarietySpec.determinantal(2, 2, 1, options.field), 4, 3, 1, 8, 10,
            seed=options.seed, tol=tol,
        )
        return ok

    def check_counterexample():
        if not overlap_counterexample(0, canonical=True, tol=tol).ok:
            return False
        return all(overlap_counterexample(s, tol=tol).ok for s in range(3))

    return [
        ("pseudoinverse_identities", check_pseudoinverse),
        ("eig_residuals", check_eigen),
        ("symmetric_algebra", check_symmetric_algebra),
        ("generator_counts", check_counts),
        ("sample_membership", check_sampling),
        ("simultaneous_diagonalization", check_simdiag),
        ("planted_grid", check_grid),
        ("tensor_decomposition", check_decompose),
        ("contraction_bound", check_hook_bound),
        ("overlap_counterexample", check_counterexample),
    ]


def _cmd_selftest(args: argparse.Namespace) -> int:
    options = _Options(args)
    results = []
    all_ok = True
    for name, check in _selftest_checks(options):
        try:
            ok = bool(check())
        except LinsectError:
            ok = False
        except Exception:  # a crash is a failure, not an input error
            ok = False
        results.append({"check": name, "ok": ok})
        all_ok &= ok
    options.emit({"ok": all_ok, "checks": results})
    return EXIT_OK if all_ok else EXIT_FAIL


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--field", choices=[REAL, COMPLEX], default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None, help="residual tolerance")
    parser.add_argument("--eig-gap", dest="eig_gap", type=float, default=None)
    parser.add_argument("--retries", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linsect",
        description="Certified linear sections of conic varieties and unique decompositions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_certify = sub.add_parser("certify", help="certify U intersect X or list its elements")
    p_certify.add_argument("subspace", help="subspace JSON file")
    p_certify.add_argument("variety", help="variety spec JSON file")
    _add_common(p_certify)
    p_certify.set_defaults(func=_cmd_certify)

    p_dec = sub.add_parser("decompose", help="certified unique decompositions")
    p_dec.add_argument("tensor", help="tensor JSON file")
    p_dec.add_argument(
        "--mode", required=True,
        help="tensor3 | tensorm | waring | aided:R | xw (xw needs --variety)",
    )
    p_dec.add_argument("--variety", default=None, help="variety spec JSON (mode xw)")
    _add_common(p_dec)
    p_dec.set_defaults(func=_cmd_decompose)

    p_bounds = sub.add_parser("bounds", help="generator counts and subspace bounds")
    p_bounds.add_argument("variety", help="variety spec JSON file")
    _add_common(p_bounds)
    p_bounds.set_defaults(func=_cmd_bounds)

    p_ce = sub.add_parser("counterexample", help="emit the span-overlap witness")
    p_ce.add_argument("--canonical", action="store_true")
    _add_common(p_ce)
    p_ce.set_defaults(func=_cmd_counterexample)

    p_self = sub.add_parser("selftest", help="run reduced invariant suites")
    _add_common(p_self)
    p_self.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LinsectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
