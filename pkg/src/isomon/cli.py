"""Command-line surface: descriptor ingestion, dispatch, reports.

Verbs: validate | invariants | expand | flow | monodromy | tau | check.
Exit codes: 0 pass, 1 certificate failure, 2 input error, 3 numerical
abort.  Set ISOMON_LOG=debug|info for progress logging on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .descriptor import lax_to_descriptor, load_system, load_system_file
from .errors import (CertificateError, DegenerateSpectrumError,
                     GradientPairingError, InputError, IsomonError,
                     NumericalAbortError, PathError, ResonanceError,
                     ValidationError)
from .flows import integrate_flow
from .lax import INF, LaxMatrix
from .monodromy import invariance_certificate, monodromy_set, \
    residue_determinant_check
from .poisson import LoopElement, bracket_functions, gradient_loop
from .presets import make_preset, preset_names
from .reports import emit_json, emit_trajectory_csv, run_manifest, \
    trajectory_rows
from .series import MatrixSeries
from .spectral import extract_invariants, root_certificate
from .tau import (closedness_certificate, schlesinger_two_pole_log_tau,
                  tau_accumulate)

log = logging.getLogger("isomon")

_PRESET_DEFAULTS = {
    "pii": {"x1": 1.0, "x2": 1.0, "y1": 1.0, "y2": 1.0, "t": 0.0},
    "pii2": {"u1": 0.4, "u2": -0.3, "v1": 0.9, "v2": 0.2, "a": 1.1,
             "w": 0.0, "t1": 0.5, "t2": -0.8},
    "schlesinger": {
        "locs": [0.0, 1.0],
        "residues": [[[0.20, 0.10], [-0.30, 0.15]],
                     [[-0.10, 0.25], [0.20, 0.05]]],
    },
    "fuchsian-const": {
        "leading": [0.4, -0.8],
        "locs": [0.0, 1.0],
        "residues": [[[0.20, 0.10], [-0.30, 0.15]],
                     [[-0.10, 0.25], [0.20, 0.05]]],
    },
}


def _load(args):
    if args.path and args.preset:
        raise InputError("give either --path or --preset, not both")
    if args.path:
        lax, preset = load_system_file(args.path)
        log.info("loaded %s: r=%d, %d finite poles, d_inf=%d",
                 args.path, lax.r, len(lax.poles), lax.infinity.d)
        return lax, preset
    if args.preset:
        if args.preset not in _PRESET_DEFAULTS:
            raise InputError(
                f"unknown preset {args.preset!r}; known: {preset_names()}"
            )
        preset = make_preset(args.preset, _PRESET_DEFAULTS[args.preset])
        log.info("built preset %s with default coordinates", args.preset)
        return preset.lax, preset
    raise InputError("a system is required: --path FILE or --preset NAME")


def _parse_flow_param(text: str, preset):
    if preset is not None and text in preset.flows:
        return preset.flow_params(text), text
    parts = text.split(":")
    try:
        if parts[0] == "c" and len(parts) == 2:
            return [(1.0, ("c", int(parts[1]) - 1))], text
        if parts[0] == "t" and len(parts) == 4:
            chart = INF if parts[1] == "inf" else int(parts[1]) - 1
            return [(1.0, ("t", chart, int(parts[2]), int(parts[3]) - 1))], text
    except ValueError:
        pass
    hint = f" or a flow of the preset {sorted(preset.flows)}" if preset else ""
    raise InputError(
        f"cannot parse flow parameter {text!r}; expected c:NU or "
        f"t:CHART:J:A with 1-based indices and chart 'inf'{hint}"
    )


def _param_label(p) -> str:
    if p[0] == "c":
        return f"c[{p[1] + 1}]"
    chart = "inf" if p[1] == INF else str(p[1] + 1)
    return f"t[{chart}][{p[2]}][{p[3] + 1}]"


# -- verb handlers ---------------------------------------------------------------


def cmd_validate(args) -> int:
    lax, _ = _load(args)
    checks = lax.validate()
    ok = all(rec["pass"] for rec in checks)
    payload = {
        "manifest": run_manifest("validate", paths=[args.path] if args.path else []),
        "checks": checks,
        "pass": ok,
    }
    emit_json(payload, args.out)
    return 0 if ok else 2


def cmd_invariants(args) -> int:
    lax, _ = _load(args)
    table = extract_invariants(lax, args.depth)
    payload = {
        "manifest": run_manifest("invariants", depth=args.depth,
                                 paths=[args.path] if args.path else []),
        "invariants": table.to_json_dict(),
        "root_residual": root_certificate(lax, args.depth),
    }
    emit_json(payload, args.out)
    return 0


def cmd_expand(args) -> int:
    lax, _ = _load(args)
    out = {}
    for chart in lax.charts():
        depth = args.depth if args.depth is not None else lax.default_depth(chart)
        jet = lax.local_expansion(chart, depth)
        label = "inf" if chart == INF else f"c[{chart + 1}]"
        out[label] = {
            "val": jet.val,
            "coeffs": [[[[v.real, v.imag] for v in row] for row in m]
                       for m in jet.coeffs],
        }
    payload = {
        "manifest": run_manifest("expand", depth=args.depth,
                                 paths=[args.path] if args.path else []),
        "expansions": out,
    }
    emit_json(payload, args.out)
    return 0


def cmd_flow(args) -> int:
    lax, preset = _load(args)
    params, label = _parse_flow_param(args.param, preset)
    tol = args.tol if args.tol is not None else 1e-9
    result = integrate_flow(lax, params, span=args.span, rtol=tol,
                            atol=tol * 1e-3, n_checkpoints=args.checkpoints)
    payload = {
        "manifest": run_manifest("flow", tol=tol,
                                 paths=[args.path] if args.path else [],
                                 extra={"param": label, "span": args.span}),
        "final": lax_to_descriptor(result.lax),
        "log_tau": [result.log_tau.real, result.log_tau.imag],
        "shape_residual": result.residual_max,
        "casimir_drift": result.casimir_drift,
    }
    if args.out:
        emit_trajectory_csv(result.records, args.out)
        payload["trajectory_csv"] = args.out
        emit_json(payload, None)
    else:
        header, rows = trajectory_rows(result.records)
        payload["trajectory"] = {"columns": header, "rows": rows}
        emit_json(payload, None)
    return 0


def cmd_monodromy(args) -> int:
    lax, _ = _load(args)
    if not lax.poles:
        raise InputError("monodromy needs at least one finite pole")
    tol = args.tol if args.tol is not None else 1e-10
    mset = monodromy_set(lax, rtol=tol, atol=tol * 1e-2)
    payload = {
        "manifest": run_manifest("monodromy", tol=tol,
                                 paths=[args.path] if args.path else []),
        "monodromy": mset.to_json_dict(),
        "det_residual": residue_determinant_check(lax, mset),
    }
    emit_json(payload, args.out)
    return 0


def cmd_tau(args) -> int:
    lax, preset = _load(args)
    params, label = _parse_flow_param(args.param, preset)
    tol = args.tol if args.tol is not None else 1e-11
    result = integrate_flow(lax, params, span=args.span, rtol=tol,
                            atol=tol * 1e-2, n_checkpoints=args.checkpoints)
    samples = tau_accumulate(result, params)
    payload = {
        "manifest": run_manifest("tau", tol=tol,
                                 paths=[args.path] if args.path else [],
                                 extra={"param": label, "span": args.span}),
        "samples": [
            {
                "s": smp.s,
                "components": {_param_label(p): [v.real, v.imag]
                               for p, v in smp.h_components.items()},
                "log_tau": [smp.log_tau.real, smp.log_tau.imag],
            }
            for smp in samples
        ],
        "ode_log_tau": [result.log_tau.real, result.log_tau.imag],
        "route_gap": abs(samples[-1].log_tau - result.log_tau),
    }
    emit_json(payload, args.out)
    return 0


# -- property suites --------------------------------------------------------------


def _random_loop_element(lax: LaxMatrix, rng) -> LoopElement:
    def crand(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    fins = {}
    for nu, pole in enumerate(lax.poles):
        fins[nu] = MatrixSeries(0, crand(pole.d + 2, lax.r, lax.r))
    inf_jet = None
    if lax.infinity.d:
        inf_jet = MatrixSeries(0, crand(lax.infinity.d + 2, lax.r, lax.r))
    return LoopElement(lax, fins, inf_jet)


def _suite_poisson(lax: LaxMatrix, rng, tol: float) -> list:
    table = extract_invariants(lax)
    scale = max(1.0, lax.max_abs())
    worst_casimir = 0.0
    probes = [_random_loop_element(lax, rng) for _ in range(5)]
    for key in table.central_keys():
        elem = gradient_loop(lax, "t", key[0], key[1], key[2])
        for probe in probes:
            worst_casimir = max(
                worst_casimir, abs(bracket_functions(lax, elem, probe)) / scale
            )
    grads = [gradient_loop(lax, "H_t", k[0], k[1], k[2])
             for k in table.hamiltonians]
    grads += [gradient_loop(lax, "H_c", nu) for nu in table.h_c]
    worst_pair = 0.0
    for i in range(len(grads)):
        for k in range(i + 1, len(grads)):
            worst_pair = max(
                worst_pair, abs(bracket_functions(lax, grads[i], grads[k])) / scale
            )
    return [
        {"name": "casimir_bracket", "value": worst_casimir, "tol": tol},
        {"name": "hamiltonian_commutation", "value": worst_pair, "tol": tol},
    ]


def _suite_monodromy(lax: LaxMatrix, rng, tol: float) -> list:
    if not lax.poles:
        raise InputError("monodromy suite needs at least one finite pole")
    params = [(1.0, ("c", 0))]
    cert = invariance_certificate(lax, params, span=0.2, n_checkpoints=3)
    frozen = invariance_certificate(lax, params, span=0.2, n_checkpoints=3,
                                    freeze=True)
    out = [
        {"name": "monodromy_drift", "value": cert["max_drift"], "tol": tol},
        {"name": "det_residual", "value": cert["det_check"], "tol": 1e-8},
        {"name": "frozen_control_drift", "value": frozen["max_drift"],
         "tol": 1e-3, "direction": "above"},
    ]
    return out


def _flow_directions(lax: LaxMatrix, preset) -> list:
    if preset is not None:
        return [preset.flow_params(name) for name in sorted(preset.flows)]
    table = extract_invariants(lax)
    dirs = [[(1.0, ("c", nu))] for nu in range(len(lax.poles))]
    dirs += [[(1.0, ("t",) + key)] for key in sorted(
        table.hamiltonians, key=lambda k: (str(k[0]), k[1], k[2]))]
    return dirs


def _suite_tau(lax: LaxMatrix, preset, rng, tol: float) -> list:
    out = []
    dirs = _flow_directions(lax, preset)
    if len(dirs) >= 2:
        asym = closedness_certificate(lax, dirs[0], dirs[1])
        out.append({"name": "closedness_asymmetry", "value": asym, "tol": tol})
    else:
        out.append({"name": "closedness_asymmetry", "value": 0.0, "tol": tol})
    if len(lax.poles) == 2 and all(p.d == 0 for p in lax.poles) \
            and lax.infinity.d == 0:
        res = integrate_flow(lax, [(1.0, ("c", 0))], span=0.2, rtol=1e-12,
                             atol=1e-14)
        closed = schlesinger_two_pole_log_tau(lax, res.lax)
        out.append({"name": "tau_closed_form",
                    "value": abs(res.log_tau - closed), "tol": 1e-7})
    return out


_SUITES = ("poisson", "monodromy", "tau", "all")


def cmd_check(args) -> int:
    lax, preset = _load(args)
    if args.suite not in _SUITES:
        raise InputError(f"unknown suite {args.suite!r}; known: {_SUITES}")
    rng = np.random.default_rng(args.seed)
    tol = args.tol
    certs = []
    if args.suite in ("poisson", "all"):
        certs += _suite_poisson(lax, rng, tol if tol is not None else 1e-8)
    if args.suite == "monodromy" or (args.suite == "all" and lax.poles):
        certs += _suite_monodromy(lax, rng, tol if tol is not None else 1e-6)
    if args.suite in ("tau", "all"):
        certs += _suite_tau(lax, preset, rng, tol if tol is not None else 1e-5)
    for cert in certs:
        if cert.get("direction") == "above":
            cert["pass"] = bool(cert["value"] >= cert["tol"])
        else:
            cert["pass"] = bool(cert["value"] <= cert["tol"])
    ok = all(c["pass"] for c in certs)
    payload = {
        "manifest": run_manifest("check", seed=args.seed, tol=tol,
                                 paths=[args.path] if args.path else [],
                                 extra={"suite": args.suite}),
        "certificates": certs,
        "pass": ok,
    }
    emit_json(payload, args.out)
    if not ok:
        raise CertificateError(
            "; ".join(f"{c['name']}={c['value']:.3e}" for c in certs
                      if not c["pass"])
        )
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isomon",
        description="Rational Lax matrices: invariants, deformation flows, "
                    "monodromy and tau certificates.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--path", help="descriptor JSON file")
    common.add_argument("--preset", help=f"builtin system {preset_names()}")
    common.add_argument("--depth", type=int, default=None,
                        help="series truncation depth")
    common.add_argument("--tol", type=float, default=None,
                        help="primary tolerance of the verb")
    common.add_argument("--seed", type=int, default=0, help="RNG seed")
    common.add_argument("--out", default=None, help="output file (default stdout)")

    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("validate", parents=[common]).set_defaults(fn=cmd_validate)
    sub.add_parser("invariants", parents=[common]).set_defaults(fn=cmd_invariants)
    sub.add_parser("expand", parents=[common]).set_defaults(fn=cmd_expand)

    flow = sub.add_parser("flow", parents=[common])
    flow.add_argument("param", help="c:NU | t:CHART:J:A | preset flow name")
    flow.add_argument("--span", type=float, default=1.0)
    flow.add_argument("--checkpoints", type=int, default=9)
    flow.set_defaults(fn=cmd_flow)

    sub.add_parser("monodromy", parents=[common]).set_defaults(fn=cmd_monodromy)

    tau = sub.add_parser("tau", parents=[common])
    tau.add_argument("param", help="c:NU | t:CHART:J:A | preset flow name")
    tau.add_argument("--span", type=float, default=1.0)
    tau.add_argument("--checkpoints", type=int, default=33)
    tau.set_defaults(fn=cmd_tau)

    check = sub.add_parser("check", parents=[common])
    check.add_argument("suite", help="poisson | monodromy | tau | all")
    check.set_defaults(fn=cmd_check)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("ISOMON_LOG", "").lower()
    if level in ("debug", "info", "warning", "error"):
        logging.basicConfig(level=getattr(logging, level.upper()),
                            stream=sys.stderr,
                            format="%(name)s %(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CertificateError as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return 1
    except (InputError, ValidationError, PathError,
            DegenerateSpectrumError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (NumericalAbortError, ResonanceError, GradientPairingError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    except IsomonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
