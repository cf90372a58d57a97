"""Command-line front end: generate example surfaces, run analyses, emit reports.

Exit codes: 0 success, 1 a requested pass/fail check failed, 2 usage or input
error.  Reports are canonical JSON (see reports.py) and byte-identical across
runs for identical inputs; ``--serial`` (or the VARIFOLD_LAB_THREADS env var)
caps the BLAS thread pools before the numeric stack loads.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .reports import (
    TOLERANCE_PROFILES,
    TOOL_NAME,
    collect_flags,
    new_report,
    write_report,
)


def _parse_point(text: str):
    import numpy as np

    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"malformed point spec {text!r}: need x,y,z")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ValueError(f"malformed point spec {text!r}: need three numbers") from None


def _parse_link_spec(text: str):
    head, sep, tail = text.rpartition(":")
    if not sep:
        raise ValueError(f"malformed link spec {text!r}: need x,y,z:r")
    point = _parse_point(head)
    try:
        r = float(tail)
    except ValueError:
        raise ValueError(f"malformed link spec {text!r}: bad radius {tail!r}") from None
    if r <= 0:
        raise ValueError(f"malformed link spec {text!r}: radius must be positive")
    return point, r


def _parse_disk_spec(text: str):
    head, sep, tail = text.rpartition(":")
    parts = head.split(",")
    if not sep or len(parts) != 2:
        raise ValueError(f"malformed disk spec {text!r}: need cx,cy:r")
    try:
        return [float(parts[0]), float(parts[1])], float(tail)
    except ValueError:
        raise ValueError(f"malformed disk spec {text!r}: need numbers") from None


# ---------------------------------------------------------------------------
# generate


def _generator_kwargs(args) -> dict:
    name = args.name
    if name == "sphere":
        return {"R": args.radius, "level": args.level}
    if name == "cap":
        return {"R": args.radius, "theta": args.theta, "level": args.level}
    if name == "double-bubble":
        return {"theta2": args.theta2, "rho": args.rho, "level": args.level}
    if name == "double-bubble-flat":
        return {"rho": args.rho, "level": args.level}
    if name == "triple-bubble":
        return {"level": args.level}
    if name == "branched-patch":
        return {"delta": args.delta, "rho0": args.rho0, "level": args.level}
    if name == "singular-pair":
        disks = [_parse_disk_spec(d) for d in (args.disk or [])]
        return {
            "disk_centers": [d[0] for d in disks],
            "disk_radii": [d[1] for d in disks],
            "delta": args.delta,
            "level": args.level,
        }
    if name == "flat-disk":
        return {"rho": args.rho, "level": args.level}
    if name == "torus":
        return {"R": args.radius, "r": args.tube_radius, "level": args.level}
    raise ValueError(f"unknown generator {name!r}")


def cmd_generate(args) -> int:
    from .generators import GENERATORS
    from .mesh import save_varifold

    gen = GENERATORS[args.name]
    out = gen(**_generator_kwargs(args))
    save_varifold(out.varifold, args.out, analytic=out.analytic)
    v = out.varifold
    print(f"wrote {args.out}: {v.num_vertices} vertices, {v.num_faces} faces")
    return 0


# ---------------------------------------------------------------------------
# analyze


def _expected_density(analytic: dict | None, point) -> dict | None:
    """Reference density entry at ``point`` from the mesh's analytic block.

    Returns a dict with "density" and optionally "r_max" (a ladder cap for
    points where coarser radii would see more sheets than the limit does).
    """
    import numpy as np

    if not analytic:
        return None
    p = np.asarray(point, dtype=np.float64)
    for dp in analytic.get("density_points", []):
        q = np.asarray(dp["point"], dtype=np.float64)
        if np.linalg.norm(p - q) < 1e-9 * max(1.0, float(np.linalg.norm(q))):
            return dp
    for jc in analytic.get("junction_circles", []):
        c = np.asarray(jc["center"], dtype=np.float64)
        n = np.asarray(jc["normal"], dtype=np.float64)
        n = n / np.linalg.norm(n)
        w = p - c
        h = float(w @ n)
        a = float(np.linalg.norm(w - h * n))
        if math.hypot(a - float(jc["radius"]), h) < 1e-9 * max(1.0, float(jc["radius"])):
            return {"density": float(jc.get("density", 1.5))}
    return None


def cmd_analyze(args) -> int:
    import numpy as np

    from . import boundary as bnd
    from . import blowup, curvature, mesh, nets

    requested = (
        args.energy or args.density or args.link or args.topology
        or args.liyau or args.helfrich is not None or args.boundary
    )
    if not requested:
        raise ValueError("no analyses requested (try --energy, --topology, ...)")

    v, analytic = mesh.load_mesh_file(args.mesh)
    tol = TOLERANCE_PROFILES[args.tolerance_profile]
    doc = new_report(args.mesh, args.tolerance_profile)
    blocks = doc["analyses"]

    if args.energy:
        w = curvature.willmore_energy(v)
        block: dict = {"willmore_energy": w, "area": mesh.total_mass(v)}
        ref = (analytic or {}).get("willmore_energy")
        if ref is not None:
            err = abs(w - ref) / abs(ref) if ref else abs(w)
            block.update(
                analytic_willmore=float(ref),
                rel_error=err,
                tolerance=tol["energy_rel"],
                passed=bool(err <= tol["energy_rel"]),
            )
        blocks["energy"] = block

    if args.density:
        rows = []
        for spec in args.density:
            p = _parse_point(spec)
            ref = _expected_density(analytic, p)
            rep = blowup.density(v, p, r_max=(ref or {}).get("r_max"))
            row = {
                "point": p.tolist(),
                "theta": rep.theta,
                "error_bar": rep.error_bar,
                "model": rep.model,
                "classification": rep.classification,
                "ladder": {"radii": rep.radii.tolist(), "ratios": rep.ratios.tolist()},
            }
            if ref is not None:
                err = abs(rep.theta - float(ref["density"]))
                row.update(
                    expected=float(ref["density"]),
                    abs_error=err,
                    tolerance=tol["density_abs"],
                    passed=bool(err <= tol["density_abs"]),
                )
            rows.append(row)
        blocks["density"] = rows

    if args.link:
        rows = []
        for spec in args.link:
            p, r = _parse_link_spec(spec)
            link = blowup.spherical_link(v, p, r)
            m = nets.match_link(link)
            rows.append({
                "point": p.tolist(),
                "radius": r,
                "total_length": link.total_length,
                "junction_count": link.junction_count,
                "density_estimate": link.density_estimate,
                "components": len(link.polylines),
                "match": m["match"],
                "matched_length": m["matched_length"],
                "residual": m["residual"],
                "tolerance": tol["link_match_abs"],
                "passed": bool(
                    m["matched_length"] is not None
                    and m["residual"] <= tol["link_match_abs"]
                ),
            })
        blocks["link"] = rows

    if args.topology:
        rep = curvature.euler_characteristic(v)
        blocks["topology"] = {
            "num_vertices": rep.num_vertices,
            "num_edges": rep.num_edges,
            "num_faces": rep.num_faces,
            "chi": rep.chi,
            "defect_chi": rep.defect_chi,
            "orientable": rep.orientable,
            "connected_components": rep.connected_components,
            "genus": rep.genus,
            "tolerance": 1e-6,
            "passed": bool(abs(rep.defect_chi - rep.chi) <= 1e-6),
        }

    if args.liyau:
        pts = [dp["point"] for dp in (analytic or {}).get("density_points", [])]
        if not pts:
            idx = np.unique(np.linspace(0, v.num_vertices - 1, 8).astype(int))
            pts = [v.vertices[i] for i in idx]
        rep = blowup.li_yau_check(v, pts, eps=tol["liyau_gap"])
        blocks["liyau"] = {
            "n_samples": len(pts),
            "theta_max": rep.theta_max,
            "willmore_over_4pi": rep.willmore_over_4pi,
            "gap": rep.gap,
            "tolerance": tol["liyau_gap"],
            "passed": rep.passed,
        }

    if args.helfrich is not None:
        blocks["helfrich"] = {
            "c0": args.helfrich,
            "value": curvature.helfrich_energy(v, args.helfrich),
        }

    if args.boundary:
        b = bnd.boundary_measure(v)
        blocks["boundary"] = {
            "edge_count": int(len(b.edges)),
            "total_length": b.total_length,
            "closed": bool(len(b.edges) == 0),
        }

    write_report(doc, args.out)
    flags = collect_flags(doc)
    failed = [name for name, ok in flags if not ok]
    if args.out is not None:
        for name, ok in flags:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# net


def cmd_net_catalogue(args) -> int:
    from .nets import catalogue

    entries = catalogue()
    if args.json:
        write_report({"entries": [e.to_dict() for e in entries]}, args.out)
        return 0
    print(f"{'#':>2}  {'name':<42} {'arcs':>4}  {'length':>12}")
    for i, e in enumerate(entries, start=1):
        length = f"{e.length:.8f}" if e.length is not None else "invalid"
        marker = "  < 4*pi" if e.below_4pi else ""
        print(f"{i:>2}  {e.name:<42} {e.n_arcs:>4}  {length:>12}{marker}")
        if e.invalid_as_printed:
            print(f"    note: {e.note}")
    return 0


def cmd_net_relax(args) -> int:
    from . import nets

    net = nets.load_net(args.net)
    res = nets.relax(net, max_iter=args.max_iter, tol=args.tol, trace=True)
    final_len = nets.total_length(res.net)
    final_res = nets.balance_residual(res.net)
    if args.out:
        rows = []
        for (i, j, m), major in zip(res.net.arcs.tolist(), res.net.major.tolist()):
            rows.append([i, j, m, 1] if major else [i, j, m])
        write_report({
            "vertices": res.net.vertices.tolist(),
            "arcs": rows,
            "total_length": final_len,
            "balance_residual": final_res,
            "iterations": res.iterations,
            "converged": res.converged,
            "length_history": res.lengths,
            "residual_history": res.residuals,
        }, args.out)
    print(f"final length {final_len:.12f}  residual {final_res:.3e}  "
          f"iterations {res.iterations}  converged {res.converged}")
    return 0 if res.converged else 1


def cmd_net_match(args) -> int:
    from . import nets

    try:
        doc: object = float(args.link)
    except ValueError:
        with open(args.link) as fh:
            doc = json.load(fh)
    if isinstance(doc, dict) and "lengths" in doc:
        length = math.fsum(float(x) for x in doc["lengths"])
    elif isinstance(doc, dict) and "total_length" in doc:
        length = float(doc["total_length"])
    elif isinstance(doc, (int, float)):
        length = float(doc)
    else:
        raise nets.NetError(
            f"link file {args.link!r} needs 'total_length' or 'lengths'"
        )
    m = nets.match_link(length)
    print(f"{m['match']}, density {m['density']:g}")
    if args.out:
        write_report(m, args.out)
    return 0


# ---------------------------------------------------------------------------
# boundary


def cmd_boundary_circle_integral(args) -> int:
    from . import boundary as bnd

    datum = bnd.load_datum(args.datum)
    x0 = _parse_point(args.point)
    per = [bnd.circle_conormal_integral(c, x0) for c in datum.circles]
    total = math.fsum(per)
    doc: dict = {"point": x0.tolist(), "per_circle": per, "total": total}
    if args.quad:
        quad = [
            bnd.circle_conormal_integral_quad(c, x0, n_samples=args.quad)
            for c in datum.circles
        ]
        doc["quad_total"] = math.fsum(quad)
        doc["quad_samples"] = args.quad
        doc["closed_vs_quad"] = abs(doc["total"] - doc["quad_total"])
    print(f"conormal integral {total:.12f}")
    if args.out:
        write_report(doc, args.out)
    return 0


def cmd_boundary_sup(args) -> int:
    from . import boundary as bnd

    datum = bnd.load_datum(args.datum)
    sup = bnd.sup_conormal_integral(datum, grid_n=args.grid)
    x = sup.argmax
    print(f"sup {sup.value:.12f} at ({x[0]:.9f}, {x[1]:.9f}, {x[2]:.9f})")
    if args.out:
        write_report(sup.to_dict(), args.out)
    return 0


def cmd_boundary_admissible(args) -> int:
    from . import boundary as bnd

    datum = bnd.load_datum(args.datum)
    threshold = {"6pi": 6.0 * math.pi, "8pi": 8.0 * math.pi}[args.threshold]
    rep = bnd.admissibility_check(args.p, datum, threshold)
    print(f"P + 2 sup = {rep.total:.9f} vs threshold {rep.threshold:.9f} "
          f"(slack {rep.slack:+.9f})")
    print(f"[{'PASS' if rep.passes_threshold else 'FAIL'}] threshold bound")
    print(f"[{'PASS' if rep.passes_p_bound else 'FAIL'}] P < 4*pi")
    if args.out:
        write_report(rep.to_dict(), args.out)
    return 0 if rep.admissible else 1


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    with open(args.report) as fh:
        doc = json.load(fh)
    tool = doc.get("tool", "?")
    version = doc.get("version", "?")
    source = doc.get("input", {}).get("path", "-")
    print(f"{tool} {version}  input: {source}")
    flags = collect_flags(doc)
    for name, ok in flags:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    if not flags:
        print("no pass/fail checks recorded")
    return 1 if any(not ok for _, ok in flags) else 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Mesh generators and varifold-style analyses for surfaces "
                    "with junctions.",
    )
    parser.add_argument("--serial", action="store_true",
                        help="force single-threaded, bit-deterministic mode")
    sub = parser.add_subparsers(dest="command", required=True)

    gen_names = [
        "sphere", "cap", "double-bubble", "double-bubble-flat", "triple-bubble",
        "branched-patch", "singular-pair", "flat-disk", "torus",
    ]
    g = sub.add_parser("generate", help="write an example mesh with its analytic block")
    g.add_argument("name", choices=gen_names)
    g.add_argument("--radius", type=float, default=1.0,
                   help="sphere/cap radius, or torus center-circle radius")
    g.add_argument("--theta", type=float, default=math.pi / 2, help="cap opening angle")
    g.add_argument("--theta2", type=float, default=0.7,
                   help="double bubble: polar opening of the middle sheet")
    g.add_argument("--rho", type=float, default=1.0, help="junction/disk radius")
    g.add_argument("--delta", type=float, default=0.1, help="graph amplitude")
    g.add_argument("--rho0", type=float, default=1.0, help="branched patch radius")
    g.add_argument("--tube-radius", type=float, default=0.3, help="torus tube radius")
    g.add_argument("--disk", action="append", metavar="CX,CY:R",
                   help="singular-pair contact disk (repeatable)")
    g.add_argument("--level", type=int, default=4, help="refinement level")
    g.add_argument("-o", "--out", required=True, help="output mesh JSON path")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="run analyses on a mesh file and write a report")
    a.add_argument("mesh", help="mesh JSON path")
    a.add_argument("--energy", action="store_true", help="bending energy and area")
    a.add_argument("--density", action="append", metavar="X,Y,Z",
                   help="extrapolated density at a point (repeatable)")
    a.add_argument("--link", action="append", metavar="X,Y,Z:R",
                   help="spherical link at a point and radius (repeatable)")
    a.add_argument("--topology", action="store_true",
                   help="Euler characteristic, orientability, genus")
    a.add_argument("--liyau", action="store_true",
                   help="density bound against energy/(4*pi)")
    a.add_argument("--helfrich", type=float, metavar="C0",
                   help="spontaneous-curvature energy at offset C0")
    a.add_argument("--boundary", action="store_true", help="boundary length summary")
    a.add_argument("--tolerance-profile", choices=sorted(TOLERANCE_PROFILES),
                   default="default")
    a.add_argument("-o", "--out", help="report JSON path (default: stdout)")
    a.set_defaults(func=cmd_analyze)

    n = sub.add_parser("net", help="geodesic nets: catalogue, relax, match")
    nsub = n.add_subparsers(dest="net_command", required=True)
    nc = nsub.add_parser("catalogue", help="print the ten-entry stationary net table")
    nc.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    nc.add_argument("-o", "--out", help="JSON output path (with --json)")
    nc.set_defaults(func=cmd_net_catalogue)
    nr = nsub.add_parser("relax", help="drive a net to stationarity")
    nr.add_argument("net", help="net JSON path")
    nr.add_argument("--max-iter", type=int, default=1000)
    nr.add_argument("--tol", type=float, default=1e-10)
    nr.add_argument("-o", "--out", help="relaxed net + residual history JSON path")
    nr.set_defaults(func=cmd_net_relax)
    nm = nsub.add_parser("match", help="classify a link length against the catalogue")
    nm.add_argument("link", help="link JSON path ('total_length' or 'lengths')")
    nm.add_argument("-o", "--out", help="match JSON output path")
    nm.set_defaults(func=cmd_net_match)

    b = sub.add_parser("boundary", help="circle conormal integrals and admissibility")
    bsub = b.add_subparsers(dest="boundary_command", required=True)
    bc = bsub.add_parser("circle-integral", help="closed-form integral at a point")
    bc.add_argument("datum", help="boundary datum JSON path")
    bc.add_argument("--point", required=True, metavar="X,Y,Z")
    bc.add_argument("--quad", type=int, metavar="N",
                    help="also run N-sample quadrature and report the difference")
    bc.add_argument("-o", "--out", help="JSON output path")
    bc.set_defaults(func=cmd_boundary_circle_integral)
    bs = bsub.add_parser("sup", help="sup of the integral over basepoints")
    bs.add_argument("datum", help="boundary datum JSON path")
    bs.add_argument("--grid", type=int, default=24, help="coarse grid points per axis")
    bs.add_argument("-o", "--out", help="JSON output path")
    bs.set_defaults(func=cmd_boundary_sup)
    ba = bsub.add_parser("admissible", help="check P + 2*sup against a threshold")
    ba.add_argument("datum", help="boundary datum JSON path")
    ba.add_argument("--p", "--p-estimate", dest="p", type=float, required=True,
                    metavar="P", help="energy estimate P >= 0")
    ba.add_argument("--threshold", choices=["6pi", "8pi"], default="6pi")
    ba.add_argument("-o", "--out", help="JSON output path")
    ba.set_defaults(func=cmd_boundary_admissible)

    r = sub.add_parser("report", help="summarize a report file's pass/fail flags")
    r.add_argument("report", help="report JSON path")
    r.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cap = os.environ.get("VARIFOLD_LAB_THREADS")
    if args.serial:
        cap = "1"
    if cap:
        # must happen before the numeric stack spins up its thread pools,
        # which is why command handlers import the library lazily
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:  # MeshError/NetError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
