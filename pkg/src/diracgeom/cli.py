"""Command-line driver: runs check suites and writes JSON reports.

Exit codes: 0 every record passes, 1 some check failed, 2 usage or schema error.
"""

import argparse
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import bracket_calculus as bc
from . import cartan_quasi as cq
from . import correspondence as co
from . import dirac_linear as dl
from . import group_geometry as gg
from . import groupoid_amm as ga
from . import quadratic_lie as ql

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DOUBLE_IM_SAMPLES = 10


class UsageError(Exception):
    pass


# JSON with sorted keys and 17 significant digits

def dumps(obj):
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(json.dumps(str(k)) + ": " + dumps(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(x)
        return "%.17g" % x
    if obj is None:
        return "null"
    return json.dumps(str(obj))


class Report:
    def __init__(self, command, group, seed, samples):
        self.command = command
        self.group = group
        self.seed = seed
        self.samples = samples
        self.records = []
        self.payload = None

    def add(self, name, point, residual, tolerance, ok=None, anchor="", detail=None):
        residual = float(residual)
        if ok is None:
            ok = residual <= tolerance
        rec = {"name": name, "point": point, "residual": residual, "tolerance": float(tolerance),
               "pass": bool(ok), "anchor": anchor}
        if detail is not None:
            rec["detail"] = detail
        self.records.append(rec)
        return rec

    @property
    def passed(self):
        return sum(r["pass"] for r in self.records)

    @property
    def failed(self):
        return len(self.records) - self.passed

    def document(self, timestamp=True):
        doc = {
            "tool": "diracgeom",
            "version": __version__,
            "command": self.command,
            "group": self.group,
            "seed": self.seed,
            "samples": self.samples,
            "records": self.records,
            "summary": {"total": len(self.records), "passed": self.passed, "failed": self.failed},
        }
        if self.payload is not None:
            doc["payload"] = self.payload
        if timestamp:
            doc["timestamp"] = datetime.now(timezone.utc).isoformat()
        return doc

    def lines(self):
        """One line per check name, in first-appearance order."""
        order, agg = [], {}
        for r in self.records:
            if r["name"] not in agg:
                order.append(r["name"])
                agg[r["name"]] = [0, 0, 0.0]
            a = agg[r["name"]]
            a[0] += 1
            a[1] += r["pass"]
            if math.isfinite(r["residual"]):
                a[2] = max(a[2], r["residual"])
            else:
                a[2] = r["residual"]
        out = []
        for name in order:
            n, p, worst = agg[name]
            out.append("%s %s %d/%d max residual %.3e" % ("PASS" if p == n else "FAIL", name, p, n, worst))
        out.append("summary: %d passed, %d failed" % (self.passed, self.failed))
        return out


def _tol(args, default):
    return default if args.tol is None else args.tol


def _points(args, group):
    rng = np.random.default_rng(args.seed)
    return [gg.sample_point(rng, group) for _ in range(args.samples)]


def _group(args):
    try:
        return gg.make_group(args.group)
    except (KeyError, ValueError) as exc:
        raise UsageError("unknown group %r" % args.group) from exc


def _compact(group):
    return bool(np.all(np.linalg.eigvalsh(np.asarray(group.algebra.B)) > 0))


def _point_arg(group, text):
    try:
        return gg.point_from_list(group, json.loads(text))
    except (ValueError, TypeError) as exc:
        raise UsageError("bad point: %s" % exc) from exc


# ---------------------------------------------------------------------------

def cmd_verify(args):
    G = _group(args)
    rep = Report("verify", G.name, args.seed, args.samples)
    pts = _points(args, G)
    deep = pts if args.deep is None else pts[: args.deep]
    tol = _tol(args, 1e-9)
    res = cq.batch_structure_identities(pts)
    for p, r in zip(pts, res):
        rep.add("structure_identities", p.tolist(), r.max(), tol,
                anchor="identities among sigma, sigma_vee, rho, rho_vee")
    for p in pts:
        lag = dl.check_lagrangian(cq.cartan_dirac(p).space, tol=min(tol, 1e-12))
        rep.add("cartan_dirac_lagrangian", p.tolist(), lag["residual"], tol, lag["residual"] <= tol and lag["dim"] == p.dim,
                anchor="Cartan-Dirac structure is maximal isotropic")
    for p in deep:
        rep.add("courant_closure", p.tolist(), bc.courant_closure(p), tol,
                anchor="Cartan-Dirac sections closed under the Courant bracket twisted by -phi^G")
    for p in deep:
        r, _ = cq.quasi_poisson_residual(p)
        rep.add("quasi_poisson_condition", p.tolist(), r, tol, anchor="[pi_G, pi_G] = rho(chi)")
    for p in deep:
        rep.add("chi_phi_identity", p.tolist(), cq.claim4_residual(p), tol,
                anchor="chi, phi^G, d rho_vee and the Lie derivative of rho_vee sigma_vee^*")
    for p in deep:
        im = bc.cartan_im_check(p)
        rep.add("im_form", p.tolist(), max(im.values()), tol,
                anchor="sigma is an IM form on the conjugation action algebroid (twist -phi^G)")
    # about 30 bracket evaluations per point: capped unless --deep is given
    rel = not _compact(G)
    for p in (deep if args.deep is not None else pts[:DOUBLE_IM_SAMPLES]):
        im = max(bc.double_im_check(p).values())
        if rel:
            # C carries two factors of Ad and pi_G one more
            im /= max(1.0, float(np.max(np.abs(p.Ad())))) ** 3
        rep.add("double_im_form", p.tolist(), im, tol,
                anchor="C^* a + sigma(v) is an IM form on T*G + g of pi_G (twist -phi^G)",
                detail={"relative": rel})
    return rep


def _load_realization(args, G):
    if args.input:
        try:
            with open(args.input) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(str(exc)) from exc
        try:
            return co.from_json(text)
        except co.SchemaError as exc:
            raise UsageError("schema error: %s" % exc) from exc
    rng = np.random.default_rng(args.seed)
    if args.synthetic is None:
        return co.double(gg.sample_point(rng, G))
    return co.synth_realization(args.seed, G, k=args.synthetic)


def _quasi_records(rep, p, tol, tag=""):
    for k, v in co.quasi_invariants(p).items():
        rep.add("quasi_invariant:" + k + tag, p.g.tolist(), v, tol,
                anchor="moment map conditions of a hamiltonian quasi-Poisson point")


def cmd_invert(args):
    p = _load_realization(args, _group(args))
    G = p.group
    rep = Report("invert", G.name, args.seed, 1)
    tol = _tol(args, 1e-8)
    pt = p.g.tolist()
    try:
        if args.direction == "to-dirac":
            if p.pi is None:
                raise UsageError("to-dirac needs pi and rho_M")
            _quasi_records(rep, p, tol)
            L = co.direct_construct(p, tol)
            ex = co.exact_sequence(p, tol)
            for k, v in ex["residuals"].items():
                rep.add("exact_sequence:" + k, pt, v, tol, anchor="exact sequence of the quasi-Poisson algebroid")
            rc = dl.realization_check(L, p.dJ, cq.cartan_dirac(p.g))
            rep.add("forward_dirac", pt, rc["distance"], tol, rc["forward"] and rc["distance"] <= tol,
                    anchor="J is forward Dirac onto the Cartan-Dirac structure")
            rep.add("nondegenerate", pt, 0.0 if rc["nondegenerate"] else 1.0, 0.0,
                    anchor="ker dJ meets ker L trivially")
            rep.payload = json.loads(co.to_json(co.RealizationPoint(p.g, p.dJ, L=L)))
        elif args.direction == "to-quasi":
            if p.L is None:
                raise UsageError("to-quasi needs L_basis")
            rc = dl.realization_check(p.L, p.dJ, cq.cartan_dirac(p.g))
            rep.add("forward_dirac", pt, rc["distance"], tol, rc["forward"] and rc["distance"] <= tol,
                    anchor="J is forward Dirac onto the Cartan-Dirac structure")
            q = co.inverse_construct(p, tol)
            _quasi_records(rep, q, tol)
            rep.add("lucky_identity", pt, co.lucky_residual(p.L, p.dJ, p.g, q.rho_M), tol,
                    anchor="rho_M^* a + sigma^* dJ X = 0 on L")
            rep.payload = json.loads(co.to_json(q))
        else:
            if p.pi is None:
                p = co.inverse_construct(p, tol)
            _quasi_records(rep, p, tol)
            for k, v in co.roundtrip(p, tol).items():
                rep.add("roundtrip:" + k, pt, v, tol, anchor="the two constructions are mutually inverse")
            for k, v in co.exact_sequence(p, tol)["residuals"].items():
                rep.add("exact_sequence:" + k, pt, v, tol, anchor="exact sequence of the quasi-Poisson algebroid")
            rep.payload = json.loads(co.to_json(p))
    except (co.InvariantError, co.SolveError) as exc:
        if rep.failed == 0:
            for k, v in (getattr(exc, "residuals", None) or {}).items():
                rep.add("invariant:" + k, pt, v, tol, anchor="input does not satisfy the moment map conditions")
        if rep.failed == 0:
            rep.add("construction", pt, float("inf"), tol, False, anchor=str(exc))
    return rep


def cmd_class_report(args):
    G = _group(args)
    if args.point:
        pts = [_point_arg(G, args.point)]
    elif args.angle is not None:
        e = np.zeros(G.dim)
        e[-1] = 1.0
        pts = [gg.GroupPoint.exp(G, args.angle * e)]
    else:
        pts = _points(args, G)
    rep = Report("class-report", G.name, args.seed, len(pts))
    tol = _tol(args, 1e-10)
    for p in pts:
        gh = cq.ghjw(p)
        detail = {"degenerate": gh.degenerate, "det_ad_plus_one": gh.det, "class_dim": int(gh.R.shape[1])}
        rep.add("leaf_form_vs_ghjw", p.tolist(), cq.leaf_match(p), tol, detail=detail,
                anchor="leaf form of the Cartan-Dirac structure equals the GHJW form")
        r, _ = cq.class_twist_residual(p)
        rep.add("d_theta_twist", p.tolist(), r, max(tol, 1e-8),
                anchor="d theta + i^*phi = 0 on the class, phi = -phi^G the twist of L_G")
        r, _ = cq.class_twist_residual(p, method="fd", h=1e-5)
        rep.add("d_theta_twist_fd", p.tolist(), r, 1e-6,
                anchor="same, with finite-difference d at h = 1e-5")
    return rep


def cmd_groupoid(args):
    G = _group(args)
    rng = np.random.default_rng(args.seed)
    rep = Report("groupoid", G.name, args.seed, args.samples)
    tol = _tol(args, 1e-8)
    rel = not _compact(G)
    ab = args.ablate
    triples = ga.sample_composable(rng, G, args.samples)
    deep = triples if args.deep is None else triples[: args.deep]
    for a, b, c in triples:
        ax = ga.groupoid_axioms(a, b, c, relative=rel)
        rep.add("groupoid_axioms", a.g.tolist(), max(ax.values()), 1e-10 if args.tol is None else args.tol,
                anchor="associativity, unit and inverse laws" + (" (relative)" if rel else ""))
    for a, b, _ in triples:
        rep.add("multiplicativity", a.g.tolist(), ga.multiplicativity_check(a, b, ab, relative=rel), tol,
                anchor="m^*omega = pr1^*omega + pr2^*omega" + (" (relative)" if rel else ""))
    for a, _, _ in deep:
        ps = ga.presymplectic_axioms(a, ablate=ab)
        rep.add("closure", a.g.tolist(), ps["closure_rel"] if rel else ps["closure"], tol,
                anchor="d omega = s^*phi - t^*phi with phi = -phi^G" + (" (relative)" if rel else ""))
        rep.add("kernel_condition", a.x.tolist(), 2 * a.dim - ps["kernel_rank"], 0.0,
                anchor="ker omega, ker ds, ker dt meet trivially at units")
    for a, _, _ in triples:
        im = ga.im_of_omega(a.x, ab)
        rep.add("im_of_omega", a.x.tolist(), im["distance"], tol,
                anchor="sigma_omega and the target anchor give the Cartan-Dirac structure")
    x = triples[0][2].x if triples else gg.GroupPoint.identity(G)
    for a, _, _ in triples:
        ac = ga.action_compat_check(x, a.g, ab)
        rep.add("action_compat", a.g.tolist(), ac["form_rel"] if rel else ac["form"], tol,
                detail={"dirac_distance": ac["dirac"], "class_point": x.tolist()},
                anchor="m^*theta = pr^*theta + omega on one conjugacy class")
    return rep


def cmd_reduce(args):
    G = _group(args)
    rep = Report("reduce", G.name, args.seed, args.samples)
    tol = _tol(args, 1e-8)
    if args.input:
        samples = [_load_realization(args, G)]
        G = samples[0].group
    else:
        rng = np.random.default_rng(args.seed)
        if args.target:
            x = _point_arg(G, args.target)
        elif args.angle is not None:
            e = np.zeros(G.dim)
            e[-1] = 1.0
            x = gg.GroupPoint.exp(G, args.angle * e)
        else:
            x = gg.sample_point(rng, G)
        seeds = rng.integers(0, 2 ** 31, args.samples)
        samples = [co.synth_realization(int(s), G, k=args.k, g=x) for s in seeds]
    rep.group = G.name
    reduced = []
    for p in samples:
        pt = p.g.tolist()
        try:
            s = ga.reduce_point(p, tol)
        except (dl.ReductionError, co.SolveError, co.InvariantError) as exc:
            rep.add("reduction", pt, float("inf"), tol, False, anchor=str(exc))
            continue
        rep.add("kernel_zero", pt, s.kernel_dim, 0.0, anchor="reduced structure is Poisson")
        rep.add("orbit_kernel_match", pt, s.kernel_match, tol,
                anchor="kernel of the pulled-back structure equals the isotropy orbit directions")
        rep.add("f_dirac", pt, 0.0 if s.reduced.f_dirac else 1.0, 0.0, anchor="projection is forward Dirac")
        rep.add("b_dirac", pt, 0.0 if s.reduced.b_dirac else 1.0, 0.0, anchor="projection is backward Dirac")
        reduced.append({"dim": s.reduced.L.base_dim, "L_basis": s.reduced.L.basis.tolist(),
                        "isotropy_dim": int(s.isotropy.shape[1])})
    rep.payload = {"reduced": reduced}
    return rep


def cmd_algebra(args):
    """Print or validate a quadratic Lie algebra document."""
    if args.input:
        try:
            with open(args.input) as fh:
                g = ql.load(fh.read())
        except OSError as exc:
            raise UsageError(str(exc)) from exc
        except ql.ValidationError as exc:
            raise UsageError("schema error: %s" % exc) from exc
    else:
        try:
            g = ql.builtin(args.group)
        except KeyError as exc:
            raise UsageError(str(exc)) from exc
    rep = Report("algebra", g.name, args.seed, 0)
    v = ql.validate(g)
    for k in ("antisymmetry", "jacobi", "symmetry", "invariance"):
        rep.add(k, None, v[k], _tol(args, 1e-12), anchor="quadratic Lie algebra axioms")
    rep.payload = json.loads(ql.save(g))
    return rep


# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default="so3")
    common.add_argument("--samples", type=int, default=20)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--json", metavar="PATH", default=None, help="write the report here ('-' for stdout)")
    common.add_argument("--no-timestamp", action="store_true")
    common.add_argument("--deep", type=int, default=None, help="run the costly checks on the first N samples only")

    p = argparse.ArgumentParser(prog="diracgeom")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("verify", parents=[common], help="structure identities and Cartan-Dirac checks")

    s = sub.add_parser("invert", parents=[common], help="quasi-Poisson data <-> Dirac realization")
    s.add_argument("--direction", choices=["to-dirac", "to-quasi", "roundtrip"], default="roundtrip")
    s.add_argument("--input", default=None, help="realization JSON; default is the double or --synthetic")
    s.add_argument("--synthetic", type=int, default=None, metavar="K", help="synthetic G x R^K data")
    s.add_argument("--out", default=None, help="write the constructed structure here")

    s = sub.add_parser("class-report", parents=[common], help="GHJW form on conjugacy classes")
    s.add_argument("--point", default=None, help="JSON payload of the group element")
    s.add_argument("--angle", type=float, default=None, help="exp(angle * last basis vector)")

    s = sub.add_parser("groupoid", parents=[common], help="AMM groupoid checks")
    s.add_argument("--ablate", action="store_true", help="drop the Ad_x term of omega")

    s = sub.add_parser("reduce", parents=[common], help="reduction of synthetic realizations")
    s.add_argument("--input", default=None)
    s.add_argument("--target", default=None, help="JSON payload of the level value")
    s.add_argument("--angle", type=float, default=None)
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--synthetic", type=int, default=None, help=argparse.SUPPRESS)

    s = sub.add_parser("algebra", parents=[common], help="validate or print a quadratic Lie algebra")
    s.add_argument("--input", default=None)
    return p


COMMANDS = {
    "verify": cmd_verify,
    "invert": cmd_invert,
    "class-report": cmd_class_report,
    "groupoid": cmd_groupoid,
    "reduce": cmd_reduce,
    "algebra": cmd_algebra,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "samples", 1) < 0:
        print("error: --samples must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        rep = COMMANDS[args.command](args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    text = dumps(rep.document(timestamp=not args.no_timestamp)) + "\n"
    if args.json == "-":
        sys.stdout.write(text)
    else:
        for line in rep.lines():
            print(line)
        if args.json:
            with open(args.json, "w") as fh:
                fh.write(text)
    out = getattr(args, "out", None)
    if out and rep.payload is not None:
        with open(out, "w") as fh:
            fh.write(dumps(rep.payload) + "\n")
    return EXIT_OK if rep.failed == 0 else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
