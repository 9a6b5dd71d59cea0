"""Command line interface: ``latzeta <command> ...``.

Exit status is 0 on success, 1 on an operational error and, for
``verify``, 2 when the run found violations.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import io as lio
from .decomposition import decompose, is_isomorphic_to_Zn
from .errors import LatticeError
from .harness import verify_theorem
from .laplacian import SplitLattice, fd_laplacian_S0, laplacian_S0
from .lattice import LatticeBasis, full_rank
from .special import bessel_k, kbar, kbar_recurrence_gap
from .stability import is_stable, stabilize
from .sums import theta, zeta_prime, zeta_q, zeta_q_psf


def _dump(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def _grid(spec: str) -> np.ndarray:
    try:
        a, b, step = (float(v) for v in spec.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("grid must look like a:b:step") from exc
    if step <= 0 or b < a:
        raise argparse.ArgumentTypeError("grid needs a <= b and step > 0")
    count = int(round((b - a) / step)) + 1
    return a + step * np.arange(count)


def cmd_eval(args) -> int:
    L = lio.load_lattice(args.lattice)
    if args.fn == "theta":
        res = theta(L, args.tau, args.rel_tol)
    elif args.fn == "zeta":
        res = zeta_prime(L, args.s, args.q, args.rel_tol)
    elif args.fn == "zetaq":
        res = zeta_q(L, args.s, args.q, args.rel_tol)
    else:
        res = zeta_q_psf(L, args.s, args.q, args.rel_tol)
    _dump(res.to_dict())
    return 0


def cmd_bessel_table(args) -> int:
    xs = args.x_grid
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["x", "K_alpha", "Kbar_alpha", "recurrence_gap"])
    K, Kb = [], []
    for x in xs:
        k = bessel_k(args.alpha, x) if x > 0 else float("inf")
        kb = kbar(args.alpha, x)
        gap = kbar_recurrence_gap(args.alpha, x) if args.alpha > 1 else ""
        w.writerow([repr(float(x)), repr(k), repr(kb), repr(gap) if gap != "" else ""])
        K.append(k)
        Kb.append(kb)
    if args.plot:
        from .plotting import plot_bessel

        plot_bessel(args.alpha, xs, np.array(K), np.array(Kb), args.plot)
    return 0


def cmd_check_stable(args) -> int:
    L = full_rank(lio.load_lattice(args.lattice))
    _dump(is_stable(L).to_dict())
    return 0


def cmd_stabilize(args) -> int:
    L = lio.load_lattice(args.lattice)
    S, A = stabilize(L)
    lio.save_lattice(S, args.out)
    if args.transform:
        lio.save_matrix(A, args.transform)
    return 0


def cmd_decompose(args) -> int:
    L = full_rank(lio.load_lattice(args.lattice))
    res = decompose(L, args.radius)
    out = res.to_dict()
    out["is_Zn"] = is_isomorphic_to_Zn(L)
    _dump(out)
    return 0


def cmd_laplacian(args) -> int:
    L1 = lio.load_lattice(args.l1) if args.l1 else LatticeBasis.trivial(0)
    split = SplitLattice(L1, lio.load_lattice(args.l2))
    out = {"closed_form": laplacian_S0(split, args.s, args.q)}
    if args.fd_check:
        fd = fd_laplacian_S0(split, args.s, args.q)
        out["fd_value"] = fd
        out["relative_gap"] = abs(fd - out["closed_form"]) / max(abs(out["closed_form"]), 1e-300)
    _dump(out)
    return 0


def cmd_verify(args) -> int:
    report = verify_theorem(args.n, args.s, args.q, args.count, args.seed, explore_q=args.explore_q)
    text = report.to_json() + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.csv:
        sys.stdout.write(report.to_csv())
    elif not args.out:
        sys.stdout.write(text)
    if args.plot:
        from .plotting import plot_margins

        plot_margins(report, args.plot)
    return 2 if report.violations else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latzeta", description="Lattice theta and Epstein zeta tools")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a lattice sum")
    e.add_argument("--lattice", required=True)
    e.add_argument("--fn", choices=["theta", "zeta", "zetaq", "zetaq-psf"], required=True)
    e.add_argument("--s", type=float, default=2.0)
    e.add_argument("--q", type=float, default=0.0)
    e.add_argument("--tau", type=float, default=1.0)
    e.add_argument("--rel-tol", type=float, default=1e-10)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bessel-table", help="CSV table of K_alpha and its normalised form")
    b.add_argument("--alpha", type=float, required=True)
    b.add_argument("--x-grid", type=_grid, required=True, help="a:b:step")
    b.add_argument("--plot", help="also write a PNG figure to this path")
    b.set_defaults(func=cmd_bessel_table)

    c = sub.add_parser("check-stable", help="stability certificate")
    c.add_argument("--lattice", required=True)
    c.set_defaults(func=cmd_check_stable)

    st = sub.add_parser("stabilize", help="contract onto a stable lattice")
    st.add_argument("--lattice", required=True)
    st.add_argument("--out", required=True)
    st.add_argument("--transform")
    st.set_defaults(func=cmd_stabilize)

    d = sub.add_parser("decompose", help="orthogonal decomposition")
    d.add_argument("--lattice", required=True)
    d.add_argument("--radius", type=float)
    d.set_defaults(func=cmd_decompose)

    lp = sub.add_parser("laplacian", help="trace-zero Laplacian of the perturbation functional")
    lp.add_argument("--l1")
    lp.add_argument("--l2", required=True)
    lp.add_argument("--s", type=float, required=True)
    lp.add_argument("--q", type=float, default=0.0)
    lp.add_argument("--fd-check", action="store_true")
    lp.set_defaults(func=cmd_laplacian)

    v = sub.add_parser("verify", help="check ζ'(L) <= ζ'(Z^n) on random stable lattices")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--s", type=float, required=True)
    v.add_argument("--q", type=float, default=0.0)
    v.add_argument("--count", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--explore-q", action="store_true")
    v.add_argument("--out")
    v.add_argument("--csv", action="store_true")
    v.add_argument("--plot", help="also write a margin histogram to this path")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LatticeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
