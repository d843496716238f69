"""Command-line interface.

Exit codes: 0 success (or a valid kernel), 2 well-formed but invalid kernel,
1 operational error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import dpp, fredholm, jop, kernels, sampler
from .errors import InvalidKernelError, JDPPError
from .expr import ExpressionError
from .io import continuous_spec_from_dict, csv_text, dumps, load_kernel, load_matrix, load_phi, read_json
from .space import PartitionedSpace, from_mask

EXIT_OK, EXIT_ERROR, EXIT_INVALID = 0, 1, 2

log = logging.getLogger("jdpp")


def _int_list(text: str) -> list[int]:
    text = text.strip()
    return [int(t) for t in text.split(",") if t.strip()] if text else []


class _Output:
    def __init__(self, args):
        self.args = args
        self.config = {
            k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and not callable(v)
        }

    def _write(self, text: str):
        if self.args.out:
            with open(self.args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)

    def json(self, payload: dict):
        self._write(dumps({"config": self.config, **payload}) + "\n")

    def records(self, header: list[str], rows: list[list], jsonl_keys: list[str] | None = None):
        fmt = self.args.format or "jsonl"
        if fmt == "csv":
            self._write(csv_text(header, rows, comment="config: " + dumps(self.config)))
            return
        # JSONL carries records only; the resolved config goes to stderr
        sys.stderr.write("# config: " + dumps(self.config) + "\n")
        keys = jsonl_keys or header
        if fmt == "json":
            self._write(dumps({"config": self.config, "records": [dict(zip(keys, r)) for r in rows]}) + "\n")
        else:
            self._write("".join(dumps(dict(zip(keys, r))) + "\n" for r in rows))


def _table_rows(table: dpp.DistributionTable):
    n = table.space.n
    rows = []
    for mask, p in enumerate(table.probs):
        gamma = list(from_mask(mask, n))
        rows.append([gamma, float(p)])
    return rows


def cmd_validate(args, out: _Output) -> int:
    K = load_kernel(args.kernel)
    v = jop.check_validity(K, args.tol)
    out.json({"verdict": v.to_dict()})
    return EXIT_OK if v.valid else EXIT_INVALID


def cmd_det(args, out: _Output) -> int:
    K = load_kernel(args.kernel)
    if args.phi_file:
        phi = load_phi(args.phi_file)
        value = fredholm.det_multiplier(K, phi)
        out.json({"det": {"value": value, "method": "multiplier", "phi": phi.tolist()}})
        return EXIT_OK
    kwargs = {"tol": args.tol or 0.0} if args.method == "series" else {}
    rep = fredholm.evaluate(K, args.method, **kwargs)
    payload = {"det": rep.to_dict()}
    if args.compare:
        others = {}
        for m in ("series", "direct", "block"):
            try:
                v = fredholm.evaluate(K, m).value
            except JDPPError as exc:
                others[m] = {"error": str(exc)}
                continue
            others[m] = {"value": v, "abs_diff": abs(v - rep.value)}
        payload["compare"] = others
    out.json(payload)
    return EXIT_OK


def cmd_bogoliubov(args, out: _Output) -> int:
    K = load_kernel(args.kernel)
    value = dpp.bogoliubov(K, load_phi(args.phi_file))
    out.json({"bogoliubov": value})
    return EXIT_OK


def cmd_distribution(args, out: _Output) -> int:
    K = load_kernel(args.kernel)
    table = dpp.exact_distribution(K, args.cap)
    out.records(["gamma", "p"], _table_rows(table))
    return EXIT_OK


def _window(args, K) -> list[int]:
    return list(range(K.n)) if args.window is None else _int_list(args.window)


def cmd_densities(args, out: _Output) -> int:
    K = load_kernel(args.kernel)
    delta = _window(args, K)
    table = dpp.densities_via_L(K, delta, args.cap)
    rows = [[[delta[i] for i in gamma], p] for gamma, p in _table_rows(table)]
    out.records(["gamma", "p"], rows)
    return EXIT_OK


def cmd_void(args, out: _Output) -> int:
    K = load_kernel(args.kernel)
    delta = _window(args, K)
    dpp._require_valid(K, args.tol)
    rep = dpp.void_report(K, delta)
    out.json({"void": {"window": delta, "value": rep.value, "norm": rep.norm, "norm_one": rep.norm_one}})
    return EXIT_OK


def cmd_sample(args, out: _Output) -> int:
    K = load_kernel(args.kernel)
    batch = sampler.sample_j(K, args.count, args.seed, args.threads)
    rows = [[i, list(g)] for i, g in enumerate(batch.configurations)]
    out.records(["i", "gamma"], rows)
    return EXIT_OK


def cmd_estimate(args, out: _Output) -> int:
    K = load_kernel(args.kernel)
    queries = [_int_list(q) for q in (args.query or [])] or [[i] for i in range(K.n)]
    rep = sampler.estimate(K, queries, args.count, args.seed, args.threads)
    if args.format == "csv":
        rows = [[" ".join(map(str, r.points)), r.exact, r.empirical, r.stderr, r.z, r.flagged] for r in rep.rows]
        out.records(["points", "exact", "empirical", "stderr", "z", "flagged"], rows)
    else:
        out.json({"estimate": rep.to_dict()})
    return EXIT_OK


def cmd_gof(args, out: _Output) -> int:
    K = load_kernel(args.kernel)
    rep = sampler.goodness_of_fit(K, args.count, args.seed, args.threads, args.cap)
    out.json({"gof": rep.to_dict()})
    return EXIT_OK


def cmd_discretize(args, out: _Output) -> int:
    spec = continuous_spec_from_dict(read_json(args.spec))
    K = kernels.discretize(spec)
    out.json({**K.to_dict(), "j_defect": jop.j_defect(K)})
    return EXIT_OK


def cmd_from_g(args, out: _Output) -> int:
    data = read_json(args.g_file)
    G = load_matrix(data.get("G", data) if isinstance(data, dict) else data)
    if isinstance(data, dict) and "space" in data:
        space = PartitionedSpace.from_dict(data["space"])
    else:
        space = PartitionedSpace.split(G.shape[1], G.shape[0])
    K = kernels.from_G(space, G)
    out.json(K.to_dict())
    return EXIT_OK


def cmd_random(args, out: _Output) -> int:
    if args.part:
        space = PartitionedSpace(tuple(_int_list(args.part)))
    else:
        space = PartitionedSpace.split(args.n1, args.n2)
    K = kernels.random_valid(space, args.rank, args.projection, args.norm_cap, args.seed)
    out.json(K.to_dict())
    return EXIT_OK


def cmd_thin(args, out: _Output) -> int:
    K = load_kernel(args.kernel)
    out.json(dpp.thin(K, args.eps).to_dict())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--tol", type=float, default=None, help="tolerance (default: scale-aware 1e-9)")
    common.add_argument("--threads", type=int, default=1, help="worker threads; output does not depend on it")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--format", choices=["json", "csv", "jsonl"], default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="jdpp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, kernel=True, **kw):
        sp = sub.add_parser(name, parents=[common], help=help_, **kw)
        if kernel:
            sp.add_argument("kernel", help="kernel JSON file")
        sp.set_defaults(func=func)
        return sp

    add("validate", cmd_validate, "hat-criterion verdict (exit 0 valid, 2 invalid)")

    sp = add("det", cmd_det, "extended Fredholm determinant Det(1 + K)")
    sp.add_argument("--method", choices=["series", "direct", "block"], default="direct")
    sp.add_argument("--phi-file", default=None, help="evaluate Det(1 + sgn(phi) sqrt|phi| K sqrt|phi|)")
    sp.add_argument("--compare", action="store_true", help="also print the other methods and differences")

    sp = add("bogoliubov", cmd_bogoliubov, "Bogoliubov functional (alias of det --phi-file)")
    sp.add_argument("--phi-file", required=True)

    for name, func, help_ in (
        ("distribution", cmd_distribution, "exact law over all configurations"),
        ("densities", cmd_densities, "local densities on a window via the L-operator"),
    ):
        sp = add(name, func, help_)
        sp.add_argument("--cap", type=int, default=dpp.ENUMERATION_CAP)
        if name == "densities":
            sp.add_argument("--window", default=None, help="comma-separated indices (default: all)")

    sp = add("void", cmd_void, "probability of no points in a window")
    sp.add_argument("--window", default=None, help="comma-separated indices (default: all)")

    for name, func, help_ in (
        ("sample", cmd_sample, "exact samples through particle-hole duality"),
        ("estimate", cmd_estimate, "Monte Carlo correlations against exact values"),
        ("gof", cmd_gof, "chi-square goodness of fit of the sampler"),
    ):
        sp = add(name, func, help_)
        sp.add_argument("-n", "--count", type=int, default=1000)
        if name == "estimate":
            sp.add_argument("--query", action="append", help="comma-separated points; repeatable")
        if name == "gof":
            sp.add_argument("--cap", type=int, default=dpp.ENUMERATION_CAP)

    sp = add("discretize", cmd_discretize, "Nystrom discretization of a continuous spec", kernel=False)
    sp.add_argument("spec", help="continuous kernel spec JSON")

    sp = add("from-g", cmd_from_g, "kernel L(1+L)^{-1} built from an operator G", kernel=False)
    sp.add_argument("g_file", help="G matrix JSON: {'re': [[..]], 'im': [[..]]?} (n2 x n1)")

    sp = add("random", cmd_random, "random valid kernel", kernel=False)
    sp.add_argument("--part", default=None, help="comma-separated part labels, e.g. 1,1,2")
    sp.add_argument("--n1", type=int, default=2)
    sp.add_argument("--n2", type=int, default=2)
    sp.add_argument("--rank", type=int, default=None)
    sp.add_argument("--projection", action="store_true")
    sp.add_argument("--norm-cap", type=float, default=1.0)

    sp = add("thin", cmd_thin, "thinned kernel eps*K")
    sp.add_argument("--eps", type=float, required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, _Output(args))
    except InvalidKernelError as exc:
        sys.stderr.write(f"invalid kernel: {exc}\n")
        return EXIT_INVALID
    except (JDPPError, ExpressionError, ValueError, KeyError, IndexError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
