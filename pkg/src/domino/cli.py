"""``domino`` command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 no feasible solution or no
embedding found, 3 a resource guard refused the job.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .graph import CASES, EmptyInputError, Graph, InexactError, ParseError, exact_domination_number, load_case, read_edge_list

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


class GuardError(Exception):
    pass


class NoSolution(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(spec: str) -> Graph:
    if os.path.exists(spec):
        return read_edge_list(spec)
    if spec in CASES:
        return load_case(spec)
    raise UsageError(f"{spec!r} is neither a file nor a bundled case ({', '.join(CASES)})")


def _alpha(text: str, n: int):
    t = text.strip().lower().replace(" ", "")
    if t.startswith("n+"):
        return n + Fraction(t[2:])
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot read alpha {text!r}; use a rational such as 3/2 or the form n+1") from None


def _config(args, g: Graph):
    from .reform import PenaltyConfig

    return PenaltyConfig(_alpha(args.alpha, g.node_count), args.slack_mode)


def _emit(args, doc: dict, table: str):
    text = json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n" if args.format == "structured" else table
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _kv(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in pairs)


def cmd_stats(args):
    from .reform import reform_stats

    g = _load(args.input)
    st = reform_stats(g, _config(args, g))
    doc = {
        "system": g.name,
        **dict(zip(("buses", "branches", "ancillas", "interactions"), st.as_tuple())),
        "dropped_self_loops": g.dropped_self_loops,
        "merged_duplicates": g.merged_duplicates,
    }
    _emit(args, doc, _kv(list(doc.items())))


def cmd_reform(args):
    from .reform import build_bqm, dumps_model, to_ising

    g = _load(args.input)
    bqm = build_bqm(g, _config(args, g))
    model = to_ising(bqm) if args.ising else bqm
    text = dumps_model(model, {"system": g.name})
    if args.format == "table":
        kind = "ising" if args.ising else "qubo"
        pairs = [("system", g.name), ("model", kind), ("variables", len(bqm)), ("interactions", len(bqm.quadratic))]
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
            pairs.append(("written", args.out))
        sys.stdout.write(_kv(pairs))
        return
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve_exact(args):
    g = _load(args.input)
    try:
        gamma, witness = exact_domination_number(g, node_budget_limit=args.budget, force=args.force)
    except InexactError as exc:
        raise GuardError(str(exc)) from None
    nodes = sorted(i + 1 for i in witness)
    doc = {"system": g.name, "gamma": gamma, "pmu_buses": nodes}
    _emit(args, doc, _kv([("system", g.name), ("gamma", gamma), ("pmu buses", " ".join(map(str, nodes)))]))


def cmd_solve_sa(args):
    from .reform import build_bqm
    from .sa import SaParams, TooManyVariablesError, best_feasible, simulated_anneal

    g = _load(args.input)
    bqm = build_bqm(g, _config(args, g))
    params = SaParams(num_reads=args.reads, sweeps_per_read=args.sweeps, seed=args.seed)
    try:
        ss = simulated_anneal(bqm, params)
    except TooManyVariablesError as exc:
        raise GuardError(str(exc)) from None
    hit = best_feasible(g, ss)
    doc = {
        "system": g.name,
        "feasible": hit is not None,
        "size": None if hit is None else hit[1],
        "pmu_buses": None if hit is None else sorted(i + 1 for i in hit[0]),
        "lowest_energy": str(ss.lowest_energy),
        "params": ss.info["params"],
    }
    pairs = [("system", g.name), ("lowest energy", doc["lowest_energy"])]
    if hit is None:
        pairs.append(("result", "no feasible sample"))
    else:
        pairs += [("size", hit[1]), ("pmu buses", " ".join(map(str, doc["pmu_buses"])))]
    _emit(args, doc, _kv(pairs))
    if hit is None:
        raise NoSolution()


def cmd_embed(args):
    from .chimera import ChimeraSpec, build_chimera, clique_bound, find_embedding, interaction_graph
    from .reform import build_bqm

    g = _load(args.input)
    bqm = build_bqm(g, _config(args, g))
    spec = ChimeraSpec(args.rows, args.cols, args.shore)
    n, edges = interaction_graph(bqm)
    n_max, e_max = clique_bound(spec)
    if len(edges) > e_max:
        raise GuardError(f"{len(edges)} interactions exceed the {e_max} couplings of a {n_max}-clique on this chip")
    e = find_embedding((n, edges), build_chimera(spec), seed=args.seed, tries=args.tries)
    if e is None:
        sys.stderr.write(f"no valid embedding in {args.tries} tries\n")
        raise NoSolution()
    doc = {"system": g.name, "qubits": e.num_qubits, "max_chain": e.max_chain_length, **json.loads(e.to_json())}
    pairs = [
        ("system", g.name),
        ("logical variables", n),
        ("physical qubits", e.num_qubits),
        ("longest chain", e.max_chain_length),
        ("per-try qubits", " ".join("-" if q is None else str(q) for q in e.info["per_try_qubits"])),
    ]
    _emit(args, doc, _kv(pairs))


def cmd_simulate_aqa(args):
    from . import aqa
    from .reform import build_bqm, to_ising
    from .sa import best_feasible

    g = _load(args.input)
    bqm = build_bqm(g, _config(args, g))
    if len(bqm) > aqa.MAX_QUBITS:
        raise GuardError(f"{len(bqm)} variables exceed the {aqa.MAX_QUBITS}-qubit simulator limit")
    ising = to_ising(bqm)
    if args.curve:
        taus = [float(t) for t in args.curve.split(",")]
        rows = aqa.tau_sweep(ising, taus)
        text = aqa.write_curve(rows)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return
    res = aqa.evolve(ising, aqa.Schedule(args.tau))
    ss = aqa.sample_reads(res.psi, args.reads, args.seed, bqm)
    hit = best_feasible(g, ss)
    doc = {
        "system": g.name,
        "tau": args.tau,
        "steps": res.steps,
        "norm_drift": res.drift,
        "p_ground": aqa.ground_probability(ising, res.psi),
        "reads": args.reads,
        "size": None if hit is None else hit[1],
        "pmu_buses": None if hit is None else sorted(i + 1 for i in hit[0]),
    }
    pairs = [(k.replace("_", " "), v) for k, v in doc.items() if k != "pmu_buses"]
    if hit is not None:
        pairs.append(("pmu buses", " ".join(map(str, doc["pmu_buses"]))))
    _emit(args, doc, _kv(pairs))
    if hit is None and args.reads:
        raise NoSolution()


def _timing(args):
    from .bench import TimingModel

    try:
        return TimingModel(Fraction(args.tp), Fraction(args.tr))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad timing constant: {exc}") from None


def _grid(args):
    from .bench import make_grid

    grid = make_grid()
    if args.points < 20:
        from .bench import SweepGrid

        grid = SweepGrid(grid.tau_points[: args.points], grid.k_points[: args.points])
    return grid


def cmd_sweep(args):
    from .aqa import QubitLimitError
    from .bench import emit_report, run_sweep

    g = _load(args.input)
    try:
        row = run_sweep(g, _config(args, g), _grid(args), args.seed, args.backend, _timing(args))
    except QubitLimitError as exc:
        raise GuardError(str(exc)) from None
    text, doc = emit_report([row], row.provenance)
    if args.format == "structured":
        _emit(args, json.loads(doc), "")
    else:
        _emit(args, {}, text)
    if row.status != "ok":
        raise NoSolution()


def cmd_report(args):
    from .bench import BenchReport, BenchRow, emit_report, run_sweep
    from .reform import build_bqm, reform_stats
    from .sa import SaParams, best_feasible, simulated_anneal

    if args.from_json:
        rows = []
        for path in args.from_json:
            with open(path, encoding="utf-8") as fh:
                rows += BenchReport.from_json(fh.read()).rows
    else:
        rows = []
        for spec in args.input or CASES:
            g = _load(spec)
            cfg = _config(args, g)
            st = reform_stats(g, cfg)
            row = BenchRow(g.name, st.buses, st.branches, st.ancillas, st.interactions)
            if g.node_count <= 40:
                try:
                    row.gamma_exact = exact_domination_number(g, node_budget_limit=2_000_000)[0]
                except InexactError:
                    pass
            if args.sa:
                ss = simulated_anneal(build_bqm(g, cfg), SaParams(args.reads, args.sweeps, seed=args.seed))
                hit = best_feasible(g, ss)
                row.gamma_sa = None if hit is None else hit[1]
            if args.embed:
                from .chimera import build_chimera, clique_bound, find_embedding, interaction_graph

                n, edges = interaction_graph(build_bqm(g, cfg))
                if len(edges) <= clique_bound()[1]:
                    e = find_embedding((n, edges), build_chimera(), seed=args.seed, tries=args.tries)
                    row.embed_qubits = None if e is None else e.num_qubits
            if args.sweep:
                sw = run_sweep(g, cfg, _grid(args), args.seed, "sa", _timing(args))
                row.gamma_sweep, row.tau_star, row.k_star = sw.gamma_sweep, sw.tau_star, sw.k_star
                row.t_a, row.t, row.status = sw.t_a, sw.t, sw.status
                row.provenance = sw.provenance
            rows.append(row)
    text, doc = emit_report(rows, {"seed": args.seed, "slack_mode": args.slack_mode, "alpha": args.alpha})
    out = doc if args.format == "structured" else text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="domino", description="Minimum PMU placement via dominating-set QUBOs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("--input", required=True, help="edge-list file or bundled case name such as ieee14")
        sp.add_argument("--alpha", default="2", help="penalty weight: a rational (3/2) or n+c for N+c")
        sp.add_argument("--slack-mode", choices=("paper", "safe"), default="paper")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=("table", "structured"), default="table")
        return sp

    common(sub.add_parser("stats", help="bus, branch, ancilla and interaction counts")).set_defaults(func=cmd_stats)

    sp = common(sub.add_parser("reform", help="write the QUBO (or Ising) model as JSON"))
    sp.add_argument("--ising", action="store_true", help="emit spin form instead of binary form")
    sp.set_defaults(func=cmd_reform, format="structured")

    sp = common(sub.add_parser("solve-exact", help="exact domination number by branch and bound"))
    sp.add_argument("--budget", type=int, default=None, help="search-node limit")
    sp.add_argument("--force", action="store_true", help="lift the 40-bus guard")
    sp.set_defaults(func=cmd_solve_exact)

    sp = common(sub.add_parser("solve-sa", help="simulated annealing on the QUBO"))
    sp.add_argument("--reads", type=int, default=200)
    sp.add_argument("--sweeps", type=int, default=5000)
    sp.set_defaults(func=cmd_solve_sa)

    sp = common(sub.add_parser("embed", help="minor-embed the interaction graph into Chimera"))
    sp.add_argument("--tries", type=int, default=10)
    sp.add_argument("--rows", type=int, default=16)
    sp.add_argument("--cols", type=int, default=16)
    sp.add_argument("--shore", type=int, default=4)
    sp.set_defaults(func=cmd_embed)

    sp = common(sub.add_parser("simulate-aqa", help="state-vector anneal for models up to 20 variables"))
    sp.add_argument("--tau", type=float, default=10.0)
    sp.add_argument("--reads", type=int, default=100)
    sp.add_argument("--curve", help="comma-separated tau values; writes a delimited tau sweep instead")
    sp.set_defaults(func=cmd_simulate_aqa)

    def timing(sp):
        sp.add_argument("--tp", default="0", help="programming time per job, in the unit of --tau (sweeps or microseconds)")
        sp.add_argument("--tr", default="0", help="readout time per read, same unit")
        sp.add_argument("--points", type=int, default=20, help="use only the first P grid points per axis")

    sp = common(sub.add_parser("sweep", help="best feasible size over the (tau, k) grid"))
    sp.add_argument("--backend", choices=("sa", "aqa"), default="sa")
    timing(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = common(sub.add_parser("report", help="resource and solution tables"), needs_input=False)
    sp.add_argument("--input", action="append", help="system to include; repeatable, defaults to all bundled cases")
    sp.add_argument("--from-json", action="append", help="merge rows from earlier structured reports")
    sp.add_argument("--sa", action="store_true", help="add a simulated-annealing column")
    sp.add_argument("--reads", type=int, default=200)
    sp.add_argument("--sweeps", type=int, default=5000)
    sp.add_argument("--embed", action="store_true", help="add an embedding-size column")
    sp.add_argument("--tries", type=int, default=10)
    sp.add_argument("--sweep", action="store_true", help="add grid-sweep columns")
    timing(sp)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version and 1 (via _Parser.error) otherwise
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "points", 20) < 1 or getattr(args, "points", 20) > 20:
        sys.stderr.write("domino: --points must be between 1 and 20\n")
        return EXIT_USAGE
    try:
        args.func(args)
    except (UsageError, ParseError, EmptyInputError, FileNotFoundError, ValueError) as exc:
        sys.stderr.write(f"domino: {exc}\n")
        return EXIT_USAGE
    except GuardError as exc:
        sys.stderr.write(f"domino: resource guard: {exc}\n")
        return EXIT_GUARD
    except NoSolution:
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
