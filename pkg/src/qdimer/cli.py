"""JSON command line surface.

Every subcommand prints a single JSON document with canonically ordered
keys and polynomials in canonical string form, so outputs are byte-stable
given the same inputs and seed.  Exit codes: 0 on success or a verified
check, 1 on a verification failure, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from .algebra import LaurentPoly
from .graph import (
    FROZEN,
    graph_from_json_dict,
    graph_to_json_dict,
    quiver_from_graph,
    symbolic_weights,
    validate,
)
from .hamiltonians import check_move_invariance, hamiltonian_table
from .hardparticles import (
    conflict_graph_json_dict,
    extract_conflict_graph,
    hard_particle_partition,
    verify_hard_particle_identity,
)
from .matchings import enumerate_matchings, is_perfect_matching, matching_to_json_dict
from .moves import MoveError, mutate_graph
from .poisson import casimir_check, commutation_check, poisson_from_cartan
from .qsystems import (
    BuilderDefect,
    CartanSpec,
    build,
    conservation_check,
    initial_state,
    phase_point,
    q_step,
    symbolic_state,
)

USAGE_ERROR = 2
CHECK_FAILED = 1


class InputError(Exception):
    pass


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, sort_keys=True, indent=1)
    sys.stdout.write("\n")


def _load_graph(path: str):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc
    try:
        return graph_from_json_dict(data)
    except KeyError as exc:
        raise InputError(f"graph JSON missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad graph JSON: {exc}") from exc


def _spec(args) -> CartanSpec:
    try:
        return CartanSpec(args.type, args.rank)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_validate(args) -> int:
    g = _load_graph(args.graph)
    report = validate(g)
    _emit(
        {
            "valid": report.valid,
            "violations": list(report.violations),
            "vertices": report.vertex_count,
            "edges": report.edge_count,
            "traced_cycles": report.traced_cycle_count,
            "euler_characteristic": report.euler_characteristic,
            "euler_warning": report.euler_warning,
        }
    )
    return 0 if report.valid else USAGE_ERROR


def cmd_quiver(args) -> int:
    g = _load_graph(args.graph)
    q = quiver_from_graph(g)
    _emit(
        {
            "labels": [str(x) for x in q.labels],
            "B": [list(row) for row in q.matrix],
            "has_one_cycles": q.has_one_cycles,
        }
    )
    return 0


def cmd_matchings(args) -> int:
    g = _load_graph(args.graph)
    ms = enumerate_matchings(g)
    _emit({"count": len(ms), "matchings": [matching_to_json_dict(m) for m in ms]})
    return 0


def _reference_matching(g, args):
    if args.reference:
        try:
            with open(args.reference) as fh:
                data = json.load(fh)
            m = frozenset(int(e) for e in data["edges"])
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad reference matching: {exc}") from exc
    else:
        ms = enumerate_matchings(g)
        if not ms:
            raise InputError("graph has no perfect matching")
        m = ms[0]
    if not is_perfect_matching(g, m):
        raise InputError("reference matching is not perfect")
    return m


def cmd_hamiltonians(args) -> int:
    g = _load_graph(args.graph)
    m0 = _reference_matching(g, args)
    table = hamiltonian_table(g, symbolic_weights(g), m0)
    _emit({"reference": sorted(m0), "hamiltonians": table.to_json_dict()})
    return 0


def cmd_mutate(args) -> int:
    g = _load_graph(args.graph)
    label = args.face
    if label not in g.faces:
        try:
            label = int(args.face)
        except ValueError:
            pass
    if label not in g.faces:
        raise InputError(f"no face labeled {args.face!r}")
    weights = symbolic_weights(g)
    try:
        g2, w2, records = mutate_graph(g, weights, label)
    except MoveError as exc:
        raise InputError(str(exc)) from exc
    recs = []
    for rec in records:
        if rec.kind == "urban_renewal":
            recs.append(
                {
                    "kind": rec.kind,
                    "face": rec.face,
                    "corners": list(rec.corners),
                    "sides": list(rec.sides),
                    "legs": list(rec.legs),
                    "inner_vertices": list(rec.inner_vertices),
                    "inner_edges": list(rec.inner_edges),
                    "warning": rec.warning,
                }
            )
        else:
            recs.append(
                {
                    "kind": rec.kind,
                    "vertex": rec.vertex,
                    "removed_edges": list(rec.removed_edges),
                    "kept_vertex": rec.kept_vertex,
                    "absorbed_vertex": rec.absorbed_vertex,
                }
            )
    _emit(
        {
            "graph": graph_to_json_dict(g2),
            "weights": {str(v): w.canonical_str() for v, w in sorted(w2.items(), key=lambda kv: str(kv[0]))},
            "records": recs,
        }
    )
    return 0


def _parse_initial(spec: CartanSpec, path: str):
    try:
        with open(path) as fh:
            data = json.load(fh)
        raw = data["Q"]
        values = {}
        for key, sval in raw.items():
            a_str, k_str = key.split(",")
            values[(int(a_str), int(k_str))] = Fraction(sval)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad initial state: {exc}") from exc
    try:
        return initial_state(spec, values)
    except (ValueError, ArithmeticError) as exc:
        raise InputError(str(exc)) from exc


def cmd_qsystem(args) -> int:
    spec = _spec(args)
    if args.steps < 1:
        raise InputError("steps must be >= 1")
    if args.symbolic:
        state = symbolic_state(spec)
        for _ in range(args.steps):
            state = q_step(state)
        doc = {
            "type": spec.type,
            "rank": spec.rank,
            "steps": args.steps,
            "laurent": True,
            "values": {
                f"{a},{layer}": v.canonical_str() for (a, layer), v in sorted(state.values.items())
            },
        }
        _emit(doc)
        return 0
    state = _parse_initial(spec, args.initial) if args.initial else initial_state(spec)
    trajectory = [state]
    for _ in range(args.steps):
        trajectory.append(q_step(trajectory[-1]))
    doc = {
        "type": spec.type,
        "rank": spec.rank,
        "steps": args.steps,
        "orbit": [
            {f"{a},{layer}": str(v) for (a, layer), v in sorted(st.values.items())}
            for st in trajectory
        ],
    }
    status = 0
    if args.check_conserved:
        builder = build(spec)
        table = builder.hamiltonians()
        reports = [conservation_check(spec, state, args.steps, builder, table)]
        rng = random.Random(args.seed)
        for _ in range(args.random_trials):
            values = {
                (a, layer): Fraction(rng.randint(1, 9), rng.randint(1, 9))
                for a in range(1, spec.rank + 1)
                for layer in (0, 1)
            }
            reports.append(
                conservation_check(spec, initial_state(spec, values), args.steps, builder, table)
            )
        doc["conserved"] = all(rep.conserved for rep in reports)
        doc["conservation"] = {
            "trials": len(reports),
            "classes": [list(c) for c in reports[0].classes],
            "values": {f"({i},{j})": str(reports[0].values[(i, j)][0]) for i, j in reports[0].classes},
            "failures": [
                {"class": list(cls), "step": k} for rep in reports for cls, k in rep.failures
            ],
        }
        if not doc["conserved"]:
            status = CHECK_FAILED
    _emit(doc)
    return status


def cmd_builder(args) -> int:
    spec = _spec(args)
    builder = build(spec)
    _emit(
        {
            "graph": graph_to_json_dict(builder.graph),
            "reference_matching": sorted(builder.m0),
            "mutation_faces": [list(grp) for grp in builder.mutation_faces],
            "sigma": {str(k): v for k, v in sorted(builder.sigma.items())},
            "phase_index_of_label": {
                str(k): v for k, v in sorted(builder.pair_of_label.items())
            },
        }
    )
    return 0


def cmd_hard_particles(args) -> int:
    spec = _spec(args)
    builder = build(spec)
    cg = extract_conflict_graph(builder.graph, builder.weights, builder.m0)
    report = verify_hard_particle_identity(builder)
    doc = conflict_graph_json_dict(cg)
    doc["partitions"] = {
        str(k): hard_particle_partition(cg, k).canonical_str() for k in range(report.max_class + 1)
    }
    doc["identity"] = {"status": report.status, "diagnostic": report.diagnostic}
    _emit(doc)
    return 0 if report.verified else CHECK_FAILED


def cmd_poisson_commute(args) -> int:
    spec = _spec(args)
    builder = build(spec)
    ps = poisson_from_cartan(spec)
    table = builder.hamiltonians()
    rep = commutation_check(table, ps, conjecture_only=spec.type == "B")
    n = len(rep.classes)
    matrix = [[True] * n for _ in range(n)]
    for (i, j), _s in rep.nonvanishing.items():
        matrix[i][j] = matrix[j][i] = False
    _emit(
        {
            "classes": [list(c) for c in rep.classes],
            "commute": matrix,
            "all_commute": rep.all_commute,
            "nonzero_brackets": {f"{i},{j}": s for (i, j), s in sorted(rep.nonvanishing.items())},
            "status": (
                "conjecture evidence" if rep.conjecture_only and rep.all_commute else
                "verified theorem instance" if rep.all_commute else "failed"
            ),
        }
    )
    return 0 if rep.all_commute else CHECK_FAILED


def cmd_casimirs(args) -> int:
    spec = _spec(args)
    builder = build(spec)
    ps = poisson_from_cartan(spec)
    rep = casimir_check(builder.graph, builder.weights, ps)
    _emit(
        {
            "zigzag_count": rep.zigzag_count,
            "product_is_one": rep.product_is_one,
            "central": rep.central,
            "nonzero_brackets": [list(x) for x in rep.nonzero_brackets],
        }
    )
    return 0 if rep.verified else CHECK_FAILED


def cmd_move_invariance(args) -> int:
    g = _load_graph(args.graph)
    m0 = _reference_matching(g, args)
    label = args.face
    if label not in g.faces:
        try:
            label = int(args.face)
        except ValueError:
            pass
    rep = check_move_invariance(g, symbolic_weights(g), m0, label)
    _emit({"status": rep.status, "diagnostic": rep.diagnostic})
    return 0 if rep.status in ("verified", "skipped") else CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdimer",
        description="Exact dimer dynamics on bipartite torus graphs and Q-system conserved quantities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structural checks on a graph JSON file")
    p.add_argument("graph")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("quiver", help="signed face-adjacency matrix of a graph")
    p.add_argument("graph")
    p.set_defaults(func=cmd_quiver)

    p = sub.add_parser("matchings", help="enumerate perfect matchings")
    p.add_argument("graph")
    p.set_defaults(func=cmd_matchings)

    p = sub.add_parser("hamiltonians", help="homology-graded matching partition functions")
    p.add_argument("graph")
    p.add_argument("--reference", help="JSON file with the reference matching", default=None)
    p.set_defaults(func=cmd_hamiltonians)

    p = sub.add_parser("mutate", help="urban renewal plus shrinking at a face")
    p.add_argument("graph")
    p.add_argument("--face", required=True)
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("move-invariance", help="Hamiltonian invariance under one mutation")
    p.add_argument("graph")
    p.add_argument("--face", required=True)
    p.add_argument("--reference", default=None)
    p.set_defaults(func=cmd_move_invariance)

    p = sub.add_parser("qsystem", help="evolve a Q-system; optionally verify conservation")
    p.add_argument("--type", choices=("A", "B"), required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--initial", help="JSON initial state {\"Q\": {\"1,0\": \"1\", ...}}")
    p.add_argument("--check-conserved", action="store_true")
    p.add_argument("--symbolic", action="store_true", help="evolve Laurent polynomials")
    p.add_argument("--random-trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_qsystem)

    p = sub.add_parser("builder", help="emit a certified builder graph as JSON")
    p.add_argument("--type", choices=("A", "B"), required=True)
    p.add_argument("--rank", type=int, required=True)
    p.set_defaults(func=cmd_builder)

    p = sub.add_parser("hard-particles", help="conflict graph and partition functions")
    p.add_argument("--type", choices=("A", "B"), required=True)
    p.add_argument("--rank", type=int, required=True)
    p.set_defaults(func=cmd_hard_particles)

    p = sub.add_parser("poisson-commute", help="pairwise Hamiltonian brackets")
    p.add_argument("--type", choices=("A", "B"), required=True)
    p.add_argument("--rank", type=int, required=True)
    p.set_defaults(func=cmd_poisson_commute)

    p = sub.add_parser("casimirs", help="zig-zag loop weights and centrality")
    p.add_argument("--type", choices=("A", "B"), required=True)
    p.add_argument("--rank", type=int, required=True)
    p.set_defaults(func=cmd_casimirs)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except InputError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return USAGE_ERROR
    except BuilderDefect as exc:
        print(json.dumps({"error": f"builder defect: {exc}"}), file=sys.stderr)
        return CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
