import itertools
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF, Cost, format_cost
from src.errors import PreconditionError
from src.gadgets.base import Gadget
from src.gadgets.report import GadgetReport
from src.presets import preset_query
from src.queries import (
    RelationalStructure,
    canonical_database,
    enumerate_homomorphisms,
    make_structure,
)
from src.valued import (
    TauExpression,
    ValuedRelation,
    ValuedStructure,
    apply_clone_operator,
    dual_to_valued,
    express,
    minimum,
)

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]

PHI_VARIABLES = tuple("abcdefghi")
# (relation, first, second, copies) in order; odd positions hold in one optimal pattern, even in the other
FIRST_GROUP = (
    ("R", "a", "b", 1),
    ("S", "b", "c", 2),
    ("T", "c", "d", 2),
    ("R", "d", "e", 2),
    ("S", "e", "f", 2),
    ("T", "f", "g", 2),
    ("R", "g", "h", 2),
    ("S", "h", "i", 1),
)
SECOND_GROUP = (
    ("T", "i", "g"),
    ("S", "h", "f"),
    ("R", "g", "e"),
    ("T", "f", "d"),
    ("S", "e", "c"),
    ("R", "d", "b"),
    ("T", "c", "a"),
)
PHI_COST = 7
OIT = frozenset({(0, 0, 1), (0, 1, 0), (1, 0, 0)})

OPT_SUFFIX = "*"
COMPLEMENT_PREFIX = "not"

# name -> (second pinned pair of phi, relation read on it, True when the two pairs must agree)
EXPRESSED = {
    "RT": (("f", "g"), "T", False),
    "RS": (("h", "i"), "S", False),
    "RS~": (("e", "f"), "S", True),
}

ONE: Pair = ("u1", "v1")
ZERO: Pair = ("u0", "v0")

# pinned pairs of every phi witness materialized in the witness model
WITNESSES: Tuple[Tuple[str, str, Pair, Pair], ...] = (
    ("g1", "RS", ZERO, ("y1", "z1")),
    ("g2", "RT", ZERO, ("z1", "x1")),
    ("g3", "RS", ONE, ("w1", "t1")),
    ("g4", "RS~", ("x1", "y1"), ("w1", "t1")),
    ("g5", "RS", ONE, ("y2", "z2")),
    ("g6", "RT", ZERO, ("z2", "x2")),
    ("g7", "RS", ZERO, ("w2", "t2")),
    ("g8", "RS~", ("x2", "y2"), ("w2", "t2")),
    ("g9", "RS", ZERO, ("y2", "z3")),
    ("g10", "RT", ONE, ("z3", "x2")),
)
BASE_FACTS: Dict[str, List[Pair]] = {
    "R": [ONE, ("x2", "y2")],
    "S": [("y1", "z1"), ("y2", "z3"), ("w2", "t2")],
    "T": [("z1", "x1"), ("z2", "x2")],
}
BASE_ELEMENTS = ("u1", "v1", "u0", "v0", "x1", "y1", "z1", "w1", "t1", "x2", "y2", "z2", "z3", "w2", "t2")


def phi_expression(rename: Optional[Dict[str, str]] = None, prefix: str = "") -> TauExpression:
    rename = rename or {}

    def var(v: str) -> str:
        return rename.get(v, prefix + v)

    atoms = []
    for name, x, y, copies in FIRST_GROUP:
        atoms.extend([(name, [var(x), var(y)])] * copies)
    for name, x, y in SECOND_GROUP:
        atoms.append((name + OPT_SUFFIX, [var(x), var(y)]))
    return TauExpression.from_atoms(atoms)


def _add_witness(facts: Dict[str, Set[Pair]], tag: str, kind: str, first: Pair, second: Pair) -> None:
    positions, _, _ = EXPRESSED[kind]
    pinned = {"a": first[0], "b": first[1], positions[0]: second[0], positions[1]: second[1]}
    assignment = {v: pinned.get(v, f"{tag}.{v}") for v in PHI_VARIABLES}
    odd = first in facts["R"]
    for position, (name, x, y, _) in enumerate(FIRST_GROUP, start=1):
        holds = (position % 2 == 1) == odd
        pair = (assignment[x], assignment[y])
        if x in pinned and y in pinned:
            assert (pair in facts[name]) == holds, f"{tag}: {name}{pair} contradicts the {kind} pattern"
        elif holds:
            facts[name].add(pair)
    for name, x, y in SECOND_GROUP:
        assert not (x in pinned and y in pinned)
        facts[name].add((assignment[x], assignment[y]))


def build_triangle_witness_model() -> RelationalStructure:
    """
    A finite triangle-free {R,S,T}-structure holding, for every designated pinning of phi, an
    assignment of cost 7 on fresh elements. The pinned pairs realize M on the three OIT encodings.
    """
    facts: Dict[str, Set[Pair]] = {name: set(pairs) for name, pairs in BASE_FACTS.items()}
    domain = list(BASE_ELEMENTS)
    for tag, kind, first, second in WITNESSES:
        _add_witness(facts, tag, kind, first, second)
        domain.extend(f"{tag}.{v}" for v in PHI_VARIABLES if v not in ("a", "b") + EXPRESSED[kind][0])
    return make_structure(domain, {name: sorted(pairs) for name, pairs in facts.items()})


def triangle_gamma(model: RelationalStructure) -> ValuedStructure:
    """Gamma(model, {}) with Opt of each relation and its crisp complement."""
    gamma = dual_to_valued(model)
    extra = {}
    for name in ("R", "S", "T"):
        relation = gamma.relation(name)
        extra[name + OPT_SUFFIX] = apply_clone_operator("opt", relation)
        extra[COMPLEMENT_PREFIX + name] = ValuedRelation(
            relation.arity, relation.size, tuple(Fraction(0) if v != 0 else INF for v in relation.values)
        )
    return gamma.with_relations(extra)


def _check_model(model: RelationalStructure) -> None:
    mu = preset_query("triangle")
    for name in ("R", "S", "T"):
        if name not in model.signature or model.signature.arity(name) != 2:
            raise PreconditionError(f"Model needs a binary relation {name}")
        if not model.facts(name):
            raise PreconditionError(f"Relation {name} of the model is empty")
    for h in enumerate_homomorphisms(canonical_database(mu.disjuncts[0]), model, limit=1):
        raise PreconditionError("Model satisfies the triangle query", witness=h)


def phi_packing(copies: int = PHI_COST) -> Optional[List[Tuple[str, str, str]]]:
    """Disjoint triangle images in phi, counting each doubled soft atom as two resources."""
    soft: Dict[Tuple[str, Pair], int] = {}
    relations: Dict[str, Set[Pair]] = {"R": set(), "S": set(), "T": set()}
    for name, x, y, count in FIRST_GROUP:
        soft[(name, (x, y))] = soft.get((name, (x, y)), 0) + count
        relations[name].add((x, y))
    for name, x, y in SECOND_GROUP:
        relations[name].add((x, y))
    structure = make_structure(PHI_VARIABLES, {n: sorted(p) for n, p in relations.items()})
    cq = preset_query("triangle").disjuncts[0]
    images = []
    for h in enumerate_homomorphisms(canonical_database(cq), structure):
        used = [
            (atom.relation, (h[cq.variables[atom.args[0]]], h[cq.variables[atom.args[1]]])) for atom in cq.atoms
        ]
        resources = [fact for fact in used if fact in soft]
        if resources:
            images.append((tuple(h[v] for v in cq.variables), resources))

    def pack(start: int, left: Dict[Tuple[str, Pair], int], chosen: List[Tuple[str, ...]]) -> bool:
        if len(chosen) == copies:
            return True
        for k in range(start, len(images)):
            triangle, resources = images[k]
            if all(left[r] > 0 for r in resources):
                for r in resources:
                    left[r] -= 1
                chosen.append(triangle)
                if pack(k + 1, left, chosen):
                    return True
                chosen.pop()
                for r in resources:
                    left[r] += 1
        return False

    chosen: List[Tuple[str, ...]] = []
    if pack(0, dict(soft), chosen):
        return [tuple(t) for t in chosen]  # type: ignore
    return None


def _pattern_atoms(pairs: Sequence[Tuple[str, Pair]], holds: Sequence[bool]) -> TauExpression:
    atoms = []
    for (name, pair), value in zip(pairs, holds):
        atoms.append((name + OPT_SUFFIX if value else COMPLEMENT_PREFIX + name, list(pair)))
    return TauExpression.from_atoms(atoms)


def _forbidden(agree: bool) -> List[Tuple[bool, bool]]:
    return [(True, False), (False, True)] if agree else [(True, True), (False, False)]


def _crisp_table(
    gamma: ValuedStructure,
    expr: TauExpression,
    free: List[str],
    fixed: Dict[str, int],
    optimum: int,
    config: SolverConfig,
) -> ValuedRelation:
    relation = express(gamma, expr, free, fixed, config)
    values = tuple(Fraction(0) if v == optimum else INF for v in relation.values)
    return ValuedRelation(relation.arity, relation.size, values)


def _m_inner(
    gamma: ValuedStructure, encodings: Sequence[Pair], config: SolverConfig
) -> Cost:
    """Minimum of R(x,y)+S(y,z)+T(z,x)+RR(e1,x,y)+RS(e2,y,z)+RT(e3,z,x) with the encodings pinned."""
    index = {e: i for i, e in enumerate(gamma.domain)}
    e1, e2, e3 = encodings
    rr = _crisp_table(
        gamma,
        phi_expression({"h": "p", "i": "q"}, "l.") + phi_expression({"a": "x", "b": "y", "e": "p", "f": "q"}, "r."),
        ["x", "y"],
        {"l.a": index[e1[0]], "l.b": index[e1[1]]},
        2 * PHI_COST,
        config,
    )
    rs = _crisp_table(gamma, phi_expression(), ["h", "i"], {"a": index[e2[0]], "b": index[e2[1]]}, PHI_COST, config)
    rt = _crisp_table(gamma, phi_expression(), ["f", "g"], {"a": index[e3[0]], "b": index[e3[1]]}, PHI_COST, config)
    inner = gamma.with_relations({"RR": rr, "RS": rs, "RT": rt})
    expr = TauExpression.from_atoms(
        [
            ("R", ["x", "y"]),
            ("S", ["y", "z"]),
            ("T", ["z", "x"]),
            ("RR", ["x", "y"]),
            ("RS", ["y", "z"]),
            ("RT", ["z", "x"]),
        ]
    )
    return minimum(inner, expr, config=config)


def _default_encodings(model: RelationalStructure) -> Tuple[Pair, Pair]:
    one = sorted(model.facts("R"))[0]
    for pair in itertools.product(model.domain, repeat=2):
        if pair[0] != pair[1] and pair not in model.facts("R"):
            return (one[0], one[1]), (pair[0], pair[1])
    raise PreconditionError("Model has no pair of distinct elements outside R")


def verify_triangle_gadget(
    model: Optional[RelationalStructure] = None,
    one: Optional[Pair] = None,
    zero: Optional[Pair] = None,
    config: SolverConfig = DEFAULT_CONFIG,
) -> GadgetReport:
    report = GadgetReport("triangle")
    designated = model is None
    if model is None:
        model = build_triangle_witness_model()
        one, zero = ONE, ZERO
    _check_model(model)
    if one is None or zero is None:
        one, zero = _default_encodings(model)
    if one not in model.facts("R") or zero in model.facts("R"):
        raise PreconditionError("Encoding pairs must be one R-pair and one non-R pair", witness=[one, zero])
    gamma = triangle_gamma(model)
    index = {e: i for i, e in enumerate(gamma.domain)}
    phi = phi_expression()

    packing = phi_packing()
    report.check("phi-packing", packing is not None, "fewer than 7 disjoint triangles in phi")

    best = minimum(gamma, phi, config=config)
    report.check("phi-minimum", best == PHI_COST, {"minimum": format_cost(best)})

    for name, (positions, symbol, agree) in EXPRESSED.items():
        pairs = [("R", ("a", "b")), (symbol, positions)]
        for holds in _forbidden(agree):
            value = minimum(gamma, phi + _pattern_atoms(pairs, holds), config=config)
            report.check(f"{name}-forward{holds}", value > PHI_COST, {"minimum": format_cost(value)})

    both = phi_expression({"h": "p", "i": "q"}, "l.") + phi_expression({"e": "p", "f": "q"}, "r.")
    for holds in _forbidden(False):
        pattern = _pattern_atoms([("R", ("l.a", "l.b")), ("R", ("r.a", "r.b"))], holds)
        value = minimum(gamma, both + pattern, config=config)
        report.check(f"RR-forward{holds}", value > 2 * PHI_COST, {"minimum": format_cost(value)})

    if designated:
        for tag, kind, first, second in WITNESSES:
            positions = EXPRESSED[kind][0]
            fixed = {"a": first[0], "b": first[1], positions[0]: second[0], positions[1]: second[1]}
            value = minimum(gamma, phi, {v: index[e] for v, e in fixed.items()}, config)
            report.check(f"witness-{tag}", value == PHI_COST, {"pinned": fixed, "minimum": format_cost(value)})

    encode = {1: one, 0: zero}
    for bits in itertools.product((0, 1), repeat=3):
        inner = _m_inner(gamma, [encode[b] for b in bits], config)
        expected = bits in OIT
        report.check(f"M{bits}", (inner == 1) == expected, {"bits": list(bits), "inner": format_cost(inner)})
        logger.debug("M%s inner minimum %s", bits, inner)
    return report


@Gadget.register("triangle")
class TriangleGadget(Gadget):
    def get_description(self) -> str:
        return "phi costs 7 and M restricted to R-encodings is one-in-three, for the triangle query"

    def __call__(
        self, model: Optional[RelationalStructure] = None, config: SolverConfig = DEFAULT_CONFIG
    ) -> GadgetReport:
        return verify_triangle_gadget(model, config=config)
