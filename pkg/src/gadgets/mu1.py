import itertools
from typing import Dict, Iterator, List, Optional, Set, Tuple

from src.config import DEFAULT_CONFIG, SolverConfig
from src.errors import PreconditionError
from src.gadgets.base import Gadget
from src.gadgets.report import GadgetReport
from src.presets import preset_query
from src.queries import RelationalStructure, canonical_database, enumerate_homomorphisms, make_structure

Pair = Tuple[str, str]


def pair_name(x: str, y: str) -> str:
    return f"({x},{y})"


class _Model:
    def __init__(self, f: RelationalStructure):
        self.f = f
        self.s = {t[0] for t in f.facts("S")}
        self.r = set(f.facts("R"))

    def in_s(self, x: str) -> bool:
        return x in self.s

    def in_r(self, x: str, y: str) -> bool:
        return (x, y) in self.r


def _precondition_violation(f: RelationalStructure) -> Optional[Tuple[str, object]]:
    m = _Model(f)
    cq = preset_query("mu1").disjuncts[0]
    for h in enumerate_homomorphisms(canonical_database(cq), f, limit=1):
        return "model satisfies the query", h
    for x in f.domain:
        if m.in_s(x) and m.in_r(x, x):
            return "S(x) and R(x,x)", x
    for x, y in itertools.permutations(f.domain, 2):
        if not (m.in_r(x, y) or m.in_r(y, x)):
            return "no R-edge between distinct elements", [x, y]
        if not ((m.in_r(x, y) and m.in_r(y, x)) or (m.in_s(x) and m.in_r(y, y)) or (m.in_r(x, x) and m.in_s(y))):
            return "pair violates the double-edge sentence", [x, y]
    return None


def check_mu1_preconditions(f: RelationalStructure) -> None:
    violation = _precondition_violation(f)
    if violation is not None:
        message, witness = violation
        raise PreconditionError(f"Model does not meet the product preconditions: {message}", witness=witness)


def _key_case(m: _Model, x1: str, y1: str, x2: str, y2: str) -> bool:
    a = m.in_s(x1) and m.in_r(x1, x2) and m.in_r(x2, x2) and m.in_r(y2, y2) and m.in_r(y2, y1) and m.in_s(y1)
    b = m.in_r(x1, x1) and m.in_r(x1, x2) and m.in_s(x2) and y1 == y2 and m.in_r(y1, y2)
    c = m.in_s(y1) and m.in_r(y1, y2) and m.in_r(y2, y2) and m.in_r(x2, x2) and m.in_r(x2, x1) and m.in_s(x1)
    d = m.in_r(y1, y1) and m.in_r(y1, y2) and m.in_s(y2) and x1 == x2 and m.in_r(x1, x2)
    return a or b or c or d


def _double_holds(s: Set[str], r: Set[Pair], p: str, q: str) -> bool:
    return ((p, q) in r and (q, p) in r) or (p in s and (q, q) in r) or ((p, p) in r and q in s)


def _facts(s: Set[str], r: Set[Pair]) -> Dict[str, List[Tuple[str, ...]]]:
    return {"S": [(e,) for e in sorted(s)], "R": sorted(r)}


def build_mu1_product(f: RelationalStructure) -> Tuple[RelationalStructure, RelationalStructure]:
    """M and N on f^2: R is preserved coordinatewise, M takes S as a disjunction, N takes R-loops as one."""
    check_mu1_preconditions(f)
    m = _Model(f)
    pairs = list(itertools.product(f.domain, repeat=2))
    name = {p: pair_name(*p) for p in pairs}
    s_m = {name[(x, y)] for x, y in pairs if m.in_s(x) or m.in_s(y)}
    s_n = {name[(x, y)] for x, y in pairs if m.in_s(x) and m.in_s(y)}
    r_m: Set[Pair] = set()
    r_n: Set[Pair] = set()
    for (x1, y1), (x2, y2) in itertools.product(pairs, repeat=2):
        if m.in_r(x1, x2) and m.in_r(y1, y2):
            r_m.add((name[(x1, y1)], name[(x2, y2)]))
            r_n.add((name[(x1, y1)], name[(x2, y2)]))
    for x, y in pairs:
        if m.in_r(x, x) or m.in_r(y, y):
            r_n.add((name[(x, y)], name[(x, y)]))

    # both directions are the only way to repair a pair, so scan order does not change the result
    for first, second in itertools.combinations(pairs, 2):
        p, q = name[first], name[second]
        for s, r in ((s_m, r_m), (s_n, r_n)):
            if not _double_holds(s, r, p, q):
                r.add((p, q))
                r.add((q, p))

    for (x1, y1), (x2, y2) in itertools.product(pairs, repeat=2):
        if _key_case(m, x1, y1, x2, y2):
            r_m.add((name[(x1, y1)], name[(x2, y2)]))
            r_n.add((name[(x2, y2)], name[(x1, y1)]))

    domain = [name[p] for p in pairs]
    return (
        make_structure(domain, _facts(s_m, r_m), f.signature),
        make_structure(domain, _facts(s_n, r_n), f.signature),
    )


def check_product_claims(report: GadgetReport, label: str, structure: RelationalStructure) -> None:
    violation = _precondition_violation(structure)
    report.check(f"{label}-claims", violation is None, violation)


def verify_mu1_polymorphism(f: Optional[RelationalStructure] = None) -> GadgetReport:
    """Finite-level check that the product pair (M, N) improves S and R of Gamma(f)."""
    f = f if f is not None else mu1_sample_model()
    report = GadgetReport("mu1")
    product_m, product_n = build_mu1_product(f)
    check_product_claims(report, "M", product_m)
    check_product_claims(report, "N", product_n)
    m = _Model(f)

    def cost(holds: bool) -> int:
        return 0 if holds else 1

    for x, y in itertools.product(f.domain, repeat=2):
        p = pair_name(x, y)
        left = cost(product_m.holds("S", (p,))) + cost(product_n.holds("S", (p,)))
        right = cost(m.in_s(x)) + cost(m.in_s(y))
        report.check(f"S{(x, y)}", left == right, {"pair": [x, y], "left": left, "right": right})

    for (x1, y1), (x2, y2) in itertools.product(itertools.product(f.domain, repeat=2), repeat=2):
        p, q = pair_name(x1, y1), pair_name(x2, y2)
        left = cost(product_m.holds("R", (p, q))) + cost(product_n.holds("R", (p, q)))
        right = cost(m.in_r(x1, x2)) + cost(m.in_r(y1, y2))
        report.check(f"R{(p, q)}", left <= right, {"pairs": [p, q], "left": left, "right": right})
    return report


def mu1_sample_model() -> RelationalStructure:
    """Two S-elements, two R-loops and one plain element meeting all product preconditions."""
    both = [("s1", "s2"), ("r1", "r2")] + [("n", e) for e in ("s1", "s2", "r1", "r2")]
    edges = [("r1", "r1"), ("r2", "r2"), ("s1", "r1"), ("s1", "r2"), ("r1", "s2"), ("s2", "r2")]
    edges += both + [(b, a) for a, b in both]
    return make_structure(
        ["s1", "s2", "r1", "r2", "n"],
        {"S": [("s1",), ("s2",)], "R": edges},
        preset_query("mu1").signature,
    )


def mu1_models(max_elements: int = 3) -> Iterator[RelationalStructure]:
    """Every labeled model on 1..max_elements points meeting the product preconditions."""
    signature = preset_query("mu1").signature
    for n in range(1, max_elements + 1):
        domain = [str(i) for i in range(n)]
        cells = list(itertools.product(domain, repeat=2))
        for s_bits in itertools.product([False, True], repeat=n):
            s = [(e,) for e, bit in zip(domain, s_bits) if bit]
            for r_bits in itertools.product([False, True], repeat=len(cells)):
                r = [cell for cell, bit in zip(cells, r_bits) if bit]
                model = make_structure(domain, {"S": s, "R": r}, signature)
                if _precondition_violation(model) is None:
                    yield model


@Gadget.register("mu1")
class Mu1Gadget(Gadget):
    def get_description(self) -> str:
        return "binary product (M, N) for S(x), R(x,y), R(y,x), R(y,y) improves Gamma(f)"

    def __call__(
        self, model: Optional[RelationalStructure] = None, config: SolverConfig = DEFAULT_CONFIG
    ) -> GadgetReport:
        return verify_mu1_polymorphism(model)

