import itertools
from typing import Dict, List, Optional, Set, Tuple

from src.config import DEFAULT_CONFIG, SolverConfig
from src.errors import PreconditionError
from src.gadgets.base import Gadget
from src.gadgets.mu1 import pair_name
from src.gadgets.report import GadgetReport
from src.presets import preset_query
from src.queries import RelationalStructure, canonical_database, enumerate_homomorphisms, make_structure

Fact = Tuple[str, ...]


def _query_witness(f: RelationalStructure) -> Optional[Dict[str, str]]:
    cq = preset_query("simple-inf").disjuncts[0]
    for h in enumerate_homomorphisms(canonical_database(cq), f, limit=1):
        return h
    return None


def _pair_facts(f: RelationalStructure, name: str, combine) -> Set[Fact]:
    facts = set(f.facts(name))
    arity = f.signature.arity(name)
    result = set()
    for pairs in itertools.product(itertools.product(f.domain, repeat=2), repeat=arity):
        left = tuple(p[0] for p in pairs)
        right = tuple(p[1] for p in pairs)
        if combine(left in facts, right in facts):
            result.add(tuple(pair_name(*p) for p in pairs))
    return result


def build_simple_inf_product(f: RelationalStructure) -> Tuple[RelationalStructure, RelationalStructure]:
    """M: R by conjunction, S by disjunction. N: R by disjunction, S by conjunction."""
    witness = _query_witness(f)
    if witness is not None:
        raise PreconditionError("Model satisfies the query", witness=witness)
    domain = [pair_name(x, y) for x, y in itertools.product(f.domain, repeat=2)]

    def both(a: bool, b: bool) -> bool:
        return a and b

    def either(a: bool, b: bool) -> bool:
        return a or b

    m_facts: Dict[str, List[Fact]] = {
        "R": sorted(_pair_facts(f, "R", both)),
        "S": sorted(_pair_facts(f, "S", either)),
    }
    n_facts: Dict[str, List[Fact]] = {
        "R": sorted(_pair_facts(f, "R", either)),
        "S": sorted(_pair_facts(f, "S", both)),
    }
    return make_structure(domain, m_facts, f.signature), make_structure(domain, n_facts, f.signature)


def verify_simple_inf_polymorphism(f: Optional[RelationalStructure] = None) -> GadgetReport:
    f = f if f is not None else simple_inf_sample_model()
    report = GadgetReport("simple-inf")
    product_m, product_n = build_simple_inf_product(f)
    for label, structure in (("M", product_m), ("N", product_n)):
        witness = _query_witness(structure)
        report.check(f"{label}-avoids-query", witness is None, witness)

    def cost(holds: bool) -> int:
        return 0 if holds else 1

    for name in ("R", "S"):
        arity = f.signature.arity(name)
        for pairs in itertools.product(itertools.product(f.domain, repeat=2), repeat=arity):
            left = tuple(p[0] for p in pairs)
            right = tuple(p[1] for p in pairs)
            names = tuple(pair_name(*p) for p in pairs)
            product_cost = cost(product_m.holds(name, names)) + cost(product_n.holds(name, names))
            model_cost = cost(f.holds(name, left)) + cost(f.holds(name, right))
            report.check(
                f"{name}{names}",
                product_cost == model_cost,
                {"tuple": list(names), "product": product_cost, "model": model_cost},
            )
    return report


def simple_inf_sample_model() -> RelationalStructure:
    return make_structure(
        ["0", "1"],
        {"R": [("0", "1"), ("1", "1")], "S": [("0", "0", "1"), ("1", "0", "0"), ("0", "0", "0")]},
        preset_query("simple-inf").signature,
    )


@Gadget.register("simple-inf")
class SimpleInfGadget(Gadget):
    def get_description(self) -> str:
        return "binary product (M, N) for R(x,y), S(x,y,z) improves Gamma(f) with equality"

    def __call__(
        self, model: Optional[RelationalStructure] = None, config: SolverConfig = DEFAULT_CONFIG
    ) -> GadgetReport:
        return verify_simple_inf_polymorphism(model)
