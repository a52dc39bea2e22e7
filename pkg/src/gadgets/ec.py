from typing import Optional

from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF, format_cost
from src.gadgets.base import Gadget
from src.gadgets.report import GadgetReport
from src.presets import gamma_lcc
from src.queries import RelationalStructure
from src.valued import TauExpression, apply_clone_operator, express


def ec_expression() -> TauExpression:
    return TauExpression.from_atoms(
        [("N", ["x", "z"]), ("N", ["x", "z"]), ("E", ["x", "y"]), ("E", ["y", "z"])]
    )


def verify_ec_gadget(n: int = 3, config: SolverConfig = DEFAULT_CONFIG) -> GadgetReport:
    """Over least correlation clustering: exactly one of x=y, y=z holds; Opt(N) is inequality."""
    report = GadgetReport("ec")
    gamma = gamma_lcc(n)
    expressed = express(gamma, ec_expression(), ["x", "y", "z"], config=config)
    relation = apply_clone_operator("opt", expressed)
    for t, value in relation.items():
        x, y, z = t
        inside = (x == y and y != z) or (x != y and y == z)
        report.check(f"ec{t}", value == (0 if inside else INF), {"tuple": list(t), "opt": format_cost(value)})
    unequal = apply_clone_operator("opt", gamma.relation("N"))
    for t, value in unequal.items():
        report.check(f"opt-n{t}", value == (0 if t[0] != t[1] else INF), {"tuple": list(t), "opt": format_cost(value)})
    return report


@Gadget.register("ec")
class EcGadget(Gadget):
    def get_description(self) -> str:
        return "Opt(2N(x,z) + E(x,y) + E(y,z)) over least correlation clustering"

    def __call__(
        self, model: Optional[RelationalStructure] = None, config: SolverConfig = DEFAULT_CONFIG
    ) -> GadgetReport:
        return verify_ec_gadget(config=config)
