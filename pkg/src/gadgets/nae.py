import itertools
from typing import Optional

from src.config import DEFAULT_CONFIG, SolverConfig
from src.costs import INF, format_cost
from src.gadgets.base import Gadget
from src.gadgets.report import GadgetReport
from src.presets import LESS, gamma_less
from src.queries import RelationalStructure
from src.valued import TauExpression, apply_clone_operator, express

NAE = frozenset(t for t in itertools.product((0, 1), repeat=3) if len(set(t)) > 1)


def nae_expression() -> TauExpression:
    return TauExpression.from_atoms([(LESS, ["x", "y"]), (LESS, ["y", "z"]), (LESS, ["z", "x"])])


def verify_nae_gadget(config: SolverConfig = DEFAULT_CONFIG) -> GadgetReport:
    """Opt of the directed 3-cycle over max-cut is not-all-equal."""
    report = GadgetReport("nae")
    expressed = express(gamma_less(), nae_expression(), ["x", "y", "z"], config=config)
    relation = apply_clone_operator("opt", expressed)
    for t, value in relation.items():
        expected = 0 if t in NAE else INF
        report.check(
            f"nae{t}",
            value == expected,
            {"tuple": list(t), "opt": format_cost(value), "expressed": format_cost(expressed(t))},
        )
    return report


@Gadget.register("nae")
class NaeGadget(Gadget):
    def get_description(self) -> str:
        return "Opt(<(x,y) + <(y,z) + <(z,x)) over max-cut equals NAE"

    def __call__(
        self, model: Optional[RelationalStructure] = None, config: SolverConfig = DEFAULT_CONFIG
    ) -> GadgetReport:
        return verify_nae_gadget(config)
