from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class Claim:
    name: str
    passed: bool
    witness: Optional[Any] = None


@dataclass
class GadgetReport:
    gadget: str
    claims: List[Claim] = field(default_factory=list)

    def check(self, name: str, passed: bool, witness: Any) -> bool:
        """Records a claim; the witness is kept only when the claim fails."""
        assert passed or witness is not None, f"failing claim {name} needs a witness"
        self.claims.append(Claim(name, passed, None if passed else witness))
        return passed

    def extend(self, other: "GadgetReport") -> None:
        self.claims.extend(other.claims)

    @property
    def passed(self) -> bool:
        return all(claim.passed for claim in self.claims)

    def failures(self) -> List[Claim]:
        return [claim for claim in self.claims if not claim.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gadget": self.gadget,
            "passed": self.passed,
            "claims": len(self.claims),
            "failures": [{"claim": c.name, "witness": c.witness} for c in self.failures()],
        }
