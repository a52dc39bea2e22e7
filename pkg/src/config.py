import json
from dataclasses import dataclass, fields

from src.errors import InputFormatError


@dataclass(frozen=True)
class SolverConfig:
    operation_cap: int = 70000
    brute_force_cap: int = 24
    exact_lp_max_variables: int = 2000
    lp_tolerance: float = 1e-7
    type_candidate_cap: int = 200000
    type_variable_cap: int = 4096
    elimination_cell_cap: int = 50000000
    component_choice_cap: int = 64
    log_level: str = "INFO"

    @classmethod
    def load(cls, path: str) -> "SolverConfig":
        with open(path, "r") as r:
            content = json.load(r)
        known = {f.name for f in fields(cls)}
        unknown = set(content) - known
        if unknown:
            raise InputFormatError(f"Unknown config keys: {sorted(unknown)}")
        return cls(**content)


DEFAULT_CONFIG = SolverConfig()
