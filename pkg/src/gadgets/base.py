from abc import ABC, abstractmethod
from typing import Optional

from src.config import DEFAULT_CONFIG, SolverConfig
from src.gadgets.report import GadgetReport
from src.queries import RelationalStructure
from src.registrable import Registrable


class Gadget(ABC, Registrable):
    @abstractmethod
    def __call__(
        self, model: Optional[RelationalStructure] = None, config: SolverConfig = DEFAULT_CONFIG
    ) -> GadgetReport:
        raise NotImplementedError()

    @abstractmethod
    def get_description(self) -> str:
        raise NotImplementedError()
