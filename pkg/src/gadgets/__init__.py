from src.gadgets.base import Gadget
from src.gadgets.report import Claim, GadgetReport
from src.gadgets.nae import NaeGadget
from src.gadgets.ec import EcGadget
from src.gadgets.triangle import TriangleGadget
from src.gadgets.mu1 import Mu1Gadget
from src.gadgets.simple_inf import SimpleInfGadget

__all__ = ["Gadget", "Claim", "GadgetReport", "NaeGadget", "EcGadget", "TriangleGadget", "Mu1Gadget", "SimpleInfGadget"]
