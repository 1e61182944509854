"""Quantale-valued pseudometric liftings: coupling-based and codensity, and
the constructions that make them agree."""

from .correspondence import (Correspondence, Universe, VerifyReport, build_constant,
                             build_coproduct, build_distribution, build_from_grammar,
                             build_identity, build_powerset, build_product,
                             restrict_coproduct, restrict_product, verify)
from .errors import LiftCorrError
from .functor import Const, Coprod, Dist, FDist, Id, Inj, Pow, Prod
from .kernels import BACKEND
from .lifting import codensity_lift, coupling_lift
from .pseudometric import Pseudometric, enumerate_pseudometrics, nonexpansive_maps
from .quantale import (BoolQuantale, ChainQuantale, PowersetQuantale, TableQuantale,
                       UnitRationalQuantale, check_distributivity, check_laws)
from .transport import kantorovich_dual, kantorovich_primal

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BoolQuantale", "ChainQuantale", "Const", "Coprod", "Correspondence", "Dist",
    "FDist", "Id", "Inj", "LiftCorrError", "Pow", "PowersetQuantale", "Prod", "Pseudometric",
    "TableQuantale", "UnitRationalQuantale", "Universe", "VerifyReport", "build_constant",
    "build_coproduct", "build_distribution", "build_from_grammar", "build_identity",
    "build_powerset", "build_product", "check_distributivity", "check_laws", "codensity_lift",
    "coupling_lift", "enumerate_pseudometrics", "kantorovich_dual", "kantorovich_primal",
    "nonexpansive_maps", "restrict_coproduct", "restrict_product", "verify",
]
