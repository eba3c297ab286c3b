"""cptgen - Conditional probability tables for converging Bayesian networks

Generates CPTs from paired cause/effect observations (relative-frequency
counting, EM, least squares with probability repair, multinomial logit
extraction), evaluates them against test observations and compares CPTs.

Library use:
    from cptgen import load_observations, cpt_basis_least_squares, potential_surge

Command line:
    cptgen generate --method regress-surge --train obs.csv --out cpt.csv
"""

from .core.errors import CptError, InputError, NumericalError
from .generation.counting import EmConfig, em_cpt, mle_cpt
from .generation.extraction import extract_cpt
from .generation.logit import fit_multinomial_logit, logit_predict
from .generation.observations import ObservationSet
from .generation.regression import CptBasis, cpt_basis_least_squares
from .generation.repair import boundary_limitation, potential_surge, repair_basis
from .io.cpt_files import load_cpt, save_cpt
from .io.observations import ObservationSchema, dedup, load_observations, save_observations
from .metrics.report import GoodnessReport, evaluate_cpt
from .probability.tables import Cpt, predict_effects
from .probability.vectors import NodeSpec, ProbVector, combine, split_combined

__version__ = "0.1.0"

__all__ = [
    "CptError",
    "InputError",
    "NumericalError",
    "NodeSpec",
    "ProbVector",
    "combine",
    "split_combined",
    "Cpt",
    "predict_effects",
    "ObservationSet",
    "CptBasis",
    "cpt_basis_least_squares",
    "boundary_limitation",
    "potential_surge",
    "repair_basis",
    "EmConfig",
    "mle_cpt",
    "em_cpt",
    "fit_multinomial_logit",
    "logit_predict",
    "extract_cpt",
    "GoodnessReport",
    "evaluate_cpt",
    "ObservationSchema",
    "load_observations",
    "save_observations",
    "dedup",
    "load_cpt",
    "save_cpt",
]
