"""Mixtures of activated simplices: simplex-constrained dictionary learning on the unit sphere."""

__version__ = "0.1.0"

from .errors import AsxError  # noqa: E402,F401
from .model import (BasisSet, CoefficientVector, DataSet, DirichletParams,  # noqa: E402,F401
                    Simplex, SimplicialModel, load_model, save_model)
