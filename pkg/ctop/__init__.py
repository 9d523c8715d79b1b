from .core import Orderer, solve
from . import solvers
