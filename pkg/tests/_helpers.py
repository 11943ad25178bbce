from rfspin import Lattice, ModelParams
from rfspin.engines import ExactEnum


def single_site(beta=1.0, h=1.0):
    """Decoupled sites: ``J = 0`` on a 3-site ring is three independent single sites."""
    return ExactEnum(ModelParams(beta, h, J=0.0), Lattice(1, 3))
