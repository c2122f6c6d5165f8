"""Quaternionic surface calculus on grids: conformal immersions, spin
transformations, isothermic surfaces and Bonnet pairs."""

__version__ = "0.1.0"

from .quat import ImQuaternion, Quaternion  # noqa: E402
from .grid import Form1, Form2Q, Grid, QuatField  # noqa: E402
from .surface import SurfaceJet, build_jet  # noqa: E402
from .isothermic import IsothermicSeed, make_seed  # noqa: E402
from .bonnet import BonnetBundle, construct_pair, recover_isothermic, recover_lambda  # noqa: E402

__all__ = [
    "Quaternion", "ImQuaternion", "Grid", "QuatField", "Form1", "Form2Q", "SurfaceJet",
    "build_jet", "IsothermicSeed", "make_seed", "BonnetBundle", "construct_pair",
    "recover_lambda", "recover_isothermic",
]
