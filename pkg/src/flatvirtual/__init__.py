"""Flat-virtual link diagrams, their Jones-type invariant, and the maps from
curves on the cylinder and torus."""

from .diagram import (
    UNKNOT,
    Classical,
    Diagram,
    Flat,
    Role,
    Visit,
    component_count,
    forget,
    parse_diagram,
    serialize_diagram,
    validate,
    writhe,
)
from .poly import Poly2
from .statesum import flat_virtual_jones, gamma, smooth, state_table

__version__ = "0.1.0"
