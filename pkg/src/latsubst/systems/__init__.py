"""Built-in systems, patch generation and file formats."""
from .bundle import SystemBundle, generate_patch, validate_system
from .chair import chair2d, chair_nd
from .io import (descriptions_to_dict, dump_system, load_descriptions, load_system, resolve,
                 system_to_dict)
from .sphinx import sphinx
from .symbolic import SymbolicSubstitution, from_symbolic, parse_rules
