"""Secure quantum network coding built from classical linear network codes over finite fields."""
from __future__ import annotations

from .gf import FieldCtx, get_field
from .netmodel import BaseNetwork, CodeSpec, EdgeSets, ExtendedNetwork, extend, load_network
from .codec import analyze, compute_m0, transfer_matrices
from .catalog import load_builtin
from .protocol import run, sweep

__all__ = ["FieldCtx", "get_field", "BaseNetwork", "CodeSpec", "EdgeSets", "ExtendedNetwork", "extend",
           "load_network", "analyze", "compute_m0", "transfer_matrices", "load_builtin", "run", "sweep"]
__version__ = "0.1.0"
